// Shared test helpers: seeded circuit generators and the independent
// oracles (naive fixpoint simulator, brute-force SAT) the suites check the
// real implementations against.

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "uclock/cnf.hpp"
#include "uclock/netlist.hpp"

namespace uclock::test {

// Random combinational DAG; every gate reads already-defined signals, so
// the result is acyclic by construction.
inline Netlist random_circuit(int n_in, int n_gates, int n_out, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Netlist net;
    net.name = "rand" + std::to_string(seed);
    std::vector<std::string> sigs;
    for (int i = 0; i < n_in; ++i) {
        net.inputs.push_back("x" + std::to_string(i));
        sigs.push_back(net.inputs.back());
    }
    const GateKind kinds[] = {GateKind::And, GateKind::Or,   GateKind::Nand, GateKind::Nor,
                              GateKind::Xor, GateKind::Xnor, GateKind::Not};
    for (int g = 0; g < n_gates; ++g) {
        GateKind k = kinds[rng() % 7];
        std::string out = "g" + std::to_string(g);
        std::vector<std::string> ins;
        ins.push_back(sigs[rng() % sigs.size()]);
        if (gate_arity(k) == 2)
            ins.push_back(sigs[rng() % sigs.size()]);
        net.gates.push_back(Gate{out, k, ins});
        sigs.push_back(out);
    }
    for (int o = 0; o < n_out; ++o)
        net.outputs.push_back("g" + std::to_string(n_gates - 1 - (o % n_gates)));
    validate(net);
    return net;
}

// Random sequential circuit shaped like the mid-size ISCAS'89 entries.
inline Netlist random_sequential_circuit(int n_in, int n_gates, int n_out, int n_flops,
                                         std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Netlist net;
    net.name = "seq" + std::to_string(seed);
    std::vector<std::string> sigs;
    for (int i = 0; i < n_in; ++i) {
        net.inputs.push_back("x" + std::to_string(i));
        sigs.push_back(net.inputs.back());
    }
    for (int f = 0; f < n_flops; ++f) {
        net.flops.push_back(Flop{"q" + std::to_string(f), ""});
        sigs.push_back(net.flops[f].output);
    }
    const GateKind kinds[] = {GateKind::And, GateKind::Or,   GateKind::Nand, GateKind::Nor,
                              GateKind::Xor, GateKind::Xnor, GateKind::Not};
    for (int g = 0; g < n_gates; ++g) {
        GateKind k = kinds[rng() % 7];
        std::string out = "g" + std::to_string(g);
        std::vector<std::string> ins;
        ins.push_back(sigs[rng() % sigs.size()]);
        if (gate_arity(k) == 2)
            ins.push_back(sigs[rng() % sigs.size()]);
        net.gates.push_back(Gate{out, k, ins});
        sigs.push_back(out);
    }
    for (auto& f : net.flops)
        f.data = "g" + std::to_string(rng() % n_gates);
    for (int o = 0; o < n_out; ++o)
        net.outputs.push_back("g" + std::to_string(n_gates - 1 - (o % n_gates)));
    validate(net);
    return net;
}

// Order-insensitive reference evaluator: iterates the gate list until no
// value changes. Independent of topo_order and Simulator.
inline std::map<std::string, bool> naive_eval(const Netlist& net, const InputVector& pi,
                                              const FlopState& state = {})
{
    std::map<std::string, bool> values;
    for (std::size_t i = 0; i < net.inputs.size(); ++i)
        values[net.inputs[i]] = pi[i];
    for (const auto& f : net.flops)
        values[f.output] = state.at(f.output);

    for (std::size_t round = 0; round <= net.gates.size() + 1; ++round) {
        bool changed = false;
        for (const auto& g : net.gates) {
            bool ready = true;
            std::vector<bool> in;
            for (const auto& s : g.inputs) {
                auto it = values.find(s);
                if (it == values.end()) {
                    ready = false;
                    break;
                }
                in.push_back(it->second);
            }
            if (!ready)
                continue;
            bool v = eval_gate(g.kind, in);
            auto it = values.find(g.output);
            if (it == values.end() || it->second != v) {
                values[g.output] = v;
                changed = true;
            }
        }
        if (!changed)
            break;
    }
    return values;
}

// Exhaustive SAT check, bit-parallel over blocks of 64 assignments.
// Returns true plus a model when satisfiable. Only sensible for <= ~26 vars.
inline bool brute_force_sat(const CnfFormula& f, std::vector<bool>* model_out = nullptr)
{
    int n = f.num_vars;
    std::uint64_t total = n >= 6 ? (std::uint64_t{1} << (n - 6)) : 1;
    for (std::uint64_t block = 0; block < total; ++block) {
        std::uint64_t sat_mask = ~std::uint64_t{0};
        if (n < 6)
            sat_mask = (std::uint64_t{1} << (std::uint64_t{1} << n)) - 1;
        for (const auto& clause : f.clauses) {
            std::uint64_t clause_mask = 0;
            for (int lit : clause) {
                int v = std::abs(lit) - 1;
                std::uint64_t pattern;
                if (v < 6) {
                    static const std::uint64_t masks[6] = {
                        0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                        0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
                    pattern = masks[v];
                } else {
                    pattern = ((block >> (v - 6)) & 1) ? ~std::uint64_t{0} : 0;
                }
                clause_mask |= lit > 0 ? pattern : ~pattern;
            }
            sat_mask &= clause_mask;
            if (!sat_mask)
                break;
        }
        if (sat_mask) {
            if (model_out) {
                int bit = 0;
                while (!((sat_mask >> bit) & 1))
                    ++bit;
                model_out->assign(static_cast<std::size_t>(n) + 1, false);
                for (int v = 0; v < n; ++v) {
                    bool value = v < 6 ? ((bit >> v) & 1) : ((block >> (v - 6)) & 1);
                    (*model_out)[static_cast<std::size_t>(v) + 1] = value;
                }
            }
            return true;
        }
    }
    return false;
}

// Random k-CNF generator used by the solver-agreement suites.
inline CnfFormula random_cnf(int num_vars, int num_clauses, int width, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    CnfBuilder builder;
    for (int v = 0; v < num_vars; ++v)
        builder.fresh_var();
    for (int c = 0; c < num_clauses; ++c) {
        std::vector<int> lits;
        while (static_cast<int>(lits.size()) < width) {
            int v = 1 + static_cast<int>(rng() % num_vars);
            bool dup = false;
            for (int l : lits)
                if (std::abs(l) == v)
                    dup = true;
            if (!dup)
                lits.push_back((rng() & 1) ? v : -v);
        }
        builder.add_clause(lits);
    }
    return builder.take();
}

inline InputVector pattern_bits(std::uint64_t pattern, std::size_t n)
{
    InputVector v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (pattern >> i) & 1;
    return v;
}

} // namespace uclock::test
