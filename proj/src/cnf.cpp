#include "uclock/cnf.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace uclock {

int CnfFormula::var_of(const std::string& tag, const std::string& signal) const
{
    auto it = var_map.find(tag + ":" + signal);
    if (it == var_map.end())
        throw InternalError("no CNF variable for " + tag + ":" + signal);
    return it->second;
}

void CnfBuilder::add_clause(std::vector<int> lits)
{
    if (lits.empty())
        throw InternalError("CnfBuilder: empty clause");
    for (int lit : lits) {
        int v = lit > 0 ? lit : -lit;
        if (v < 1 || v > formula_.num_vars)
            throw InternalError("CnfBuilder: literal out of range");
    }
    formula_.clauses.push_back(std::move(lits));
}

int CnfBuilder::add_xor(int a, int b)
{
    int y = fresh_var();
    add_clause({-y, a, b});
    add_clause({-y, -a, -b});
    add_clause({y, -a, b});
    add_clause({y, a, -b});
    return y;
}

CnfBuilder::Encoded CnfBuilder::encode(const Netlist& net, const std::string& tag,
                                       const std::unordered_map<std::string, int>& bound)
{
    if (!net.is_combinational())
        throw InputError("tseitin: netlist must be combinational");

    std::unordered_map<std::string, int> var;
    auto var_for = [&](const std::string& sig) {
        auto it = var.find(sig);
        if (it != var.end())
            return it->second;
        auto pre = bound.find(sig);
        int v = pre != bound.end() ? pre->second : fresh_var();
        var.emplace(sig, v);
        formula_.var_map[tag + ":" + sig] = v;
        return v;
    };

    Encoded enc;
    for (const auto& s : net.inputs)
        enc.input_vars.push_back(var_for(s));

    for (const auto& g : net.gates) {
        int y = var_for(g.output);
        std::vector<int> in;
        for (const auto& s : g.inputs)
            in.push_back(var_for(s));
        switch (g.kind) {
        case GateKind::And:
            add_clause({-y, in[0]});
            add_clause({-y, in[1]});
            add_clause({y, -in[0], -in[1]});
            break;
        case GateKind::Or:
            add_clause({y, -in[0]});
            add_clause({y, -in[1]});
            add_clause({-y, in[0], in[1]});
            break;
        case GateKind::Nand:
            add_clause({y, in[0]});
            add_clause({y, in[1]});
            add_clause({-y, -in[0], -in[1]});
            break;
        case GateKind::Nor:
            add_clause({-y, -in[0]});
            add_clause({-y, -in[1]});
            add_clause({y, in[0], in[1]});
            break;
        case GateKind::Xor:
            add_clause({-y, in[0], in[1]});
            add_clause({-y, -in[0], -in[1]});
            add_clause({y, -in[0], in[1]});
            add_clause({y, in[0], -in[1]});
            break;
        case GateKind::Xnor:
            add_clause({y, in[0], in[1]});
            add_clause({y, -in[0], -in[1]});
            add_clause({-y, -in[0], in[1]});
            add_clause({-y, in[0], -in[1]});
            break;
        case GateKind::Not:
            add_clause({y, in[0]});
            add_clause({-y, -in[0]});
            break;
        case GateKind::Buf:
            add_clause({y, -in[0]});
            add_clause({-y, in[0]});
            break;
        case GateKind::Const0:
            add_unit(-y);
            break;
        case GateKind::Const1:
            add_unit(y);
            break;
        case GateKind::Mux2:
            // y = sel ? in2 : in1, minimal 4-clause form.
            add_clause({-in[0], -in[2], y});
            add_clause({-in[0], in[2], -y});
            add_clause({in[0], -in[1], y});
            add_clause({in[0], in[1], -y});
            break;
        }
    }

    for (const auto& o : net.outputs)
        enc.output_vars.push_back(var_for(o));
    return enc;
}

Netlist combinational_view(const Netlist& net)
{
    Netlist out = net;
    for (const auto& f : out.flops)
        out.inputs.push_back(f.output);
    out.flops.clear();
    return out;
}

CnfFormula tseitin_encode(const Netlist& net, const std::string& copy_tag)
{
    CnfBuilder builder;
    builder.encode(net, copy_tag);
    return builder.take();
}

namespace {

struct LockedSplit {
    std::vector<std::string> key; // keyinput0..L-1 in index order
    std::vector<std::string> data;
};

LockedSplit split_inputs(const LockedNetlist& locked)
{
    if (locked.key_bits == 0)
        throw InputError("miter: locked netlist has no key inputs");
    LockedSplit split;
    split.key.resize(locked.key_bits);
    for (const auto& s : locked.net.inputs) {
        if (s.rfind("keyinput", 0) == 0) {
            std::size_t idx = std::stoul(s.substr(8));
            split.key[idx] = s;
        } else {
            split.data.push_back(s);
        }
    }
    return split;
}

Miter build_miter(const LockedNetlist& locked, MiterMode mode, const Bitstream* key_a,
                  const Bitstream* key_b)
{
    if (!locked.net.is_combinational())
        throw InputError("miter: locked netlist must be combinational");
    LockedSplit split = split_inputs(locked);

    CnfBuilder builder;
    Miter miter;

    std::unordered_map<std::string, int> shared;
    for (const auto& s : split.data) {
        int v = builder.fresh_var();
        shared.emplace(s, v);
        miter.data_vars.push_back(v);
    }

    auto enc1 = builder.encode(locked.net, "a", shared);
    auto enc2 = builder.encode(locked.net, "b", shared);
    miter.out1_vars = enc1.output_vars;
    miter.out2_vars = enc2.output_vars;
    for (const auto& s : split.key) {
        miter.key1_vars.push_back(builder.formula().var_of("a", s));
        miter.key2_vars.push_back(builder.formula().var_of("b", s));
    }

    if (mode == MiterMode::Equiv) {
        if (!key_a || !key_b)
            throw InternalError("equiv miter needs two keys");
        if (static_cast<int>(key_a->bits.size()) != locked.key_bits ||
            static_cast<int>(key_b->bits.size()) != locked.key_bits)
            throw InputError("miter: key length does not match locked netlist");
        for (int i = 0; i < locked.key_bits; ++i) {
            builder.add_unit(key_a->bits[i] ? miter.key1_vars[i] : -miter.key1_vars[i]);
            builder.add_unit(key_b->bits[i] ? miter.key2_vars[i] : -miter.key2_vars[i]);
        }
    }

    std::vector<int> diff;
    for (std::size_t o = 0; o < miter.out1_vars.size(); ++o)
        diff.push_back(builder.add_xor(miter.out1_vars[o], miter.out2_vars[o]));
    builder.add_clause(diff);

    miter.formula = builder.take();
    return miter;
}

} // namespace

Miter build_attack_miter(const LockedNetlist& locked)
{
    return build_miter(locked, MiterMode::Attack, nullptr, nullptr);
}

Miter build_equiv_miter(const LockedNetlist& locked, const Bitstream& key_a,
                        const Bitstream& key_b)
{
    return build_miter(locked, MiterMode::Equiv, &key_a, &key_b);
}

CnfFormula build_difference_miter(const Netlist& a,
                                  const std::unordered_map<std::string, bool>& fix_a,
                                  const Netlist& b,
                                  const std::unordered_map<std::string, bool>& fix_b)
{
    if (!a.is_combinational() || !b.is_combinational())
        throw InputError("difference miter: both netlists must be combinational");
    if (a.outputs.size() != b.outputs.size())
        throw InputError("difference miter: output counts differ");

    std::vector<std::string> free_a, free_b;
    for (const auto& s : a.inputs)
        if (!fix_a.count(s))
            free_a.push_back(s);
    for (const auto& s : b.inputs)
        if (!fix_b.count(s))
            free_b.push_back(s);
    if (free_a.size() != free_b.size())
        throw InputError("difference miter: free input counts differ (" +
                         std::to_string(free_a.size()) + " vs " + std::to_string(free_b.size()) +
                         ")");

    CnfBuilder builder;
    std::unordered_map<std::string, int> bound_a, bound_b;
    for (std::size_t i = 0; i < free_a.size(); ++i) {
        int v = builder.fresh_var();
        bound_a.emplace(free_a[i], v);
        bound_b.emplace(free_b[i], v);
    }

    auto enc_a = builder.encode(a, "a", bound_a);
    auto enc_b = builder.encode(b, "b", bound_b);

    for (const auto& [sig, val] : fix_a) {
        int v = builder.formula().var_of("a", sig);
        builder.add_unit(val ? v : -v);
    }
    for (const auto& [sig, val] : fix_b) {
        int v = builder.formula().var_of("b", sig);
        builder.add_unit(val ? v : -v);
    }

    std::vector<int> diff;
    for (std::size_t o = 0; o < enc_a.output_vars.size(); ++o)
        diff.push_back(builder.add_xor(enc_a.output_vars[o], enc_b.output_vars[o]));
    builder.add_clause(diff);
    return builder.take();
}

void write_dimacs(const CnfFormula& f, std::ostream& out)
{
    out << "p cnf " << f.num_vars << " " << f.clauses.size() << "\n";
    for (const auto& clause : f.clauses) {
        for (int lit : clause)
            out << lit << " ";
        out << "0\n";
    }
}

void write_dimacs_file(const CnfFormula& f, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write DIMACS file: " + path);
    write_dimacs(f, out);
}

SolveResult read_solver_output(std::istream& in, int num_vars)
{
    SolveResult res;
    bool have_status = false;
    res.model.assign(static_cast<std::size_t>(num_vars) + 1, false);

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line[0] == 's') {
            if (line.find("UNSATISFIABLE") != std::string::npos)
                res.status = SolveStatus::Unsat;
            else if (line.find("SATISFIABLE") != std::string::npos)
                res.status = SolveStatus::Sat;
            else if (line.find("UNKNOWN") != std::string::npos ||
                     line.find("TIMEOUT") != std::string::npos)
                res.status = SolveStatus::Timeout;
            else
                throw InputError("external solver: unrecognized status line: " + line);
            have_status = true;
        } else if (line[0] == 'v') {
            std::istringstream vs(line.substr(1));
            long lit;
            while (vs >> lit) {
                if (lit == 0)
                    continue;
                long v = lit > 0 ? lit : -lit;
                if (v > num_vars)
                    throw InputError("external solver: variable out of range: " +
                                     std::to_string(v));
                res.model[static_cast<std::size_t>(v)] = lit > 0;
            }
        }
    }
    if (!have_status)
        throw InputError("external solver: no status line in output");
    return res;
}

bool model_satisfies(const CnfFormula& f, const std::vector<bool>& model)
{
    if (model.size() < static_cast<std::size_t>(f.num_vars) + 1)
        return false;
    for (const auto& clause : f.clauses) {
        bool sat = false;
        for (int lit : clause) {
            int v = lit > 0 ? lit : -lit;
            if (model[static_cast<std::size_t>(v)] == (lit > 0)) {
                sat = true;
                break;
            }
        }
        if (!sat)
            return false;
    }
    return true;
}

} // namespace uclock
