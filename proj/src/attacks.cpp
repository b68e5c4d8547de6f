#include "uclock/attacks.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace uclock {

namespace {

double now_seconds()
{
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

InputVector random_vector(std::mt19937_64& rng, std::size_t n)
{
    InputVector v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (rng() & 1) != 0;
    return v;
}

} // namespace

const char* attack_status_name(AttackStatus s)
{
    switch (s) {
    case AttackStatus::Broken: return "BROKEN";
    case AttackStatus::Timeout: return "TIMEOUT";
    case AttackStatus::Guess: return "GUESS";
    }
    return "?";
}

KeyCheck verify_key(const LockedNetlist& locked, const Bitstream& key, const Netlist& original,
                    const SolveOptions& solve_options)
{
    if (static_cast<int>(key.bits.size()) != locked.key_bits)
        throw InputError("verify_key: key length mismatch");
    LockedEval eval(locked);
    if (eval.num_data_inputs() != original.inputs.size())
        throw InputError("verify_key: data input count " +
                         std::to_string(eval.num_data_inputs()) + " vs original " +
                         std::to_string(original.inputs.size()));
    if (locked.net.outputs.size() != original.outputs.size())
        throw InputError("verify_key: output count mismatch");

    KeyCheck check;
    std::size_t n = eval.num_data_inputs();
    if (n <= 16) {
        check.method = VerifyMethod::Exhaustive;
        Simulator golden(original);
        for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << n); ++pattern) {
            InputVector data(n);
            for (std::size_t b = 0; b < n; ++b)
                data[b] = (pattern >> b) & 1;
            if (eval.eval(key, data) != golden.eval(data)) {
                check.ok = false;
                check.witness = data;
                return check;
            }
        }
        check.ok = true;
        return check;
    }

    check.method = VerifyMethod::Miter;
    std::unordered_map<std::string, bool> fix_key;
    for (int b = 0; b < locked.key_bits; ++b)
        fix_key.emplace("keyinput" + std::to_string(b), key.bits[b]);
    CnfFormula miter = build_difference_miter(locked.net, fix_key, original, {});
    SolveResult res = solve(miter, {}, solve_options);
    if (res.status == SolveStatus::Timeout)
        throw Error("verify_key: solver budget exhausted before a verdict");
    if (res.status == SolveStatus::Unsat) {
        check.ok = true;
        return check;
    }
    check.ok = false;
    InputVector witness;
    for (const auto& sig : locked.data_inputs())
        witness.push_back(res.model[static_cast<std::size_t>(miter.var_of("a", sig))]);
    check.witness = std::move(witness);
    return check;
}

Oracle::Oracle(Netlist original_combinational)
    : net_(std::move(original_combinational)), sim_(net_)
{
    if (!net_.is_combinational())
        throw InputError("oracle: circuit must be combinational");
}

OutputVector Oracle::query(const InputVector& pi)
{
    ++queries_;
    return sim_.eval(pi);
}

KeyCheck Oracle::check_key(const LockedNetlist& locked, const Bitstream& key,
                           const SolveOptions& solve_options) const
{
    return verify_key(locked, key, net_, solve_options);
}

// ---------------------------------------------------------------- SAT attack

namespace {

struct DipLoop {
    const LockedNetlist& locked;
    Oracle& oracle;
    double budget_sec;
    SolveOptions solver;
    bool keep_trace;

    CnfBuilder builder;
    std::vector<int> key1_vars, key2_vars, data_vars;
    std::vector<std::string> data_names;
    std::vector<std::pair<InputVector, OutputVector>> io_pairs;
    std::set<InputVector> dips_seen;
    std::vector<InputVector> trace;
    double t0 = 0;
    std::int64_t initial_vars = 0;
    std::int64_t initial_clauses = 0;
    int copies = 0;

    DipLoop(const LockedNetlist& l, Oracle& o, double budget, SolveOptions s, bool trace_on)
        : locked(l), oracle(o), budget_sec(budget), solver(std::move(s)), keep_trace(trace_on)
    {
        Miter miter = build_attack_miter(locked);
        key1_vars = miter.key1_vars;
        key2_vars = miter.key2_vars;
        data_vars = miter.data_vars;
        data_names = locked.data_inputs();
        initial_vars = miter.formula.num_vars;
        initial_clauses = miter.formula.num_clauses();
        builder = CnfBuilder(std::move(miter.formula));
        t0 = now_seconds();
    }

    double remaining() const { return budget_sec - (now_seconds() - t0); }

    // Solve the current miter; true when a fresh DIP was found and locked in.
    enum class Step { Dip, NoMoreDips, OutOfTime };
    Step step()
    {
        if (remaining() <= 0)
            return Step::OutOfTime;
        // Once every data input has been queried, any key satisfying the
        // accumulated constraints reproduces the oracle on the whole input
        // space; the miter is UNSAT by counting, no solver call needed.
        if (data_vars.size() <= 30 &&
            dips_seen.size() == (std::size_t{1} << data_vars.size()))
            return Step::NoMoreDips;
        SolveOptions opts = solver;
        opts.budget_sec = remaining();
        SolveResult res = solve(builder.formula(), {}, opts);
        if (res.status == SolveStatus::Timeout)
            return Step::OutOfTime;
        if (res.status == SolveStatus::Unsat)
            return Step::NoMoreDips;

        InputVector dip;
        dip.reserve(data_vars.size());
        for (int v : data_vars)
            dip.push_back(res.model[static_cast<std::size_t>(v)]);
        if (!dips_seen.insert(dip).second)
            throw InternalError("sat attack: distinguishing input repeated; no progress");
        if (keep_trace)
            trace.push_back(dip);

        OutputVector response = oracle.query(dip);
        constrain(key1_vars, dip, response);
        constrain(key2_vars, dip, response);
        io_pairs.emplace_back(dip, response);
        return Step::Dip;
    }

    // Adds one locked copy with inputs pinned to `dip`, keys tied to the
    // given key variables, outputs pinned to the oracle response.
    void constrain(const std::vector<int>& key_vars, const InputVector& dip,
                   const OutputVector& response)
    {
        std::unordered_map<std::string, int> bound;
        for (std::size_t i = 0; i < data_names.size(); ++i) {
            int v = builder.fresh_var();
            builder.add_unit(dip[i] ? v : -v);
            bound.emplace(data_names[i], v);
        }
        for (std::size_t b = 0; b < key_vars.size(); ++b)
            bound.emplace("keyinput" + std::to_string(b), key_vars[b]);
        auto enc = builder.encode(locked.net, "io" + std::to_string(copies++), bound);
        for (std::size_t o = 0; o < enc.output_vars.size(); ++o)
            builder.add_unit(response[o] ? enc.output_vars[o] : -enc.output_vars[o]);
    }

    // Any key satisfying the accumulated I/O behaviour once the miter is
    // UNSAT is functionally correct.
    std::optional<Bitstream> extract_key()
    {
        Bitstream key;
        key.bits.assign(static_cast<std::size_t>(locked.key_bits), false);
        if (io_pairs.empty())
            return key; // every key is equivalent; any value works

        CnfBuilder ex;
        std::vector<int> kvars;
        for (int b = 0; b < locked.key_bits; ++b)
            kvars.push_back(ex.fresh_var());
        int tag = 0;
        for (const auto& [dip, response] : io_pairs) {
            std::unordered_map<std::string, int> bound;
            for (std::size_t i = 0; i < data_names.size(); ++i) {
                int v = ex.fresh_var();
                ex.add_unit(dip[i] ? v : -v);
                bound.emplace(data_names[i], v);
            }
            for (int b = 0; b < locked.key_bits; ++b)
                bound.emplace("keyinput" + std::to_string(b), kvars[b]);
            auto enc = ex.encode(locked.net, "x" + std::to_string(tag++), bound);
            for (std::size_t o = 0; o < enc.output_vars.size(); ++o)
                ex.add_unit(response[o] ? enc.output_vars[o] : -enc.output_vars[o]);
        }
        SolveOptions opts = solver;
        opts.budget_sec = std::max(remaining(), 1.0);
        SolveResult res = solve(ex.formula(), {}, opts);
        if (res.status == SolveStatus::Timeout)
            return std::nullopt;
        if (res.status == SolveStatus::Unsat)
            throw InternalError("sat attack: accumulated I/O constraints unsatisfiable");
        for (int b = 0; b < locked.key_bits; ++b)
            key.bits[b] = res.model[static_cast<std::size_t>(kvars[b])];
        return key;
    }
};

AttackRecord base_record(const LockedNetlist& locked, const std::string& attack_id)
{
    AttackRecord rec;
    rec.circuit = locked.net.name;
    rec.attack = attack_id;
    rec.key_size = locked.key_bits;
    return rec;
}

} // namespace

AttackRecord sat_attack(const LockedNetlist& locked, Oracle& oracle,
                        const SatAttackOptions& options)
{
    AttackRecord rec = base_record(locked, "sat");
    DipLoop loop(locked, oracle, options.budget_sec, options.solver, options.keep_dip_trace);
    rec.cnf_vars = loop.initial_vars;
    rec.cnf_clauses = loop.initial_clauses;

    for (;;) {
        DipLoop::Step step = loop.step();
        if (step == DipLoop::Step::Dip)
            continue;
        rec.dip_count = static_cast<std::int64_t>(loop.io_pairs.size());
        rec.dip_trace = loop.trace;
        if (step == DipLoop::Step::OutOfTime) {
            rec.status = AttackStatus::Timeout;
            break;
        }
        auto key = loop.extract_key();
        if (!key) {
            rec.status = AttackStatus::Timeout;
            break;
        }
        KeyCheck check = oracle.check_key(locked, *key, options.solver);
        if (!check.ok)
            throw InternalError("sat attack: candidate key failed functional verification");
        rec.status = AttackStatus::Broken;
        rec.recovered_key = *key;
        break;
    }
    rec.time_s = now_seconds() - loop.t0;
    return rec;
}

AttackRecord appsat_attack(const LockedNetlist& locked, Oracle& oracle,
                           const AppSatOptions& options)
{
    if (options.dip_period < 1 || options.sample_count < 1)
        throw InputError("appsat: dip_period and sample_count must be >= 1");
    if (options.error_threshold < 0.0 || options.error_threshold >= 1.0)
        throw InputError("appsat: error threshold must be in [0, 1)");

    AttackRecord rec = base_record(locked, "appsat");
    DipLoop loop(locked, oracle, options.budget_sec, options.solver, options.keep_dip_trace);
    rec.cnf_vars = loop.initial_vars;
    rec.cnf_clauses = loop.initial_clauses;

    LockedEval eval(locked);
    std::mt19937_64 rng(options.seed);
    int since_sample = 0;

    auto finish_exact = [&]() {
        auto key = loop.extract_key();
        if (!key) {
            rec.status = AttackStatus::Timeout;
            return;
        }
        KeyCheck check = oracle.check_key(locked, *key, options.solver);
        if (!check.ok)
            throw InternalError("appsat: candidate key failed functional verification");
        rec.status = AttackStatus::Broken;
        rec.recovered_key = *key;
        rec.error_estimate = 0.0;
    };

    for (;;) {
        DipLoop::Step step = loop.step();
        if (step == DipLoop::Step::OutOfTime) {
            rec.status = AttackStatus::Timeout;
            break;
        }
        if (step == DipLoop::Step::NoMoreDips) {
            finish_exact();
            break;
        }
        if (++since_sample < options.dip_period)
            continue;
        since_sample = 0;

        auto candidate = loop.extract_key();
        if (!candidate) {
            rec.status = AttackStatus::Timeout;
            break;
        }
        int mismatches = 0;
        for (int s = 0; s < options.sample_count; ++s) {
            InputVector probe = random_vector(rng, eval.num_data_inputs());
            if (eval.eval(*candidate, probe) != oracle.query(probe))
                ++mismatches;
        }
        double err = static_cast<double>(mismatches) / options.sample_count;
        if (err > options.error_threshold)
            continue;
        if (options.error_threshold == 0.0) {
            KeyCheck check = oracle.check_key(locked, *candidate, options.solver);
            if (!check.ok)
                continue; // sampling missed a divergence; keep collecting DIPs
            rec.status = AttackStatus::Broken;
            rec.recovered_key = *candidate;
            rec.error_estimate = 0.0;
            break;
        }
        rec.status = AttackStatus::Guess;
        rec.recovered_key = *candidate;
        rec.error_estimate = err;
        break;
    }
    rec.dip_count = static_cast<std::int64_t>(loop.io_pairs.size());
    rec.dip_trace = loop.trace;
    rec.time_s = now_seconds() - loop.t0;
    return rec;
}

// -------------------------------------------------------------------- SCOPE

CofactorEngine::CofactorEngine(const Netlist& net)
{
    if (!net.is_combinational())
        throw InputError("cofactor engine: netlist must be combinational");
    SignalIndex index(net);
    num_inputs_ = static_cast<int>(net.inputs.size());
    num_slots_ = static_cast<int>(net.num_signals());
    for (int i = 0; i < num_inputs_; ++i)
        input_index_.emplace(net.inputs[i], i);

    auto order = topo_order(net);
    nodes_.reserve(order.size());
    for (auto gi : order) {
        const Gate& g = net.gates[gi];
        Node node{};
        node.kind = g.kind;
        node.out = index.lookup(g.output);
        for (std::size_t j = 0; j < 3; ++j)
            node.in[j] = j < g.inputs.size() ? index.lookup(g.inputs[j]) : -1;
        nodes_.push_back(node);
    }
    for (const auto& o : net.outputs)
        po_slots_.push_back(index.lookup(o));
}

int CofactorEngine::input_slot(const std::string& name) const
{
    auto it = input_index_.find(name);
    if (it == input_index_.end())
        throw InputError("cofactor engine: unknown input " + name);
    return it->second;
}

SimplifySignature CofactorEngine::run(const std::vector<std::pair<int, bool>>& bindings) const
{
    constexpr signed char kFree = -1;
    std::vector<signed char> val(num_slots_, kFree);
    std::vector<int> alias(num_slots_);
    for (int i = 0; i < num_slots_; ++i)
        alias[i] = i;
    for (const auto& [slot, v] : bindings)
        val[slot] = v ? 1 : 0;

    // Per-slot effective definition after rewriting. arity 0 = folded away.
    struct Live {
        signed char arity = 0;
        GateKind kind = GateKind::Buf;
        int in[3] = {-1, -1, -1};
    };
    std::vector<Live> live(num_slots_);
    // Producer of a live NOT, for double-inversion elision.
    std::vector<int> not_of(num_slots_, -1);

    auto resolve = [&](int slot) { return alias[slot]; };

    auto set_const = [&](int out, bool v) { val[out] = v ? 1 : 0; };
    auto set_alias = [&](int out, int src) {
        alias[out] = src;
        if (val[src] != kFree)
            val[out] = val[src];
        if (not_of[src] >= 0)
            not_of[out] = not_of[src]; // alias of a NOT is still that NOT
    };
    auto set_not = [&](int out, int src) {
        if (not_of[src] >= 0) {
            set_alias(out, not_of[src]); // NOT(NOT(x)) -> x
            return;
        }
        live[out] = Live{1, GateKind::Not, {src, -1, -1}};
        not_of[out] = src;
    };
    auto set_live2 = [&](int out, GateKind kind, int a, int b) {
        live[out] = Live{2, kind, {a, b, -1}};
        if (kind == GateKind::Not)
            not_of[out] = a;
    };

    for (const auto& node : nodes_) {
        int a = node.in[0] >= 0 ? resolve(node.in[0]) : -1;
        int b = node.in[1] >= 0 ? resolve(node.in[1]) : -1;
        int c = node.in[2] >= 0 ? resolve(node.in[2]) : -1;
        signed char va = a >= 0 ? val[a] : kFree;
        signed char vb = b >= 0 ? val[b] : kFree;
        signed char vc = c >= 0 ? val[c] : kFree;
        int out = node.out;

        switch (node.kind) {
        case GateKind::Const0: set_const(out, false); break;
        case GateKind::Const1: set_const(out, true); break;
        case GateKind::Buf:
            if (va != kFree)
                set_const(out, va);
            else
                set_alias(out, a);
            break;
        case GateKind::Not:
            if (va != kFree)
                set_const(out, !va);
            else
                set_not(out, a);
            break;
        case GateKind::And:
            if (va == 0 || vb == 0)
                set_const(out, false);
            else if (va == 1 && vb == 1)
                set_const(out, true);
            else if (va == 1)
                set_alias(out, b);
            else if (vb == 1)
                set_alias(out, a);
            else if (a == b)
                set_alias(out, a);
            else
                set_live2(out, GateKind::And, a, b);
            break;
        case GateKind::Or:
            if (va == 1 || vb == 1)
                set_const(out, true);
            else if (va == 0 && vb == 0)
                set_const(out, false);
            else if (va == 0)
                set_alias(out, b);
            else if (vb == 0)
                set_alias(out, a);
            else if (a == b)
                set_alias(out, a);
            else
                set_live2(out, GateKind::Or, a, b);
            break;
        case GateKind::Nand:
            if (va == 0 || vb == 0)
                set_const(out, true);
            else if (va == 1 && vb == 1)
                set_const(out, false);
            else if (va == 1)
                set_not(out, b);
            else if (vb == 1)
                set_not(out, a);
            else if (a == b)
                set_not(out, a);
            else
                set_live2(out, GateKind::Nand, a, b);
            break;
        case GateKind::Nor:
            if (va == 1 || vb == 1)
                set_const(out, false);
            else if (va == 0 && vb == 0)
                set_const(out, true);
            else if (va == 0)
                set_not(out, b);
            else if (vb == 0)
                set_not(out, a);
            else if (a == b)
                set_not(out, a);
            else
                set_live2(out, GateKind::Nor, a, b);
            break;
        case GateKind::Xor:
            if (va != kFree && vb != kFree)
                set_const(out, va != vb);
            else if (va == 0)
                set_alias(out, b);
            else if (vb == 0)
                set_alias(out, a);
            else if (va == 1)
                set_not(out, b);
            else if (vb == 1)
                set_not(out, a);
            else if (a == b)
                set_const(out, false);
            else
                set_live2(out, GateKind::Xor, a, b);
            break;
        case GateKind::Xnor:
            if (va != kFree && vb != kFree)
                set_const(out, va == vb);
            else if (va == 1)
                set_alias(out, b);
            else if (vb == 1)
                set_alias(out, a);
            else if (va == 0)
                set_not(out, b);
            else if (vb == 0)
                set_not(out, a);
            else if (a == b)
                set_const(out, true);
            else
                set_live2(out, GateKind::Xnor, a, b);
            break;
        case GateKind::Mux2:
            if (va != kFree) {
                int arm = va ? c : b;
                signed char vArm = va ? vc : vb;
                if (vArm != kFree)
                    set_const(out, vArm);
                else
                    set_alias(out, arm);
            } else if (b == c) {
                if (vb != kFree)
                    set_const(out, vb);
                else
                    set_alias(out, b);
            } else if (vb != kFree && vc != kFree) {
                if (vb == vc)
                    set_const(out, vb);
                else if (vb == 0) // ? 1 : 0 pattern is just the select
                    set_alias(out, a);
                else
                    set_not(out, a);
            } else {
                live[out] = Live{3, GateKind::Mux2, {a, b, c}};
            }
            break;
        }
        // Constant result wins over any recorded structure for this slot.
        if (val[out] != kFree)
            live[out].arity = 0;
    }

    SimplifySignature sig;
    std::vector<char> needed(num_slots_, 0);
    for (int po : po_slots_) {
        int r = resolve(po);
        if (val[r] != kFree)
            ++sig.constant_outputs;
        else
            needed[r] = 1;
    }
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        int out = nodes_[i].out;
        if (!needed[out] || live[out].arity == 0)
            continue;
        ++sig.gates;
        for (int j = 0; j < live[out].arity; ++j) {
            int src = live[out].in[j];
            if (src >= 0 && val[src] == kFree)
                ++sig.literals, needed[src] = 1;
        }
    }
    return sig;
}

SimplifySignature cofactor_signature(const Netlist& net,
                                     const std::vector<std::pair<std::string, bool>>& bindings)
{
    CofactorEngine engine(net);
    std::vector<std::pair<int, bool>> slots;
    for (const auto& [name, v] : bindings)
        slots.emplace_back(engine.input_slot(name), v);
    return engine.run(slots);
}

ScopeResult scope_attack(const LockedNetlist& locked, const ScopeOptions& options)
{
    if (locked.key_bits == 0)
        throw InputError("scope: locked netlist has no key inputs");

    CofactorEngine engine(locked.net);
    ScopeResult result;
    result.guesses.assign(static_cast<std::size_t>(locked.key_bits), -1);

    for (int b = 0; b < locked.key_bits; ++b) {
        int slot = engine.input_slot("keyinput" + std::to_string(b));
        SimplifySignature s0 = engine.run({{slot, false}});
        SimplifySignature s1 = engine.run({{slot, true}});

        bool collapse0 = s0.constant_outputs > 0;
        bool collapse1 = s1.constant_outputs > 0;
        int guess = -1;
        if (collapse0 != collapse1) {
            guess = collapse0 ? 1 : 0; // the collapsing polarity is the wrong one
        } else {
            double g0 = s0.gates, g1 = s1.gates;
            if (g0 < g1 && (g1 - g0) >= options.margin * g1)
                guess = 1;
            else if (g1 < g0 && (g0 - g1) >= options.margin * g0)
                guess = 0;
        }
        result.guesses[b] = guess;
        if (guess >= 0)
            ++result.decided;
    }
    result.cope_percent = 100.0 * result.decided / locked.key_bits;
    return result;
}

// -------------------------------------------------------------- key guessing

std::int64_t key_agreement(const Bitstream& a, const Bitstream& b)
{
    if (a.bits.size() != b.bits.size())
        throw InputError("key_agreement: length mismatch");
    std::int64_t same = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i)
        same += a.bits[i] == b.bits[i];
    return same;
}

AttackRecord guess_attack(const LockedNetlist* locked, const Bitstream& true_key,
                          const GuessOptions& options, Oracle* oracle)
{
    if (options.trials < 1)
        throw InputError("guess_attack: trials must be >= 1");
    std::size_t L = true_key.bits.size();
    if (L == 0)
        throw InputError("guess_attack: empty key");

    AttackRecord rec;
    rec.circuit = locked ? locked->net.name : "";
    rec.attack = options.mode == GuessMode::Random ? "guess-random" : "guess-hillclimb";
    rec.key_size = static_cast<std::int64_t>(L);
    rec.status = AttackStatus::Guess;

    std::mt19937_64 rng(options.seed);
    double t0 = now_seconds();

    if (options.mode == GuessMode::Random) {
        std::int64_t best = -1;
        Bitstream best_key;
        for (int t = 0; t < options.trials; ++t) {
            Bitstream key;
            key.bits.reserve(L);
            for (std::size_t i = 0; i < L; ++i)
                key.bits.push_back((rng() & 1) != 0);
            std::int64_t agree = key_agreement(key, true_key);
            if (agree > best) {
                best = agree;
                best_key = std::move(key);
            }
        }
        rec.bits_matched = best;
        rec.recovered_key = std::move(best_key);
        rec.time_s = now_seconds() - t0;
        return rec;
    }

    // Hill climb: greedy bit flips scored on a fixed oracle sample set.
    if (!locked || !oracle)
        throw InputError("guess_attack: hill climb needs the locked netlist and an oracle");
    LockedEval eval(*locked);
    std::vector<std::pair<InputVector, OutputVector>> samples;
    for (int s = 0; s < options.oracle_samples; ++s) {
        InputVector in = random_vector(rng, eval.num_data_inputs());
        samples.emplace_back(in, oracle->query(in));
    }
    auto score = [&](const Bitstream& key) {
        int bad = 0;
        for (const auto& [in, want] : samples)
            bad += eval.eval(key, in) != want;
        return bad;
    };

    Bitstream key;
    for (std::size_t i = 0; i < L; ++i)
        key.bits.push_back((rng() & 1) != 0);
    int current = score(key);
    for (int pass = 0; pass < options.trials; ++pass) {
        for (std::size_t b = 0; b < L; ++b) {
            key.bits[b] = !key.bits[b];
            int flipped = score(key);
            if (flipped <= current)
                current = flipped;
            else
                key.bits[b] = !key.bits[b];
        }
    }
    rec.bits_matched = key_agreement(key, true_key);
    rec.recovered_key = std::move(key);
    rec.error_estimate =
        samples.empty() ? 0.0 : static_cast<double>(current) / static_cast<double>(samples.size());
    rec.time_s = now_seconds() - t0;
    return rec;
}

// ------------------------------------------------------------------- record

std::string attack_record_to_json(const AttackRecord& rec)
{
    nlohmann::ordered_json j;
    j["circuit"] = rec.circuit;
    j["attack"] = rec.attack;
    j["V"] = rec.cnf_vars;
    j["C"] = rec.cnf_clauses;
    j["K"] = rec.key_size;
    j["time_s"] = rec.time_s;
    j["status"] = attack_status_name(rec.status);
    if (rec.recovered_key) {
        std::string bits;
        for (bool b : rec.recovered_key->bits)
            bits += b ? '1' : '0';
        j["recovered_key"] = bits;
    }
    if (rec.bits_matched)
        j["bits_matched"] = *rec.bits_matched;
    if (rec.dip_count)
        j["dip_count"] = *rec.dip_count;
    if (rec.cope_percent)
        j["cope_percent"] = *rec.cope_percent;
    if (rec.error_estimate)
        j["error_estimate"] = *rec.error_estimate;
    return j.dump(2) + "\n";
}

AttackRecord attack_record_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("attack record: ") + e.what());
    }
    AttackRecord rec;
    rec.circuit = j.at("circuit").get<std::string>();
    rec.attack = j.at("attack").get<std::string>();
    rec.cnf_vars = j.at("V").get<std::int64_t>();
    rec.cnf_clauses = j.at("C").get<std::int64_t>();
    rec.key_size = j.at("K").get<std::int64_t>();
    rec.time_s = j.value("time_s", 0.0);
    std::string status = j.at("status").get<std::string>();
    if (status == "BROKEN")
        rec.status = AttackStatus::Broken;
    else if (status == "TIMEOUT")
        rec.status = AttackStatus::Timeout;
    else if (status == "GUESS")
        rec.status = AttackStatus::Guess;
    else
        throw InputError("attack record: unknown status " + status);
    if (j.contains("recovered_key"))
        rec.recovered_key = bitstream_from_string(j["recovered_key"].get<std::string>());
    if (j.contains("bits_matched"))
        rec.bits_matched = j["bits_matched"].get<std::int64_t>();
    if (j.contains("dip_count"))
        rec.dip_count = j["dip_count"].get<std::int64_t>();
    if (j.contains("cope_percent"))
        rec.cope_percent = j["cope_percent"].get<double>();
    if (j.contains("error_estimate"))
        rec.error_estimate = j["error_estimate"].get<double>();
    return rec;
}

} // namespace uclock
