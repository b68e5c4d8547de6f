// Attack engines against locked netlists: the oracle-guided SAT attack
// (distinguishing-input loop), its approximate variant, an oracle-less
// cofactor-signature analysis, and random/hill-climb key guessing. Attack
// code sees the original circuit only through the Oracle interface.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uclock/cnf.hpp"
#include "uclock/fabric.hpp"
#include "uclock/netlist.hpp"
#include "uclock/solver.hpp"

namespace uclock {

enum class VerifyMethod { Exhaustive, Miter };

struct KeyCheck {
    bool ok = false;
    VerifyMethod method = VerifyMethod::Exhaustive;
    std::optional<InputVector> witness; // a distinguishing input when !ok
};

// Exhaustive truth-table comparison when the locked circuit has at most 16
// data inputs, otherwise an equivalence miter (UNSAT = key correct).
KeyCheck verify_key(const LockedNetlist& locked, const Bitstream& key, const Netlist& original,
                    const SolveOptions& solve_options = {});

// Black-box functional instance of the original circuit. Attacks may only
// query input/output behaviour; the final key check runs behind the same
// wall so no structure leaks into attack code.
class Oracle {
public:
    explicit Oracle(Netlist original_combinational);

    OutputVector query(const InputVector& pi);
    std::uint64_t query_count() const { return queries_; }
    std::size_t num_inputs() const { return sim_.num_inputs(); }
    std::size_t num_outputs() const { return sim_.num_outputs(); }

    KeyCheck check_key(const LockedNetlist& locked, const Bitstream& key,
                       const SolveOptions& solve_options = {}) const;

private:
    Netlist net_;
    Simulator sim_;
    std::uint64_t queries_ = 0;
};

enum class AttackStatus { Broken, Timeout, Guess };

const char* attack_status_name(AttackStatus s);

struct AttackRecord {
    std::string circuit;
    std::string attack;
    std::int64_t cnf_vars = 0;    // V of the attack formula
    std::int64_t cnf_clauses = 0; // C of the attack formula
    std::int64_t key_size = 0;    // K
    double time_s = 0.0;
    AttackStatus status = AttackStatus::Timeout;
    std::optional<Bitstream> recovered_key;
    std::optional<std::int64_t> bits_matched;
    std::optional<std::int64_t> dip_count;
    std::optional<double> cope_percent;
    std::optional<double> error_estimate; // approximate attacks
    std::vector<InputVector> dip_trace;   // populated when keep_dip_trace is set
};

std::string attack_record_to_json(const AttackRecord& rec);
AttackRecord attack_record_from_json(const std::string& text);

struct SatAttackOptions {
    double budget_sec = 1e9;
    SolveOptions solver;
    bool keep_dip_trace = true;
};

// Classic distinguishing-input loop. Two keyed copies over shared data
// inputs are solved for a disagreement; each DIP is locked to the oracle's
// answer for both key sets until no disagreement remains, then any key
// satisfying the accumulated I/O constraints is correct. Every Broken
// result has passed Oracle::check_key; an unverifiable candidate throws.
AttackRecord sat_attack(const LockedNetlist& locked, Oracle& oracle,
                        const SatAttackOptions& options = {});

struct AppSatOptions {
    double budget_sec = 1e9;
    SolveOptions solver;
    int dip_period = 10;        // r: DIPs between sampling rounds
    int sample_count = 50;      // q: random queries per round
    double error_threshold = 0.01; // eps: acceptable empirical error
    std::uint64_t seed = 1;
    bool keep_dip_trace = true;
};

// DIP loop with periodic random sampling; stops early with Guess once the
// sampled error of the current candidate drops to eps. eps = 0 degenerates
// to the exact attack.
AttackRecord appsat_attack(const LockedNetlist& locked, Oracle& oracle,
                           const AppSatOptions& options = {});

struct ScopeOptions {
    double margin = 0.25; // relative gate-count reduction that decides a bit
};

struct ScopeResult {
    std::vector<int> guesses; // per key bit: 0, 1, or -1 undecided
    double cope_percent = 0.0;
    int decided = 0;
};

// Oracle-less analysis: for each key bit, simplify both cofactors and
// compare complexity signatures; a cofactor that kills a primary output or
// most of the logic marks the opposite polarity as the guess.
ScopeResult scope_attack(const LockedNetlist& locked, const ScopeOptions& options = {});

enum class GuessMode { Random, HillClimb };

struct GuessOptions {
    int trials = 1;
    std::uint64_t seed = 1;
    GuessMode mode = GuessMode::Random;
    int oracle_samples = 100; // hill-climb scoring set
};

// Key-guess baseline. Random mode scores uniform keys by positional bit
// agreement with the true key (expected L/2); hill-climb additionally
// consumes a fixed oracle sample set and greedily flips bits.
AttackRecord guess_attack(const LockedNetlist* locked, const Bitstream& true_key,
                          const GuessOptions& options, Oracle* oracle = nullptr);

// Positional agreement count between two equal-length keys.
std::int64_t key_agreement(const Bitstream& a, const Bitstream& b);

// --- cofactor simplifier (exposed for tests) ---------------------------

struct SimplifySignature {
    int gates = 0;
    int literals = 0;        // total live gate input pins
    int constant_outputs = 0;
};

// Signature of the netlist after constant propagation, constant folding,
// dead-gate removal and double-inversion elision under the given bindings.
SimplifySignature cofactor_signature(const Netlist& net,
                                     const std::vector<std::pair<std::string, bool>>& bindings);

// Indexed form so SCOPE can run thousands of cofactors without re-hashing
// signal names.
class CofactorEngine {
public:
    explicit CofactorEngine(const Netlist& net);
    SimplifySignature run(const std::vector<std::pair<int, bool>>& input_bindings) const;
    int input_slot(const std::string& name) const;

private:
    struct Node {
        GateKind kind;
        int in[3];
        int out;
    };
    int num_inputs_ = 0;
    int num_slots_ = 0;
    std::vector<Node> nodes_; // topological order
    std::vector<int> po_slots_;
    std::unordered_map<std::string, int> input_index_;
};

} // namespace uclock
