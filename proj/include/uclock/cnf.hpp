// Tseitin encoding, miter construction and DIMACS I/O. Variable and clause
// counts are deterministic functions of the netlist (no polarity-based
// clause dropping), which is what the attack-trace metrics consume.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "uclock/fabric.hpp"
#include "uclock/netlist.hpp"

namespace uclock {

struct CnfFormula {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses; // DIMACS literals, no empty clause
    std::unordered_map<std::string, int> var_map; // "tag:signal" -> variable

    std::int64_t num_clauses() const { return static_cast<std::int64_t>(clauses.size()); }
    int var_of(const std::string& tag, const std::string& signal) const;
};

// Incremental formula builder; encode() can be called repeatedly to stack
// circuit copies into one formula (the SAT-attack loop does exactly that).
class CnfBuilder {
public:
    CnfBuilder() = default;
    explicit CnfBuilder(CnfFormula start) : formula_(std::move(start)) {}

    int fresh_var() { return ++formula_.num_vars; }
    void add_clause(std::vector<int> lits);
    void add_unit(int lit) { add_clause({lit}); }

    struct Encoded {
        std::vector<int> input_vars;  // aligned with net.inputs
        std::vector<int> output_vars; // aligned with net.outputs
    };

    // One variable per signal; names in `bound` reuse the given variable
    // instead of a fresh one. Standard clause counts per gate: AND/OR/NAND/
    // NOR 3, XOR/XNOR 4, NOT/BUF 2, MUX2 4, CONST 1.
    Encoded encode(const Netlist& net, const std::string& tag,
                   const std::unordered_map<std::string, int>& bound = {});

    // y <-> a XOR b on fresh variable y (4 clauses).
    int add_xor(int a, int b);

    const CnfFormula& formula() const { return formula_; }
    CnfFormula take() { return std::move(formula_); }

private:
    CnfFormula formula_;
};

Netlist combinational_view(const Netlist& net); // flop outputs become PIs
CnfFormula tseitin_encode(const Netlist& net, const std::string& copy_tag = "c");

enum class MiterMode { Attack, Equiv };

struct Miter {
    CnfFormula formula;
    std::vector<int> data_vars; // shared data-input variables
    std::vector<int> key1_vars;
    std::vector<int> key2_vars;
    std::vector<int> out1_vars;
    std::vector<int> out2_vars;
};

// Attack mode: two copies share the data inputs, carry distinct key
// variables, and at least one output pair must differ (SAT = a
// distinguishing input exists for some key pair).
Miter build_attack_miter(const LockedNetlist& locked);

// Equiv mode: both keys fixed by unit clauses; UNSAT = the two keys are
// functionally interchangeable.
Miter build_equiv_miter(const LockedNetlist& locked, const Bitstream& key_a,
                        const Bitstream& key_b);

// Cross-circuit difference miter with positional pairing of the free inputs
// and outputs. Inputs named in `fix_a`/`fix_b` are pinned by unit clauses.
CnfFormula build_difference_miter(const Netlist& a,
                                  const std::unordered_map<std::string, bool>& fix_a,
                                  const Netlist& b,
                                  const std::unordered_map<std::string, bool>& fix_b);

void write_dimacs(const CnfFormula& f, std::ostream& out);
void write_dimacs_file(const CnfFormula& f, const std::string& path);

enum class SolveStatus { Sat, Unsat, Timeout };

struct SolveStats {
    std::uint64_t conflicts = 0;
    std::uint64_t decisions = 0;
    std::uint64_t propagations = 0;
    double seconds = 0.0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Timeout;
    std::vector<bool> model; // indexed 1..num_vars when Sat
    SolveStats stats;
};

// Parses `s SATISFIABLE` / `s UNSATISFIABLE` plus `v` lines.
SolveResult read_solver_output(std::istream& in, int num_vars);

// True when `model` (1-based) satisfies every clause.
bool model_satisfies(const CnfFormula& f, const std::vector<bool>& model);

} // namespace uclock
