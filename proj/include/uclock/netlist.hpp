// Gate-level netlist IR with .bench I/O, validation, topological ordering
// and simulation. Netlists are immutable by convention once built: every
// pass returns a fresh value, so sharing across threads is safe.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "uclock/error.hpp"

namespace uclock {

enum class GateKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    Const0,
    Const1,
    Mux2, // inputs ordered (sel, a0, a1); sel=0 selects a0
};

const char* gate_kind_name(GateKind kind);
int gate_arity(GateKind kind);
bool eval_gate(GateKind kind, const std::vector<bool>& inputs);

struct Gate {
    std::string output;
    GateKind kind;
    std::vector<std::string> inputs;
};

// D flip-flop: `output` is the Q signal, `data` the D input signal.
struct Flop {
    std::string output;
    std::string data;
};

using InputVector = std::vector<bool>;
using OutputVector = std::vector<bool>;
using FlopState = std::map<std::string, bool>;

struct Netlist {
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<Gate> gates;
    std::vector<Flop> flops;

    bool is_combinational() const { return flops.empty(); }
    std::size_t num_signals() const { return inputs.size() + flops.size() + gates.size(); }
};

// .bench reader. Accepts INPUT(x) / OUTPUT(x) / x = KIND(...) / x = DFF(d),
// '#' comments, LF or CRLF. AND/OR/NAND/NOR/XOR/XNOR wider than 2 inputs are
// decomposed into 2-input trees (inverting kinds keep the inversion at the
// root). Gates come out topologically sorted, stable in file order.
Netlist parse_bench(std::istream& in, const std::string& name = "");
Netlist parse_bench_string(const std::string& text, const std::string& name = "");
Netlist parse_bench_file(const std::string& path);

std::string serialize_bench(const Netlist& net);
void write_bench_file(const Netlist& net, const std::string& path);

// Full invariant check; throws InputError describing the first violation.
void validate(const Netlist& net);

// Topological order of gate indices, treating PI and flop outputs as sources.
// Ties break on declaration order. Throws InputError naming one cycle.
std::vector<std::size_t> topo_order(const Netlist& net);

struct SimResult {
    OutputVector outputs;
    FlopState next_state;
};

// Single-step evaluation; `state` must cover every flop.
SimResult simulate(const Netlist& net, const InputVector& pi, const FlopState& state = {});

// Precompiled evaluator for repeated simulation of one netlist.
class Simulator {
public:
    explicit Simulator(const Netlist& net);

    SimResult step(const InputVector& pi, const FlopState& state) const;
    // Combinational-only fast path (no flop bookkeeping).
    OutputVector eval(const InputVector& pi) const;

    std::size_t num_inputs() const { return num_inputs_; }
    std::size_t num_outputs() const { return output_slots_.size(); }

private:
    struct Op {
        GateKind kind;
        int out;
        int in[3];
    };
    std::size_t num_inputs_ = 0;
    std::size_t num_slots_ = 0;
    std::vector<Op> ops_;
    std::vector<int> output_slots_;
    std::vector<std::string> flop_names_;
    std::vector<int> flop_slots_;      // slot holding each flop's Q value
    std::vector<int> flop_data_slots_; // slot holding each flop's D value
    mutable std::vector<uint8_t> values_;
};

// Signal-name bookkeeping shared by the passes.
class SignalIndex {
public:
    explicit SignalIndex(const Netlist& net);
    int lookup(const std::string& name) const; // -1 when absent
    bool contains(const std::string& name) const { return lookup(name) >= 0; }

private:
    std::unordered_map<std::string, int> index_;
};

// Deterministic name-erased serialization: inputs become i%d, gate outputs
// n%d in topological order. Two netlists built the same way from fabrics of
// equal shape serialize identically regardless of original signal names.
std::string canonical_bench(const Netlist& net);

// Fresh-name helper honouring the reserved "__g" prefix.
class NameGen {
public:
    explicit NameGen(const Netlist& net);
    explicit NameGen(const std::vector<std::string>& used);
    std::string fresh(const std::string& stem = "");
    void reserve(const std::string& name) { used_.emplace(name); }

private:
    std::unordered_set<std::string> used_;
    uint64_t counter_ = 0;
};

} // namespace uclock
