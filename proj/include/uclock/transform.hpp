// Circuit preparation passes: sequential unrolling, fan-out bounding and
// LUT mapping. All passes are pure functions over immutable netlists.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uclock/netlist.hpp"

namespace uclock {

struct Lut {
    std::string output;
    std::vector<std::string> inputs; // at most k, inputs[0] is the MSB of the row index
    std::vector<bool> truth_table;   // 2^|inputs| bits, bit 0 = all-inputs-0 row
};

struct LutNetlist {
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<Lut> luts;
};

// Unrolls `frames` clock cycles into one combinational netlist.
//
// Naming scheme (1-based frames):
//   - every PI/PO is replicated per frame with suffix __f<t>;
//   - frame-1 flop outputs become fresh primary inputs <flop>__init;
//   - frame-T flop data values become primary outputs <flop>__final;
//   - input order is PIs frame-major then the __init block, outputs likewise.
Netlist unroll(const Netlist& net, int frames);

// Inserts balanced BUF trees so that no signal drives more than `limit`
// combinational sinks (gate inputs and flop data pins; output-port taps are
// not counted, they cannot be rerouted without renaming the port).
Netlist bound_fanout(const Netlist& net, int limit);

// Audit helper for the pass above: largest combinational sink count.
int max_fanout(const Netlist& net);

enum class LutMapMode {
    PerGate, // one LUT per gate
    Greedy,  // additionally merge single-fan-out drivers while support fits k
};

// Wraps a combinational netlist into k-input LUTs. Gates wider than k
// (MUX2 under k=2) are decomposed first. Constant gates materialize as
// 1-input LUTs over the first primary input with a constant table.
LutNetlist map_to_luts(const Netlist& net, int k, LutMapMode mode = LutMapMode::PerGate);

// Row index of a LUT for a given input assignment (inputs[0] = MSB).
std::size_t lut_row(const Lut& lut, const std::vector<bool>& values);

// Topological evaluation of a LUT netlist.
OutputVector eval_luts(const LutNetlist& net, const InputVector& pi);

// Debug dump; field names are stable (name/inputs/outputs/luts with
// output/inputs/truth_table per entry, tables as 0/1 strings LSB first).
std::string lut_netlist_to_json(const LutNetlist& net);

} // namespace uclock
