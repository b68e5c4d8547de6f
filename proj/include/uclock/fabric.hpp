// Programmable universal-circuit fabric: an ordered crossbar of k-input LUT
// poles where pole i can source each pin from any primary input or any
// earlier pole, so every configuration is feed-forward by construction.
// Key bits select pin sources (modular decoding: every bitstring is a valid
// key), fill LUT truth tables, and route the outputs.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uclock/netlist.hpp"
#include "uclock/transform.hpp"

namespace uclock {

struct Fabric {
    int n_in = 0;
    int n_out = 0;
    int n_poles = 0;
    int k = 0;
    std::vector<int> pin_select_widths; // w_i for pole i (1-based in the docs)
    int output_select_width = 0;        // w_out

    int sources_of_pole(int pole_1based) const { return n_in + pole_1based - 1; }
    int total_sources() const { return n_in + n_poles; }
};

Fabric build_fabric(int n_in, int n_out, int n_poles, int k);

// L = sum over poles of (k*w_i + 2^k) + n_out*w_out.
std::int64_t key_length(const Fabric& fabric);

// Bitstream layout, bit-exact: for each pole i in 1..n_poles, pin selects
// 1..k (w_i bits each, MSB first), then the 2^k table bits t_0..t_{2^k-1};
// after all poles, output selects 1..n_out (w_out bits each, MSB first).
struct Bitstream {
    std::vector<bool> bits;
    std::size_t size() const { return bits.size(); }
};

std::string bitstream_to_string(const Bitstream& bs); // one line of 0/1
Bitstream bitstream_from_string(const std::string& text);
Bitstream bitstream_from_file(const std::string& path);
void write_bitstream_file(const Bitstream& bs, const std::string& path);

// Locked circuit: a plain netlist whose inputs are key bits named
// keyinput0..keyinput{L-1} plus the original data inputs. Serialized .bench
// lists the key inputs first.
struct LockedNetlist {
    Netlist net;
    int key_bits = 0;

    std::vector<std::string> data_inputs() const;
};

// Reads a .bench file and classifies keyinput%d ports; requires the indices
// to be exactly 0..L-1.
LockedNetlist locked_from_netlist(Netlist net);
LockedNetlist parse_locked_bench_file(const std::string& path);

// Assembles full input vectors from (key, data) pairs regardless of where
// the key ports sit in the declaration order.
class LockedEval {
public:
    explicit LockedEval(const LockedNetlist& locked);
    OutputVector eval(const Bitstream& key, const InputVector& data) const;
    std::size_t num_data_inputs() const { return data_positions_.size(); }

private:
    Simulator sim_;
    std::vector<int> key_positions_;  // key bit -> position in net.inputs
    std::vector<int> data_positions_; // data bit -> position in net.inputs
};

// Embeds a LUT netlist into the fabric. Pole i hosts the i-th LUT in
// topological order; used pins carry the canonical (smallest) source index;
// unused pins replicate pin 1's source with the table made insensitive to
// them; unused poles are filled from the seeded generator so the bitstream
// does not reveal where the real circuit ends.
Bitstream program(const Fabric& fabric, const LutNetlist& circuit, std::uint64_t seed);

// Lowers the fabric to plain gates. Pin and output multiplexers become MUX2
// trees with modular source decoding (select value v picks source v mod S);
// each pole's LUT becomes a 2^k:1 tree whose data legs are the table key
// bits and whose selects are the pin signals, pin 1 as table-index MSB.
// Data inputs are named in%d, outputs out%d.
LockedNetlist lower_to_gates(const Fabric& fabric);

struct Obfuscated {
    LockedNetlist locked;
    Bitstream key;
    Fabric fabric;
};

// End-to-end: map_to_luts -> build_fabric (n_poles = LUT count + pole_slack)
// -> program -> lower_to_gates, with ports renamed back to the source
// circuit's names where that causes no collision.
Obfuscated obfuscate(const Netlist& net, int k, int pole_slack, std::uint64_t seed,
                     LutMapMode lut_mode = LutMapMode::PerGate);

std::string fabric_to_json(const Fabric& fabric);
Fabric fabric_from_json(const std::string& text);

// Known-leaky baseline: inserts `bits` AND/OR key gates on random internal
// nets (AND expects key 1, OR expects key 0). Used as the positive control
// for structural-leakage experiments.
struct KeyGateLock {
    LockedNetlist locked;
    Bitstream key;
};
KeyGateLock lock_with_key_gates(const Netlist& net, int bits, std::uint64_t seed);

// Same shape but XOR/XNOR insertions; cofactors stay symmetric.
KeyGateLock lock_with_xor_key_gates(const Netlist& net, int bits, std::uint64_t seed);

} // namespace uclock
