#include "uclock/fabric.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace uclock {

namespace {

int ceil_log2(std::int64_t n)
{
    int w = 0;
    while ((std::int64_t{1} << w) < n)
        ++w;
    return w;
}

} // namespace

Fabric build_fabric(int n_in, int n_out, int n_poles, int k)
{
    if (n_in < 1 || n_out < 1 || n_poles < 1)
        throw InputError("build_fabric: all counts must be >= 1");
    if (k < 2)
        throw InputError("build_fabric: k must be >= 2");
    if (k > 16)
        throw InputError("build_fabric: k > 16 is not supported");

    Fabric f;
    f.n_in = n_in;
    f.n_out = n_out;
    f.n_poles = n_poles;
    f.k = k;
    f.pin_select_widths.reserve(n_poles);
    for (int i = 1; i <= n_poles; ++i)
        f.pin_select_widths.push_back(ceil_log2(f.sources_of_pole(i)));
    f.output_select_width = ceil_log2(f.total_sources());
    return f;
}

std::int64_t key_length(const Fabric& fabric)
{
    std::int64_t total = 0;
    for (int w : fabric.pin_select_widths)
        total += std::int64_t{fabric.k} * w + (std::int64_t{1} << fabric.k);
    total += std::int64_t{fabric.n_out} * fabric.output_select_width;
    return total;
}

std::string bitstream_to_string(const Bitstream& bs)
{
    std::string s;
    s.reserve(bs.bits.size() + 1);
    for (bool b : bs.bits)
        s += b ? '1' : '0';
    s += '\n';
    return s;
}

Bitstream bitstream_from_string(const std::string& text)
{
    Bitstream bs;
    for (char c : text) {
        if (c == '0' || c == '1')
            bs.bits.push_back(c == '1');
        else if (!std::isspace(static_cast<unsigned char>(c)))
            throw InputError(std::string("bitstream: unexpected character '") + c + "'");
    }
    return bs;
}

Bitstream bitstream_from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open bitstream file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return bitstream_from_string(ss.str());
}

void write_bitstream_file(const Bitstream& bs, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write bitstream file: " + path);
    out << bitstream_to_string(bs);
}

namespace {

const std::regex kKeyInputRe("^keyinput([0-9]+)$");

} // namespace

std::vector<std::string> LockedNetlist::data_inputs() const
{
    std::vector<std::string> out;
    for (const auto& s : net.inputs)
        if (!std::regex_match(s, kKeyInputRe))
            out.push_back(s);
    return out;
}

LockedNetlist locked_from_netlist(Netlist net)
{
    std::vector<int> seen;
    for (const auto& s : net.inputs) {
        std::smatch m;
        if (std::regex_match(s, m, kKeyInputRe))
            seen.push_back(std::stoi(m[1]));
    }
    std::vector<int> sorted = seen;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != static_cast<int>(i))
            throw InputError("locked netlist: key inputs are not keyinput0.." +
                             std::to_string(sorted.size() - 1));
    LockedNetlist locked;
    locked.key_bits = static_cast<int>(seen.size());
    locked.net = std::move(net);
    return locked;
}

LockedNetlist parse_locked_bench_file(const std::string& path)
{
    LockedNetlist locked = locked_from_netlist(parse_bench_file(path));
    if (locked.key_bits == 0)
        throw InputError("no keyinput ports found in " + path);
    if (!locked.net.is_combinational())
        throw InputError("locked netlist must be combinational: " + path);
    return locked;
}

LockedEval::LockedEval(const LockedNetlist& locked) : sim_(locked.net)
{
    key_positions_.assign(locked.key_bits, -1);
    for (std::size_t pos = 0; pos < locked.net.inputs.size(); ++pos) {
        std::smatch m;
        const std::string& name = locked.net.inputs[pos];
        if (std::regex_match(name, m, kKeyInputRe))
            key_positions_[std::stoul(m[1])] = static_cast<int>(pos);
        else
            data_positions_.push_back(static_cast<int>(pos));
    }
}

OutputVector LockedEval::eval(const Bitstream& key, const InputVector& data) const
{
    if (key.bits.size() != key_positions_.size())
        throw InputError("key length " + std::to_string(key.bits.size()) + " does not match " +
                         std::to_string(key_positions_.size()) + " key inputs");
    if (data.size() != data_positions_.size())
        throw InputError("data vector length mismatch");
    InputVector full(key_positions_.size() + data_positions_.size());
    for (std::size_t i = 0; i < key_positions_.size(); ++i)
        full[key_positions_[i]] = key.bits[i];
    for (std::size_t i = 0; i < data_positions_.size(); ++i)
        full[data_positions_[i]] = data[i];
    return sim_.eval(full);
}

namespace {

void append_bits_msb_first(std::vector<bool>& bits, std::int64_t value, int width)
{
    for (int b = width - 1; b >= 0; --b)
        bits.push_back((value >> b) & 1);
}

} // namespace

Bitstream program(const Fabric& fabric, const LutNetlist& circuit, std::uint64_t seed)
{
    if (static_cast<int>(circuit.inputs.size()) != fabric.n_in)
        throw InputError("program: circuit has " + std::to_string(circuit.inputs.size()) +
                         " inputs, fabric expects " + std::to_string(fabric.n_in));
    if (static_cast<int>(circuit.outputs.size()) != fabric.n_out)
        throw InputError("program: circuit has " + std::to_string(circuit.outputs.size()) +
                         " outputs, fabric expects " + std::to_string(fabric.n_out));
    if (static_cast<int>(circuit.luts.size()) > fabric.n_poles)
        throw InputError("program: " + std::to_string(circuit.luts.size()) +
                         " LUTs exceed " + std::to_string(fabric.n_poles) + " poles");

    // Pole assignment: LUTs in topological order, declaration tie-break.
    std::unordered_map<std::string, std::size_t> producer;
    for (std::size_t i = 0; i < circuit.luts.size(); ++i)
        producer.emplace(circuit.luts[i].output, i);
    // The LutNetlist invariant keeps `luts` topologically sorted already
    // (map_to_luts emits in topo order and merging preserves it); verify.
    {
        std::unordered_set<std::string> ready(circuit.inputs.begin(), circuit.inputs.end());
        for (const auto& lut : circuit.luts) {
            for (const auto& in : lut.inputs)
                if (!ready.count(in))
                    throw InputError("program: LUT list is not topologically ordered at " +
                                     lut.output);
            ready.insert(lut.output);
        }
    }

    std::unordered_map<std::string, std::int64_t> source_index;
    for (std::size_t i = 0; i < circuit.inputs.size(); ++i)
        source_index[circuit.inputs[i]] = static_cast<std::int64_t>(i);
    for (std::size_t i = 0; i < circuit.luts.size(); ++i)
        source_index[circuit.luts[i].output] = fabric.n_in + static_cast<std::int64_t>(i);

    std::mt19937_64 rng(seed);
    auto random_bit = [&rng]() { return (rng() & 1) != 0; };

    Bitstream bs;
    bs.bits.reserve(static_cast<std::size_t>(key_length(fabric)));

    for (int pole = 1; pole <= fabric.n_poles; ++pole) {
        int w = fabric.pin_select_widths[pole - 1];
        std::size_t lut_idx = static_cast<std::size_t>(pole - 1);
        if (lut_idx < circuit.luts.size()) {
            const Lut& lut = circuit.luts[lut_idx];
            int arity = static_cast<int>(lut.inputs.size());
            if (arity > fabric.k)
                throw InputError("program: LUT " + lut.output + " has fan-in " +
                                 std::to_string(arity) + " > k");
            std::int64_t pad_source = arity > 0 ? source_index.at(lut.inputs[0]) : 0;
            for (int pin = 0; pin < fabric.k; ++pin) {
                std::int64_t src =
                    pin < arity ? source_index.at(lut.inputs[pin]) : pad_source;
                if (src >= fabric.sources_of_pole(pole))
                    throw InternalError("program: source index out of range for pole " +
                                        std::to_string(pole));
                append_bits_msb_first(bs.bits, src, w);
            }
            // Expand the table to k inputs; real pins occupy the index MSBs,
            // so rows differing only in pad pins repeat the same value.
            int pad = fabric.k - arity;
            for (std::int64_t row = 0; row < (std::int64_t{1} << fabric.k); ++row)
                bs.bits.push_back(lut.truth_table[static_cast<std::size_t>(row >> pad)]);
        } else {
            for (int b = 0; b < fabric.k * w + (1 << fabric.k); ++b)
                bs.bits.push_back(random_bit());
        }
    }

    for (const auto& po : circuit.outputs) {
        auto it = source_index.find(po);
        if (it == source_index.end())
            throw InputError("program: output " + po + " is not a PI or LUT output");
        append_bits_msb_first(bs.bits, it->second, fabric.output_select_width);
    }

    if (bs.bits.size() != static_cast<std::size_t>(key_length(fabric)))
        throw InternalError("program: bitstream length mismatch");
    return bs;
}

namespace {

// Gate emitter with structural hashing for MUX2 trees.
class NetBuilder {
public:
    explicit NetBuilder(Netlist& net) : net_(net) {}

    std::string mux2(const std::string& sel, const std::string& a0, const std::string& a1)
    {
        if (a0 == a1)
            return a0;
        std::string key = sel + "\x01" + a0 + "\x01" + a1;
        auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;
        std::string out = "__gw" + std::to_string(counter_++);
        net_.gates.push_back(Gate{out, GateKind::Mux2, {sel, a0, a1}});
        cache_.emplace(std::move(key), out);
        return out;
    }

    // sources[v mod S] for v = select bits (MSB first) read as an unsigned
    // integer. With no select bits this is just sources[0].
    std::string mux_tree(const std::vector<std::string>& sources,
                         const std::vector<std::string>& sel_msb_first)
    {
        std::size_t w = sel_msb_first.size();
        if (w == 0)
            return sources.front();
        std::vector<std::string> level;
        std::size_t leaves = std::size_t{1} << w;
        level.reserve(leaves);
        for (std::size_t j = 0; j < leaves; ++j)
            level.push_back(sources[j % sources.size()]);
        for (std::size_t bit = w; bit-- > 0;) {
            std::vector<std::string> next;
            next.reserve(level.size() / 2);
            for (std::size_t j = 0; j + 1 < level.size(); j += 2)
                next.push_back(mux2(sel_msb_first[bit], level[j], level[j + 1]));
            level = std::move(next);
        }
        return level.front();
    }

    void alias(const std::string& name, const std::string& src)
    {
        net_.gates.push_back(Gate{name, GateKind::Buf, {src}});
    }

private:
    Netlist& net_;
    std::unordered_map<std::string, std::string> cache_;
    std::uint64_t counter_ = 0;
};

} // namespace

LockedNetlist lower_to_gates(const Fabric& fabric)
{
    LockedNetlist locked;
    locked.key_bits = static_cast<int>(key_length(fabric));
    Netlist& net = locked.net;
    net.name = "fabric";

    for (int b = 0; b < locked.key_bits; ++b)
        net.inputs.push_back("keyinput" + std::to_string(b));
    std::vector<std::string> data;
    for (int i = 0; i < fabric.n_in; ++i)
        data.push_back("in" + std::to_string(i));
    net.inputs.insert(net.inputs.end(), data.begin(), data.end());

    NetBuilder build(net);

    int next_key = 0;
    auto take_keys = [&](int n) {
        std::vector<std::string> keys;
        keys.reserve(n);
        for (int i = 0; i < n; ++i)
            keys.push_back("keyinput" + std::to_string(next_key++));
        return keys;
    };

    std::vector<std::string> sources = data; // grows with each pole output
    for (int pole = 1; pole <= fabric.n_poles; ++pole) {
        int w = fabric.pin_select_widths[pole - 1];
        std::vector<std::string> pins;
        pins.reserve(fabric.k);
        for (int pin = 0; pin < fabric.k; ++pin)
            pins.push_back(build.mux_tree(sources, take_keys(w)));
        // LUT: 2^k table key bits selected by the pin values, pin 1 = MSB.
        std::vector<std::string> table = take_keys(1 << fabric.k);
        std::vector<std::string> level = std::move(table);
        for (int bit = fabric.k; bit-- > 0;) {
            std::vector<std::string> next;
            next.reserve(level.size() / 2);
            for (std::size_t j = 0; j + 1 < level.size(); j += 2)
                next.push_back(build.mux2(pins[bit], level[j], level[j + 1]));
            level = std::move(next);
        }
        std::string pole_out = "__gpole" + std::to_string(pole);
        build.alias(pole_out, level.front());
        sources.push_back(pole_out);
    }

    for (int o = 0; o < fabric.n_out; ++o) {
        std::string root = build.mux_tree(sources, take_keys(fabric.output_select_width));
        std::string name = "out" + std::to_string(o);
        build.alias(name, root);
        net.outputs.push_back(name);
    }

    if (next_key != locked.key_bits)
        throw InternalError("lower_to_gates: consumed " + std::to_string(next_key) +
                            " key bits, layout says " + std::to_string(locked.key_bits));
    validate(net);
    return locked;
}

namespace {

std::string rename_signal(Netlist& net, const std::string& from, const std::string& to)
{
    for (auto& g : net.gates) {
        if (g.output == from)
            g.output = to;
        for (auto& in : g.inputs)
            if (in == from)
                in = to;
    }
    for (auto& f : net.flops) {
        if (f.output == from)
            f.output = to;
        if (f.data == from)
            f.data = to;
    }
    for (auto& s : net.inputs)
        if (s == from)
            s = to;
    for (auto& s : net.outputs)
        if (s == from)
            s = to;
    return to;
}

} // namespace

Obfuscated obfuscate(const Netlist& net, int k, int pole_slack, std::uint64_t seed,
                     LutMapMode lut_mode)
{
    if (!net.is_combinational())
        throw InputError("obfuscate: netlist must be combinational (unroll first)");
    if (pole_slack < 0)
        throw InputError("obfuscate: pole_slack must be >= 0");
    for (const auto& s : net.inputs)
        if (std::regex_match(s, kKeyInputRe))
            throw InputError("obfuscate: input name " + s + " collides with key naming");

    LutNetlist mapped = map_to_luts(net, k, lut_mode);
    int n_poles = static_cast<int>(mapped.luts.size()) + pole_slack;
    if (n_poles < 1)
        n_poles = 1;
    Fabric fabric =
        build_fabric(static_cast<int>(net.inputs.size()),
                     static_cast<int>(net.outputs.size()), n_poles, k);

    Obfuscated result;
    result.fabric = fabric;
    result.key = program(fabric, mapped, seed);
    result.locked = lower_to_gates(fabric);
    result.locked.net.name = net.name.empty() ? "locked" : net.name + "_uc";

    // Rename the generic in%d/out%d ports back to the source names. Done in
    // two phases through reserved temporaries so a source input that is
    // itself called "in1" cannot be clobbered mid-rename. A PO that taps a
    // PI keeps its generated name (pairing stays positional).
    for (std::size_t i = 0; i < net.inputs.size(); ++i)
        rename_signal(result.locked.net, "in" + std::to_string(i),
                      "__gport_i" + std::to_string(i));
    for (std::size_t o = 0; o < net.outputs.size(); ++o)
        rename_signal(result.locked.net, "out" + std::to_string(o),
                      "__gport_o" + std::to_string(o));

    std::unordered_set<std::string> used;
    for (const auto& g : result.locked.net.gates)
        used.insert(g.output);
    for (const auto& s : result.locked.net.inputs)
        used.insert(s);

    for (std::size_t i = 0; i < net.inputs.size(); ++i) {
        if (used.count(net.inputs[i]))
            throw InputError("obfuscate: input name " + net.inputs[i] +
                             " collides with generated fabric names");
        used.insert(net.inputs[i]);
        rename_signal(result.locked.net, "__gport_i" + std::to_string(i), net.inputs[i]);
    }
    for (std::size_t o = 0; o < net.outputs.size(); ++o) {
        std::string target = net.outputs[o];
        if (used.count(target))
            target = "__gpo" + std::to_string(o);
        used.insert(target);
        rename_signal(result.locked.net, "__gport_o" + std::to_string(o), target);
    }
    return result;
}

std::string fabric_to_json(const Fabric& fabric)
{
    nlohmann::ordered_json j;
    j["n_in"] = fabric.n_in;
    j["n_out"] = fabric.n_out;
    j["n_poles"] = fabric.n_poles;
    j["k"] = fabric.k;
    j["pin_select_widths"] = fabric.pin_select_widths;
    j["output_select_width"] = fabric.output_select_width;
    j["key_length"] = key_length(fabric);
    return j.dump(2) + "\n";
}

Fabric fabric_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("fabric descriptor: ") + e.what());
    }
    Fabric f = build_fabric(j.at("n_in").get<int>(), j.at("n_out").get<int>(),
                            j.at("n_poles").get<int>(), j.at("k").get<int>());
    if (j.contains("key_length") && j["key_length"].get<std::int64_t>() != key_length(f))
        throw InputError("fabric descriptor: key_length does not match the shape");
    return f;
}

namespace {

KeyGateLock lock_with_gates(const Netlist& net, int bits, std::uint64_t seed, bool xor_style)
{
    if (bits < 1)
        throw InputError("lock_with_key_gates: need at least one key bit");
    if (net.gates.empty())
        throw InputError("lock_with_key_gates: netlist has no gates to lock");
    validate(net);

    KeyGateLock out;
    out.locked.key_bits = bits;
    Netlist& locked = out.locked.net;
    locked.name = net.name.empty() ? "keygate" : net.name + "_kg";
    for (int b = 0; b < bits; ++b)
        locked.inputs.push_back("keyinput" + std::to_string(b));
    for (const auto& s : net.inputs) {
        if (std::regex_match(s, kKeyInputRe))
            throw InputError("lock_with_key_gates: input " + s + " collides with key naming");
        locked.inputs.push_back(s);
    }
    locked.outputs = net.outputs;
    locked.gates = net.gates;
    locked.flops = net.flops;

    std::mt19937_64 rng(seed);
    NameGen names(locked);

    for (int b = 0; b < bits; ++b) {
        std::size_t target = rng() % locked.gates.size();
        const std::string victim = locked.gates[target].output;
        std::string replacement = names.fresh();

        bool key_value;
        GateKind kind;
        if (xor_style) {
            key_value = (rng() & 1) != 0;
            kind = key_value ? GateKind::Xnor : GateKind::Xor;
        } else {
            bool use_and = (rng() & 1) != 0;
            kind = use_and ? GateKind::And : GateKind::Or;
            key_value = use_and; // AND is neutral at 1, OR at 0
        }
        out.key.bits.push_back(key_value);

        // Insert between the victim signal and all of its sinks.
        for (auto& g : locked.gates)
            for (auto& in : g.inputs)
                if (in == victim)
                    in = replacement;
        for (auto& f : locked.flops)
            if (f.data == victim)
                f.data = replacement;
        for (auto& o : locked.outputs)
            if (o == victim)
                o = replacement;
        locked.gates.push_back(
            Gate{replacement, kind, {victim, "keyinput" + std::to_string(b)}});
    }

    auto order = topo_order(locked);
    std::vector<Gate> sorted;
    sorted.reserve(locked.gates.size());
    for (auto idx : order)
        sorted.push_back(std::move(locked.gates[idx]));
    locked.gates = std::move(sorted);
    validate(locked);
    return out;
}

} // namespace

KeyGateLock lock_with_key_gates(const Netlist& net, int bits, std::uint64_t seed)
{
    return lock_with_gates(net, bits, seed, false);
}

KeyGateLock lock_with_xor_key_gates(const Netlist& net, int bits, std::uint64_t seed)
{
    return lock_with_gates(net, bits, seed, true);
}

} // namespace uclock
