#include "uclock/transform.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace uclock {

namespace {

void check_fresh(std::unordered_set<std::string>& used, const std::string& name)
{
    if (!used.insert(name).second)
        throw InputError("unroll: generated name collides with existing signal: " + name);
}

} // namespace

Netlist unroll(const Netlist& net, int frames)
{
    if (frames < 1)
        throw InputError("unroll: frame count must be >= 1");
    validate(net);

    Netlist out;
    out.name = net.name.empty() ? "" : net.name + "_x" + std::to_string(frames);

    std::unordered_set<std::string> used;

    // Ports: PIs frame-major, then the initial-state block.
    for (int t = 1; t <= frames; ++t)
        for (const auto& pi : net.inputs) {
            std::string n = pi + "__f" + std::to_string(t);
            check_fresh(used, n);
            out.inputs.push_back(n);
        }
    for (const auto& f : net.flops) {
        std::string n = f.output + "__init";
        check_fresh(used, n);
        out.inputs.push_back(n);
    }

    // rename[t-1]: signal name in the source -> signal name in frame t
    std::vector<std::unordered_map<std::string, std::string>> rename(frames);
    for (int t = 1; t <= frames; ++t) {
        auto& map = rename[t - 1];
        for (const auto& pi : net.inputs)
            map[pi] = pi + "__f" + std::to_string(t);
        for (const auto& f : net.flops)
            map[f.output] = t == 1 ? f.output + "__init" : rename[t - 2].at(f.data);
        for (const auto& g : net.gates) {
            std::string n = g.output + "__f" + std::to_string(t);
            check_fresh(used, n);
            map[g.output] = n;
        }
        for (const auto& g : net.gates) {
            Gate copy = g;
            copy.output = map.at(g.output);
            for (auto& in : copy.inputs)
                in = map.at(in);
            out.gates.push_back(std::move(copy));
        }
    }

    // POs frame-major; add a BUF when the frame copy of the referenced signal
    // does not already carry the port name (PO tapping a PI or flop).
    for (int t = 1; t <= frames; ++t)
        for (const auto& po : net.outputs) {
            std::string want = po + "__f" + std::to_string(t);
            const std::string& have = rename[t - 1].at(po);
            if (have != want) {
                check_fresh(used, want);
                out.gates.push_back(Gate{want, GateKind::Buf, {have}});
            }
            out.outputs.push_back(want);
        }
    for (const auto& f : net.flops) {
        std::string want = f.output + "__final";
        check_fresh(used, want);
        out.gates.push_back(Gate{want, GateKind::Buf, {rename[frames - 1].at(f.data)}});
        out.outputs.push_back(want);
    }

    validate(out);
    return out;
}

namespace {

struct SinkRef {
    int gate;  // index into gates, or -1 for a flop
    int flop;  // index into flops when gate == -1
    int pin;
};

std::unordered_map<std::string, std::vector<SinkRef>> collect_sinks(const Netlist& net)
{
    std::unordered_map<std::string, std::vector<SinkRef>> sinks;
    for (std::size_t g = 0; g < net.gates.size(); ++g)
        for (std::size_t p = 0; p < net.gates[g].inputs.size(); ++p)
            sinks[net.gates[g].inputs[p]].push_back(
                SinkRef{static_cast<int>(g), -1, static_cast<int>(p)});
    for (std::size_t f = 0; f < net.flops.size(); ++f)
        sinks[net.flops[f].data].push_back(SinkRef{-1, static_cast<int>(f), 0});
    return sinks;
}

} // namespace

int max_fanout(const Netlist& net)
{
    int best = 0;
    for (const auto& [sig, refs] : collect_sinks(net))
        best = std::max(best, static_cast<int>(refs.size()));
    return best;
}

Netlist bound_fanout(const Netlist& net, int limit)
{
    if (limit < 2)
        throw InputError("bound_fanout: limit must be >= 2");
    validate(net);

    Netlist out = net;
    NameGen names(out);

    auto retarget = [&](const SinkRef& ref, const std::string& signal) {
        if (ref.gate >= 0)
            out.gates[ref.gate].inputs[ref.pin] = signal;
        else
            out.flops[ref.flop].data = signal;
    };

    std::vector<Gate> buffers;

    // Balanced split: a driver keeps at most `limit` children; overflow goes
    // through fresh BUFs, each recursively serving a near-equal share.
    std::function<void(const std::string&, const std::vector<SinkRef>&)> distribute =
        [&](const std::string& driver, const std::vector<SinkRef>& refs) {
            if (static_cast<int>(refs.size()) <= limit) {
                for (const auto& r : refs)
                    retarget(r, driver);
                return;
            }
            std::size_t groups = static_cast<std::size_t>(limit);
            std::size_t base = refs.size() / groups, extra = refs.size() % groups;
            std::size_t pos = 0;
            for (std::size_t g = 0; g < groups; ++g) {
                std::size_t take = base + (g < extra ? 1 : 0);
                std::vector<SinkRef> part(refs.begin() + pos, refs.begin() + pos + take);
                pos += take;
                if (part.size() == 1) {
                    retarget(part[0], driver);
                } else {
                    std::string buf = names.fresh();
                    buffers.push_back(Gate{buf, GateKind::Buf, {driver}});
                    distribute(buf, part);
                }
            }
        };

    // Deterministic signal order: inputs, flop outputs, gate outputs as declared.
    std::vector<std::string> drivers;
    for (const auto& s : net.inputs)
        drivers.push_back(s);
    for (const auto& f : net.flops)
        drivers.push_back(f.output);
    for (const auto& g : net.gates)
        drivers.push_back(g.output);

    auto sinks = collect_sinks(net);
    for (const auto& d : drivers) {
        auto it = sinks.find(d);
        if (it != sinks.end() && static_cast<int>(it->second.size()) > limit)
            distribute(d, it->second);
    }

    // Buffers feed already-placed gates, so append then re-sort.
    for (auto& b : buffers)
        out.gates.push_back(std::move(b));
    auto order = topo_order(out);
    std::vector<Gate> sorted;
    sorted.reserve(out.gates.size());
    for (auto idx : order)
        sorted.push_back(std::move(out.gates[idx]));
    out.gates = std::move(sorted);

    validate(out);
    return out;
}

namespace {

// Truth table of one gate over its distinct support (first occurrence order).
Lut wrap_gate(const Gate& g, const std::vector<std::string>& net_inputs)
{
    Lut lut;
    lut.output = g.output;

    if (g.kind == GateKind::Const0 || g.kind == GateKind::Const1) {
        if (net_inputs.empty())
            throw InputError("map_to_luts: constant gate in a netlist without primary inputs");
        lut.inputs = {net_inputs.front()};
        lut.truth_table = {g.kind == GateKind::Const1, g.kind == GateKind::Const1};
        return lut;
    }

    std::vector<int> positions; // gate pin -> support position
    for (const auto& in : g.inputs) {
        auto it = std::find(lut.inputs.begin(), lut.inputs.end(), in);
        if (it == lut.inputs.end()) {
            lut.inputs.push_back(in);
            positions.push_back(static_cast<int>(lut.inputs.size()) - 1);
        } else {
            positions.push_back(static_cast<int>(it - lut.inputs.begin()));
        }
    }

    std::size_t n = lut.inputs.size();
    lut.truth_table.resize(std::size_t{1} << n);
    for (std::size_t row = 0; row < lut.truth_table.size(); ++row) {
        std::vector<bool> support(n);
        for (std::size_t j = 0; j < n; ++j)
            support[j] = (row >> (n - 1 - j)) & 1;
        std::vector<bool> pins(g.inputs.size());
        for (std::size_t p = 0; p < pins.size(); ++p)
            pins[p] = support[positions[p]];
        lut.truth_table[row] = eval_gate(g.kind, pins);
    }
    return lut;
}

bool eval_lut(const Lut& lut, const std::vector<bool>& values)
{
    return lut.truth_table[lut_row(lut, values)];
}

// Substitutes `driver` into `sink` at every occurrence of driver.output.
Lut merge_luts(const Lut& sink, const Lut& driver, int k)
{
    Lut merged;
    merged.output = sink.output;
    for (const auto& in : sink.inputs)
        if (in != driver.output)
            merged.inputs.push_back(in);
    for (const auto& in : driver.inputs)
        if (std::find(merged.inputs.begin(), merged.inputs.end(), in) == merged.inputs.end())
            merged.inputs.push_back(in);
    if (static_cast<int>(merged.inputs.size()) > k)
        return Lut{}; // caller checks for empty output

    std::size_t n = merged.inputs.size();
    merged.truth_table.resize(std::size_t{1} << n);
    for (std::size_t row = 0; row < merged.truth_table.size(); ++row) {
        std::vector<bool> vals(n);
        for (std::size_t j = 0; j < n; ++j)
            vals[j] = (row >> (n - 1 - j)) & 1;
        auto value_of = [&](const std::string& sig) {
            auto it = std::find(merged.inputs.begin(), merged.inputs.end(), sig);
            return vals[static_cast<std::size_t>(it - merged.inputs.begin())];
        };
        std::vector<bool> driver_vals;
        for (const auto& in : driver.inputs)
            driver_vals.push_back(value_of(in));
        bool drv = eval_lut(driver, driver_vals);
        std::vector<bool> sink_vals;
        for (const auto& in : sink.inputs)
            sink_vals.push_back(in == driver.output ? drv : value_of(in));
        merged.truth_table[row] = eval_lut(sink, sink_vals);
    }
    return merged;
}

} // namespace

std::size_t lut_row(const Lut& lut, const std::vector<bool>& values)
{
    std::size_t row = 0;
    for (std::size_t j = 0; j < lut.inputs.size(); ++j)
        row = (row << 1) | (values[j] ? 1 : 0);
    return row;
}

LutNetlist map_to_luts(const Netlist& net, int k, LutMapMode mode)
{
    if (k < 2)
        throw InputError("map_to_luts: k must be >= 2");
    if (!net.is_combinational())
        throw InputError("map_to_luts: netlist must be combinational (unroll first)");
    validate(net);

    // MUX2 does not fit a 2-input LUT; decompose any gate wider than k.
    Netlist prepared = net;
    if (k < 3) {
        std::vector<Gate> gates;
        NameGen names(prepared);
        for (const auto& g : prepared.gates) {
            if (g.kind != GateKind::Mux2) {
                gates.push_back(g);
                continue;
            }
            std::string nsel = names.fresh();
            std::string lo = names.fresh();
            std::string hi = names.fresh();
            gates.push_back(Gate{nsel, GateKind::Not, {g.inputs[0]}});
            gates.push_back(Gate{lo, GateKind::And, {nsel, g.inputs[1]}});
            gates.push_back(Gate{hi, GateKind::And, {g.inputs[0], g.inputs[2]}});
            gates.push_back(Gate{g.output, GateKind::Or, {lo, hi}});
        }
        prepared.gates = std::move(gates);
    }

    LutNetlist out;
    out.name = prepared.name;
    out.inputs = prepared.inputs;
    out.outputs = prepared.outputs;

    auto order = topo_order(prepared);
    for (auto gi : order)
        out.luts.push_back(wrap_gate(prepared.gates[gi], prepared.inputs));

    if (mode == LutMapMode::Greedy) {
        std::unordered_set<std::string> po(out.outputs.begin(), out.outputs.end());
        bool changed = true;
        while (changed) {
            changed = false;
            std::unordered_map<std::string, int> fanout;
            for (const auto& l : out.luts)
                for (const auto& in : l.inputs)
                    ++fanout[in];

            std::unordered_map<std::string, std::size_t> by_output;
            for (std::size_t i = 0; i < out.luts.size(); ++i)
                by_output[out.luts[i].output] = i;

            for (std::size_t i = 0; i < out.luts.size() && !changed; ++i) {
                for (const auto& in : out.luts[i].inputs) {
                    auto it = by_output.find(in);
                    if (it == by_output.end())
                        continue; // primary input
                    if (fanout[in] != 1 || po.count(in))
                        continue;
                    Lut merged = merge_luts(out.luts[i], out.luts[it->second], k);
                    if (merged.output.empty())
                        continue;
                    std::size_t victim = it->second;
                    out.luts[i] = std::move(merged);
                    out.luts.erase(out.luts.begin() + static_cast<long>(victim));
                    changed = true;
                    break;
                }
            }
        }
    }
    return out;
}

OutputVector eval_luts(const LutNetlist& net, const InputVector& pi)
{
    if (pi.size() != net.inputs.size())
        throw InputError("eval_luts: input vector length mismatch");

    std::unordered_map<std::string, bool> values;
    for (std::size_t i = 0; i < pi.size(); ++i)
        values[net.inputs[i]] = pi[i];
    for (const auto& lut : net.luts) {
        std::vector<bool> vals;
        vals.reserve(lut.inputs.size());
        for (const auto& in : lut.inputs) {
            auto it = values.find(in);
            if (it == values.end())
                throw InputError("eval_luts: LUT " + lut.output + " reads undefined " + in);
            vals.push_back(it->second);
        }
        values[lut.output] = eval_lut(lut, vals);
    }

    OutputVector out;
    out.reserve(net.outputs.size());
    for (const auto& o : net.outputs) {
        auto it = values.find(o);
        if (it == values.end())
            throw InputError("eval_luts: undefined output signal " + o);
        out.push_back(it->second);
    }
    return out;
}

std::string lut_netlist_to_json(const LutNetlist& net)
{
    nlohmann::ordered_json j;
    j["name"] = net.name;
    j["inputs"] = net.inputs;
    j["outputs"] = net.outputs;
    j["luts"] = nlohmann::ordered_json::array();
    for (const auto& lut : net.luts) {
        nlohmann::ordered_json l;
        l["output"] = lut.output;
        l["inputs"] = lut.inputs;
        std::string bits;
        for (bool b : lut.truth_table)
            bits += b ? '1' : '0';
        l["truth_table"] = bits;
        j["luts"].push_back(std::move(l));
    }
    return j.dump(2);
}

} // namespace uclock
