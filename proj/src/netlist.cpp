#include "uclock/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <queue>
#include <sstream>

namespace uclock {

const char* gate_kind_name(GateKind kind)
{
    switch (kind) {
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::Nand: return "NAND";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Not: return "NOT";
    case GateKind::Buf: return "BUF";
    case GateKind::Const0: return "CONST0";
    case GateKind::Const1: return "CONST1";
    case GateKind::Mux2: return "MUX2";
    }
    return "?";
}

int gate_arity(GateKind kind)
{
    switch (kind) {
    case GateKind::Not:
    case GateKind::Buf: return 1;
    case GateKind::Const0:
    case GateKind::Const1: return 0;
    case GateKind::Mux2: return 3;
    default: return 2;
    }
}

bool eval_gate(GateKind kind, const std::vector<bool>& in)
{
    switch (kind) {
    case GateKind::And: return in[0] && in[1];
    case GateKind::Or: return in[0] || in[1];
    case GateKind::Nand: return !(in[0] && in[1]);
    case GateKind::Nor: return !(in[0] || in[1]);
    case GateKind::Xor: return in[0] != in[1];
    case GateKind::Xnor: return in[0] == in[1];
    case GateKind::Not: return !in[0];
    case GateKind::Buf: return in[0];
    case GateKind::Const0: return false;
    case GateKind::Const1: return true;
    case GateKind::Mux2: return in[0] ? in[2] : in[1];
    }
    throw InternalError("eval_gate: bad kind");
}

namespace {

std::optional<GateKind> kind_from_name(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (s == "AND") return GateKind::And;
    if (s == "OR") return GateKind::Or;
    if (s == "NAND") return GateKind::Nand;
    if (s == "NOR") return GateKind::Nor;
    if (s == "XOR") return GateKind::Xor;
    if (s == "XNOR") return GateKind::Xnor;
    if (s == "NOT" || s == "INV") return GateKind::Not;
    if (s == "BUF" || s == "BUFF") return GateKind::Buf;
    if (s == "CONST0") return GateKind::Const0;
    if (s == "CONST1") return GateKind::Const1;
    if (s == "MUX2" || s == "MUX") return GateKind::Mux2;
    return std::nullopt;
}

struct BenchLine {
    enum class Kind { Input, Output, Dff, Gate } kind;
    std::string lhs;
    std::string gate_name;
    std::vector<std::string> args;
};

bool is_name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
           c == '[' || c == ']' || c == '$' || c == ':' || c == '/' || c == '\\';
}

class LineScanner {
public:
    LineScanner(const std::string& text, int line_no) : s_(text), line_(line_no) {}

    void skip_ws()
    {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t'))
            ++pos_;
    }
    bool eof()
    {
        skip_ws();
        return pos_ >= s_.size();
    }
    bool accept(char c)
    {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c)
    {
        if (!accept(c))
            throw ParseError(std::string("expected '") + c + "'", line_);
    }
    std::string name()
    {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && is_name_char(s_[pos_]))
            ++pos_;
        if (pos_ == start)
            throw ParseError("expected a signal or gate name", line_);
        return s_.substr(start, pos_ - start);
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
};

std::optional<BenchLine> scan_line(std::string raw, int line_no)
{
    if (auto hash = raw.find('#'); hash != std::string::npos)
        raw.resize(hash);
    while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ' || raw.back() == '\t'))
        raw.pop_back();

    LineScanner sc(raw, line_no);
    if (sc.eof())
        return std::nullopt;

    BenchLine out;
    std::string first = sc.name();
    std::string upper = first;
    for (auto& c : upper)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));

    if ((upper == "INPUT" || upper == "OUTPUT") && sc.accept('(')) {
        out.kind = upper == "INPUT" ? BenchLine::Kind::Input : BenchLine::Kind::Output;
        out.lhs = sc.name();
        sc.expect(')');
        if (!sc.eof())
            throw ParseError("trailing text after port declaration", line_no);
        return out;
    }

    out.lhs = first;
    sc.expect('=');
    out.gate_name = sc.name();
    sc.expect('(');
    if (!sc.accept(')')) {
        out.args.push_back(sc.name());
        while (sc.accept(','))
            out.args.push_back(sc.name());
        sc.expect(')');
    }
    if (!sc.eof())
        throw ParseError("trailing text after gate definition", line_no);

    std::string gate_upper = out.gate_name;
    for (auto& c : gate_upper)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out.kind = gate_upper == "DFF" ? BenchLine::Kind::Dff : BenchLine::Kind::Gate;
    return out;
}

// Splits an n-ary associative gate into a 2-input tree, keeping the
// inversion (NAND/NOR/XNOR) at the root only.
void decompose_wide(const std::string& lhs, GateKind kind, const std::vector<std::string>& args,
                    int line_no, NameGen& names, std::vector<Gate>& out)
{
    GateKind tree_kind;
    switch (kind) {
    case GateKind::And:
    case GateKind::Nand: tree_kind = GateKind::And; break;
    case GateKind::Or:
    case GateKind::Nor: tree_kind = GateKind::Or; break;
    case GateKind::Xor:
    case GateKind::Xnor: tree_kind = GateKind::Xor; break;
    default:
        throw ParseError(std::string(gate_kind_name(kind)) + " takes exactly " +
                             std::to_string(gate_arity(kind)) + " inputs",
                         line_no);
    }

    std::string acc = args[0];
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
        std::string t = names.fresh();
        out.push_back(Gate{t, tree_kind, {acc, args[i]}});
        acc = t;
    }
    out.push_back(Gate{lhs, kind, {acc, args.back()}});
}

} // namespace

NameGen::NameGen(const Netlist& net)
{
    for (const auto& s : net.inputs)
        used_.insert(s);
    for (const auto& g : net.gates)
        used_.insert(g.output);
    for (const auto& f : net.flops)
        used_.insert(f.output);
}

NameGen::NameGen(const std::vector<std::string>& used)
{
    for (const auto& s : used)
        used_.insert(s);
}

std::string NameGen::fresh(const std::string& stem)
{
    for (;;) {
        std::string candidate = "__g" + (stem.empty() ? "" : stem + "_") + std::to_string(counter_++);
        if (used_.insert(candidate).second)
            return candidate;
    }
}

SignalIndex::SignalIndex(const Netlist& net)
{
    int next = 0;
    auto add = [&](const std::string& name) {
        if (!index_.emplace(name, next).second)
            throw InputError("duplicate signal definition: " + name);
        ++next;
    };
    for (const auto& s : net.inputs)
        add(s);
    for (const auto& f : net.flops)
        add(f.output);
    for (const auto& g : net.gates)
        add(g.output);
}

int SignalIndex::lookup(const std::string& name) const
{
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

Netlist parse_bench(std::istream& in, const std::string& name)
{
    Netlist net;
    net.name = name;

    std::vector<std::string> defined; // everything that gets a definition, for NameGen
    std::string line;
    int line_no = 0;

    struct PendingGate {
        BenchLine line;
        int line_no;
    };
    std::vector<PendingGate> pending;

    while (std::getline(in, line)) {
        ++line_no;
        auto parsed = scan_line(line, line_no);
        if (!parsed)
            continue;
        switch (parsed->kind) {
        case BenchLine::Kind::Input:
            net.inputs.push_back(parsed->lhs);
            defined.push_back(parsed->lhs);
            break;
        case BenchLine::Kind::Output:
            net.outputs.push_back(parsed->lhs);
            break;
        case BenchLine::Kind::Dff:
            if (parsed->args.size() != 1)
                throw ParseError("DFF takes exactly one input", line_no);
            net.flops.push_back(Flop{parsed->lhs, parsed->args[0]});
            defined.push_back(parsed->lhs);
            break;
        case BenchLine::Kind::Gate:
            defined.push_back(parsed->lhs);
            pending.push_back(PendingGate{*parsed, line_no});
            break;
        }
    }

    NameGen names(defined);
    for (const auto& p : pending) {
        auto kind = kind_from_name(p.line.gate_name);
        if (!kind)
            throw ParseError("unknown gate kind: " + p.line.gate_name, p.line_no);
        int arity = gate_arity(*kind);
        int got = static_cast<int>(p.line.args.size());
        if (got == arity) {
            net.gates.push_back(Gate{p.line.lhs, *kind, p.line.args});
        } else if (got > 2 && arity == 2) {
            decompose_wide(p.line.lhs, *kind, p.line.args, p.line_no, names, net.gates);
        } else {
            throw ParseError(std::string(gate_kind_name(*kind)) + " takes " +
                                 std::to_string(arity) + " inputs, got " + std::to_string(got),
                             p.line_no);
        }
    }

    validate(net);

    // Topological repair: keep the gate list sorted so downstream passes can
    // walk it front to back.
    auto order = topo_order(net);
    std::vector<Gate> sorted;
    sorted.reserve(net.gates.size());
    for (auto idx : order)
        sorted.push_back(std::move(net.gates[idx]));
    net.gates = std::move(sorted);
    return net;
}

Netlist parse_bench_string(const std::string& text, const std::string& name)
{
    std::istringstream in(text);
    return parse_bench(in, name);
}

Netlist parse_bench_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open netlist file: " + path);
    std::string name = path;
    if (auto slash = name.find_last_of("/\\"); slash != std::string::npos)
        name = name.substr(slash + 1);
    if (auto dot = name.rfind('.'); dot != std::string::npos)
        name = name.substr(0, dot);
    return parse_bench(in, name);
}

std::string serialize_bench(const Netlist& net)
{
    std::ostringstream out;
    if (!net.name.empty())
        out << "# " << net.name << "\n";
    for (const auto& s : net.inputs)
        out << "INPUT(" << s << ")\n";
    for (const auto& s : net.outputs)
        out << "OUTPUT(" << s << ")\n";
    for (const auto& f : net.flops)
        out << f.output << " = DFF(" << f.data << ")\n";
    for (const auto& g : net.gates) {
        out << g.output << " = " << gate_kind_name(g.kind) << "(";
        for (std::size_t i = 0; i < g.inputs.size(); ++i)
            out << (i ? ", " : "") << g.inputs[i];
        out << ")\n";
    }
    return out.str();
}

void write_bench_file(const Netlist& net, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write netlist file: " + path);
    out << serialize_bench(net);
}

void validate(const Netlist& net)
{
    SignalIndex index(net); // throws on duplicates

    for (const auto& g : net.gates) {
        if (static_cast<int>(g.inputs.size()) != gate_arity(g.kind))
            throw InputError("gate " + g.output + ": " + gate_kind_name(g.kind) + " takes " +
                             std::to_string(gate_arity(g.kind)) + " inputs, got " +
                             std::to_string(g.inputs.size()));
        for (const auto& in : g.inputs)
            if (!index.contains(in))
                throw InputError("gate " + g.output + " reads undefined signal " + in);
    }
    for (const auto& f : net.flops)
        if (!index.contains(f.data))
            throw InputError("flop " + f.output + " reads undefined signal " + f.data);
    for (const auto& o : net.outputs)
        if (!index.contains(o))
            throw InputError("output references undefined signal " + o);

    topo_order(net); // throws on combinational cycles
}

std::vector<std::size_t> topo_order(const Netlist& net)
{
    // Kahn's algorithm; the ready set is a min-heap on declaration index so
    // ties resolve to declaration order.
    std::unordered_map<std::string, std::size_t> producer;
    for (std::size_t i = 0; i < net.gates.size(); ++i)
        producer.emplace(net.gates[i].output, i);

    std::vector<int> missing(net.gates.size(), 0);
    std::vector<std::vector<std::size_t>> sinks(net.gates.size());
    for (std::size_t i = 0; i < net.gates.size(); ++i) {
        for (const auto& in : net.gates[i].inputs) {
            auto it = producer.find(in);
            if (it != producer.end()) {
                ++missing[i];
                sinks[it->second].push_back(i);
            }
        }
    }

    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < net.gates.size(); ++i)
        if (missing[i] == 0)
            ready.push(i);

    std::vector<std::size_t> order;
    order.reserve(net.gates.size());
    while (!ready.empty()) {
        std::size_t i = ready.top();
        ready.pop();
        order.push_back(i);
        for (auto s : sinks[i])
            if (--missing[s] == 0)
                ready.push(s);
    }

    if (order.size() != net.gates.size()) {
        // Walk the leftover subgraph to name one cycle for the error message.
        std::vector<bool> placed(net.gates.size(), false);
        for (auto i : order)
            placed[i] = true;
        std::size_t start = 0;
        while (placed[start])
            ++start;
        std::vector<std::string> cycle;
        std::unordered_map<std::string, bool> seen;
        std::size_t cur = start;
        while (!seen[net.gates[cur].output]) {
            seen[net.gates[cur].output] = true;
            cycle.push_back(net.gates[cur].output);
            for (const auto& in : net.gates[cur].inputs) {
                auto it = producer.find(in);
                if (it != producer.end() && !placed[it->second]) {
                    cur = it->second;
                    break;
                }
            }
        }
        std::string msg = "combinational cycle involving:";
        for (const auto& s : cycle)
            msg += " " + s;
        throw InputError(msg);
    }
    return order;
}

Simulator::Simulator(const Netlist& net)
{
    SignalIndex index(net);
    num_inputs_ = net.inputs.size();
    num_slots_ = net.num_signals();
    values_.assign(num_slots_, 0);

    auto order = topo_order(net);
    ops_.reserve(order.size());
    for (auto gi : order) {
        const Gate& g = net.gates[gi];
        Op op{};
        op.kind = g.kind;
        op.out = index.lookup(g.output);
        for (std::size_t j = 0; j < 3; ++j)
            op.in[j] = j < g.inputs.size() ? index.lookup(g.inputs[j]) : -1;
        ops_.push_back(op);
    }
    for (const auto& o : net.outputs)
        output_slots_.push_back(index.lookup(o));
    for (const auto& f : net.flops) {
        flop_names_.push_back(f.output);
        flop_slots_.push_back(index.lookup(f.output));
        flop_data_slots_.push_back(index.lookup(f.data));
    }
}

SimResult Simulator::step(const InputVector& pi, const FlopState& state) const
{
    if (pi.size() != num_inputs_)
        throw InputError("input vector length " + std::to_string(pi.size()) +
                         " does not match " + std::to_string(num_inputs_) + " primary inputs");
    for (std::size_t i = 0; i < pi.size(); ++i)
        values_[i] = pi[i] ? 1 : 0;
    for (std::size_t f = 0; f < flop_names_.size(); ++f) {
        auto it = state.find(flop_names_[f]);
        if (it == state.end())
            throw InputError("missing state for flop " + flop_names_[f]);
        values_[flop_slots_[f]] = it->second ? 1 : 0;
    }

    for (const Op& op : ops_) {
        uint8_t a = op.in[0] >= 0 ? values_[op.in[0]] : 0;
        uint8_t b = op.in[1] >= 0 ? values_[op.in[1]] : 0;
        uint8_t v = 0;
        switch (op.kind) {
        case GateKind::And: v = a & b; break;
        case GateKind::Or: v = a | b; break;
        case GateKind::Nand: v = 1 ^ (a & b); break;
        case GateKind::Nor: v = 1 ^ (a | b); break;
        case GateKind::Xor: v = a ^ b; break;
        case GateKind::Xnor: v = 1 ^ a ^ b; break;
        case GateKind::Not: v = 1 ^ a; break;
        case GateKind::Buf: v = a; break;
        case GateKind::Const0: v = 0; break;
        case GateKind::Const1: v = 1; break;
        case GateKind::Mux2: v = a ? values_[op.in[2]] : b; break;
        }
        values_[op.out] = v;
    }

    SimResult res;
    res.outputs.reserve(output_slots_.size());
    for (auto slot : output_slots_)
        res.outputs.push_back(values_[slot] != 0);
    for (std::size_t f = 0; f < flop_names_.size(); ++f)
        res.next_state[flop_names_[f]] = values_[flop_data_slots_[f]] != 0;
    return res;
}

OutputVector Simulator::eval(const InputVector& pi) const
{
    if (!flop_names_.empty())
        throw InputError("eval() requires a combinational netlist");
    return step(pi, {}).outputs;
}

SimResult simulate(const Netlist& net, const InputVector& pi, const FlopState& state)
{
    return Simulator(net).step(pi, state);
}

std::string canonical_bench(const Netlist& net)
{
    std::unordered_map<std::string, std::string> rename;
    for (std::size_t i = 0; i < net.inputs.size(); ++i)
        rename[net.inputs[i]] = "i" + std::to_string(i);
    for (std::size_t i = 0; i < net.flops.size(); ++i)
        rename[net.flops[i].output] = "f" + std::to_string(i);

    auto order = topo_order(net);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        rename[net.gates[order[pos]].output] = "n" + std::to_string(pos);

    std::ostringstream out;
    out << "inputs " << net.inputs.size() << "\n";
    for (const auto& o : net.outputs)
        out << "output " << rename.at(o) << "\n";
    for (const auto& f : net.flops)
        out << rename.at(f.output) << " dff " << rename.at(f.data) << "\n";
    for (auto gi : order) {
        const Gate& g = net.gates[gi];
        out << rename.at(g.output) << " " << gate_kind_name(g.kind);
        for (const auto& in : g.inputs)
            out << " " << rename.at(in);
        out << "\n";
    }
    return out.str();
}

} // namespace uclock
