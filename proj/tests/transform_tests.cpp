#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "uclock/transform.hpp"

using namespace uclock;

namespace {

Netlist load_s27()
{
    return parse_bench_file(std::string(UCLOCK_SOURCE_DIR) + "/benchmarks/s27.bench");
}

// Random-sample or exhaustive equivalence between two combinational nets
// with identical port counts (positional pairing).
void check_equivalent(const Netlist& a, const Netlist& b, int samples = 1000)
{
    Simulator sa(a), sb(b);
    REQUIRE(a.inputs.size() == b.inputs.size());
    REQUIRE(a.outputs.size() == b.outputs.size());
    std::size_t n = a.inputs.size();
    if (n <= 16) {
        for (std::uint64_t p = 0; p < (std::uint64_t{1} << n); ++p) {
            InputVector pi = test::pattern_bits(p, n);
            CHECK(sa.eval(pi) == sb.eval(pi));
        }
    } else {
        std::mt19937_64 rng(7);
        for (int s = 0; s < samples; ++s) {
            InputVector pi(n);
            for (auto&& bit : pi)
                bit = (rng() & 1) != 0;
            CHECK(sa.eval(pi) == sb.eval(pi));
        }
    }
}

} // namespace

TEST_CASE("unroll port counts for s27")
{
    Netlist s27 = load_s27();
    Netlist u10 = unroll(s27, 10);
    CHECK(u10.is_combinational());
    CHECK(u10.inputs.size() == 4 * 10 + 3);
    CHECK(u10.outputs.size() == 1 * 10 + 3);
    // frame-major PI order, then the __init block
    CHECK(u10.inputs[0] == "G0__f1");
    CHECK(u10.inputs[3] == "G3__f1");
    CHECK(u10.inputs[4] == "G0__f2");
    CHECK(u10.inputs[40] == "G5__init");
    CHECK(u10.outputs[0] == "G17__f1");
    CHECK(u10.outputs[10] == "G5__final");
}

TEST_CASE("unroll frame count formula holds for random sequential nets")
{
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Netlist net = test::random_sequential_circuit(3 + seed % 4, 12, 2, 1 + seed % 5, seed);
        for (int frames : {1, 2, 5}) {
            Netlist u = unroll(net, frames);
            CHECK(u.inputs.size() == net.inputs.size() * frames + net.flops.size());
            CHECK(u.outputs.size() == net.outputs.size() * frames + net.flops.size());
            validate(u);
        }
    }
}

TEST_CASE("unroll T=1 of a combinational net is the same function")
{
    Netlist net = test::random_circuit(5, 12, 3, 42);
    Netlist u = unroll(net, 1);
    CHECK(u.inputs.size() == net.inputs.size());
    for (std::uint64_t p = 0; p < 32; ++p) {
        InputVector pi = test::pattern_bits(p, 5);
        CHECK(Simulator(net).eval(pi) == Simulator(u).eval(pi));
    }
}

TEST_CASE("unrolled s27 matches sequential simulation over two frames")
{
    Netlist s27 = load_s27();
    Netlist u2 = unroll(s27, 2);
    Simulator useq(u2);
    Simulator ref(s27);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        InputVector pi1(4), pi2(4);
        FlopState st0;
        for (auto&& b : pi1)
            b = (rng() & 1) != 0;
        for (auto&& b : pi2)
            b = (rng() & 1) != 0;
        for (const auto& f : s27.flops)
            st0[f.output] = (rng() & 1) != 0;

        SimResult step1 = ref.step(pi1, st0);
        SimResult step2 = ref.step(pi2, step1.next_state);

        InputVector flat;
        flat.insert(flat.end(), pi1.begin(), pi1.end());
        flat.insert(flat.end(), pi2.begin(), pi2.end());
        for (const auto& f : s27.flops)
            flat.push_back(st0.at(f.output));
        OutputVector got = useq.eval(flat);

        CHECK(got[0] == step1.outputs[0]);
        CHECK(got[1] == step2.outputs[0]);
        for (std::size_t f = 0; f < s27.flops.size(); ++f)
            CHECK(got[2 + f] == step2.next_state.at(s27.flops[f].output));
    }
}

TEST_CASE("unroll rejects zero frames")
{
    CHECK_THROWS_AS(unroll(load_s27(), 0), InputError);
}

TEST_CASE("bound_fanout leaves compliant nets alone")
{
    Netlist net = parse_bench_string(
        "INPUT(a)\nINPUT(b)\nOUTPUT(y)\nu = AND(a,b)\nv = OR(u,a)\ny = XOR(u,v)\n");
    Netlist bounded = bound_fanout(net, 2);
    CHECK(bounded.gates.size() == net.gates.size());
}

TEST_CASE("bound_fanout splits a fan-out-5 signal at k=2")
{
    std::string text = "INPUT(a)\nINPUT(b)\n";
    text += "s = AND(a,b)\n";
    for (int i = 0; i < 5; ++i) {
        text += "t" + std::to_string(i) + " = NOT(s)\n";
        text += "OUTPUT(t" + std::to_string(i) + ")\n";
    }
    Netlist net = parse_bench_string(text);
    CHECK(max_fanout(net) == 5);
    Netlist bounded = bound_fanout(net, 2);
    CHECK(max_fanout(bounded) <= 2);
    check_equivalent(net, bounded);
}

TEST_CASE("bound_fanout audit on the s27 combinational core")
{
    Netlist core = unroll(load_s27(), 1);
    Netlist bounded = bound_fanout(core, 2);
    // brute-force sink count per signal
    std::map<std::string, int> sinks;
    for (const auto& g : bounded.gates)
        for (const auto& in : g.inputs)
            ++sinks[in];
    for (const auto& [sig, count] : sinks)
        CHECK(count <= 2);
    check_equivalent(core, bounded);
}

TEST_CASE("bound_fanout rejects k < 2")
{
    CHECK_THROWS_AS(bound_fanout(load_s27(), 1), InputError);
}

TEST_CASE("bound_fanout equivalence on random nets")
{
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        Netlist net = test::random_circuit(6, 20, 4, seed);
        for (int k : {2, 3}) {
            Netlist bounded = bound_fanout(net, k);
            CHECK(max_fanout(bounded) <= k);
            check_equivalent(net, bounded);
        }
    }
}

TEST_CASE("single AND becomes the textbook LUT")
{
    Netlist net = parse_bench_string("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a,b)\n");
    LutNetlist luts = map_to_luts(net, 2);
    REQUIRE(luts.luts.size() == 1);
    CHECK(luts.luts[0].inputs == std::vector<std::string>{"a", "b"});
    CHECK(luts.luts[0].truth_table == std::vector<bool>{false, false, false, true});
}

TEST_CASE("greedy merge folds NOT(AND) into one NAND table")
{
    Netlist net =
        parse_bench_string("INPUT(a)\nINPUT(b)\nOUTPUT(y)\nu = AND(a,b)\ny = NOT(u)\n");
    LutNetlist luts = map_to_luts(net, 2, LutMapMode::Greedy);
    REQUIRE(luts.luts.size() == 1);
    CHECK(luts.luts[0].truth_table == std::vector<bool>{true, true, true, false});
    for (std::uint64_t p = 0; p < 4; ++p) {
        InputVector pi = test::pattern_bits(p, 2);
        CHECK(eval_luts(luts, pi) == Simulator(net).eval(pi));
    }
}

TEST_CASE("per-gate mapping is one LUT per gate and equivalent")
{
    Netlist net = test::random_circuit(6, 20, 3, 77);
    LutNetlist luts = map_to_luts(net, 2);
    CHECK(luts.luts.size() == net.gates.size());
    for (std::uint64_t p = 0; p < 64; ++p) {
        InputVector pi = test::pattern_bits(p, 6);
        CHECK(eval_luts(luts, pi) == Simulator(net).eval(pi));
    }
}

TEST_CASE("greedy mapping stays equivalent and never grows")
{
    for (std::uint64_t seed = 30; seed < 36; ++seed) {
        Netlist net = test::random_circuit(5, 15, 2, seed);
        for (int k : {2, 3, 4}) {
            LutNetlist pg = map_to_luts(net, k);
            LutNetlist gr = map_to_luts(net, k, LutMapMode::Greedy);
            CHECK(gr.luts.size() <= pg.luts.size());
            for (const auto& lut : gr.luts)
                CHECK(lut.inputs.size() <= static_cast<std::size_t>(k));
            for (std::uint64_t p = 0; p < 32; ++p) {
                InputVector pi = test::pattern_bits(p, 5);
                CHECK(eval_luts(gr, pi) == Simulator(net).eval(pi));
            }
        }
    }
}

TEST_CASE("constants materialize as 1-input LUTs")
{
    Netlist net;
    net.inputs = {"a"};
    net.gates.push_back(Gate{"c1", GateKind::Const1, {}});
    net.gates.push_back(Gate{"y", GateKind::And, {"a", "c1"}});
    net.outputs = {"y", "c1"};
    LutNetlist luts = map_to_luts(net, 2);
    REQUIRE(luts.luts.size() == 2);
    CHECK(luts.luts[0].inputs == std::vector<std::string>{"a"});
    CHECK(luts.luts[0].truth_table == std::vector<bool>{true, true});
    CHECK(eval_luts(luts, {false}) == OutputVector{false, true});
    CHECK(eval_luts(luts, {true}) == OutputVector{true, true});
}

TEST_CASE("MUX2 decomposes under k=2 and wraps whole under k=3")
{
    Netlist net = parse_bench_string("INPUT(s)\nINPUT(p)\nINPUT(q)\nOUTPUT(y)\ny = MUX2(s,p,q)\n");
    LutNetlist k2 = map_to_luts(net, 2);
    for (const auto& lut : k2.luts)
        CHECK(lut.inputs.size() <= 2);
    LutNetlist k3 = map_to_luts(net, 3);
    CHECK(k3.luts.size() == 1);
    for (std::uint64_t p = 0; p < 8; ++p) {
        InputVector pi = test::pattern_bits(p, 3);
        CHECK(eval_luts(k2, pi) == Simulator(net).eval(pi));
        CHECK(eval_luts(k3, pi) == Simulator(net).eval(pi));
    }
}

TEST_CASE("map_to_luts rejects sequential input and bad k")
{
    Netlist s27 = load_s27();
    CHECK_THROWS_AS(map_to_luts(s27, 2), InputError);
    CHECK_THROWS_AS(map_to_luts(unroll(s27, 1), 1), InputError);
}

TEST_CASE("lut json dump carries the documented fields")
{
    Netlist net = parse_bench_string("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a,b)\n");
    std::string json = lut_netlist_to_json(map_to_luts(net, 2));
    CHECK(json.find("\"inputs\"") != std::string::npos);
    CHECK(json.find("\"outputs\"") != std::string::npos);
    CHECK(json.find("\"truth_table\": \"0001\"") != std::string::npos);
}
