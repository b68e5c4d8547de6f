#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>

#include "test_util.hpp"
#include "uclock/fabric.hpp"

using namespace uclock;

namespace {

Netlist xor2_circuit()
{
    return parse_bench_string("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = XOR(a,b)\n");
}

Netlist load_s27()
{
    return parse_bench_file(std::string(UCLOCK_SOURCE_DIR) + "/benchmarks/s27.bench");
}

// Exhaustive equivalence of a keyed locked netlist against a reference.
bool keyed_equivalent(const LockedNetlist& locked, const Bitstream& key, const Netlist& ref)
{
    LockedEval eval(locked);
    Simulator golden(ref);
    std::size_t n = eval.num_data_inputs();
    REQUIRE(n <= 16);
    for (std::uint64_t p = 0; p < (std::uint64_t{1} << n); ++p) {
        InputVector pi = test::pattern_bits(p, n);
        if (eval.eval(key, pi) != golden.eval(pi))
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("select widths follow the source counts")
{
    Fabric f1 = build_fabric(2, 1, 1, 2);
    CHECK(f1.pin_select_widths == std::vector<int>{1});
    CHECK(f1.output_select_width == 2);

    Fabric f2 = build_fabric(1, 1, 1, 2);
    CHECK(f2.pin_select_widths == std::vector<int>{0}); // single source, pins hardwired
    CHECK(f2.output_select_width == 1);

    Fabric f3 = build_fabric(4, 1, 3, 2);
    CHECK(f3.pin_select_widths == std::vector<int>{2, 3, 3});
    CHECK(f3.output_select_width == 3);
}

TEST_CASE("key length formula")
{
    CHECK(key_length(build_fabric(2, 1, 1, 2)) == 8);  // 2*1 + 4 + 1*2
    CHECK(key_length(build_fabric(1, 1, 1, 2)) == 5);  // 0 + 4 + 1*1
    CHECK(key_length(build_fabric(4, 1, 3, 2)) == 31); // 2*(2+3+3) + 3*4 + 3
}

TEST_CASE("fabric parameter validation")
{
    CHECK_THROWS_AS(build_fabric(0, 1, 1, 2), InputError);
    CHECK_THROWS_AS(build_fabric(1, 0, 1, 2), InputError);
    CHECK_THROWS_AS(build_fabric(1, 1, 0, 2), InputError);
    CHECK_THROWS_AS(build_fabric(1, 1, 1, 1), InputError);
}

TEST_CASE("key length matches the lowered keyinput count")
{
    for (auto [n_in, n_out, n_poles, k] :
         std::vector<std::array<int, 4>>{{2, 1, 1, 2}, {1, 1, 1, 2}, {4, 1, 3, 2},
                                         {3, 2, 5, 2}, {2, 2, 4, 3}}) {
        Fabric f = build_fabric(n_in, n_out, n_poles, k);
        LockedNetlist locked = lower_to_gates(f);
        CHECK(locked.key_bits == key_length(f));
        int key_ports = 0;
        for (const auto& s : locked.net.inputs)
            if (s.rfind("keyinput", 0) == 0)
                ++key_ports;
        CHECK(key_ports == locked.key_bits);
        CHECK(locked.net.inputs.size() == static_cast<std::size_t>(locked.key_bits + n_in));
        CHECK(locked.net.outputs.size() == static_cast<std::size_t>(n_out));
    }
}

TEST_CASE("programming an AND onto the (2,1,1,2) fabric")
{
    Netlist net = parse_bench_string("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a,b)\n");
    LutNetlist mapped = map_to_luts(net, 2);
    Fabric f = build_fabric(2, 1, 1, 2);
    Bitstream key = program(f, mapped, 1);
    REQUIRE(key.size() == 8);
    // layout: pin1 select (1 bit) = 0 -> a, pin2 select = 1 -> b,
    // table t0..t3 = 0001, output select (2 bits) = 2 -> pole 1
    CHECK(key.bits == std::vector<bool>{false, true, false, false, false, true, true, false});

    LockedNetlist locked = lower_to_gates(f);
    CHECK(keyed_equivalent(locked, key, net));
}

TEST_CASE("identity program on the degenerate fabric")
{
    Netlist net = parse_bench_string("INPUT(a)\nOUTPUT(y)\ny = BUF(a)\n");
    Fabric f = build_fabric(1, 1, 1, 2);
    Bitstream key = program(f, map_to_luts(net, 2), 9);
    LockedNetlist locked = lower_to_gates(f);
    CHECK(keyed_equivalent(locked, key, net));
}

TEST_CASE("two seeds give different bitstreams with equal function")
{
    Netlist net = test::random_circuit(4, 3, 1, 5);
    LutNetlist mapped = map_to_luts(net, 2);
    // one slack pole so seed-dependent filler bits exist
    Fabric f = build_fabric(4, 1, static_cast<int>(mapped.luts.size()) + 1, 2);
    Bitstream k1 = program(f, mapped, 100);
    Bitstream k2 = program(f, mapped, 200);
    CHECK(k1.bits != k2.bits);
    LockedNetlist locked = lower_to_gates(f);
    CHECK(keyed_equivalent(locked, k1, net));
    CHECK(keyed_equivalent(locked, k2, net));
}

TEST_CASE("program rejects capacity violations")
{
    Netlist net = test::random_circuit(3, 6, 1, 8);
    LutNetlist mapped = map_to_luts(net, 2);
    Fabric small = build_fabric(3, 1, 2, 2); // too few poles
    CHECK_THROWS_AS(program(small, mapped, 1), InputError);
    Fabric wrong_io = build_fabric(4, 1, 8, 2);
    CHECK_THROWS_AS(program(wrong_io, mapped, 1), InputError);
}

TEST_CASE("modular decoding aliases select values")
{
    // Output mux of (2,1,1,2) has 3 sources and 2 select bits; values 3 and
    // 0 both address source 0, so two keys differing only in that field
    // between 00 and 11 compute the same function.
    Netlist net = parse_bench_string("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a,b)\n");
    Fabric f = build_fabric(2, 1, 1, 2);
    Bitstream key = program(f, map_to_luts(net, 2), 1);
    LockedNetlist locked = lower_to_gates(f);

    Bitstream sel0 = key, sel3 = key;
    sel0.bits[6] = sel0.bits[7] = false; // output select value 0
    sel3.bits[6] = sel3.bits[7] = true;  // value 3 = 0 mod 3

    LockedEval eval(locked);
    bool differs_from_programmed = false;
    for (std::uint64_t p = 0; p < 4; ++p) {
        InputVector pi = test::pattern_bits(p, 2);
        CHECK(eval.eval(sel0, pi) == eval.eval(sel3, pi));
        if (eval.eval(sel0, pi) != eval.eval(key, pi))
            differs_from_programmed = true;
    }
    CHECK(differs_from_programmed); // source 0 is the PI, not the pole
}

TEST_CASE("every bitstring is a valid key")
{
    Fabric f = build_fabric(3, 2, 4, 2);
    LockedNetlist locked = lower_to_gates(f);
    LockedEval eval(locked);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Bitstream key;
        for (int b = 0; b < locked.key_bits; ++b)
            key.bits.push_back((rng() & 1) != 0);
        for (std::uint64_t p = 0; p < 8; ++p) {
            OutputVector out = eval.eval(key, test::pattern_bits(p, 3));
            CHECK(out.size() == 2);
        }
    }
}

TEST_CASE("all-zero key is deterministic")
{
    Fabric f = build_fabric(1, 1, 1, 2);
    LockedNetlist locked = lower_to_gates(f);
    LockedEval eval(locked);
    Bitstream zero;
    zero.bits.assign(static_cast<std::size_t>(locked.key_bits), false);
    CHECK(eval.eval(zero, {true}) == eval.eval(zero, {true}));
    CHECK(eval.eval(zero, {false}) == eval.eval(zero, {false}));
}

TEST_CASE("obfuscate XOR: correct key works, flipped keys usually do not")
{
    Netlist net = xor2_circuit();
    Obfuscated obf = obfuscate(net, 2, 0, 77);
    CHECK(keyed_equivalent(obf.locked, obf.key, net));

    LockedEval eval(obf.locked);
    Simulator golden(net);
    std::mt19937_64 rng(123);
    int broken = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Bitstream wrong = obf.key;
        int flip = static_cast<int>(rng() % wrong.bits.size());
        wrong.bits[flip] = !wrong.bits[flip];
        for (std::uint64_t p = 0; p < 4; ++p) {
            InputVector pi = test::pattern_bits(p, 2);
            if (eval.eval(wrong, pi) != golden.eval(pi)) {
                ++broken;
                break;
            }
        }
    }
    CHECK(broken >= 1); // aliasing means some flips are harmless, never all
}

TEST_CASE("obfuscate s27 core end to end")
{
    Netlist core = unroll(load_s27(), 1);
    Obfuscated obf = obfuscate(core, 2, 0, 4242);
    CHECK(obf.key.size() == static_cast<std::size_t>(key_length(obf.fabric)));
    CHECK(keyed_equivalent(obf.locked, obf.key, core));
    // ports got the source names back
    CHECK(obf.locked.net.inputs.back() == "G5__init");
    CHECK(obf.locked.net.outputs.front() == "G17__f1");
}

TEST_CASE("s27 T=10 key size lands in the published order of magnitude")
{
    Netlist u10 = unroll(load_s27(), 10);
    LutNetlist mapped = map_to_luts(u10, 2);
    Fabric f = build_fabric(static_cast<int>(u10.inputs.size()),
                            static_cast<int>(u10.outputs.size()),
                            static_cast<int>(mapped.luts.size()), 2);
    std::int64_t L = key_length(f);
    // The published run reports 244 for this circuit with a different (EUG +
    // routing-bit) layout; same order of magnitude, not equality.
    CHECK(L >= 122);
    CHECK(L <= 4880);
}

TEST_CASE("universality over random DAGs")
{
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        int n_in = 1 + static_cast<int>(seed % 6);
        int gates = 1 + static_cast<int>((seed * 7 + 3) % 8);
        Netlist net = test::random_circuit(n_in, gates, 1 + seed % 3, seed + 1000);
        Obfuscated obf = obfuscate(net, 2, static_cast<int>(seed % 3), seed);
        if (keyed_equivalent(obf.locked, obf.key, net))
            ++ok;
    }
    CHECK(ok == 200);
}

TEST_CASE("structural independence of the lowered fabric")
{
    // Two different 5-gate circuits with the same shape parameters.
    Netlist a = parse_bench_string("INPUT(p)\nINPUT(q)\nINPUT(r)\nOUTPUT(o)\n"
                                   "g0 = AND(p,q)\ng1 = OR(g0,r)\ng2 = XOR(g1,p)\n"
                                   "g3 = NAND(g2,q)\no = NOR(g3,g0)\n");
    Netlist b = parse_bench_string("INPUT(u)\nINPUT(v)\nINPUT(w)\nOUTPUT(z)\n"
                                   "h0 = XNOR(u,v)\nh1 = NOR(h0,w)\nh2 = AND(h1,u)\n"
                                   "h3 = OR(h2,v)\nz = NOT(h3)\n");
    Obfuscated oa = obfuscate(a, 2, 1, 11);
    Obfuscated ob = obfuscate(b, 2, 1, 22);
    REQUIRE(oa.locked.key_bits == ob.locked.key_bits);
    CHECK(canonical_bench(oa.locked.net) == canonical_bench(ob.locked.net));
    CHECK(serialize_bench(lower_to_gates(oa.fabric).net) ==
          serialize_bench(lower_to_gates(ob.fabric).net));
}

TEST_CASE("bitstream text round trip")
{
    Bitstream bs;
    bs.bits = {true, false, true, true, false};
    std::string text = bitstream_to_string(bs);
    CHECK(text == "10110\n");
    CHECK(bitstream_from_string(text).bits == bs.bits);
    CHECK_THROWS_AS(bitstream_from_string("10x1"), InputError);
}

TEST_CASE("fabric json round trip")
{
    Fabric f = build_fabric(4, 2, 6, 2);
    Fabric back = fabric_from_json(fabric_to_json(f));
    CHECK(back.n_in == f.n_in);
    CHECK(back.n_out == f.n_out);
    CHECK(back.n_poles == f.n_poles);
    CHECK(back.k == f.k);
    CHECK(back.pin_select_widths == f.pin_select_widths);
    CHECK(key_length(back) == key_length(f));
}

TEST_CASE("locked netlist loader checks key naming")
{
    Netlist net = xor2_circuit();
    Obfuscated obf = obfuscate(net, 2, 0, 5);
    Netlist reparsed = parse_bench_string(serialize_bench(obf.locked.net));
    LockedNetlist again = locked_from_netlist(reparsed);
    CHECK(again.key_bits == obf.locked.key_bits);

    Netlist bad = parse_bench_string("INPUT(keyinput1)\nINPUT(a)\nOUTPUT(y)\ny = AND(keyinput1,a)\n");
    CHECK_THROWS_AS(locked_from_netlist(bad), InputError); // gap: no keyinput0
}

TEST_CASE("key gate locking baseline behaves")
{
    Netlist core = unroll(load_s27(), 1);
    KeyGateLock kg = lock_with_key_gates(core, 16, 9);
    CHECK(kg.locked.key_bits == 16);
    CHECK(kg.key.bits.size() == 16);
    CHECK(keyed_equivalent(kg.locked, kg.key, core));

    KeyGateLock xg = lock_with_xor_key_gates(core, 8, 9);
    CHECK(keyed_equivalent(xg.locked, xg.key, core));
}
