#include "doctest.h"

#include <map>
#include <random>

#include "a64/emu.hpp"
#include "a64/gadgets.hpp"

using namespace a64;

namespace {

// Runs a gadget on randomized register state and returns the final state.
MachineState run_gadget(const GadgetSeq& g, std::mt19937_64& rng,
                        const std::map<uint8_t, uint64_t>& pin = {}) {
    MachineState st;
    for (int i = 0; i < 31; ++i) st.x[i] = rng();
    for (auto [r, v] : pin) st.x[r] = v;
    SparseMemory mem;
    REQUIRE(run_sequence(st, mem, g.words, 0x400000) == HaltReason::running);
    return st;
}

}  // namespace

TEST_CASE("zeroing pairs emit the canonical strings") {
    const std::map<uint8_t, std::string> golden = {
        {2, "BlBjBlBj"},  {3, "cdCjcdCj"},  {10, "JAJjJAJj"}, {11, "kAKjkAKj"},
        {17, "1BQj1BQj"}, {18, "RBRjRBRj"}, {19, "sBSjsBSj"}, {25, "9CYj9CYj"},
        {26, "ZCZjZCZj"},
    };
    for (auto& [r, s] : golden) CHECK(zero_low(w(r)).str() == s);
}

TEST_CASE("unit increment and decrement pairs emit the canonical strings") {
    const std::map<uint8_t, std::pair<std::string, std::string>> golden = {
        {2, {"Bh01Bd0q", "Bh0qBd01"}},   {3, {"ch01cd0q", "ch0qcd01"}},
        {10, {"Ji01Je0q", "Ji0qJe01"}},  {11, {"ki01ke0q", "ki0qke01"}},
        {17, {"1j011f0q", "1j0q1f01"}},  {18, {"Rj01Rf0q", "Rj0qRf01"}},
        {19, {"sj01sf0q", "sj0qsf01"}},  {25, {"9k019g0q", "9k0q9g01"}},
        {26, {"Zk01Zg0q", "Zk0qZg01"}},
    };
    for (auto& [r, g] : golden) {
        CHECK(add_const(w(r), 1).str() == g.first);
        CHECK(add_const(w(r), -1).str() == g.second);
    }
}

TEST_CASE("register move emits the canonical string") {
    CHECK(move(w(16), w(11)).str() == "qA010B0q");
}

TEST_CASE("xor-into emits the canonical strings") {
    // Keyed by (a, b); c is w17 and contributes the leading zeroing pair.
    const std::map<std::pair<uint8_t, uint8_t>, std::string> golden = {
        {{16, 18}, "1B0J1BpJRB1JRBqJ"}, {{16, 19}, "1B0J1BpJsB1JsBqJ"},
        {{16, 25}, "1B0J1BpJ9C1J9CqJ"}, {{16, 26}, "1B0J1BpJZC1JZCqJ"},
        {{18, 19}, "1B2J1BrJsB1JsBqJ"}, {{18, 25}, "1B2J1BrJ9C1J9CqJ"},
        {{18, 26}, "1B2J1BrJZC1JZCqJ"}, {{19, 25}, "1B3J1BsJ9C1J9CqJ"},
        {{19, 26}, "1B3J1BsJZC1JZCqJ"}, {{20, 25}, "1B4J1BtJ9C1J9CqJ"},
        {{20, 26}, "1B4J1BtJZC1JZCqJ"}, {{21, 25}, "1B5J1BuJ9C1J9CqJ"},
        {{21, 26}, "1B5J1BuJZC1JZCqJ"}, {{22, 25}, "1B6J1BvJ9C1J9CqJ"},
        {{22, 26}, "1B6J1BvJZC1JZCqJ"}, {{23, 25}, "1B7J1BwJ9C1J9CqJ"},
        {{23, 26}, "1B7J1BwJZC1JZCqJ"}, {{24, 25}, "1B8J1BxJ9C1J9CqJ"},
        {{24, 26}, "1B8J1BxJZC1JZCqJ"}, {{25, 26}, "1B9J1ByJZC1JZCqJ"},
    };
    for (auto& [ab, tail] : golden)
        CHECK(xor_into(w(ab.second), w(ab.first), w(17)).str() ==
              std::string("1BQj1BQj") + tail);
}

TEST_CASE("halfword-and schedule emits the canonical string") {
    CHECK(and_halfword_upper(w(11), w(18), w(25), w(17), w(19), w(26)).str() ==
          "kAKjkAKj1BQj1BQjsBSjsBSjZCZjZCZj"
          "1B9JsB2JZCsJKCqj"
          "1BQj1BQjsBSjsBSjZCZjZCZj"
          "1ByJsBrJZC3JKC1j");
}

TEST_CASE("load/store byte pair emits the canonical string") {
    GadgetSeq ls = load_byte_imm(w(25), x(10), 77);
    ls += store_byte(w(25), x(11), w(19));
    CHECK(ls.str() == "Y5A9yI38");
}

TEST_CASE("every gadget string is alphanumeric") {
    auto check = [](const GadgetSeq& g) {
        for (auto mw : g.words) CHECK(mw.is_alnum());
    };
    for (uint8_t r : workhorse_regs()) {
        check(zero_low(w(r)));
        check(add_const(w(r), 1));
        check(add_const(w(r), -1));
        check(add_const(w(r), 12345));
    }
    check(move(w(16), w(11)));
    check(xor_into(w(25), w(18), w(17)));
    check(not_into(w(25), w(18)));
    check(logical_and(w(11), w(18), w(25), w(17), w(19), w(26)));
    check(and_halfword_upper(w(11), w(18), w(25), w(17), w(19), w(26)));
    check(load_byte_imm(w(25), x(10), 77));
    check(load_byte_reg(w(18), x(10), w(19)));
    check(load_byte_post(w(17), x(10), -253));
    check(store_byte(w(25), x(11), w(19)));
}

TEST_CASE("zero_low semantics, randomized") {
    std::mt19937_64 rng(7);
    for (uint8_t r : workhorse_regs()) {
        GadgetSeq g = zero_low(w(r));
        for (int i = 0; i < 1000; ++i) {
            MachineState st = run_gadget(g, rng);
            CHECK(st.read_reg(w(r)) == 0);
        }
    }
}

TEST_CASE("add_const semantics, randomized deltas") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 1000; ++i) {
        uint8_t r = 10 + (rng() & 1);  // both cursor registers
        int64_t delta = (int64_t)(rng() % 100000) - 50000;
        GadgetSeq g = add_const(w(r), delta);
        uint32_t start = (uint32_t)rng();
        MachineState st = run_gadget(g, rng, {{r, start}});
        CHECK(st.read_reg(w(r)) == (uint32_t)(start + delta));
    }
}

TEST_CASE("move semantics, randomized") {
    std::mt19937_64 rng(9);
    GadgetSeq g = move(w(16), w(11));
    for (int i = 0; i < 1000; ++i) {
        uint32_t src = (uint32_t)rng();
        MachineState st = run_gadget(g, rng, {{11, src}});
        CHECK(st.read_reg(w(16)) == src);
        CHECK(st.read_reg(w(11)) == src);
    }
}

TEST_CASE("xor_into semantics, randomized") {
    std::mt19937_64 rng(10);
    GadgetSeq g = xor_into(w(25), w(18), w(17));
    for (int i = 0; i < 1000; ++i) {
        uint32_t a = (uint32_t)rng(), b = (uint32_t)rng();
        MachineState st = run_gadget(g, rng, {{18, a}, {25, b}});
        CHECK(st.read_reg(w(25)) == (a ^ b));
        CHECK(st.read_reg(w(18)) == a);
    }
}

TEST_CASE("not_into semantics, randomized") {
    std::mt19937_64 rng(11);
    GadgetSeq g = not_into(w(25), w(18));
    for (int i = 0; i < 1000; ++i) {
        uint32_t b = (uint32_t)rng();
        MachineState st = run_gadget(g, rng, {{25, b}});
        CHECK(st.read_reg(w(25)) == (uint32_t)~b);
    }
}

TEST_CASE("corrected logical_and computes a full 32-bit and") {
    std::mt19937_64 rng(12);
    GadgetSeq g = logical_and(w(11), w(18), w(25), w(17), w(19), w(26));
    for (int i = 0; i < 1000; ++i) {
        uint32_t a = (uint32_t)rng(), b = (uint32_t)rng();
        MachineState st = run_gadget(g, rng, {{18, a}, {25, b}});
        CHECK(st.read_reg(w(11)) == (a & b));
        CHECK(st.read_reg(w(18)) == a);
        CHECK(st.read_reg(w(25)) == b);
    }
}

TEST_CASE("verbatim halfword schedule keeps only the upper half of the and") {
    std::mt19937_64 rng(13);
    GadgetSeq g = and_halfword_upper(w(11), w(18), w(25), w(17), w(19), w(26));
    for (int i = 0; i < 1000; ++i) {
        uint32_t a = (uint32_t)rng(), b = (uint32_t)rng();
        MachineState st = run_gadget(g, rng, {{18, a}, {25, b}});
        CHECK(st.read_reg(w(11)) == (((a & b) & 0xFFFF0000u) | 0xFFFFu));
    }
}

TEST_CASE("load and store byte semantics, randomized") {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 1000; ++i) {
        uint8_t v = (uint8_t)rng();
        unsigned idx = rng() % 16;
        SparseMemory mem;
        std::vector<uint8_t> src(128);
        for (auto& byt : src) byt = (uint8_t)rng();
        src[77] = v;
        mem.map(0x500000, src);
        mem.map_zero(0x600000, 16);

        MachineState st;
        for (int r = 0; r < 31; ++r) st.x[r] = rng();
        st.x[10] = 0x500000;
        st.x[11] = 0x600000;
        st.write_reg(w(19), idx);
        GadgetSeq g = load_byte_imm(w(25), x(10), 77);
        g += store_byte(w(25), x(11), w(19));
        REQUIRE(run_sequence(st, mem, g.words, 0x400000) == HaltReason::running);
        CHECK(mem.read8(0x600000 + idx) == v);
    }
}

TEST_CASE("post-index byte load moves the cursor by the written-back delta") {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 1000; ++i) {
        int delta = (int)(rng() % 509) - 254;
        if (delta == 0) delta = -253;
        GadgetSeq g;
        try {
            g = load_byte_post(w(17), x(10), delta);
        } catch (const GadgetError&) {
            continue;  // not every delta is alphanumeric-reachable in one word
        }
        uint64_t base = 0x500000 + (rng() % 64);
        SparseMemory mem;
        mem.map_zero(0x4FF000, 0x2000);
        MachineState st;
        for (int r = 0; r < 31; ++r) st.x[r] = rng();
        st.x[10] = base;
        REQUIRE(run_sequence(st, mem, g.words, 0x400000) == HaltReason::running);
        CHECK(st.x[10] == base + delta);
    }
}

TEST_CASE("branch offsets: choices are sound and minima match brute force") {
    CHECK(min_forward_branch_offset() == 1540);
    CHECK(min_backward_branch_offset() == -4276);

    // Every choice list entry must round-trip through an actual branch word.
    for (bool on_set : {false, true})
        for (bool fwd : {false, true}) {
            auto choices = branch_offset_choices(on_set, w(2), 9, fwd);
            REQUIRE(!choices.empty());
            for (size_t i = 1; i < choices.size(); ++i)
                CHECK(std::abs(choices[i - 1]) < std::abs(choices[i]));
            for (int64_t off : {choices.front(), choices.back()}) {
                BranchGadget b = branch(on_set, w(2), 9, fwd, off);
                CHECK(b.offset == off);
                CHECK(b.seq.words.size() == 1);
                CHECK(b.seq.words[0].is_alnum());
            }
        }

    // No encodable span comes anywhere near 1 MiB.
    int64_t max_span = 0;
    for (unsigned bit : {6u, 8u, 9u, 10u, 12u, 13u, 14u}) {
        for (bool fwd : {false, true}) {
            auto c = branch_offset_choices(true, w(2), bit, fwd);
            if (!c.empty()) max_span = std::max(max_span, std::abs(c.back()));
        }
    }
    CHECK(max_span < 1 << 20);
}

TEST_CASE("taken and not-taken test branches, randomized") {
    std::mt19937_64 rng(16);
    for (int i = 0; i < 1000; ++i) {
        bool on_set = rng() & 1;
        BranchGadget b = branch(on_set, w(2), 9, true);
        bool bit_set = rng() & 1;

        Emulator emu;
        uint64_t base = 0x400000;
        size_t total_words = (size_t)b.offset / 4 + 1;
        std::vector<uint8_t> code;
        for (auto byt : b.seq.words[0].bytes()) code.push_back(byt);
        for (size_t k = 1; k < total_words; ++k)
            for (auto byt : MachineWord{0x6A514231}.bytes()) code.push_back(byt);
        emu.mem.map(base, std::move(code));
        emu.st.pc = base;
        emu.st.write_reg(w(2), bit_set ? (1u << 9) : 0);
        emu.step();
        bool taken = emu.st.pc == base + (uint64_t)b.offset;
        CHECK(taken == (on_set == bit_set));
        if (!taken) CHECK(emu.st.pc == base + 4);
    }
}
