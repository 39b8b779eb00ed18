#include "doctest.h"

#include <random>

#include "a64/codec.hpp"
#include "a64/emu.hpp"
#include "a64/encode.hpp"
#include "a64/gadgets.hpp"

using namespace a64;

namespace {

struct Flags {
    bool n, z, c, v;
};

// Two's-complement reference for 32-bit adds/subs with an unsigned immediate.
Flags ref_addsub32(uint32_t a, uint32_t b, bool is_sub, uint32_t& result) {
    uint64_t op2 = is_sub ? (uint64_t)(uint32_t)~b : b;
    uint64_t sum = (uint64_t)a + op2 + (is_sub ? 1 : 0);
    result = (uint32_t)sum;
    Flags f;
    f.n = result >> 31;
    f.z = result == 0;
    f.c = sum >> 32;
    bool sa = a >> 31, sb = (uint32_t)op2 >> 31, sr = result >> 31;
    f.v = (sa == sb) && (sr != sa);
    return f;
}

MachineWord addsub_word(uint8_t r, bool subs, uint16_t imm) {
    DecodedInstr d;
    d.mnemonic = subs ? Mnemonic::subs : Mnemonic::adds;
    d.form = InstrForm::AddSubImm;
    d.category = Category::DataProcessing;
    d.push(Operand::make_reg(w(r)));
    d.push(Operand::make_reg(w(r)));
    d.push(Operand::make_imm(imm, 12));
    return encode(d);
}

}  // namespace

TEST_CASE("adds/subs immediate flags match the two's-complement reference") {
    std::mt19937_64 rng(1234);
    auto adds_imms = addsub_imm_choices(10, false);
    auto subs_imms = addsub_imm_choices(10, true);
    REQUIRE(!adds_imms.empty());
    REQUIRE(!subs_imms.empty());
    for (int i = 0; i < 100000; ++i) {
        bool is_sub = rng() & 1;
        const auto& imms = is_sub ? subs_imms : adds_imms;
        uint16_t imm = imms[rng() % imms.size()];
        uint32_t a = (uint32_t)rng();

        MachineState st;
        SparseMemory mem;
        st.write_reg(w(10), a);
        HaltReason r = run_sequence(st, mem, {addsub_word(10, is_sub, imm)}, 0x400000);
        REQUIRE(r == HaltReason::running);

        uint32_t expect;
        Flags f = ref_addsub32(a, imm, is_sub, expect);
        CHECK(st.read_reg(w(10)) == expect);
        CHECK(st.n == f.n);
        CHECK(st.z == f.z);
        CHECK(st.c == f.c);
        CHECK(st.v == f.v);
    }
}

TEST_CASE("ldr literal 000X loads x16 from pc + 0x60604") {
    MachineState st;
    SparseMemory mem;
    uint64_t base = 0x400000;
    mem.map(base + 0x60604, {0xEF, 0xBE, 0xAD, 0xDE, 0x78, 0x56, 0x34, 0x12});
    HaltReason r = run_sequence(st, mem, {MachineWord{0x58303030}}, base);
    REQUIRE(r == HaltReason::running);
    CHECK(st.x[16] == 0x12345678DEADBEEFull);
}

TEST_CASE("undefined word halts with undefined_instr") {
    MachineState st;
    SparseMemory mem;
    HaltReason r = run_sequence(st, mem, {MachineWord{0x53303030}}, 0x400000);
    CHECK(r == HaltReason::undefined_instr);
}

TEST_CASE("unmapped reads are faults, never silent zeros") {
    MachineState st;
    SparseMemory mem;
    st.write_reg(x(10), 0x12345000);
    // ldrb w18, [x10, #76]
    HaltReason r = run_sequence(st, mem, {MachineWord{0x39413152}}, 0x400000);
    CHECK(r == HaltReason::unmapped_access);
}

TEST_CASE("self-zeroing shift pair clears a register and sets Z") {
    for (uint8_t r : workhorse_regs()) {
        GadgetSeq g = zero_low(w(r));
        MachineState st;
        SparseMemory mem;
        st.write_reg(w(r), 0xFFFFFFFF);
        REQUIRE(run_sequence(st, mem, g.words, 0x400000) == HaltReason::running);
        CHECK(st.read_reg(w(r)) == 0);
        CHECK(st.z);
        CHECK_FALSE(st.n);
    }
}

TEST_CASE("three-instruction decode step matches its bit-exact model") {
    // eon w18, w19, w18, lsl #20 ; ands w25, w25, #0xFFFF000F ;
    // eon w25, w25, w18, lsr #16
    std::vector<MachineWord> snippet = {MachineWord{0x4A325272}, MachineWord{0x72304F39},
                                        MachineWord{0x4A724339}};
    for (auto mw : snippet) REQUIRE(mw.is_alnum());

    std::mt19937_64 rng(99);
    for (int i = 0; i < 10000; ++i) {
        uint32_t wa = (uint32_t)rng(), wb = (uint32_t)rng();
        MachineState st;
        SparseMemory mem;
        st.write_reg(w(18), wa);
        st.write_reg(w(25), wb);
        st.write_reg(w(19), 0);
        REQUIRE(run_sequence(st, mem, snippet, 0x400000) == HaltReason::running);
        CHECK(st.read_reg(w(25)) == model_decoder_step(wa, wb));
    }
}

TEST_CASE("store-byte with uxtw index writes through the destination cursor") {
    MachineState st;
    SparseMemory mem;
    mem.map_zero(0x500000, 16);
    st.write_reg(x(11), 0x500000);
    st.write_reg(w(19), 5);
    st.write_reg(w(25), 0xFFFF04A7);  // only the low byte lands
    // strb w25, [x11, w19, uxtw]
    REQUIRE(run_sequence(st, mem, {MachineWord{0x38334979}}, 0x400000) == HaltReason::running);
    CHECK(mem.read8(0x500005) == uint8_t{0xA7});
    CHECK(mem.read8(0x500004) == uint8_t{0});
}

TEST_CASE("step limit halts a tight loop") {
    // tbnz w2, #9, back to self: offset -4 is not alphanumeric, so build the
    // loop as branch-to-self via an exact-offset request on a plain emulator.
    Emulator emu;
    uint64_t base = 0x400000;
    // adds w2, w2, #0xc1a then a backward tbnz onto itself is overkill here;
    // an infinite loop of two words branching via tbnz with bit always set:
    std::vector<uint8_t> code;
    BranchGadget b = branch(true, w(2), 9, false);  // minimal backward tbnz
    std::vector<MachineWord> pad((size_t)(-b.offset) / 4, MachineWord{0x6A514231});
    for (auto mw : pad)
        for (auto byt : mw.bytes()) code.push_back(byt);
    for (auto byt : b.seq.words[0].bytes()) code.push_back(byt);
    emu.mem.map(base, std::move(code));
    emu.st.pc = base;
    emu.st.write_reg(w(2), 1u << 9);
    uint64_t steps = 0;
    HaltReason r = emu.run(5000, &steps);
    CHECK(r == HaltReason::step_limit);
    CHECK(steps == 5000);
}
