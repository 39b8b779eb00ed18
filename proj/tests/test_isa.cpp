#include "doctest.h"

#include "a64/bitmask.hpp"
#include "a64/classify.hpp"
#include "a64/decode.hpp"
#include "a64/encode.hpp"
#include "a64/word.hpp"

using namespace a64;

TEST_CASE("alphabet enumeration is total and ordered") {
    uint64_t n = 0;
    MachineWord prev{};
    for_each_alnum_word([&](MachineWord w) {
        CHECK(w.is_alnum());
        if (n > 0) CHECK(prev.str() < w.str());
        prev = w;
        ++n;
    });
    CHECK(n == kAlnumWordCount);
    CHECK(kAlnumWordCount == 14776336u);
}

TEST_CASE("golden decode: 0x58303030 is ldr x16 literal +0x60604") {
    DecodedInstr d = decode(MachineWord{0x58303030});
    CHECK(d.mnemonic == Mnemonic::ldr);
    CHECK(d.form == InstrForm::LdrLiteral);
    REQUIRE(d.op_count >= 2);
    CHECK(d.ops[0].reg == x(16));
    CHECK(d.ops[1].imm == 0x60604);
    CHECK(MachineWord{0x58303030}.str() == "000X");
}

TEST_CASE("golden decode: 0x53303030 is undefined") {
    DecodedInstr d = decode(MachineWord{0x53303030});
    CHECK(d.mnemonic == Mnemonic::undefined);
    CHECK(d.category == Category::Undefined);
}

TEST_CASE("golden decode: 0x72304F39 is ands w25, w25, #0xFFFF000F") {
    DecodedInstr d = decode(MachineWord{0x72304F39});
    CHECK(d.mnemonic == Mnemonic::ands);
    CHECK(d.form == InstrForm::LogicalImm);
    REQUIRE(d.op_count == 3);
    CHECK(d.ops[0].reg == w(25));
    CHECK(d.ops[1].reg == w(25));
    CHECK((uint32_t)d.ops[2].imm == 0xFFFF000Fu);
    CHECK(MachineWord{0x72304F39}.str() == "9O0r");
}

TEST_CASE("bitmask immediates round-trip through the encoder") {
    for (uint32_t n = 0; n <= 1; ++n)
        for (uint32_t immr = 0; immr < 64; immr += 7)
            for (uint32_t imms = 0; imms < 64; ++imms) {
                auto m64 = decode_bit_masks(n, imms, immr, 64);
                if (!m64) continue;
                auto enc = encode_bit_masks(*m64, 64);
                REQUIRE(enc.has_value());
                auto again = decode_bit_masks(enc->n, enc->imms, enc->immr, 64);
                REQUIRE(again.has_value());
                CHECK(*again == *m64);
            }
    auto m = decode_bit_masks(0, 0x13, 0x30, 32);  // fields of the pinned ands word
    REQUIRE(m.has_value());
    CHECK((uint32_t)*m == 0xFFFF000Fu);
}

TEST_CASE("decode-encode-decode is a fixpoint on a sampled alphabet slice") {
    uint64_t checked = 0, i = 0;
    for_each_alnum_word([&](MachineWord mw) {
        if (i++ % 97 != 0) return;
        DecodedInstr d = decode(mw);
        if (d.mnemonic == Mnemonic::undefined) return;
        MachineWord enc{0};
        try {
            enc = encode(d, mw);
        } catch (const EncodeError&) {
            return;  // forms outside the encoder's emission set
        }
        CHECK(enc == mw);
        CHECK(decode(enc) == d);
        ++checked;
    });
    CHECK(checked > 10000);
}

TEST_CASE("classification census is internally consistent") {
    InstrSetReport rep = classify_space();
    CHECK(rep.total_alnum_words == kAlnumWordCount);
    CHECK(rep.valid_instructions < rep.total_alnum_words);
    CHECK(rep.valid_instructions > 0);
    uint64_t sum = 0;
    for (const auto& [cat, n] : rep.per_category) sum += n;
    CHECK(sum == rep.total_alnum_words);
    // opcodes the gadget layer depends on must have alphanumeric instances
    for (const char* op : {"adds", "subs", "ands", "eon", "bics", "adr", "tbz", "tbnz",
                           "ldrb", "strb", "ldr", "ccmp"})
        CHECK(rep.a1_opcodes.count(op));
    CHECK(rep.amax_opcodes.size() <= rep.a1_opcodes.size());
}
