#include "doctest.h"

#include <random>

#include "a64/builder.hpp"
#include "a64/codec.hpp"
#include "a64/decode.hpp"

using namespace a64;

namespace {

bool all_alnum(const std::string& s) {
    for (unsigned char c : s)
        if (!is_alnum_byte(c)) return false;
    return true;
}

const std::vector<uint8_t> kHello = {'h', 'e', 'l', 'l', 'o', ',', ' ',
                                     'w', 'o', 'r', 'l', 'd', '\n'};

}  // namespace

TEST_CASE("end-to-end build and verify, both addressing profiles") {
    for (auto p : {AddressingProfile::sub4g, AddressingProfile::full64}) {
        CAPTURE(addressing_profile_name(p));
        ShellcodeImage img = build(kHello, p);
        CHECK(all_alnum(img.bytes));
        CHECK(img.bytes.size() % 4 == 0);
        CHECK(img.layout.pool_len == 2 * kHello.size());
        CHECK(img.payload_len == kHello.size());
        CHECK(img.decoded_payload_addr == img.bytes.size());
        std::string why;
        CHECK_MESSAGE(verify_image(img, &why), why);
    }
}

TEST_CASE("a single zero byte builds and decodes to a 'PP' pool") {
    ShellcodeImage img = build({0x00}, AddressingProfile::sub4g);
    CHECK(img.bytes.substr(img.layout.pool_offset, 2) == "PP");
    RunResult rr = run_image(img, default_base(AddressingProfile::sub4g), 2'000'000);
    CHECK(rr.halt == HaltReason::reached_target);
    CHECK(rr.decoded == std::vector<uint8_t>{0x00});
}

TEST_CASE("decoded bytes land exactly at the image end") {
    ShellcodeImage img = build(kHello, AddressingProfile::sub4g);
    uint64_t base = default_base(AddressingProfile::sub4g);
    RunResult rr = run_image(img, base, 2'000'000);
    REQUIRE(rr.halt == HaltReason::reached_target);
    CHECK(rr.state.pc == base + img.decoded_payload_addr);
    CHECK(rr.decoded == kHello);
}

TEST_CASE("layout arithmetic closes") {
    for (auto p : {AddressingProfile::sub4g, AddressingProfile::full64}) {
        ShellcodeImage img = build(kHello, p);
        const LayoutPlan& L = img.layout;
        CHECK(L.pool_offset == L.vector_head_len);
        CHECK(L.pool_offset + L.pool_len + L.pad_len + 4 == img.bytes.size());
        CHECK(L.loop_head + L.backward_jump + 4 == img.bytes.size());
        CHECK(L.backward_jump >= 4276);
        CHECK(img.bytes.size() >= 4276);
        // the forward skip lands past the pool, inside the image
        size_t landing = L.pool_offset - 4 + (size_t)L.forward_jump;
        CHECK(landing > L.pool_offset + L.pool_len);
        CHECK(landing < img.bytes.size());
    }
}

TEST_CASE("plan_layout for the canonical 13-byte payload uses the minimal span") {
    LayoutPlan L = plan_layout(26);
    CHECK(L.pool_len == 26);
    CHECK(L.backward_jump == 4276);
    CHECK(L.counter_bit >= 6);
}

TEST_CASE("plan_layout rejects payloads beyond the branch span") {
    CHECK_THROWS_AS(plan_layout(1 << 20), BuildError);
}

TEST_CASE("100 random payloads build and verify in both profiles") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        size_t n = 1 + rng() % 512;
        std::vector<uint8_t> payload(n);
        for (auto& b : payload) b = (uint8_t)rng();
        auto p = (i & 1) ? AddressingProfile::full64 : AddressingProfile::sub4g;
        ShellcodeImage img = build(payload, p);
        CHECK(all_alnum(img.bytes));
        CHECK(img.layout.pool_len == 2 * n);
        std::string why;
        CHECK_MESSAGE(verify_image(img, &why), why);
    }
}

TEST_CASE("fault injection: one corrupted pool nibble flips exactly one byte") {
    ShellcodeImage img = build(kHello, AddressingProfile::sub4g);
    std::string good = img.bytes;
    size_t victim = img.layout.pool_offset + 6;  // high-nibble char of byte 3
    img.bytes[victim] = (good[victim] == 'A') ? 'B' : 'A';

    RunResult rr = run_image(img, default_base(AddressingProfile::sub4g), 2'000'000);
    REQUIRE(rr.halt == HaltReason::reached_target);
    REQUIRE(rr.decoded.size() == kHello.size());
    int diffs = 0;
    size_t diff_at = 0;
    for (size_t i = 0; i < kHello.size(); ++i)
        if (rr.decoded[i] != kHello[i]) {
            ++diffs;
            diff_at = i;
        }
    CHECK(diffs == 1);
    CHECK(diff_at == 3);
    // the loop is faithful to the pool it is given, so the oracle still holds
    CHECK(verify_image(img));

    // breaking the loop branch, by contrast, must fail verification
    ShellcodeImage broken = build(kHello, AddressingProfile::sub4g);
    broken.set_word(broken.bytes.size() / 4 - 1, MachineWord::from_str("1BQj"));
    CHECK_FALSE(verify_image(broken));
}

TEST_CASE("every image word decodes; executed words are defined instructions") {
    ShellcodeImage img = build(kHello, AddressingProfile::full64);
    for (size_t i = 0; i * 4 < img.layout.vector_head_len; ++i)
        CHECK(decode(img.word(i)).mnemonic != Mnemonic::undefined);
}

TEST_CASE("emit_pinned_word accepts a matching hint and rejects a stale one") {
    DecodedInstr want = decode(MachineWord{0x72304F39});
    CHECK(emit_pinned_word(want, MachineWord{0x72304F39}) == MachineWord{0x72304F39});
    DecodedInstr other = decode(MachineWord{0x4A325272});
    CHECK_THROWS_AS(emit_pinned_word(other, MachineWord{0x72304F39}), BuildError);
}

TEST_CASE("retarget_pinned_word moves register fields and re-verifies") {
    // ldrb w18, [x10, #76] -> ldrb w25, [x10, #77] is an offset change, not a
    // register change, so retarget the destination only: w18 -> w19.
    MachineWord src{0x39413152};
    MachineWord out = retarget_pinned_word(src, /*rd_delta=*/1, /*rn_delta=*/0);
    DecodedInstr d = decode(out);
    CHECK(out.is_alnum());
    CHECK(d.ops[0].reg.index == 19);
    CHECK(d.ops[1].reg.index == 10);
}

TEST_CASE("metadata json round-trips through from_parts") {
    ShellcodeImage img = build(kHello, AddressingProfile::full64);
    ShellcodeImage back = ShellcodeImage::from_parts(img.bytes, img.metadata_json());
    CHECK(back.bytes == img.bytes);
    CHECK(back.payload_len == img.payload_len);
    CHECK(back.decoded_payload_addr == img.decoded_payload_addr);
    CHECK(back.layout.pool_offset == img.layout.pool_offset);
    CHECK(back.layout.backward_jump == img.layout.backward_jump);
    CHECK(back.guard_lo == img.guard_lo);
    CHECK(back.guard_hi == img.guard_hi);
    CHECK(back.notes.size() == img.notes.size());
    std::string why;
    CHECK_MESSAGE(verify_image(back, &why), why);
}

TEST_CASE("tiny step limit reports step_limit") {
    ShellcodeImage img = build(kHello, AddressingProfile::sub4g);
    RunResult rr = run_image(img, default_base(AddressingProfile::sub4g), 1);
    CHECK(rr.halt == HaltReason::step_limit);
    CHECK(rr.steps == 1);
}

TEST_CASE("trace capture names the instructions it executed") {
    ShellcodeImage img = build({0x42}, AddressingProfile::sub4g);
    RunResult rr = run_image(img, default_base(AddressingProfile::sub4g), 64, true);
    CHECK(!rr.trace.empty());
    CHECK(rr.trace.find("ands") != std::string::npos);
}
