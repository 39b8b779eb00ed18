#include "doctest.h"

#include <random>
#include <set>

#include "a64/builder.hpp"
#include "a64/poly.hpp"

using namespace a64;

namespace {

const std::vector<uint8_t> kHello = {'h', 'e', 'l', 'l', 'o', ',', ' ',
                                     'w', 'o', 'r', 'l', 'd', '\n'};

bool all_alnum(const std::string& s) {
    for (unsigned char c : s)
        if (!is_alnum_byte(c)) return false;
    return true;
}

}  // namespace

TEST_CASE("admissible character sets per low nibble") {
    auto as_set = [](uint8_t v) {
        auto chars = admissible_chars(v);
        return std::set<uint8_t>(chars.begin(), chars.end());
    };
    CHECK(as_set(0x0) == std::set<uint8_t>{'0', 'P', 'p'});
    CHECK(as_set(0x1) == std::set<uint8_t>{'1', 'A', 'Q', 'a', 'q'});
    CHECK(as_set(0xA) == std::set<uint8_t>{'J', 'Z', 'j', 'z'});
    CHECK(as_set(0xF) == std::set<uint8_t>{'O', 'o'});
    for (uint8_t v = 0; v < 16; ++v) {
        auto s = admissible_chars(v);
        CHECK(s.size() >= 2);
        CHECK(s.size() <= 5);
        for (uint8_t c : s) {
            CHECK(is_alnum_byte(c));
            CHECK((c & 0xF) == v);
        }
    }
}

TEST_CASE("encoded-character mutation preserves the low nibble") {
    std::mt19937_64 rng(1);
    for (char c = 'A'; c <= 'P'; ++c)
        for (int i = 0; i < 200; ++i) {
            uint8_t m = mutate_encoded_char((uint8_t)c, rng);
            CHECK(is_alnum_byte(m));
            CHECK((m & 0xF) == (c & 0xF));
        }
    CHECK_THROWS(mutate_encoded_char('z', rng));
}

TEST_CASE("padding mutation stays alphanumeric and covers the alphabet") {
    std::mt19937_64 rng(2);
    std::set<char> seen;
    for (int i = 0; i < 1000; ++i) {
        std::string out = mutate_padding("BBBBBBBBBBBBBBBB", rng);
        CHECK(out.size() == 16);
        CHECK(all_alnum(out));
        for (char c : out) seen.insert(c);
    }
    CHECK(seen.size() == 62);
}

TEST_CASE("nop census is large and every entry is harmless in form") {
    const auto& census = decoder_nop_census();
    CHECK(census.size() > 80000);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        MachineWord w = census[rng() % census.size()];
        CHECK(w.is_alnum());
    }
}

TEST_CASE("mutation profile exposes the shift set and immediate band") {
    MutationProfile p(5);
    CHECK(p.shift_set.count(16));
    CHECK(p.shift_set.count(30));
    CHECK_FALSE(p.shift_set.count(23));
    CHECK_FALSE(p.shift_set.count(15));
    REQUIRE(!p.imm_range.empty());
    CHECK(p.imm_range.front() == 0xc0c);
    CHECK(p.imm_range.back() == 0xe5c);
    CHECK(p.imm_range.size() == 168);
}

TEST_CASE("mutation is deterministic per seed and differs across seeds") {
    ShellcodeImage base = build(kHello, AddressingProfile::sub4g);
    ShellcodeImage a1 = mutate_image(base, MutationProfile(11));
    ShellcodeImage a2 = mutate_image(base, MutationProfile(11));
    ShellcodeImage b = mutate_image(base, MutationProfile(12));
    CHECK(a1.bytes == a2.bytes);
    CHECK(a1.bytes != b.bytes);
    CHECK(a1.seed == 11);
}

TEST_CASE("mutated images still verify, across 100 seeds and both profiles") {
    for (auto p : {AddressingProfile::sub4g, AddressingProfile::full64}) {
        ShellcodeImage base = build(kHello, p);
        int differing = 0;
        for (uint64_t seed = 1; seed <= 50; ++seed) {
            ShellcodeImage m = mutate_image(base, MutationProfile(seed));
            CHECK(all_alnum(m.bytes));
            CHECK(m.bytes.size() == base.bytes.size());
            std::string why;
            CHECK_MESSAGE(verify_image(m, &why), why);
            if (m.bytes != base.bytes) ++differing;
        }
        CHECK(differing == 50);
    }
}

TEST_CASE("pool mutation never changes the decoded payload") {
    ShellcodeImage base = build(kHello, AddressingProfile::sub4g);
    for (uint64_t seed = 100; seed < 120; ++seed) {
        ShellcodeImage m = mutate_image(base, MutationProfile(seed));
        RunResult rr = run_image(m, default_base(AddressingProfile::sub4g), 2'000'000);
        REQUIRE(rr.halt == HaltReason::reached_target);
        CHECK(rr.decoded == kHello);
    }
}

TEST_CASE("category toggles limit what moves") {
    ShellcodeImage base = build(kHello, AddressingProfile::sub4g);

    MutationProfile none(21);
    none.mutate_payload = none.mutate_padding = none.mutate_nops = none.mutate_vector = false;
    CHECK(mutate_image(base, none).bytes == base.bytes);

    MutationProfile pad_only(22);
    pad_only.mutate_payload = pad_only.mutate_nops = pad_only.mutate_vector = false;
    ShellcodeImage m = mutate_image(base, pad_only);
    const LayoutPlan& L = base.layout;
    CHECK(m.bytes.substr(0, L.pool_offset + L.pool_len) ==
          base.bytes.substr(0, L.pool_offset + L.pool_len));
    CHECK(m.bytes != base.bytes);
    std::string why;
    CHECK_MESSAGE(verify_image(m, &why), why);
}

TEST_CASE("mutation statistics report a mostly-mutable image") {
    ShellcodeImage base = build(kHello, AddressingProfile::sub4g);
    MutationStats s = mutation_stats(base);
    CHECK(s.total_bytes == base.bytes.size());
    CHECK(s.mutable_bytes > 0);
    CHECK(s.mutable_bytes < s.total_bytes);
    CHECK(s.vector_words == base.layout.vector_head_len / 4);
    CHECK(s.mutable_vector_words <= s.vector_words);
    // the image is dominated by pad needed to reach the minimum branch span,
    // so the overwhelming majority of bytes are free to move
    CHECK((double)s.mutable_bytes / (double)s.total_bytes > 0.9);
}
