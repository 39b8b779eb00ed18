#include "a64/poly.hpp"

#include <algorithm>

#include "a64/classify.hpp"
#include "a64/gadgets.hpp"

namespace a64 {

namespace {

uint32_t addsub_imm_word(bool subs, uint8_t r, uint16_t imm12) {
    return (subs ? 0x71000000u : 0x31000000u) | ((uint32_t)imm12 << 10) | ((uint32_t)r << 5) | r;
}

size_t pick(std::mt19937_64& rng, size_t n) {
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
}

uint8_t rand_alnum(std::mt19937_64& rng) { return kAlphabet[pick(rng, kAlphabet.size())]; }

}  // namespace

MutationProfile::MutationProfile(uint64_t seed_) : seed(seed_) {
    for (uint16_t v : addsub_imm_choices(10, false)) {
        if (v < 0xc0c || v > 0xe5c) continue;
        auto subs = addsub_imm_choices(10, true);
        if (std::binary_search(subs.begin(), subs.end(), v)) imm_range.push_back(v);
    }
}

std::vector<uint8_t> admissible_chars(uint8_t v) {
    std::vector<uint8_t> out;
    if (v > 0) {
        out.push_back(0x40 + v);
        out.push_back(0x60 + v);
    }
    if (v < 0xA) out.push_back(0x30 + v);
    if (v < 0xB) {
        out.push_back(0x50 + v);
        out.push_back(0x70 + v);
    }
    return out;
}

uint8_t mutate_encoded_char(uint8_t c, std::mt19937_64& rng) {
    if (!((c >= 'A' && c <= 'O') || c == 'P'))
        throw BuildError("not a canonical encoded character");
    uint8_t v = c == 'P' ? 0 : (c & 0xF);
    auto set = admissible_chars(v);
    return set[pick(rng, set.size())];
}

std::string mutate_padding(const std::string& region, std::mt19937_64& rng) {
    std::string out = region;
    for (char& ch : out) ch = (char)rand_alnum(rng);
    return out;
}

const std::vector<MachineWord>& decoder_nop_census() {
    static const std::vector<MachineWord> census = find_nop_candidates({2, 10, 11, 19});
    return census;
}

MachineWord mutate_nop_word(std::mt19937_64& rng) {
    const auto& census = decoder_nop_census();
    return census[pick(rng, census.size())];
}

ShellcodeImage mutate_vector(const ShellcodeImage& image, const MutationProfile& profile,
                             std::mt19937_64& rng) {
    ShellcodeImage out = image;
    for (const WordNote& n : out.notes) {
        switch (n.role) {
            case WordRole::zero_shift: {
                if (!profile.mutate_vector) break;
                uint32_t old = out.word(n.index).value;
                std::vector<uint32_t> options;
                for (uint8_t k : profile.shift_set) {
                    uint32_t w = (old & ~(0x3Fu << 10)) | ((uint32_t)k << 10);
                    if (MachineWord(w).is_alnum()) options.push_back(w);
                }
                if (!options.empty())
                    out.set_word(n.index, MachineWord(options[pick(rng, options.size())]));
                break;
            }
            case WordRole::imm_pair: {
                if (!profile.mutate_vector) break;
                if (n.partner < 0 || (uint32_t)n.partner < n.index) break;  // handle once
                bool first_subs = (out.word(n.index).value >> 24) == 0x71;
                int mag = (int)std::abs(n.net);
                auto first = addsub_imm_choices(n.rd, first_subs);
                auto second = addsub_imm_choices(n.rd, !first_subs);
                std::vector<uint16_t> ks;
                for (uint16_t k : profile.imm_range) {
                    if (k <= mag) continue;
                    if (!std::binary_search(first.begin(), first.end(), k)) continue;
                    if (!std::binary_search(second.begin(), second.end(), (uint16_t)(k - mag)))
                        continue;
                    ks.push_back(k);
                }
                if (ks.empty()) break;
                uint16_t k = ks[pick(rng, ks.size())];
                out.set_word(n.index, MachineWord(addsub_imm_word(first_subs, n.rd, k)));
                out.set_word((size_t)n.partner,
                             MachineWord(addsub_imm_word(!first_subs, n.rd, (uint16_t)(k - mag))));
                break;
            }
            case WordRole::setup_nop:
            case WordRole::exec_nop:
                if (profile.mutate_nops) out.set_word(n.index, mutate_nop_word(rng));
                break;
            default:
                break;
        }
    }
    return out;
}

ShellcodeImage mutate_image(const ShellcodeImage& image, const MutationProfile& profile) {
    std::mt19937_64 rng(profile.seed);
    ShellcodeImage out = mutate_vector(image, profile, rng);
    size_t pool_end = out.layout.pool_offset + out.layout.pool_len;
    size_t landing = out.layout.pool_offset - 4 + (size_t)out.layout.forward_jump;
    if (profile.mutate_padding && landing > pool_end) {
        std::string filler = out.bytes.substr(pool_end, landing - pool_end);
        out.bytes.replace(pool_end, filler.size(), mutate_padding(filler, rng));
    }
    if (profile.mutate_payload) {
        for (size_t i = 0; i < out.layout.pool_len; ++i) {
            uint8_t c = (uint8_t)out.bytes[out.layout.pool_offset + i];
            auto set = admissible_chars(c & 0xF);
            out.bytes[out.layout.pool_offset + i] = (char)set[pick(rng, set.size())];
        }
    }
    out.seed = profile.seed;
    for (char ch : out.bytes)
        if (!is_alnum_byte((uint8_t)ch)) throw BuildError("mutation left the alphabet");
    return out;
}

MutationStats mutation_stats(const ShellcodeImage& image) {
    MutationStats s;
    s.total_bytes = image.bytes.size();
    s.vector_words = image.layout.pool_offset / 4;
    size_t landing = image.layout.pool_offset - 4 + (size_t)image.layout.forward_jump;
    size_t pool_end = image.layout.pool_offset + image.layout.pool_len;
    s.mutable_bytes = image.layout.pool_len + (landing - pool_end);
    size_t pair_halves = 0;
    for (const WordNote& n : image.notes) {
        switch (n.role) {
            case WordRole::zero_shift:
            case WordRole::setup_nop:
            case WordRole::exec_nop:
                s.mutable_bytes += 4;
                if (n.role != WordRole::exec_nop) ++s.mutable_vector_words;
                break;
            case WordRole::imm_pair:
                s.mutable_bytes += 4;
                ++pair_halves;
                break;
            default:
                break;
        }
    }
    s.mutable_vector_words += pair_halves;
    return s;
}

}  // namespace a64
