#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "a64/builder.hpp"
#include "a64/word.hpp"

namespace a64 {

struct MutationProfile {
    uint64_t seed = 1;
    bool mutate_payload = true;
    bool mutate_padding = true;
    bool mutate_nops = true;
    bool mutate_vector = true;

    // Shift amounts usable in the two-instruction zeroing idiom.
    std::set<uint8_t> shift_set = {16, 17, 18, 19, 20, 21, 22, 24, 25, 26, 27, 28, 29, 30};

    // Alphanumeric adds/subs immediates in the inc/dec band (computed for the
    // cursor register; per-register feasibility is re-checked on use).
    std::vector<uint16_t> imm_range;

    explicit MutationProfile(uint64_t seed_ = 1);
};

// Admissible replacement characters for an encoded low nibble (identical low
// nibble, alphanumeric, between 2 and 5 choices).
std::vector<uint8_t> admissible_chars(uint8_t low_nibble);

// Re-draws the high nibble of one canonical encoded character ('A'..'P').
uint8_t mutate_encoded_char(uint8_t c, std::mt19937_64& rng);

// Never-executed pad bytes: replaced with uniform alphanumeric characters.
std::string mutate_padding(const std::string& region, std::mt19937_64& rng);

// Executed pad: uniform draw from the harmless-word census for the builder's
// live register set.
MachineWord mutate_nop_word(std::mt19937_64& rng);

// The census backing mutate_nop_word (live = cursors + counter + zero reg).
const std::vector<MachineWord>& decoder_nop_census();

// Resamples zeroing shifts and inc/dec immediate pairs recorded in the image
// notes; net semantics are preserved exactly.
ShellcodeImage mutate_vector(const ShellcodeImage& image, const MutationProfile& profile,
                             std::mt19937_64& rng);

// Applies every enabled mutation category; records the seed in the result.
ShellcodeImage mutate_image(const ShellcodeImage& image, const MutationProfile& profile);

struct MutationStats {
    size_t total_bytes = 0;
    size_t mutable_bytes = 0;
    size_t vector_words = 0;          // words before the pool
    size_t mutable_vector_words = 0;  // zero-shift + imm-pair + nop words
};

MutationStats mutation_stats(const ShellcodeImage& image);

}  // namespace a64
