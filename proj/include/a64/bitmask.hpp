#pragma once

#include <cstdint>
#include <optional>

namespace a64 {

// Bitmask-immediate expansion for logical instructions, following the
// architectural pseudocode. Returns nullopt for reserved encodings.
// datasize is 32 or 64. Note the rotation uses only the low bits of immr
// relevant to the element size, so distinct (N, immr, imms) triples can
// produce the same mask.
std::optional<uint64_t> decode_bit_masks(unsigned n, unsigned imms, unsigned immr,
                                         unsigned datasize);

// Wmask/tmask pair used by the bitfield instructions; `immediate` false skips
// the all-ones reservation that applies only to logical immediates.
struct MaskPair {
    uint64_t wmask;
    uint64_t tmask;
};
std::optional<MaskPair> decode_bit_masks_pair(unsigned n, unsigned imms, unsigned immr,
                                              unsigned datasize, bool immediate);

struct LogicalImmEncoding {
    unsigned n;
    unsigned immr;
    unsigned imms;
};

// Canonical encoder: finds (N, immr, imms) with immr < element size for a
// given mask, or nullopt if the value is not encodable.
std::optional<LogicalImmEncoding> encode_bit_masks(uint64_t value, unsigned datasize);

}  // namespace a64
