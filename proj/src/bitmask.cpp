#include "a64/bitmask.hpp"

#include <bit>

namespace a64 {

namespace {

uint64_t ones(unsigned n) {
    return n >= 64 ? ~0ULL : (1ULL << n) - 1;
}

uint64_t ror(uint64_t v, unsigned amount, unsigned size) {
    if (amount == 0) return v;
    v &= ones(size);
    return ((v >> amount) | (v << (size - amount))) & ones(size);
}

}  // namespace

std::optional<MaskPair> decode_bit_masks_pair(unsigned n, unsigned imms, unsigned immr,
                                              unsigned datasize, bool immediate) {
    // len = HighestSetBit(N : NOT(imms))
    unsigned combined = (n << 6) | (~imms & 0x3F);
    if (combined == 0) return std::nullopt;
    int len = 31 - std::countl_zero((uint32_t)combined);
    if ((1u << len) > datasize) return std::nullopt;

    unsigned esize = 1u << len;
    unsigned levels = esize - 1;
    unsigned s = imms & levels;
    unsigned r = immr & levels;
    if (immediate && s == levels) return std::nullopt;  // all-ones immediate is reserved

    // diff = S - R (two's-complement, truncated to len bits)
    unsigned d = (s - r) & levels;

    uint64_t welem = ones(s + 1);
    uint64_t telem = ones(d + 1);
    uint64_t welem_r = ror(welem, r, esize);

    uint64_t wmask = 0, tmask = 0;
    for (unsigned i = 0; i < datasize; i += esize) {
        wmask |= welem_r << i;
        tmask |= telem << i;
    }
    return MaskPair{wmask & ones(datasize), tmask & ones(datasize)};
}

std::optional<uint64_t> decode_bit_masks(unsigned n, unsigned imms, unsigned immr,
                                         unsigned datasize) {
    auto p = decode_bit_masks_pair(n, imms, immr, datasize, true);
    if (!p) return std::nullopt;
    return p->wmask;
}

std::optional<LogicalImmEncoding> encode_bit_masks(uint64_t value, unsigned datasize) {
    value &= ones(datasize);
    // try element sizes from small to large; smallest repetition is canonical
    for (unsigned esize = 2; esize <= datasize; esize <<= 1) {
        uint64_t elem = value & ones(esize);
        // check value is elem replicated
        bool replicated = true;
        for (unsigned i = esize; i < datasize; i += esize)
            if (((value >> i) & ones(esize)) != elem) { replicated = false; break; }
        if (!replicated) continue;
        // elem must be a rotated run of ones, not all-zero / all-ones
        if (elem == 0 || elem == ones(esize)) continue;
        // count of set bits gives s+1; find rotation
        unsigned popcnt = (unsigned)std::popcount(elem);
        uint64_t run = ones(popcnt);
        for (unsigned r = 0; r < esize; ++r) {
            if (ror(run, r, esize) == elem) {
                unsigned len = 31 - std::countl_zero((uint32_t)esize);
                unsigned imms_high = (~((esize << 1) - 1) & 0x7E) >> 1;  // pattern bits
                // imms top bits encode element size: 0b111100>>... Standard form:
                // esize 2: imms = 0b111110 | (s), esize 4: 0b111100 | s, etc.
                unsigned imms = ((0x3F & ~((esize << 1) - 1)) | (popcnt - 1)) & 0x3F;
                unsigned n = (esize == 64) ? 1 : 0;
                (void)len; (void)imms_high;
                return LogicalImmEncoding{n, r, imms};
            }
        }
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace a64
