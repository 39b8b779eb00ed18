#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace a64 {

// One 32-bit AArch64 instruction word. The byte view is little-endian,
// so the printable form of word W is bytes[0]..bytes[3].
struct MachineWord {
    uint32_t value = 0;

    constexpr MachineWord() = default;
    constexpr explicit MachineWord(uint32_t v) : value(v) {}

    static constexpr MachineWord from_bytes(uint8_t b0, uint8_t b1, uint8_t b2, uint8_t b3) {
        return MachineWord(uint32_t(b0) | uint32_t(b1) << 8 | uint32_t(b2) << 16 |
                           uint32_t(b3) << 24);
    }

    static MachineWord from_str(std::string_view s4);

    constexpr uint8_t byte(unsigned i) const { return uint8_t(value >> (8 * i)); }

    constexpr std::array<uint8_t, 4> bytes() const {
        return {byte(0), byte(1), byte(2), byte(3)};
    }

    bool is_alnum() const;

    // The 4-character printable form ("000X" for 0x58303030).
    std::string str() const;

    friend constexpr bool operator==(MachineWord a, MachineWord b) { return a.value == b.value; }
    friend constexpr bool operator<(MachineWord a, MachineWord b) { return a.value < b.value; }
};

constexpr bool is_alnum_byte(uint8_t b) {
    return (b >= '0' && b <= '9') || (b >= 'A' && b <= 'Z') || (b >= 'a' && b <= 'z');
}

inline bool MachineWord::is_alnum() const {
    return is_alnum_byte(byte(0)) && is_alnum_byte(byte(1)) && is_alnum_byte(byte(2)) &&
           is_alnum_byte(byte(3));
}

inline std::string MachineWord::str() const {
    return std::string{char(byte(0)), char(byte(1)), char(byte(2)), char(byte(3))};
}

inline MachineWord MachineWord::from_str(std::string_view s4) {
    return from_bytes(uint8_t(s4[0]), uint8_t(s4[1]), uint8_t(s4[2]), uint8_t(s4[3]));
}

// The 62-character alphabet, in byte order ('0' < 'A' < 'a').
inline constexpr std::array<uint8_t, 62> kAlphabet = [] {
    std::array<uint8_t, 62> a{};
    int n = 0;
    for (uint8_t c = '0'; c <= '9'; ++c) a[n++] = c;
    for (uint8_t c = 'A'; c <= 'Z'; ++c) a[n++] = c;
    for (uint8_t c = 'a'; c <= 'z'; ++c) a[n++] = c;
    return a;
}();

inline constexpr uint64_t kAlnumWordCount = 62ull * 62 * 62 * 62;  // 14,776,336

// Calls fn(MachineWord) for every alphanumeric word, in lexicographic order
// of the 4-byte printable string.
template <typename Fn>
void for_each_alnum_word(Fn&& fn) {
    for (uint8_t b0 : kAlphabet)
        for (uint8_t b1 : kAlphabet)
            for (uint8_t b2 : kAlphabet)
                for (uint8_t b3 : kAlphabet) fn(MachineWord::from_bytes(b0, b1, b2, b3));
}

}  // namespace a64
