#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace a64 {

enum class NibbleOrder : uint8_t { HighFirst, LowFirst };

struct EncodedPayload {
    std::string chars;    // 2 characters per payload byte, all in 'A'..'P'
    size_t source_len = 0;
    NibbleOrder nibble_order = NibbleOrder::HighFirst;
};

// 4-bits-per-character payload encoding: each nibble v becomes the character
// 0x40+v, except v == 0 which would be '@' and is bumped to 'P' (0x50); only
// the low nibble of each character carries information.
EncodedPayload encode_payload(const std::vector<uint8_t>& payload,
                              NibbleOrder order = NibbleOrder::HighFirst);

// Pure oracle for the in-vector decoder: reassembles bytes from the low
// nibbles of successive character pairs. Odd-length input is a format error.
std::vector<uint8_t> reference_decode(const EncodedPayload& enc);

// Bit-exact model of one pass of the in-vector three-instruction decode step
//   eon  wA, wZ, wA, lsl #20
//   ands wB, wB, #0xFFFF000F
//   eon  wB, wB, wA, lsr #16
// Returns the full 32-bit register value of wB afterwards; the decoded byte
// is its low 8 bits (the upper half holds schedule garbage by design).
// Requires wZ == 0 (the vector's dedicated zero register).
uint32_t model_decoder_step(uint32_t wA, uint32_t wB, uint32_t wZ = 0);

inline uint8_t decoded_byte(uint32_t step_result) { return (uint8_t)step_result; }

}  // namespace a64
