#include "a64/codec.hpp"

#include <stdexcept>

namespace a64 {

namespace {

char nibble_char(uint8_t v) {
    v &= 0xF;
    return v == 0 ? 'P' : (char)(0x40 + v);  // '@' is not alphanumeric
}

}  // namespace

EncodedPayload encode_payload(const std::vector<uint8_t>& payload, NibbleOrder order) {
    EncodedPayload enc;
    enc.source_len = payload.size();
    enc.nibble_order = order;
    enc.chars.reserve(payload.size() * 2);
    for (uint8_t b : payload) {
        uint8_t first = order == NibbleOrder::HighFirst ? (b >> 4) : (b & 0xF);
        uint8_t second = order == NibbleOrder::HighFirst ? (b & 0xF) : (b >> 4);
        enc.chars.push_back(nibble_char(first));
        enc.chars.push_back(nibble_char(second));
    }
    return enc;
}

std::vector<uint8_t> reference_decode(const EncodedPayload& enc) {
    if (enc.chars.size() % 2 != 0)
        throw std::invalid_argument("encoded stream must have even length");
    std::vector<uint8_t> out;
    out.reserve(enc.chars.size() / 2);
    for (size_t i = 0; i + 1 < enc.chars.size(); i += 2) {
        uint8_t a = (uint8_t)enc.chars[i] & 0xF;
        uint8_t b = (uint8_t)enc.chars[i + 1] & 0xF;
        out.push_back(enc.nibble_order == NibbleOrder::HighFirst ? (uint8_t)((a << 4) | b)
                                                                 : (uint8_t)((b << 4) | a));
    }
    return out;
}

uint32_t model_decoder_step(uint32_t wA, uint32_t wB, uint32_t wZ) {
    if (wZ != 0) throw std::invalid_argument("the zero register must hold 0");
    uint32_t wa = wZ ^ ~(wA << 20);  // eon wA, wZ, wA, lsl #20
    uint32_t wb = wB & 0xFFFF000Fu;  // ands wB, wB, #0xFFFF000F
    wb ^= ~(wa >> 16);               // eon wB, wB, wA, lsr #16
    return wb;
}

}  // namespace a64
