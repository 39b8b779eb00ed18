#pragma once

#include <optional>
#include <stdexcept>

#include "a64/instr.hpp"

namespace a64 {

struct EncodeError : std::runtime_error {
    explicit EncodeError(const std::string& field)
        : std::runtime_error("cannot encode field: " + field) {}
};

// Inverse of decode() for the supported instruction subset. When several bit
// patterns express the same instruction (bitmask immediates, for one), a
// pattern hint selects the exact word; the hint must decode field-identical
// to `instr` or encoding fails.
MachineWord encode(const DecodedInstr& instr,
                   std::optional<MachineWord> pattern_hint = std::nullopt);

}  // namespace a64
