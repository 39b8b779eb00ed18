#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "a64/decode.hpp"
#include "a64/word.hpp"

#include <json.hpp>

namespace a64 {

struct InstrSetReport {
    uint64_t total_alnum_words = 0;
    uint64_t valid_instructions = 0;
    std::map<std::string, uint64_t> per_category;
    std::set<std::string> a1_opcodes;   // opcodes with >= 1 alphanumeric instance
    std::set<std::string> amax_opcodes; // curated usable subset

    nlohmann::json to_json() const;
};

// Decodes every alphanumeric word and aggregates the census.
InstrSetReport classify_space();

// Streams the full table as JSON-lines (word hex, byte string, mnemonic,
// category) to `out`.
void export_table(std::ostream& out);

// Alphanumeric words that are harmless in a decoder vector whose live
// registers are `live_regs` (x-register indices). Conservative: only forms
// with fully modeled semantics and no memory or control-flow effects.
std::vector<MachineWord> find_nop_candidates(const std::set<uint8_t>& live_regs);

}  // namespace a64
