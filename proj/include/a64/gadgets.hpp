#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "a64/instr.hpp"
#include "a64/word.hpp"

namespace a64 {

struct GadgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GadgetSeq {
    std::vector<MachineWord> words;
    std::string effect;           // semantic descriptor, e.g. "w17 <- 0"
    std::set<uint8_t> clobbers;   // register indices clobbered besides the effect target
    bool sets_flags = true;

    size_t byte_len() const { return words.size() * 4; }
    std::string str() const;

    GadgetSeq& operator+=(const GadgetSeq& other);
};

// Registers with an alphanumeric `ands r, r, r, lsr #k` self-zeroing pair and
// alphanumeric adds/subs immediate pairs.
const std::set<uint8_t>& workhorse_regs();

// Feasible lsr shift amounts for the zeroing pair on register r (the shift
// must clear everything the other did not, so only k >= 16 qualifies).
std::vector<uint8_t> zero_shift_choices(uint8_t r);

// Alphanumeric adds/subs immediate values available on register r.
std::vector<uint16_t> addsub_imm_choices(uint8_t r, bool subs);

GadgetSeq zero_low(Reg r);                       // r_low32 <- 0
GadgetSeq add_const(Reg r, int64_t delta);       // r_low32 += delta (mod 2^32)
GadgetSeq move(Reg dst, Reg src);                // dst_low32 <- src_low32
GadgetSeq xor_into(Reg b, Reg a, Reg c);         // b ^= a; c clobbered
GadgetSeq not_into(Reg b, Reg c);                // b = ~b; c clobbered

// d <- a & b with a, b preserved; c, e, f clobbered. Corrected halfword
// schedule: the published one's final write clobbers the low half (see
// and_halfword_upper), so the second half here folds into d with two bics.
GadgetSeq logical_and(Reg d, Reg a, Reg b, Reg c, Reg e, Reg f);

// The verbatim 22-instruction halfword-AND schedule. Its true effect is
// d <- ((a & b) & 0xFFFF0000) | 0xFFFF: the last bics overwrites the low
// half computed by the first half of the schedule.
GadgetSeq and_halfword_upper(Reg d, Reg a, Reg b, Reg c, Reg e, Reg f);

GadgetSeq load_byte_imm(Reg dst, Reg base, unsigned offset);   // ldrb dst,[base,#offset]
GadgetSeq load_byte_reg(Reg dst, Reg base, Reg idx);           // ldrb dst,[base,idx,uxtw]
GadgetSeq load_byte_post(Reg dst, Reg base, int delta);        // ldrb dst,[base],#delta
GadgetSeq store_byte(Reg src, Reg base, Reg idx);              // strb src,[base,idx,uxtw]

struct BranchGadget {
    GadgetSeq seq;
    int64_t offset;  // achieved byte offset
};

// One tbz/tbnz word on (reg, bit). Picks the minimal-magnitude alphanumeric
// offset in the requested direction unless an exact offset is requested.
BranchGadget branch(bool on_set, Reg reg, unsigned bit, bool forward,
                    std::optional<int64_t> exact_offset = std::nullopt);

// All alphanumeric-encodable byte offsets for (reg, bit) in one direction,
// sorted by magnitude.
std::vector<int64_t> branch_offset_choices(bool on_set, Reg reg, unsigned bit,
                                           bool forward);

// Brute-force minima over every alphanumeric tbz/tbnz encoding.
int64_t min_forward_branch_offset();
int64_t min_backward_branch_offset();

// JSON-lines catalog of the fixed-register gadget instances.
void export_gadget_catalog(std::ostream& out);

}  // namespace a64
