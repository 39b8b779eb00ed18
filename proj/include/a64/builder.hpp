#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "a64/codec.hpp"
#include "a64/emu.hpp"
#include "a64/instr.hpp"
#include "a64/word.hpp"

namespace a64 {

struct MutationProfile;  // poly.hpp

struct BuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AddressingProfile : uint8_t {
    sub4g,   // image base below 4 GiB; cursor moves use 32-bit adds/subs pairs
    full64,  // arbitrary base; cursor moves use post-index dummy-load chains
};

const char* addressing_profile_name(AddressingProfile p);
std::optional<AddressingProfile> addressing_profile_from_name(const std::string& s);

// Roles of words in the emitted image, recorded so mutation and inspection
// never have to re-derive the layout from the bytes.
enum class WordRole : uint8_t {
    fixed,       // semantics pinned; never mutated
    zero_shift,  // ands r, n, n, lsr #k where any alphanumeric k >= 16 works
    imm_pair,    // adds/subs immediate pair half; partner keeps the net delta
    setup_nop,   // executed filler before the loop head
    pool,        // encoded payload character
    filler,      // never-executed pad between pool end and the forward landing
    exec_nop,    // executed pad between the forward landing and the loop branch
};

struct WordNote {
    uint32_t index = 0;  // word index into the image
    WordRole role = WordRole::fixed;
    int32_t partner = -1;  // imm_pair: word index of the other half
    int64_t net = 0;       // imm_pair: signed byte delta the pair must keep
    uint8_t rd = 0, rn = 0;
};

struct LayoutPlan {
    size_t vector_head_len = 0;  // bytes before the pool (setup + loop body)
    size_t pool_offset = 0;      // == vector_head_len
    size_t pool_len = 0;         // 2 x payload length
    int64_t forward_jump = 0;    // skip-pool tbz offset, bytes
    int64_t backward_jump = 0;   // loop tbnz offset magnitude, bytes
    size_t pad_len = 0;          // filler + executed nops between pool and loop branch
    size_t loop_head = 0;        // byte offset the backward branch lands on
    Reg src_cursor{RegWidth::X64, 10};
    Reg dst_cursor{RegWidth::X64, 11};
    std::map<std::string, uint8_t> scratch_regs;
    AddressingProfile profile = AddressingProfile::sub4g;
    unsigned counter_bit = 9;  // tbnz bit; loop runs until it clears
};

struct ShellcodeImage {
    std::string bytes;  // the program: every byte alphanumeric, length % 4 == 0
    LayoutPlan layout;
    size_t decoded_payload_addr = 0;  // image-relative; == image length here
    size_t payload_len = 0;
    // Image-relative span the program may read beyond the image itself
    // (cursor walk excursions + decode destination); mapped zero when run.
    int64_t guard_lo = 0, guard_hi = 0;
    uint64_t seed = 0;  // mutation seed, 0 = canonical
    std::vector<WordNote> notes;

    std::string metadata_json() const;
    static ShellcodeImage from_parts(std::string bytes, const std::string& metadata_json);

    MachineWord word(size_t index) const;
    void set_word(size_t index, MachineWord w);
};

ShellcodeImage build(const std::vector<uint8_t>& payload, AddressingProfile profile,
                     const MutationProfile* mutation = nullptr);

LayoutPlan plan_layout(size_t encoded_len, AddressingProfile profile = AddressingProfile::sub4g);

// Returns the hint verbatim after checking it decodes field-identically to
// instr; used where the canonical encoding of an instruction is not
// alphanumeric but a known bit pattern is.
MachineWord emit_pinned_word(const DecodedInstr& instr, MachineWord pattern_hint);

// Register-field retarget of a pinned pattern: adds deltas to the contiguous
// Rd/Rn fields and re-verifies decode + alphanumeric closure.
MachineWord retarget_pinned_word(MachineWord pattern, int rd_delta, int rn_delta);

struct RunResult {
    MachineState state;
    HaltReason halt = HaltReason::running;
    uint64_t steps = 0;
    std::vector<uint8_t> decoded;  // bytes materialized at decoded_payload_addr
    std::string trace;             // filled only when requested
};

uint64_t default_base(AddressingProfile p);

RunResult run_image(const ShellcodeImage& image, uint64_t base, uint64_t step_limit,
                    bool want_trace = false);

// Emulator oracle: true iff the image runs to the decoded-payload region and
// the bytes written there equal the pool's reference decoding.
bool verify_image(const ShellcodeImage& image, std::string* why = nullptr);

}  // namespace a64
