#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "a64/decode.hpp"
#include "a64/instr.hpp"

namespace a64 {

// Sparse byte-addressable memory; any access outside a mapped segment is an
// error surfaced to the emulator (never silently zero).
class SparseMemory {
 public:
    void map(uint64_t base, std::vector<uint8_t> data);
    void map_zero(uint64_t base, size_t len) { map(base, std::vector<uint8_t>(len, 0)); }

    std::optional<uint8_t> read8(uint64_t addr) const;
    bool write8(uint64_t addr, uint8_t v);

    std::optional<uint64_t> read(uint64_t addr, unsigned nbytes) const;  // little-endian
    bool write(uint64_t addr, uint64_t v, unsigned nbytes);

 private:
    // base -> bytes; segments never overlap
    std::map<uint64_t, std::vector<uint8_t>> segs_;
    const std::vector<uint8_t>* find(uint64_t addr, uint64_t& off) const;
};

enum class HaltReason {
    running,
    reached_target,
    undefined_instr,
    unsupported_instr,  // valid encoding outside the executed subset
    unmapped_access,
    unaligned_pc,
    step_limit,
};

const char* halt_reason_name(HaltReason r);

struct MachineState {
    std::array<uint64_t, 31> x{};
    uint64_t sp = 0;
    uint64_t pc = 0;
    bool n = false, z = false, c = false, v = false;

    uint64_t read_reg(const Reg& r) const;
    void write_reg(const Reg& r, uint64_t value);  // W writes zero the upper half
    uint8_t nzcv() const { return (uint8_t)((n << 3) | (z << 2) | (c << 1) | (uint8_t)v); }
    void set_nzcv(uint8_t f) {
        n = f & 8;
        z = f & 4;
        c = f & 2;
        v = f & 1;
    }
};

struct Emulator {
    MachineState st;
    SparseMemory mem;
    HaltReason halt = HaltReason::running;

    // run() halts with reached_target when pc enters [target_begin, target_end)
    uint64_t target_begin = 0, target_end = 0;

    std::function<void(uint64_t pc, MachineWord, const DecodedInstr&)> trace_hook;

    // Executes one instruction; returns false when halted.
    bool step();

    HaltReason run(uint64_t step_limit, uint64_t* steps_out = nullptr);
};

// Convenience: execute a word sequence over a given state (no branches taken
// out of the sequence); returns the halt reason (running == ran to the end).
HaltReason run_sequence(MachineState& st, SparseMemory& mem,
                        const std::vector<MachineWord>& words, uint64_t code_base);

}  // namespace a64
