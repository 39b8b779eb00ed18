#include "a64/emu.hpp"

#include "a64/bitmask.hpp"

namespace a64 {

// ------------------------------------------------------------------- memory

void SparseMemory::map(uint64_t base, std::vector<uint8_t> data) {
    segs_[base] = std::move(data);
}

const std::vector<uint8_t>* SparseMemory::find(uint64_t addr, uint64_t& off) const {
    auto it = segs_.upper_bound(addr);
    if (it == segs_.begin()) return nullptr;
    --it;
    if (addr - it->first >= it->second.size()) return nullptr;
    off = addr - it->first;
    return &it->second;
}

std::optional<uint8_t> SparseMemory::read8(uint64_t addr) const {
    uint64_t off;
    const auto* seg = find(addr, off);
    if (!seg) return std::nullopt;
    return (*seg)[off];
}

bool SparseMemory::write8(uint64_t addr, uint8_t v) {
    uint64_t off;
    const auto* seg = find(addr, off);
    if (!seg) return false;
    const_cast<std::vector<uint8_t>&>(*seg)[off] = v;
    return true;
}

std::optional<uint64_t> SparseMemory::read(uint64_t addr, unsigned nbytes) const {
    uint64_t v = 0;
    for (unsigned i = 0; i < nbytes; ++i) {
        auto b = read8(addr + i);
        if (!b) return std::nullopt;
        v |= (uint64_t)*b << (8 * i);
    }
    return v;
}

bool SparseMemory::write(uint64_t addr, uint64_t v, unsigned nbytes) {
    for (unsigned i = 0; i < nbytes; ++i)
        if (!write8(addr + i, (uint8_t)(v >> (8 * i)))) return false;
    return true;
}

// ------------------------------------------------------------------- state

const char* halt_reason_name(HaltReason r) {
    switch (r) {
        case HaltReason::running: return "running";
        case HaltReason::reached_target: return "reached-target";
        case HaltReason::undefined_instr: return "undefined-instr";
        case HaltReason::unsupported_instr: return "unsupported-instr";
        case HaltReason::unmapped_access: return "unmapped-access";
        case HaltReason::unaligned_pc: return "unaligned-pc";
        case HaltReason::step_limit: return "step-limit";
    }
    return "?";
}

uint64_t MachineState::read_reg(const Reg& r) const {
    uint64_t v;
    if (r.index == 31)
        v = (r.role == RegRole::StackPointer) ? sp : 0;
    else
        v = x[r.index];
    return r.width == RegWidth::W32 ? (v & 0xFFFFFFFF) : v;
}

void MachineState::write_reg(const Reg& r, uint64_t value) {
    if (r.width == RegWidth::W32) value &= 0xFFFFFFFF;
    if (r.index == 31) {
        if (r.role == RegRole::StackPointer) sp = value;
        return;  // zero register: write discarded
    }
    x[r.index] = value;
}

// ---------------------------------------------------------------- execution

namespace {

uint64_t width_mask(RegWidth w) {
    return w == RegWidth::W32 ? 0xFFFFFFFFull : ~0ull;
}

unsigned width_bits(RegWidth w) { return w == RegWidth::W32 ? 32 : 64; }

uint64_t apply_shift(uint64_t v, ShiftKind k, unsigned amount, unsigned bits) {
    uint64_t mask = bits == 64 ? ~0ull : (1ull << bits) - 1;
    v &= mask;
    if (amount == 0) return v;
    switch (k) {
        case ShiftKind::LSL: return (v << amount) & mask;
        case ShiftKind::LSR: return v >> amount;
        case ShiftKind::ASR: {
            uint64_t sign = 1ull << (bits - 1);
            uint64_t r = v >> amount;
            if (v & sign) r |= mask & ~(mask >> amount);
            return r;
        }
        case ShiftKind::ROR:
            amount %= bits;
            return ((v >> amount) | (v << (bits - amount))) & mask;
    }
    return v;
}

uint64_t apply_extend(uint64_t v, ExtendKind k, unsigned amount) {
    switch (k) {
        case ExtendKind::UXTB: v &= 0xFF; break;
        case ExtendKind::UXTH: v &= 0xFFFF; break;
        case ExtendKind::UXTW: v &= 0xFFFFFFFF; break;
        case ExtendKind::UXTX: break;
        case ExtendKind::SXTB: v = (uint64_t)(int64_t)(int8_t)v; break;
        case ExtendKind::SXTH: v = (uint64_t)(int64_t)(int16_t)v; break;
        case ExtendKind::SXTW: v = (uint64_t)(int64_t)(int32_t)v; break;
        case ExtendKind::SXTX: break;
    }
    return v << amount;
}

struct AddResult {
    uint64_t value;
    uint8_t nzcv;
};

AddResult add_with_carry(uint64_t a, uint64_t b, bool carry_in, unsigned bits) {
    uint64_t mask = bits == 64 ? ~0ull : (1ull << bits) - 1;
    a &= mask;
    b &= mask;
    unsigned __int128 usum = (unsigned __int128)a + b + (carry_in ? 1 : 0);
    uint64_t result = (uint64_t)usum & mask;
    uint64_t sign = 1ull << (bits - 1);
    bool n = result & sign;
    bool z = result == 0;
    bool c = (usum >> bits) != 0;
    bool v = ((a ^ result) & (b ^ result) & sign) != 0;
    return {result, (uint8_t)((n << 3) | (z << 2) | (c << 1) | (uint8_t)v)};
}

bool cond_holds(Cond cond, const MachineState& s) {
    bool r;
    switch ((unsigned)cond >> 1) {
        case 0: r = s.z; break;
        case 1: r = s.c; break;
        case 2: r = s.n; break;
        case 3: r = s.v; break;
        case 4: r = s.c && !s.z; break;
        case 5: r = s.n == s.v; break;
        case 6: r = s.n == s.v && !s.z; break;
        default: return true;  // AL / NV both take the branch
    }
    return ((unsigned)cond & 1) ? !r : r;
}

struct LdStInfo {
    unsigned nbytes;
    bool load;
    bool sign;
};

std::optional<LdStInfo> ldst_info(Mnemonic m, RegWidth rt_width) {
    switch (m) {
        case Mnemonic::ldrb: case Mnemonic::ldurb: case Mnemonic::ldtrb:
            return LdStInfo{1, true, false};
        case Mnemonic::strb: case Mnemonic::sturb: case Mnemonic::sttrb:
            return LdStInfo{1, false, false};
        case Mnemonic::ldrsb: case Mnemonic::ldursb: case Mnemonic::ldtrsb:
            return LdStInfo{1, true, true};
        case Mnemonic::ldrh: case Mnemonic::ldurh: case Mnemonic::ldtrh:
            return LdStInfo{2, true, false};
        case Mnemonic::strh: case Mnemonic::sturh: case Mnemonic::sttrh:
            return LdStInfo{2, false, false};
        case Mnemonic::ldrsh: case Mnemonic::ldursh: case Mnemonic::ldtrsh:
            return LdStInfo{2, true, true};
        case Mnemonic::ldr: case Mnemonic::ldur: case Mnemonic::ldtr:
            return LdStInfo{rt_width == RegWidth::X64 ? 8u : 4u, true, false};
        case Mnemonic::str: case Mnemonic::stur: case Mnemonic::sttr:
            return LdStInfo{rt_width == RegWidth::X64 ? 8u : 4u, false, false};
        case Mnemonic::ldrsw: case Mnemonic::ldursw: case Mnemonic::ldtrsw:
            return LdStInfo{4, true, true};
        default:
            return std::nullopt;
    }
}

uint64_t sign_extend_load(uint64_t v, unsigned nbytes, RegWidth w) {
    int64_t s;
    switch (nbytes) {
        case 1: s = (int8_t)v; break;
        case 2: s = (int16_t)v; break;
        default: s = (int32_t)v; break;
    }
    return (uint64_t)s & width_mask(w);
}

}  // namespace

bool Emulator::step() {
    if (halt != HaltReason::running) return false;
    if (st.pc & 3) {
        halt = HaltReason::unaligned_pc;
        return false;
    }
    auto fetched = mem.read(st.pc, 4);
    if (!fetched) {
        halt = HaltReason::unmapped_access;
        return false;
    }
    MachineWord w{(uint32_t)*fetched};
    DecodedInstr ins = decode(w);
    if (trace_hook) trace_hook(st.pc, w, ins);
    if (ins.category == Category::Undefined) {
        halt = HaltReason::undefined_instr;
        return false;
    }

    uint64_t next_pc = st.pc + 4;

    switch (ins.form) {
        case InstrForm::AddSubImm:
        case InstrForm::AddSubShifted:
        case InstrForm::AddSubExtended: {
            const Reg& rd = ins.ops[0].reg;
            unsigned bits = width_bits(rd.width);
            uint64_t a = st.read_reg(ins.ops[1].reg);
            uint64_t b;
            if (ins.form == InstrForm::AddSubImm) {
                b = (uint64_t)ins.ops[2].imm;
                if (ins.op_count == 4) b <<= 12;
            } else if (ins.form == InstrForm::AddSubShifted) {
                b = apply_shift(st.read_reg(ins.ops[2].reg), ins.ops[3].shift,
                                ins.ops[3].shift_amount, bits);
            } else {
                b = apply_extend(st.read_reg(ins.ops[2].reg), ins.ops[3].extend,
                                 ins.ops[3].extend_amount) &
                    width_mask(rd.width);
            }
            bool is_sub = ins.mnemonic == Mnemonic::sub || ins.mnemonic == Mnemonic::subs;
            bool set_flags =
                ins.mnemonic == Mnemonic::adds || ins.mnemonic == Mnemonic::subs;
            AddResult r = is_sub ? add_with_carry(a, ~b & width_mask(rd.width), true, bits)
                                 : add_with_carry(a, b, false, bits);
            if (set_flags) st.set_nzcv(r.nzcv);
            st.write_reg(rd, r.value);
            break;
        }
        case InstrForm::LogicalImm:
        case InstrForm::LogicalShifted: {
            const Reg& rd = ins.ops[0].reg;
            unsigned bits = width_bits(rd.width);
            uint64_t a = st.read_reg(ins.ops[1].reg);
            uint64_t b;
            bool negate = false;
            if (ins.form == InstrForm::LogicalImm) {
                b = (uint64_t)ins.ops[2].imm;
            } else {
                b = apply_shift(st.read_reg(ins.ops[2].reg), ins.ops[3].shift,
                                ins.ops[3].shift_amount, bits);
                negate = ins.mnemonic == Mnemonic::bic || ins.mnemonic == Mnemonic::orn ||
                         ins.mnemonic == Mnemonic::eon || ins.mnemonic == Mnemonic::bics;
            }
            if (negate) b = ~b & width_mask(rd.width);
            uint64_t result;
            bool set_flags = false;
            switch (ins.mnemonic) {
                case Mnemonic::and_: case Mnemonic::bic: result = a & b; break;
                case Mnemonic::orr: case Mnemonic::orn: result = a | b; break;
                case Mnemonic::eor: case Mnemonic::eon: result = a ^ b; break;
                case Mnemonic::ands: case Mnemonic::bics:
                    result = a & b;
                    set_flags = true;
                    break;
                default: halt = HaltReason::unsupported_instr; return false;
            }
            result &= width_mask(rd.width);
            if (set_flags) {
                st.n = result >> (bits - 1);
                st.z = result == 0;
                st.c = false;
                st.v = false;
            }
            st.write_reg(rd, result);
            break;
        }
        case InstrForm::Bitfield: {
            const Reg& rd = ins.ops[0].reg;
            unsigned ds = width_bits(rd.width);
            unsigned immr = (unsigned)ins.ops[2].imm, imms = (unsigned)ins.ops[3].imm;
            auto masks = decode_bit_masks_pair(ds == 64, imms, immr, ds, false);
            if (!masks) {
                halt = HaltReason::undefined_instr;
                return false;
            }
            uint64_t src = st.read_reg(ins.ops[1].reg);
            uint64_t rotated = apply_shift(src, ShiftKind::ROR, immr, ds);
            uint64_t bot, result;
            uint64_t dst = st.read_reg(Reg{rd.width, rd.index, RegRole::Zero});
            switch (ins.mnemonic) {
                case Mnemonic::ubfm:
                    result = rotated & masks->wmask & masks->tmask;
                    break;
                case Mnemonic::sbfm: {
                    bot = rotated & masks->wmask;
                    uint64_t top = (src >> imms) & 1 ? width_mask(rd.width) : 0;
                    result = (top & ~masks->tmask) | (bot & masks->tmask);
                    break;
                }
                case Mnemonic::bfm:
                    bot = (dst & ~masks->wmask) | (rotated & masks->wmask);
                    result = (dst & ~masks->tmask) | (bot & masks->tmask);
                    break;
                default: halt = HaltReason::unsupported_instr; return false;
            }
            st.write_reg(rd, result & width_mask(rd.width));
            break;
        }
        case InstrForm::Extract: {
            const Reg& rd = ins.ops[0].reg;
            unsigned bits = width_bits(rd.width);
            uint64_t hi = st.read_reg(ins.ops[1].reg), lo = st.read_reg(ins.ops[2].reg);
            unsigned lsb = (unsigned)ins.ops[3].imm;
            uint64_t result = lsb == 0 ? lo : ((lo >> lsb) | (hi << (bits - lsb)));
            st.write_reg(rd, result & width_mask(rd.width));
            break;
        }
        case InstrForm::Adr: {
            int64_t imm = ins.ops[1].imm;
            uint64_t base = ins.mnemonic == Mnemonic::adrp ? (st.pc & ~0xFFFull) : st.pc;
            st.write_reg(ins.ops[0].reg, base + (uint64_t)imm);
            break;
        }
        case InstrForm::MoveWide: {
            const Reg& rd = ins.ops[0].reg;
            uint64_t imm = (uint64_t)ins.ops[1].imm;
            unsigned sh = ins.op_count == 3 ? ins.ops[2].shift_amount : 0;
            uint64_t result;
            switch (ins.mnemonic) {
                case Mnemonic::movz: result = imm << sh; break;
                case Mnemonic::movn: result = ~(imm << sh) & width_mask(rd.width); break;
                case Mnemonic::movk:
                    result = (st.read_reg(Reg{rd.width, rd.index, RegRole::Zero}) &
                              ~(0xFFFFull << sh)) |
                             (imm << sh);
                    break;
                default: halt = HaltReason::unsupported_instr; return false;
            }
            st.write_reg(rd, result);
            break;
        }
        case InstrForm::CcmpImm:
        case InstrForm::CcmpReg: {
            const Reg& rn = ins.ops[0].reg;
            unsigned bits = width_bits(rn.width);
            if (cond_holds(ins.ops[3].cond, st)) {
                uint64_t a = st.read_reg(rn);
                uint64_t b = ins.form == InstrForm::CcmpImm ? (uint64_t)ins.ops[1].imm
                                                            : st.read_reg(ins.ops[1].reg);
                AddResult r =
                    ins.mnemonic == Mnemonic::ccmp
                        ? add_with_carry(a, ~b & width_mask(rn.width), true, bits)
                        : add_with_carry(a, b, false, bits);
                st.set_nzcv(r.nzcv);
            } else {
                st.set_nzcv((uint8_t)ins.ops[2].imm);
            }
            break;
        }
        case InstrForm::CompareBranch: {
            uint64_t v = st.read_reg(ins.ops[0].reg);
            bool taken = (ins.mnemonic == Mnemonic::cbz) == (v == 0);
            if (taken) next_pc = st.pc + (uint64_t)ins.ops[1].imm;
            break;
        }
        case InstrForm::TestBranch: {
            uint64_t v = st.read_reg(ins.ops[0].reg);
            bool bitset = (v >> ins.ops[1].imm) & 1;
            bool taken = (ins.mnemonic == Mnemonic::tbnz) == bitset;
            if (taken) next_pc = st.pc + (uint64_t)ins.ops[2].imm;
            break;
        }
        case InstrForm::CondBranch: {
            if (cond_holds(ins.ops[0].cond, st)) next_pc = st.pc + (uint64_t)ins.ops[1].imm;
            break;
        }
        case InstrForm::BranchImm: {
            if (ins.mnemonic == Mnemonic::bl) st.x[30] = st.pc + 4;
            next_pc = st.pc + (uint64_t)ins.ops[0].imm;
            break;
        }
        case InstrForm::BranchReg: {
            unsigned opc = (unsigned)ins.ops[1].imm;
            if (opc == 1) st.x[30] = st.pc + 4;  // blr
            next_pc = st.read_reg(ins.ops[0].reg);
            break;
        }
        case InstrForm::LdrLiteral: {
            if (ins.mnemonic == Mnemonic::prfm) break;  // hint only
            const Reg& rt = ins.ops[0].reg;
            if (rt.width != RegWidth::X64 && ins.mnemonic == Mnemonic::ldr) {
                auto v = mem.read(st.pc + (uint64_t)ins.ops[1].imm, 4);
                if (!v) { halt = HaltReason::unmapped_access; return false; }
                st.write_reg(rt, *v);
                break;
            }
            unsigned nbytes = ins.mnemonic == Mnemonic::ldrsw ? 4 : 8;
            auto v = mem.read(st.pc + (uint64_t)ins.ops[1].imm, nbytes);
            if (!v) { halt = HaltReason::unmapped_access; return false; }
            uint64_t val = *v;
            if (ins.mnemonic == Mnemonic::ldrsw) val = (uint64_t)(int64_t)(int32_t)val;
            st.write_reg(rt, val);
            break;
        }
        case InstrForm::LoadStoreUImm:
        case InstrForm::LoadStoreRegOff:
        case InstrForm::LoadStorePost:
        case InstrForm::LoadStorePre:
        case InstrForm::LoadStoreUnscaled:
        case InstrForm::LoadStoreUnpriv: {
            if (ins.mnemonic == Mnemonic::prfm) break;
            const Reg& rt = ins.ops[0].reg;
            auto info = ldst_info(ins.mnemonic, rt.width);
            if (!info) { halt = HaltReason::unsupported_instr; return false; }
            uint64_t base = st.read_reg(ins.ops[1].reg);
            uint64_t addr = base;
            if (ins.form == InstrForm::LoadStoreUImm ||
                ins.form == InstrForm::LoadStoreUnscaled ||
                ins.form == InstrForm::LoadStoreUnpriv ||
                ins.form == InstrForm::LoadStorePre) {
                addr += (uint64_t)ins.ops[2].imm;
            } else if (ins.form == InstrForm::LoadStoreRegOff) {
                addr += apply_extend(st.read_reg(ins.ops[2].reg), ins.ops[3].extend,
                                     ins.ops[3].extend_amount);
            }
            if (info->load) {
                auto v = mem.read(addr, info->nbytes);
                if (!v) { halt = HaltReason::unmapped_access; return false; }
                uint64_t val = *v;
                if (info->sign) val = sign_extend_load(val, info->nbytes, rt.width);
                st.write_reg(rt, val);
            } else {
                if (!mem.write(addr, st.read_reg(rt), info->nbytes)) {
                    halt = HaltReason::unmapped_access;
                    return false;
                }
            }
            if (ins.form == InstrForm::LoadStorePost || ins.form == InstrForm::LoadStorePre) {
                uint64_t wb = ins.form == InstrForm::LoadStorePost
                                  ? base + (uint64_t)ins.ops[2].imm
                                  : addr;
                st.write_reg(ins.ops[1].reg, wb);
            }
            break;
        }
        default:
            halt = HaltReason::unsupported_instr;
            return false;
    }

    st.pc = next_pc;
    return true;
}

HaltReason Emulator::run(uint64_t step_limit, uint64_t* steps_out) {
    uint64_t steps = 0;
    while (halt == HaltReason::running) {
        if (target_end > target_begin && st.pc >= target_begin && st.pc < target_end) {
            halt = HaltReason::reached_target;
            break;
        }
        if (steps >= step_limit) {
            halt = HaltReason::step_limit;
            break;
        }
        if (step()) ++steps;
    }
    if (steps_out) *steps_out = steps;
    return halt;
}

HaltReason run_sequence(MachineState& st, SparseMemory& mem,
                        const std::vector<MachineWord>& words, uint64_t code_base) {
    Emulator emu;
    emu.st = st;
    emu.mem = mem;
    std::vector<uint8_t> code;
    code.reserve(words.size() * 4);
    for (auto w : words)
        for (auto b : w.bytes()) code.push_back(b);
    emu.mem.map(code_base, std::move(code));
    emu.st.pc = code_base;
    uint64_t end = code_base + words.size() * 4;
    emu.target_begin = end;
    emu.target_end = end + 4;
    HaltReason r = emu.run(words.size() * 4 + 16);
    st = emu.st;
    mem = emu.mem;
    if (r == HaltReason::reached_target && st.pc == end) return HaltReason::running;
    return r;
}

}  // namespace a64
