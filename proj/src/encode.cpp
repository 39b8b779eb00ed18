#include "a64/encode.hpp"

#include "a64/bitmask.hpp"
#include "a64/decode.hpp"

namespace a64 {

namespace {

uint32_t field(int64_t v, unsigned width, const char* name) {
    if (v < 0 || v >= (int64_t)(1LL << width)) throw EncodeError(name);
    return (uint32_t)v;
}

uint32_t sfield(int64_t v, unsigned width, const char* name) {
    int64_t lo = -(1LL << (width - 1)), hi = (1LL << (width - 1)) - 1;
    if (v < lo || v > hi) throw EncodeError(name);
    return (uint32_t)v & ((1u << width) - 1);
}

const Operand& op(const DecodedInstr& i, unsigned n) {
    if (n >= i.op_count) throw EncodeError("operand count");
    return i.ops[n];
}

uint32_t reg_of(const Operand& o, const char* name) {
    if (o.kind != Operand::Kind::Register) throw EncodeError(name);
    return o.reg.index;
}

int64_t imm_of(const Operand& o, const char* name) {
    if (o.kind != Operand::Kind::Immediate) throw EncodeError(name);
    return o.imm;
}

bool is64(const DecodedInstr& i) {
    for (unsigned k = 0; k < i.op_count; ++k)
        if (i.ops[k].kind == Operand::Kind::Register)
            return i.ops[k].reg.width == RegWidth::X64;
    throw EncodeError("register width");
}

uint32_t encode_form(const DecodedInstr& i) {
    uint32_t sf;
    switch (i.form) {
        case InstrForm::AddSubImm: {
            sf = is64(i) ? 1u : 0u;
            uint32_t opS;
            switch (i.mnemonic) {
                case Mnemonic::add: opS = 0; break;
                case Mnemonic::adds: opS = 1; break;
                case Mnemonic::sub: opS = 2; break;
                case Mnemonic::subs: opS = 3; break;
                default: throw EncodeError("mnemonic");
            }
            uint32_t sh = 0;
            if (i.op_count == 4) {
                if (i.ops[3].kind != Operand::Kind::Shift ||
                    i.ops[3].shift != ShiftKind::LSL || i.ops[3].shift_amount != 12)
                    throw EncodeError("shift");
                sh = 1;
            }
            return (sf << 31) | (opS << 29) | (0b100010u << 23) | (sh << 22) |
                   (field(imm_of(op(i, 2), "imm12"), 12, "imm12") << 10) |
                   (reg_of(op(i, 1), "Rn") << 5) | reg_of(op(i, 0), "Rd");
        }
        case InstrForm::LogicalImm: {
            sf = is64(i) ? 1u : 0u;
            uint32_t opc;
            switch (i.mnemonic) {
                case Mnemonic::and_: opc = 0; break;
                case Mnemonic::orr: opc = 1; break;
                case Mnemonic::eor: opc = 2; break;
                case Mnemonic::ands: opc = 3; break;
                default: throw EncodeError("mnemonic");
            }
            auto enc = encode_bit_masks((uint64_t)imm_of(op(i, 2), "imm"), sf ? 64 : 32);
            if (!enc) throw EncodeError("bitmask immediate");
            return (sf << 31) | (opc << 29) | (0b100100u << 23) | (enc->n << 22) |
                   (enc->immr << 16) | (enc->imms << 10) | (reg_of(op(i, 1), "Rn") << 5) |
                   reg_of(op(i, 0), "Rd");
        }
        case InstrForm::LogicalShifted: {
            sf = is64(i) ? 1u : 0u;
            uint32_t opc, n;
            switch (i.mnemonic) {
                case Mnemonic::and_: opc = 0; n = 0; break;
                case Mnemonic::bic: opc = 0; n = 1; break;
                case Mnemonic::orr: opc = 1; n = 0; break;
                case Mnemonic::orn: opc = 1; n = 1; break;
                case Mnemonic::eor: opc = 2; n = 0; break;
                case Mnemonic::eon: opc = 2; n = 1; break;
                case Mnemonic::ands: opc = 3; n = 0; break;
                case Mnemonic::bics: opc = 3; n = 1; break;
                default: throw EncodeError("mnemonic");
            }
            const Operand& sh = op(i, 3);
            if (sh.kind != Operand::Kind::Shift) throw EncodeError("shift");
            if (!sf && sh.shift_amount > 31) throw EncodeError("imm6");
            return (sf << 31) | (opc << 29) | (0b01010u << 24) |
                   ((uint32_t)sh.shift << 22) | (n << 21) |
                   (reg_of(op(i, 2), "Rm") << 16) | ((uint32_t)sh.shift_amount << 10) |
                   (reg_of(op(i, 1), "Rn") << 5) | reg_of(op(i, 0), "Rd");
        }
        case InstrForm::AddSubShifted: {
            sf = is64(i) ? 1u : 0u;
            uint32_t opS;
            switch (i.mnemonic) {
                case Mnemonic::add: opS = 0; break;
                case Mnemonic::adds: opS = 1; break;
                case Mnemonic::sub: opS = 2; break;
                case Mnemonic::subs: opS = 3; break;
                default: throw EncodeError("mnemonic");
            }
            const Operand& sh = op(i, 3);
            if (sh.kind != Operand::Kind::Shift || sh.shift == ShiftKind::ROR)
                throw EncodeError("shift");
            if (!sf && sh.shift_amount > 31) throw EncodeError("imm6");
            return (sf << 31) | (opS << 29) | (0b01011u << 24) |
                   ((uint32_t)sh.shift << 22) | (reg_of(op(i, 2), "Rm") << 16) |
                   ((uint32_t)sh.shift_amount << 10) | (reg_of(op(i, 1), "Rn") << 5) |
                   reg_of(op(i, 0), "Rd");
        }
        case InstrForm::Bitfield: {
            sf = is64(i) ? 1u : 0u;
            uint32_t opc;
            switch (i.mnemonic) {
                case Mnemonic::sbfm: opc = 0; break;
                case Mnemonic::bfm: opc = 1; break;
                case Mnemonic::ubfm: opc = 2; break;
                default: throw EncodeError("mnemonic");
            }
            uint32_t immr = field(imm_of(op(i, 2), "immr"), 6, "immr");
            uint32_t imms = field(imm_of(op(i, 3), "imms"), 6, "imms");
            if (!sf && (immr > 31 || imms > 31)) throw EncodeError("immr/imms");
            return (sf << 31) | (opc << 29) | (0b100110u << 23) | (sf << 22) |
                   (immr << 16) | (imms << 10) | (reg_of(op(i, 1), "Rn") << 5) |
                   reg_of(op(i, 0), "Rd");
        }
        case InstrForm::Adr: {
            int64_t imm = imm_of(op(i, 1), "imm21");
            bool page = i.mnemonic == Mnemonic::adrp;
            if (page) {
                if (imm & 0xFFF) throw EncodeError("imm21 (page aligned)");
                imm >>= 12;
            } else if (i.mnemonic != Mnemonic::adr) {
                throw EncodeError("mnemonic");
            }
            uint32_t enc = sfield(imm, 21, "imm21");
            return ((page ? 1u : 0u) << 31) | ((enc & 3) << 29) | (0b10000u << 24) |
                   ((enc >> 2) << 5) | reg_of(op(i, 0), "Rd");
        }
        case InstrForm::CcmpImm:
        case InstrForm::CcmpReg: {
            sf = op(i, 0).reg.width == RegWidth::X64 ? 1u : 0u;
            uint32_t opbit = i.mnemonic == Mnemonic::ccmp   ? 1u
                             : i.mnemonic == Mnemonic::ccmn ? 0u
                                                            : throw EncodeError("mnemonic");
            bool imm_form = i.form == InstrForm::CcmpImm;
            uint32_t src = imm_form ? field(imm_of(op(i, 1), "imm5"), 5, "imm5")
                                    : reg_of(op(i, 1), "Rm");
            uint32_t nzcv = field(imm_of(op(i, 2), "nzcv"), 4, "nzcv");
            if (op(i, 3).kind != Operand::Kind::Condition) throw EncodeError("cond");
            return (sf << 31) | (opbit << 30) | (1u << 29) | (0b11010010u << 21) |
                   (src << 16) | ((uint32_t)op(i, 3).cond << 12) |
                   ((imm_form ? 1u : 0u) << 11) | (reg_of(op(i, 0), "Rn") << 5) | nzcv;
        }
        case InstrForm::CompareBranch: {
            sf = is64(i) ? 1u : 0u;
            uint32_t opbit = i.mnemonic == Mnemonic::cbnz  ? 1u
                             : i.mnemonic == Mnemonic::cbz ? 0u
                                                           : throw EncodeError("mnemonic");
            int64_t off = imm_of(op(i, 1), "offset");
            if (off & 3) throw EncodeError("offset alignment");
            return (sf << 31) | (0b011010u << 25) | (opbit << 24) |
                   (sfield(off / 4, 19, "imm19") << 5) | reg_of(op(i, 0), "Rt");
        }
        case InstrForm::TestBranch: {
            uint32_t opbit = i.mnemonic == Mnemonic::tbnz  ? 1u
                             : i.mnemonic == Mnemonic::tbz ? 0u
                                                           : throw EncodeError("mnemonic");
            uint32_t bitpos = field(imm_of(op(i, 1), "bit"), 6, "bit");
            int64_t off = imm_of(op(i, 2), "offset");
            if (off & 3) throw EncodeError("offset alignment");
            return ((bitpos >> 5) << 31) | (0b011011u << 25) | (opbit << 24) |
                   ((bitpos & 0x1F) << 19) | (sfield(off / 4, 14, "imm14") << 5) |
                   reg_of(op(i, 0), "Rt");
        }
        case InstrForm::CondBranch: {
            if (op(i, 0).kind != Operand::Kind::Condition) throw EncodeError("cond");
            int64_t off = imm_of(op(i, 1), "offset");
            if (off & 3) throw EncodeError("offset alignment");
            return (0b01010100u << 24) | (sfield(off / 4, 19, "imm19") << 5) |
                   (uint32_t)op(i, 0).cond;
        }
        case InstrForm::BranchImm: {
            uint32_t opbit = i.mnemonic == Mnemonic::bl  ? 1u
                             : i.mnemonic == Mnemonic::b ? 0u
                                                         : throw EncodeError("mnemonic");
            int64_t off = imm_of(op(i, 0), "offset");
            if (off & 3) throw EncodeError("offset alignment");
            return (opbit << 31) | (0b00101u << 26) | sfield(off / 4, 26, "imm26");
        }
        case InstrForm::LdrLiteral: {
            if (i.mnemonic != Mnemonic::ldr && i.mnemonic != Mnemonic::ldrsw)
                throw EncodeError("mnemonic");
            const Reg& rt = op(i, 0).reg;
            uint32_t opc = i.mnemonic == Mnemonic::ldrsw ? 2u
                           : rt.width == RegWidth::X64   ? 1u
                                                         : 0u;
            int64_t off = imm_of(op(i, 1), "offset");
            if (off & 3) throw EncodeError("offset alignment");
            return (opc << 30) | (0b011000u << 24) | (sfield(off / 4, 19, "imm19") << 5) |
                   rt.index;
        }
        case InstrForm::LoadStoreUImm:
        case InstrForm::LoadStoreRegOff:
        case InstrForm::LoadStorePost:
        case InstrForm::LoadStorePre:
        case InstrForm::LoadStoreUnscaled:
        case InstrForm::LoadStoreUnpriv: {
            uint32_t size, opc;
            const Reg& rt = op(i, 0).reg;
            bool rt64 = rt.width == RegWidth::X64;
            switch (i.mnemonic) {
                case Mnemonic::strb: case Mnemonic::sturb: case Mnemonic::sttrb:
                    size = 0; opc = 0; break;
                case Mnemonic::ldrb: case Mnemonic::ldurb: case Mnemonic::ldtrb:
                    size = 0; opc = 1; break;
                case Mnemonic::ldrsb: case Mnemonic::ldursb: case Mnemonic::ldtrsb:
                    size = 0; opc = rt64 ? 2u : 3u; break;
                case Mnemonic::strh: case Mnemonic::sturh: case Mnemonic::sttrh:
                    size = 1; opc = 0; break;
                case Mnemonic::ldrh: case Mnemonic::ldurh: case Mnemonic::ldtrh:
                    size = 1; opc = 1; break;
                case Mnemonic::ldrsh: case Mnemonic::ldursh: case Mnemonic::ldtrsh:
                    size = 1; opc = rt64 ? 2u : 3u; break;
                case Mnemonic::str: case Mnemonic::stur: case Mnemonic::sttr:
                    size = rt64 ? 3u : 2u; opc = 0; break;
                case Mnemonic::ldr: case Mnemonic::ldur: case Mnemonic::ldtr:
                    size = rt64 ? 3u : 2u; opc = 1; break;
                case Mnemonic::ldrsw: case Mnemonic::ldursw: case Mnemonic::ldtrsw:
                    size = 2; opc = 2; break;
                default: throw EncodeError("mnemonic");
            }
            uint32_t rn = reg_of(op(i, 1), "Rn");
            uint32_t base = (size << 30) | (0b111u << 27) | (opc << 22);
            if (i.form == InstrForm::LoadStoreUImm) {
                int64_t off = imm_of(op(i, 2), "imm12");
                if (off & ((1 << size) - 1)) throw EncodeError("imm12 scaling");
                return base | (1u << 24) | (field(off >> size, 12, "imm12") << 10) |
                       (rn << 5) | rt.index;
            }
            if (i.form == InstrForm::LoadStoreRegOff) {
                uint32_t rm = reg_of(op(i, 2), "Rm");
                const Operand& ext = op(i, 3);
                if (ext.kind != Operand::Kind::Extend) throw EncodeError("extend");
                uint32_t option;
                switch (ext.extend) {
                    case ExtendKind::UXTW: option = 2; break;
                    case ExtendKind::UXTX: option = 3; break;  // plain register / LSL
                    case ExtendKind::SXTW: option = 6; break;
                    case ExtendKind::SXTX: option = 7; break;
                    default: throw EncodeError("extend kind");
                }
                uint32_t s = 0;
                if (ext.extend_amount) {
                    if (ext.extend_amount != size) throw EncodeError("extend amount");
                    s = 1;
                }
                return base | (1u << 21) | (rm << 16) | (option << 13) | (s << 12) |
                       (0b10u << 10) | (rn << 5) | rt.index;
            }
            uint32_t idx;
            switch (i.form) {
                case InstrForm::LoadStoreUnscaled: idx = 0; break;
                case InstrForm::LoadStorePost: idx = 1; break;
                case InstrForm::LoadStoreUnpriv: idx = 2; break;
                default: idx = 3; break;  // pre-index
            }
            return base | (sfield(imm_of(op(i, 2), "imm9"), 9, "imm9") << 12) |
                   (idx << 10) | (rn << 5) | rt.index;
        }
        case InstrForm::MoveWide: {
            sf = is64(i) ? 1u : 0u;
            uint32_t opc;
            switch (i.mnemonic) {
                case Mnemonic::movn: opc = 0; break;
                case Mnemonic::movz: opc = 2; break;
                case Mnemonic::movk: opc = 3; break;
                default: throw EncodeError("mnemonic");
            }
            uint32_t hw = 0;
            if (i.op_count == 3) {
                const Operand& sh = i.ops[2];
                if (sh.kind != Operand::Kind::Shift || sh.shift != ShiftKind::LSL ||
                    sh.shift_amount % 16)
                    throw EncodeError("shift");
                hw = sh.shift_amount / 16;
            }
            if (!sf && hw > 1) throw EncodeError("hw");
            return (sf << 31) | (opc << 29) | (0b100101u << 23) | (hw << 21) |
                   (field(imm_of(op(i, 1), "imm16"), 16, "imm16") << 5) |
                   reg_of(op(i, 0), "Rd");
        }
        default:
            throw EncodeError("unsupported form");
    }
}

}  // namespace

MachineWord encode(const DecodedInstr& instr, std::optional<MachineWord> pattern_hint) {
    if (instr.category == Category::Undefined) throw EncodeError("undefined instruction");
    if (pattern_hint) {
        if (!(decode(*pattern_hint) == instr)) throw EncodeError("pattern hint mismatch");
        return *pattern_hint;
    }
    MachineWord w{encode_form(instr)};
    if (!(decode(w) == instr)) throw EncodeError("round-trip mismatch");
    return w;
}

}  // namespace a64
