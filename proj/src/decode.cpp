#include "a64/decode.hpp"

#include "a64/bitmask.hpp"

namespace a64 {

namespace {

uint32_t bits(uint32_t v, int hi, int lo) {
    return (v >> lo) & ((1u << (hi - lo + 1)) - 1);
}

bool bit(uint32_t v, int i) { return (v >> i) & 1; }

int64_t sext(uint64_t v, unsigned width) {
    uint64_t m = 1ULL << (width - 1);
    return (int64_t)((v ^ m) - m);
}

DecodedInstr undef(MachineWord w) {
    DecodedInstr d;
    d.raw = w;
    return d;
}

DecodedInstr make(MachineWord w, Mnemonic m, InstrForm f, Category c) {
    DecodedInstr d;
    d.raw = w;
    d.mnemonic = m;
    d.form = f;
    d.category = c;
    return d;
}

Reg gpr(bool is64, uint32_t idx, RegRole role31 = RegRole::Zero) {
    Reg r;
    r.width = is64 ? RegWidth::X64 : RegWidth::W32;
    r.index = (uint8_t)idx;
    r.role = (idx == 31) ? role31 : RegRole::Gpr;
    return r;
}

// ---------------------------------------------------------------- immediates

DecodedInstr dp_imm(MachineWord w) {
    uint32_t v = w.value;
    bool sf = bit(v, 31);
    switch (bits(v, 25, 23)) {
        case 0:
        case 1: {  // pc-relative
            bool page = bit(v, 31);
            uint32_t immlo = bits(v, 30, 29);
            uint32_t immhi = bits(v, 23, 5);
            int64_t imm = sext(((uint64_t)immhi << 2) | immlo, 21);
            if (page) imm <<= 12;
            auto d = make(w, page ? Mnemonic::adrp : Mnemonic::adr, InstrForm::Adr,
                          Category::DataProcessing);
            d.push(Operand::make_reg(gpr(true, bits(v, 4, 0))));
            d.push(Operand::make_imm(imm, 21));
            return d;
        }
        case 2: {  // add/sub immediate
            bool op = bit(v, 30), s = bit(v, 29), sh = bit(v, 22);
            Mnemonic m = op ? (s ? Mnemonic::subs : Mnemonic::sub)
                            : (s ? Mnemonic::adds : Mnemonic::add);
            auto d = make(w, m, InstrForm::AddSubImm, Category::DataProcessing);
            d.push(Operand::make_reg(
                gpr(sf, bits(v, 4, 0), s ? RegRole::Zero : RegRole::StackPointer)));
            d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5), RegRole::StackPointer)));
            d.push(Operand::make_imm(bits(v, 21, 10), 12));
            if (sh) d.push(Operand::make_shift(ShiftKind::LSL, 12));
            return d;
        }
        case 4: {  // logical immediate
            uint32_t opc = bits(v, 30, 29);
            bool n = bit(v, 22);
            if (!sf && n) return undef(w);
            auto mask = decode_bit_masks(n, bits(v, 15, 10), bits(v, 21, 16), sf ? 64 : 32);
            if (!mask) return undef(w);
            static const Mnemonic mn[4] = {Mnemonic::and_, Mnemonic::orr, Mnemonic::eor,
                                           Mnemonic::ands};
            auto d = make(w, mn[opc], InstrForm::LogicalImm, Category::DataProcessing);
            d.push(Operand::make_reg(
                gpr(sf, bits(v, 4, 0), opc == 3 ? RegRole::Zero : RegRole::StackPointer)));
            d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
            d.push(Operand::make_imm((int64_t)*mask, sf ? 64 : 32));
            return d;
        }
        case 5: {  // move wide
            uint32_t opc = bits(v, 30, 29);
            uint32_t hw = bits(v, 22, 21);
            if (opc == 1) return undef(w);
            if (!sf && hw > 1) return undef(w);
            static const Mnemonic mn[4] = {Mnemonic::movn, Mnemonic::undefined,
                                           Mnemonic::movz, Mnemonic::movk};
            auto d = make(w, mn[opc], InstrForm::MoveWide, Category::DataProcessing);
            d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
            d.push(Operand::make_imm(bits(v, 20, 5), 16));
            if (hw) d.push(Operand::make_shift(ShiftKind::LSL, (uint8_t)(hw * 16)));
            return d;
        }
        case 6: {  // bitfield
            uint32_t opc = bits(v, 30, 29);
            bool n = bit(v, 22);
            uint32_t immr = bits(v, 21, 16), imms = bits(v, 15, 10);
            if (opc == 3) return undef(w);
            if (sf != n) return undef(w);
            if (!sf && (immr > 31 || imms > 31)) return undef(w);
            static const Mnemonic mn[3] = {Mnemonic::sbfm, Mnemonic::bfm, Mnemonic::ubfm};
            auto d = make(w, mn[opc], InstrForm::Bitfield, Category::DataProcessing);
            d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
            d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
            d.push(Operand::make_imm(immr, 6));
            d.push(Operand::make_imm(imms, 6));
            return d;
        }
        case 7: {  // extract
            if (bits(v, 30, 29) != 0 || bit(v, 21)) return undef(w);
            bool n = bit(v, 22);
            uint32_t imms = bits(v, 15, 10);
            if (sf != n) return undef(w);
            if (!sf && imms > 31) return undef(w);
            auto d = make(w, Mnemonic::extr, InstrForm::Extract, Category::DataProcessing);
            d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
            d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
            d.push(Operand::make_reg(gpr(sf, bits(v, 20, 16))));
            d.push(Operand::make_imm(imms, 6));
            return d;
        }
        default:  // 3 = tagged add/sub (memory tagging extension) -- not modeled
            return undef(w);
    }
}

// ------------------------------------------------------------------ branches

DecodedInstr branches(MachineWord w) {
    uint32_t v = w.value;
    if (bits(v, 30, 26) == 0b00101) {  // b / bl
        auto d = make(w, bit(v, 31) ? Mnemonic::bl : Mnemonic::b, InstrForm::BranchImm,
                      Category::Branch);
        d.push(Operand::make_imm(sext(bits(v, 25, 0), 26) * 4, 26));
        return d;
    }
    if (bits(v, 30, 25) == 0b011010) {  // cbz / cbnz
        auto d = make(w, bit(v, 24) ? Mnemonic::cbnz : Mnemonic::cbz,
                      InstrForm::CompareBranch, Category::Branch);
        d.push(Operand::make_reg(gpr(bit(v, 31), bits(v, 4, 0))));
        d.push(Operand::make_imm(sext(bits(v, 23, 5), 19) * 4, 19));
        return d;
    }
    if (bits(v, 30, 25) == 0b011011) {  // tbz / tbnz
        uint32_t bitpos = (bits(v, 31, 31) << 5) | bits(v, 23, 19);
        auto d = make(w, bit(v, 24) ? Mnemonic::tbnz : Mnemonic::tbz, InstrForm::TestBranch,
                      Category::Branch);
        d.push(Operand::make_reg(gpr(bit(v, 31), bits(v, 4, 0))));
        d.push(Operand::make_imm(bitpos, 6));
        d.push(Operand::make_imm(sext(bits(v, 18, 5), 14) * 4, 14));
        return d;
    }
    if (bits(v, 31, 24) == 0b01010100) {  // b.cond
        if (bit(v, 4)) return undef(w);
        auto d = make(w, Mnemonic::b_cond, InstrForm::CondBranch, Category::Branch);
        d.push(Operand::make_cond((Cond)bits(v, 3, 0)));
        d.push(Operand::make_imm(sext(bits(v, 23, 5), 19) * 4, 19));
        return d;
    }
    if (bits(v, 31, 24) == 0b11010100) {  // exception generation (svc, brk, ...)
        uint32_t opc = bits(v, 23, 21), op2 = bits(v, 4, 2), ll = bits(v, 1, 0);
        if (op2 != 0) return undef(w);
        bool ok = (opc == 0 && ll != 0) ||                     // svc/hvc/smc
                  (opc == 1 && ll == 0) || (opc == 2 && ll == 0) ||  // brk, hlt
                  (opc == 5 && ll != 0);                        // dcps
        if (!ok) return undef(w);
        auto d = make(w, Mnemonic::exc_family, InstrForm::System, Category::System);
        d.push(Operand::make_imm(bits(v, 20, 5), 16));
        return d;
    }
    if (bits(v, 31, 22) == 0b1101010100) {  // system: hints, barriers, msr/mrs, sys
        return make(w, Mnemonic::sys_family, InstrForm::System, Category::System);
    }
    if (bits(v, 31, 25) == 0b1101011) {  // unconditional branch (register)
        uint32_t opc = bits(v, 24, 21);
        if (opc > 2) return undef(w);   // br/blr/ret only (no pointer auth forms)
        if (bits(v, 20, 16) != 0b11111 || bits(v, 15, 10) != 0 || bits(v, 4, 0) != 0)
            return undef(w);
        auto d = make(w, Mnemonic::br_family, InstrForm::BranchReg, Category::Branch);
        d.push(Operand::make_reg(gpr(true, bits(v, 9, 5))));
        d.push(Operand::make_imm(opc, 4));  // 0=br 1=blr 2=ret
        return d;
    }
    return undef(w);
}

// --------------------------------------------------------------- loads/stores

// size/opc table for the general register load/store families (V=0).
// Returns the mnemonic and whether Rt is a 64-bit register.
struct LdStKind {
    Mnemonic m;
    bool rt64;
    bool is_prfm;
};

std::optional<LdStKind> ldst_gpr_kind(uint32_t size, uint32_t opc) {
    switch (size) {
        case 0:
            switch (opc) {
                case 0: return LdStKind{Mnemonic::strb, false, false};
                case 1: return LdStKind{Mnemonic::ldrb, false, false};
                case 2: return LdStKind{Mnemonic::ldrsb, true, false};
                case 3: return LdStKind{Mnemonic::ldrsb, false, false};
            }
            break;
        case 1:
            switch (opc) {
                case 0: return LdStKind{Mnemonic::strh, false, false};
                case 1: return LdStKind{Mnemonic::ldrh, false, false};
                case 2: return LdStKind{Mnemonic::ldrsh, true, false};
                case 3: return LdStKind{Mnemonic::ldrsh, false, false};
            }
            break;
        case 2:
            switch (opc) {
                case 0: return LdStKind{Mnemonic::str, false, false};
                case 1: return LdStKind{Mnemonic::ldr, false, false};
                case 2: return LdStKind{Mnemonic::ldrsw, true, false};
            }
            break;
        case 3:
            switch (opc) {
                case 0: return LdStKind{Mnemonic::str, true, false};
                case 1: return LdStKind{Mnemonic::ldr, true, false};
                case 2: return LdStKind{Mnemonic::prfm, true, true};
            }
            break;
    }
    return std::nullopt;
}

DecodedInstr loads_stores(MachineWord w) {
    uint32_t v = w.value;
    bool vreg = bit(v, 26);

    if (bits(v, 29, 24) == 0b001000) {  // exclusives / ordered
        if (vreg) return undef(w);
        uint32_t size = bits(v, 31, 30);
        bool o2 = bit(v, 23), l = bit(v, 22), o1 = bit(v, 21), o0 = bit(v, 15);
        Mnemonic m = Mnemonic::undefined;
        if (!o2 && !o1) {
            static const Mnemonic tbl[2][4] = {
                {Mnemonic::stxrb, Mnemonic::stxrh, Mnemonic::stxr, Mnemonic::stxr},
                {Mnemonic::ldxrb, Mnemonic::ldxrh, Mnemonic::ldxr, Mnemonic::ldxr}};
            m = o0 ? (l ? Mnemonic::ldaxr_family : Mnemonic::stlr_family) : tbl[l][size];
        } else if (!o2 && o1) {
            if (size < 2) return undef(w);  // stxp/ldxp are word/dword only
            m = l ? Mnemonic::ldaxr_family : Mnemonic::stlr_family;
        } else if (o2 && !o1 && o0) {
            m = l ? Mnemonic::ldaxr_family : Mnemonic::stlr_family;  // ldar/stlr
        } else {
            return undef(w);
        }
        auto d = make(w, m, InstrForm::LoadStoreExclusive, Category::LoadStore);
        d.push(Operand::make_reg(gpr(size == 3, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(true, bits(v, 9, 5), RegRole::StackPointer)));
        return d;
    }

    if (bits(v, 29, 24) == 0b011000) {  // load literal
        uint32_t opc = bits(v, 31, 30);
        if (vreg && opc == 3) return undef(w);
        Mnemonic m;
        bool rt64 = false;
        if (vreg) {
            m = Mnemonic::ldr;  // simd&fp literal
        } else {
            static const Mnemonic tbl[4] = {Mnemonic::ldr, Mnemonic::ldr, Mnemonic::ldrsw,
                                            Mnemonic::prfm};
            m = tbl[opc];
            rt64 = opc >= 1;
        }
        auto d = make(w, m, InstrForm::LdrLiteral,
                      vreg ? Category::SimdFpCrypto : Category::LoadStore);
        d.push(Operand::make_reg(gpr(rt64, bits(v, 4, 0))));
        d.push(Operand::make_imm(sext(bits(v, 23, 5), 19) * 4, 19));  // byte offset
        return d;
    }

    if (bits(v, 29, 27) == 0b101) {  // register pairs
        uint32_t opc = bits(v, 31, 30);
        uint32_t variant = bits(v, 25, 23);  // 000 no-alloc, 001 post, 010 off, 011 pre
        bool l = bit(v, 22);
        if (variant > 3) return undef(w);
        Mnemonic m;
        bool rt64 = false;
        if (vreg) {
            if (opc == 3) return undef(w);
            m = variant == 0 ? (l ? Mnemonic::ldnp : Mnemonic::stnp)
                             : (l ? Mnemonic::ldp : Mnemonic::stp);
        } else {
            if (opc == 3) return undef(w);
            if (opc == 1) {
                if (!l || variant == 0) return undef(w);  // stgp/unallocated
                m = Mnemonic::ldpsw;
                rt64 = true;
            } else {
                rt64 = opc == 2;
                m = variant == 0 ? (l ? Mnemonic::ldnp : Mnemonic::stnp)
                                 : (l ? Mnemonic::ldp : Mnemonic::stp);
            }
        }
        auto d = make(w, m, InstrForm::LoadStorePair,
                      vreg ? Category::SimdFpCrypto : Category::LoadStore);
        d.push(Operand::make_reg(gpr(rt64, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(rt64, bits(v, 14, 10))));
        d.push(Operand::make_reg(gpr(true, bits(v, 9, 5), RegRole::StackPointer)));
        d.push(Operand::make_imm(sext(bits(v, 21, 15), 7), 7));  // scaled units
        d.push(Operand::make_imm(variant, 2));
        return d;
    }

    if (bits(v, 29, 27) == 0b111) {  // single register
        uint32_t size = bits(v, 31, 30);
        uint32_t opc = bits(v, 23, 22);
        bool uimm_form = bit(v, 24);

        Mnemonic m = Mnemonic::undefined;
        bool rt64 = false;
        if (vreg) {
            // SIMD&FP register: opc<1> extends size to Q
            bool valid = opc < 2 || (size == 0);
            if (!valid) return undef(w);
            m = (opc & 1) ? Mnemonic::ldr : Mnemonic::str;
        } else {
            auto k = ldst_gpr_kind(size, opc);
            if (!k) return undef(w);
            m = k->m;
            rt64 = k->rt64;
            if (k->is_prfm && !uimm_form) {
                // prfm exists as unscaled (prfum) and reg-offset only
                if (!(bit(v, 21) ? bits(v, 11, 10) == 2 : bits(v, 11, 10) == 0))
                    return undef(w);
            }
        }
        Category cat = vreg ? Category::SimdFpCrypto : Category::LoadStore;

        if (uimm_form) {
            auto d = make(w, m, InstrForm::LoadStoreUImm, cat);
            d.push(Operand::make_reg(gpr(rt64, bits(v, 4, 0))));
            d.push(Operand::make_reg(gpr(true, bits(v, 9, 5), RegRole::StackPointer)));
            d.push(Operand::make_imm((int64_t)bits(v, 21, 10) << size, 12));
            return d;
        }
        if (bit(v, 21)) {
            if (bits(v, 11, 10) != 2) return undef(w);  // atomics/PAC not modeled
            uint32_t option = bits(v, 15, 13);
            if (!(option & 2)) return undef(w);
            static const ExtendKind ext_tbl[8] = {
                ExtendKind::UXTB, ExtendKind::UXTH, ExtendKind::UXTW, ExtendKind::UXTX,
                ExtendKind::SXTB, ExtendKind::SXTH, ExtendKind::SXTW, ExtendKind::SXTX};
            auto d = make(w, m, InstrForm::LoadStoreRegOff, cat);
            d.push(Operand::make_reg(gpr(rt64, bits(v, 4, 0))));
            d.push(Operand::make_reg(gpr(true, bits(v, 9, 5), RegRole::StackPointer)));
            d.push(Operand::make_reg(gpr(option & 1, bits(v, 20, 16))));
            d.push(Operand::make_extend(ext_tbl[option],
                                        bit(v, 12) ? (uint8_t)size : (uint8_t)0));
            return d;
        }
        int64_t imm9 = sext(bits(v, 20, 12), 9);
        InstrForm f;
        switch (bits(v, 11, 10)) {
            case 0: f = InstrForm::LoadStoreUnscaled; break;
            case 1: f = InstrForm::LoadStorePost; break;
            case 2:
                if (vreg) return undef(w);
                f = InstrForm::LoadStoreUnpriv;
                break;
            case 3: f = InstrForm::LoadStorePre; break;
            default: return undef(w);
        }
        auto d = make(w, m, f, cat);
        d.push(Operand::make_reg(gpr(rt64, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(true, bits(v, 9, 5), RegRole::StackPointer)));
        d.push(Operand::make_imm(imm9, 9));
        return d;
    }

    if (vreg && bits(v, 31, 31) == 0 && bits(v, 29, 25) == 0b00110) {
        // AdvSIMD load/store structures (ld1/st1...), post-index when bit23
        uint32_t opcode = bits(v, 15, 12);
        bool single = bit(v, 24);
        if (!single) {
            static const bool ok[16] = {true,  false, true,  false, true,  false, true, true,
                                        true,  false, true,  false, false, false, false, false};
            if (!ok[opcode]) return undef(w);
            if ((opcode & 1) == 1 && opcode != 7) return undef(w);
        }
        return make(w, Mnemonic::simd_ldst, InstrForm::SimdLdSt, Category::LoadStore);
    }

    return undef(w);
}

// ----------------------------------------------------------- dp register ops

DecodedInstr dp_reg(MachineWord w) {
    uint32_t v = w.value;
    bool sf = bit(v, 31);

    if (bits(v, 28, 24) == 0b01010) {  // logical shifted register
        uint32_t opc = bits(v, 30, 29);
        uint32_t shift = bits(v, 23, 22);
        bool n = bit(v, 21);
        uint32_t imm6 = bits(v, 15, 10);
        if (!sf && imm6 > 31) return undef(w);
        static const Mnemonic mn[4][2] = {{Mnemonic::and_, Mnemonic::bic},
                                          {Mnemonic::orr, Mnemonic::orn},
                                          {Mnemonic::eor, Mnemonic::eon},
                                          {Mnemonic::ands, Mnemonic::bics}};
        auto d = make(w, mn[opc][n], InstrForm::LogicalShifted, Category::DataProcessing);
        d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 20, 16))));
        d.push(Operand::make_shift((ShiftKind)shift, (uint8_t)imm6));
        return d;
    }

    if (bits(v, 28, 24) == 0b01011) {  // add/sub shifted or extended register
        bool op = bit(v, 30), s = bit(v, 29);
        Mnemonic m = op ? (s ? Mnemonic::subs : Mnemonic::sub)
                        : (s ? Mnemonic::adds : Mnemonic::add);
        if (bit(v, 21)) {  // extended
            if (bits(v, 23, 22) != 0) return undef(w);
            uint32_t imm3 = bits(v, 12, 10);
            if (imm3 > 4) return undef(w);
            uint32_t option = bits(v, 15, 13);
            static const ExtendKind ext_tbl[8] = {
                ExtendKind::UXTB, ExtendKind::UXTH, ExtendKind::UXTW, ExtendKind::UXTX,
                ExtendKind::SXTB, ExtendKind::SXTH, ExtendKind::SXTW, ExtendKind::SXTX};
            auto d = make(w, m, InstrForm::AddSubExtended, Category::DataProcessing);
            d.push(Operand::make_reg(
                gpr(sf, bits(v, 4, 0), s ? RegRole::Zero : RegRole::StackPointer)));
            d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5), RegRole::StackPointer)));
            d.push(Operand::make_reg(gpr(sf && (option & 3) == 3, bits(v, 20, 16))));
            d.push(Operand::make_extend(ext_tbl[option], (uint8_t)imm3));
            return d;
        }
        uint32_t shift = bits(v, 23, 22);
        uint32_t imm6 = bits(v, 15, 10);
        if (shift == 3) return undef(w);
        if (!sf && imm6 > 31) return undef(w);
        auto d = make(w, m, InstrForm::AddSubShifted, Category::DataProcessing);
        d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 20, 16))));
        d.push(Operand::make_shift((ShiftKind)shift, (uint8_t)imm6));
        return d;
    }

    if (bits(v, 28, 21) == 0b11010000) {  // add/sub with carry
        if (bits(v, 15, 10) != 0) return undef(w);
        auto d = make(w, Mnemonic::dp_misc, InstrForm::DpReg, Category::DataProcessing);
        d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 20, 16))));
        return d;
    }

    if (bits(v, 28, 21) == 0b11010010) {  // conditional compare
        if (!bit(v, 29)) return undef(w);      // S must be set
        if (bit(v, 10) || bit(v, 4)) return undef(w);
        bool imm_form = bit(v, 11);
        Mnemonic m = bit(v, 30) ? Mnemonic::ccmp : Mnemonic::ccmn;
        auto d = make(w, m, imm_form ? InstrForm::CcmpImm : InstrForm::CcmpReg,
                      Category::DataProcessing);
        d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
        if (imm_form)
            d.push(Operand::make_imm(bits(v, 20, 16), 5));
        else
            d.push(Operand::make_reg(gpr(sf, bits(v, 20, 16))));
        d.push(Operand::make_imm(bits(v, 3, 0), 4));  // nzcv
        d.push(Operand::make_cond((Cond)bits(v, 15, 12)));
        return d;
    }

    if (bits(v, 28, 21) == 0b11010100) {  // conditional select
        if (bit(v, 29) || bit(v, 11)) return undef(w);
        auto d = make(w, Mnemonic::csel_family, InstrForm::CondSelect,
                      Category::DataProcessing);
        d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 20, 16))));
        d.push(Operand::make_cond((Cond)bits(v, 15, 12)));
        return d;
    }

    if (bits(v, 28, 21) == 0b11010110) {  // 1- and 2-source register ops
        bool one_src = bit(v, 30);
        if (bit(v, 29)) return undef(w);
        if (one_src) {
            if (bits(v, 20, 16) != 0) return undef(w);
            // rbit(0) rev16(1) rev/rev32(2) rev(3, 64-bit only) clz(4) cls(5)
            uint32_t opcode = bits(v, 15, 10);
            bool ok = opcode <= 5 && !(!sf && opcode == 3);
            if (!ok) return undef(w);
            auto d = make(w, Mnemonic::dp_misc, InstrForm::DpReg, Category::DataProcessing);
            d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
            d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
            return d;
        }
        uint32_t opcode = bits(v, 15, 10);
        bool ok = opcode == 2 || opcode == 3 ||            // udiv sdiv
                  (opcode >= 8 && opcode <= 11) ||         // lslv lsrv asrv rorv
                  (sf == 0 && opcode >= 16 && opcode <= 19) ||  // crc32b/h/w + crc32cb...
                  (sf == 0 && opcode >= 20 && opcode <= 23);
        if (!ok) return undef(w);
        auto d = make(w, Mnemonic::dp_misc, InstrForm::DpReg, Category::DataProcessing);
        d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 20, 16))));
        return d;
    }

    if (bits(v, 28, 24) == 0b11011) {  // 3-source (madd, msub, ...)
        uint32_t op31 = bits(v, 23, 21), o0 = bit(v, 15);
        bool ok = (op31 == 0) ||
                  (sf && (op31 == 1 || op31 == 5)) ||          // smaddl/smsubl umaddl/umsubl
                  (sf && !o0 && (op31 == 2 || op31 == 6));     // smulh umulh
        if (bits(v, 30, 29) != 0) return undef(w);
        if (!ok) return undef(w);
        auto d = make(w, Mnemonic::dp_misc, InstrForm::DpReg, Category::DataProcessing);
        d.push(Operand::make_reg(gpr(sf, bits(v, 4, 0))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 9, 5))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 20, 16))));
        d.push(Operand::make_reg(gpr(sf, bits(v, 14, 10))));
        return d;
    }

    return undef(w);
}

// ------------------------------------------------------------------ simd/fp
//
// Only the vector families that can ever appear with an alphanumeric opcode
// byte are decoded with named mnemonics; everything else in the SIMD&FP space
// is classified coarsely. Validity follows the architectural allocation
// tables closely enough for stable census counts.

DecodedInstr simd_named(MachineWord w, Mnemonic m) {
    return make(w, m, InstrForm::Simd, Category::SimdFpCrypto);
}

DecodedInstr simd_three_same(MachineWord w, bool u, uint32_t size, uint32_t opcode) {
    // integer/logical rows; FP rows (opcode >= 0x18) handled after
    if (opcode >= 0x18) {
        return simd_named(w, Mnemonic::simd);  // fp three-same, kept coarse
    }
    bool size3_ok =
        opcode == 0x06 || opcode == 0x07 || opcode == 0x08 || opcode == 0x09 ||
        opcode == 0x0A || opcode == 0x0B || opcode == 0x10 || opcode == 0x11;
    if (size == 3 && !size3_ok) return undef(w);
    static const Mnemonic mn_u0[0x18] = {
        Mnemonic::simd, Mnemonic::simd, Mnemonic::simd, Mnemonic::simd,  // shadd sqadd srhadd and-family
        Mnemonic::simd, Mnemonic::simd, Mnemonic::cmgt, Mnemonic::cmge,
        Mnemonic::sshl, Mnemonic::sqshl, Mnemonic::srshl, Mnemonic::sqrshl,
        Mnemonic::smax, Mnemonic::smin, Mnemonic::sabd, Mnemonic::saba,
        Mnemonic::add_v, Mnemonic::cmtst, Mnemonic::mla, Mnemonic::mul_v,
        Mnemonic::smaxp, Mnemonic::sminp, Mnemonic::simd, Mnemonic::simd};
    static const Mnemonic mn_u1[0x18] = {
        Mnemonic::simd, Mnemonic::simd, Mnemonic::simd, Mnemonic::simd,  // uhadd uqadd urhadd eor-family
        Mnemonic::simd, Mnemonic::simd, Mnemonic::cmhi, Mnemonic::cmhs,
        Mnemonic::ushl, Mnemonic::uqshl, Mnemonic::urshl, Mnemonic::uqrshl,
        Mnemonic::umax, Mnemonic::umin, Mnemonic::uabd, Mnemonic::uaba,
        Mnemonic::sub_v, Mnemonic::cmeq, Mnemonic::mls, Mnemonic::pmul,
        Mnemonic::umaxp, Mnemonic::uminp, Mnemonic::simd, Mnemonic::simd};
    if (u && opcode == 0x13 && size != 0) return undef(w);       // pmul is bytes only
    if (opcode == 0x16 && (size == 0 || size == 3)) return undef(w);  // sqdmulh/sqrdmulh
    if (opcode == 0x17 && u) return undef(w);                    // addp is U=0 only
    return simd_named(w, (u ? mn_u1 : mn_u0)[opcode]);
}

DecodedInstr simd_three_diff(MachineWord w, bool u, uint32_t size, uint32_t opcode) {
    if (size == 3) return undef(w);
    static const Mnemonic mn_u0[16] = {
        Mnemonic::saddl, Mnemonic::saddw, Mnemonic::ssubl, Mnemonic::ssubw,
        Mnemonic::addhn, Mnemonic::sabal, Mnemonic::subhn, Mnemonic::sabdl,
        Mnemonic::smlal, Mnemonic::sqdmlal, Mnemonic::smlsl, Mnemonic::sqdmlsl,
        Mnemonic::smull, Mnemonic::sqdmull, Mnemonic::pmull, Mnemonic::undefined};
    static const Mnemonic mn_u1[16] = {
        Mnemonic::uaddl, Mnemonic::simd, Mnemonic::usubw, Mnemonic::usubw,
        Mnemonic::raddhn, Mnemonic::uabal, Mnemonic::rsubhn, Mnemonic::uabdl,
        Mnemonic::umlal, Mnemonic::undefined, Mnemonic::umlsl, Mnemonic::undefined,
        Mnemonic::umull, Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined};
    Mnemonic m = (u ? mn_u1 : mn_u0)[opcode];
    if (m == Mnemonic::undefined) return undef(w);
    if (!u && (opcode == 9 || opcode == 11 || opcode == 13) && size == 0)
        return undef(w);  // sqd* exclude bytes
    if (!u && opcode == 14 && (size == 1 || size == 2)) return undef(w);  // pmull
    return simd_named(w, m);
}

DecodedInstr simd_two_misc(MachineWord w, bool u, uint32_t size, uint32_t opcode) {
    // integer rows only; 0x16+ are FP conversions with their own size rules
    if (opcode <= 0x09) {
        static const bool ok_u0[10] = {true, true, true, true, true, true, false, true,
                                       true, true};
        static const bool ok_u1[10] = {true, true, true, true, true, true, false, true,
                                       true, true};
        if (!(u ? ok_u1 : ok_u0)[opcode]) return undef(w);
        if (size == 3 && opcode < 4 && opcode != 3) return undef(w);
        if (opcode >= 8 && size == 3) return simd_named(w, Mnemonic::simd);  // cm* .2d fine
        return simd_named(w, Mnemonic::simd);
    }
    if (opcode == 0x12) {  // xtn / sqxtun
        if (size == 3) return undef(w);
        return simd_named(w, u ? Mnemonic::simd : Mnemonic::xtn);
    }
    if (opcode == 0x14) {  // sqxtn/uqxtn
        if (size == 3) return undef(w);
        return simd_named(w, u ? Mnemonic::uqxtn : Mnemonic::sqxtn);
    }
    if (opcode == 0x13 && u) {  // shll
        if (size == 3) return undef(w);
        return simd_named(w, Mnemonic::shll);
    }
    if (opcode == 0x0A || opcode == 0x0B) {  // cmlt/abs/neg
        return simd_named(w, Mnemonic::simd);
    }
    if (opcode >= 0x16 && opcode <= 0x1F) {
        return simd_named(w, Mnemonic::simd);  // fp conversions, coarse
    }
    return undef(w);
}

DecodedInstr simd_across(MachineWord w, bool u, uint32_t size, uint32_t opcode) {
    if (size == 3) return undef(w);
    switch (opcode) {
        case 0x03: return simd_named(w, u ? Mnemonic::uaddlv : Mnemonic::saddlv);
        case 0x0A: return simd_named(w, u ? Mnemonic::umaxv : Mnemonic::smaxv);
        case 0x1A: return simd_named(w, u ? Mnemonic::uminv : Mnemonic::sminv);
        case 0x1B:
            if (u) return undef(w);
            return simd_named(w, Mnemonic::addv);
        default: return undef(w);
    }
}

DecodedInstr simd_vector(MachineWord w) {
    uint32_t v = w.value;
    bool u = bit(v, 29);
    if (!bit(v, 24)) {
        uint32_t size = bits(v, 23, 22);
        if (bit(v, 21)) {
            if (bit(v, 10)) return simd_three_same(w, u, size, bits(v, 15, 11));
            if (bits(v, 11, 10) == 0)
                return simd_three_diff(w, u, size, bits(v, 15, 12));
            // bits 11:10 == 10 -> misc or across-lanes
            if (bits(v, 20, 17) == 0b0000)
                return simd_two_misc(w, u, size, bits(v, 16, 12) & 0x1F);
            if (bits(v, 20, 17) == 0b1000)
                return simd_across(w, u, size, bits(v, 16, 12) & 0x1F);
            return undef(w);
        }
        // bit21 == 0
        if (!u && bits(v, 23, 22) == 0 && bits(v, 15, 15) == 0 && bits(v, 11, 10) == 0) {
            // table lookup (tbl/tbx)
            return simd_named(w, Mnemonic::simd);
        }
        if (!u && bit(v, 10) == 0 && bit(v, 15) == 0 && bits(v, 11, 10) == 2) {
            // unreachable; permute handled below
        }
        if (!u && !bit(v, 15) && bits(v, 11, 10) == 2) {  // permute
            uint32_t opcode = bits(v, 14, 12);
            static const Mnemonic mn[8] = {Mnemonic::undefined, Mnemonic::uzp1,
                                           Mnemonic::trn1, Mnemonic::zip1,
                                           Mnemonic::undefined, Mnemonic::uzp2,
                                           Mnemonic::trn2, Mnemonic::zip2};
            if (mn[opcode] == Mnemonic::undefined) return undef(w);
            return simd_named(w, mn[opcode]);
        }
        if (u && bits(v, 23, 22) == 0 && !bit(v, 15) && !bit(v, 10)) {  // ext
            return simd_named(w, Mnemonic::ext);
        }
        if (bits(v, 23, 21) == 0 && !bit(v, 15) && bit(v, 10)) {  // copy
            uint32_t imm5 = bits(v, 20, 16), imm4 = bits(v, 14, 11);
            if (imm5 == 0) return undef(w);
            if (!u) {
                static const Mnemonic mn[16] = {
                    Mnemonic::dup, Mnemonic::dup, Mnemonic::undefined, Mnemonic::ins,
                    Mnemonic::undefined, Mnemonic::smov, Mnemonic::undefined, Mnemonic::umov,
                    Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined,
                    Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined,
                    Mnemonic::undefined, Mnemonic::undefined};
                if (mn[imm4] == Mnemonic::undefined) return undef(w);
                return simd_named(w, mn[imm4]);
            }
            // u==1 with Q: INS (element)
            if (!bit(v, 30)) return undef(w);
            return simd_named(w, Mnemonic::ins);
        }
        return undef(w);
    }
    // bit24 == 1: modified immediate / shift by immediate / indexed element
    if (bit(v, 10)) {
        if (bits(v, 22, 19) != 0) {  // shift by immediate
            uint32_t opcode = bits(v, 15, 11);
            static const Mnemonic mn_u0[32] = {
                Mnemonic::sshr, Mnemonic::undefined, Mnemonic::ssra, Mnemonic::undefined,
                Mnemonic::srshr, Mnemonic::undefined, Mnemonic::srsra, Mnemonic::undefined,
                Mnemonic::undefined, Mnemonic::undefined, Mnemonic::shl, Mnemonic::undefined,
                Mnemonic::undefined, Mnemonic::undefined, Mnemonic::sqshl, Mnemonic::undefined,
                Mnemonic::simd, Mnemonic::simd, Mnemonic::simd, Mnemonic::simd,  // shrn/rshrn/sqshrn/sqrshrn
                Mnemonic::simd, Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined,  // sshll
                Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined,
                Mnemonic::simd, Mnemonic::undefined, Mnemonic::undefined, Mnemonic::simd};  // scvtf/fcvtzs
            static const Mnemonic mn_u1[32] = {
                Mnemonic::ushr, Mnemonic::undefined, Mnemonic::usra, Mnemonic::undefined,
                Mnemonic::urshr, Mnemonic::undefined, Mnemonic::ursra, Mnemonic::undefined,
                Mnemonic::sri, Mnemonic::undefined, Mnemonic::sli, Mnemonic::undefined,
                Mnemonic::sqshlu, Mnemonic::undefined, Mnemonic::uqshl, Mnemonic::undefined,
                Mnemonic::simd, Mnemonic::simd, Mnemonic::simd, Mnemonic::simd,  // sqshrun/sqrshrun/uqshrn/uqrshrn
                Mnemonic::simd, Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined,  // ushll
                Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined, Mnemonic::undefined,
                Mnemonic::simd, Mnemonic::undefined, Mnemonic::undefined, Mnemonic::simd};
            Mnemonic m = (u ? mn_u1 : mn_u0)[opcode];
            if (m == Mnemonic::undefined) return undef(w);
            // .2d element size requires immh bit3; narrowing ops exclude it
            bool immh3 = bit(v, 22);
            if (immh3 && opcode >= 0x10 && opcode <= 0x14) return undef(w);
            return simd_named(w, m);
        }
        // modified immediate
        uint32_t cmode = bits(v, 15, 12);
        bool op = bit(v, 29);
        Mnemonic m;
        if (!op) {
            if ((cmode & 9) == 1)
                m = Mnemonic::orr_vimm;
            else if ((cmode & 13) == 9)
                m = Mnemonic::orr_vimm;
            else if (cmode == 15)
                m = Mnemonic::fmov_v;
            else
                m = Mnemonic::movi;
        } else {
            if (cmode == 14) m = Mnemonic::movi;             // movi .2d
            else if (cmode == 15) m = Mnemonic::fmov_v;      // fmov .2d (Q required)
            else if ((cmode & 9) == 1 || (cmode & 13) == 9) m = Mnemonic::bic_vimm;
            else m = Mnemonic::mvni;
            if (cmode == 15 && !bit(v, 30)) return undef(w);
        }
        return simd_named(w, m);
    }
    // vector x indexed element
    {
        uint32_t opcode = bits(v, 15, 12);
        uint32_t size = bits(v, 23, 22);
        static const bool ok_u0[16] = {false, false, true, true, false, false, true, true,
                                       true, true, true, true, true, false, false, false};
        static const bool ok_u1[16] = {true, false, true, false, true, false, true, false,
                                       false, true, false, true, true, false, false, false};
        // rows 1,5,9 (fmla/fmls/fmul) have fp size rules; folded in above
        bool ok = (u ? ok_u1 : ok_u0)[opcode];
        if (opcode == 1 || opcode == 5 || (opcode == 9 && !u)) ok = true;  // fp rows
        if (!ok) return undef(w);
        if (opcode >= 2 && opcode <= 0x0D && opcode != 9 && opcode != 1 && opcode != 5) {
            if (size == 0 || size == 3) return undef(w);  // integer indexed need h/s
        }
        return simd_named(w, Mnemonic::simd);
    }
}

DecodedInstr simd_fp(MachineWord w) {
    uint32_t v = w.value;
    // Vector data-processing space, 0 Q U 0111x: the only SIMD region that can
    // carry an alphanumeric opcode byte.
    if (!bit(v, 31) && bits(v, 28, 25) == 0b0111) return simd_vector(w);
    // Scalar SIMD, FP data processing, crypto, conversions: none of these can
    // have an alphanumeric opcode byte; classified coarsely.
    return simd_named(w, Mnemonic::simd);
}

}  // namespace

DecodedInstr decode(MachineWord w) {
    uint32_t v = w.value;
    switch (bits(v, 28, 25)) {
        case 0b1000:
        case 0b1001:
            return dp_imm(w);
        case 0b1010:
        case 0b1011:
            return branches(w);
        case 0b0100:
        case 0b0110:
        case 0b1100:
        case 0b1110:
            return loads_stores(w);
        case 0b0101:
        case 0b1101:
            return dp_reg(w);
        case 0b0111:
        case 0b1111:
            return simd_fp(w);
        default:
            return undef(w);
    }
}

}  // namespace a64
