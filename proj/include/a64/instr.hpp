#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "a64/word.hpp"

namespace a64 {

enum class RegWidth : uint8_t { W32, X64 };

enum class RegRole : uint8_t { Gpr, Zero, StackPointer };

// A register reference. Whether index 31 means WZR/XZR or WSP/SP depends on
// the instruction context and is resolved into `role` at decode time.
struct Reg {
    RegWidth width = RegWidth::W32;
    uint8_t index = 0;
    RegRole role = RegRole::Gpr;

    friend bool operator==(const Reg& a, const Reg& b) {
        return a.width == b.width && a.index == b.index && a.role == b.role;
    }
};

constexpr Reg w(uint8_t i, RegRole role = RegRole::Gpr) { return Reg{RegWidth::W32, i, role}; }
constexpr Reg x(uint8_t i, RegRole role = RegRole::Gpr) { return Reg{RegWidth::X64, i, role}; }

enum class Category : uint8_t {
    DataProcessing,
    Branch,
    LoadStore,
    System,
    SimdFpCrypto,
    Undefined,
};

const char* category_name(Category c);

// Opcode names. Forms of the same assembler mnemonic share one enumerator;
// the InstrForm distinguishes them.
enum class Mnemonic : uint16_t {
    undefined,
    // data processing
    add, adds, sub, subs, adr, adrp,
    and_, orr, eor, ands, bic, orn, eon, bics,
    movn, movz, movk,
    sbfm, bfm, ubfm, extr,
    ccmn, ccmp,
    csel_family,   // csel/csinc/csinv/csneg (never alphanumeric; kept coarse)
    dp_misc,       // 1-/2-/3-source register ops (udiv, rbit, madd, ...)
    // branches
    b, bl, cbz, cbnz, tbz, tbnz, b_cond, br_family,
    // loads/stores
    ldr, str, ldrsw, prfm,
    ldrb, strb, ldrsb, ldrh, strh, ldrsh,
    ldurb, sturb, ldurh, sturh, ldur, stur, ldursb, ldursh, ldursw,
    ldtrb, sttrb, ldtrh, sttrh, ldtr, sttr, ldtrsb, ldtrsh, ldtrsw,
    ldxrb, stxrb, ldxrh, stxrh, ldxr, stxr, ldaxr_family, stlr_family,
    ldp, stp, ldnp, stnp, ldpsw,
    simd_ldst,     // ld1/st1... structure loads (coarse)
    // system
    sys_family, exc_family,
    // SIMD / FP / crypto
    simd,          // structurally valid but not individually named
    cmhi, cmgt, cmge, cmhs, cmtst, cmeq,
    shl, sli, sri, sshl, ushl, srshl, urshl, sqshl, uqshl, sqrshl, uqrshl, sqshlu,
    smin, umin, smax, umax, sminp, smaxp, uminp, umaxp,
    sabd, uabd, saba, uaba,
    ssra, usra, srsra, ursra, sshr, ushr, srshr, urshr,
    saddl, uaddl, saddw, usubw, ssubl, ssubw, ssubw2, usubw2,
    addhn, raddhn, subhn, rsubhn,
    sabal, uabal, sabdl, uabdl,
    smlal, umlal, smlsl, umlsl, sqdmlal, sqdmlsl, smull, umull, sqdmull, pmull,
    uqxtn, sqxtn, xtn, shll,
    fcvtn, fcvtl, fcvtxn,
    uaddlv, saddlv, smaxv, sminv, umaxv, uminv, addv,
    zip1, zip2, uzp1, uzp2, trn1, trn2, ext,
    mla, mls, mul_v, pmul, add_v, sub_v,
    mvni, movi, fmov_v, orr_vimm, bic_vimm,
    dup, ins, smov, umov,
};

const char* mnemonic_name(Mnemonic m);

enum class InstrForm : uint8_t {
    None,
    AddSubImm,
    AddSubShifted,
    AddSubExtended,
    LogicalImm,
    LogicalShifted,
    MoveWide,
    Bitfield,
    Extract,
    Adr,
    CcmpImm,
    CcmpReg,
    CondSelect,
    DpReg,
    BranchImm,
    CompareBranch,
    TestBranch,
    CondBranch,
    BranchReg,
    LdrLiteral,
    LoadStoreUImm,
    LoadStoreRegOff,
    LoadStorePost,
    LoadStorePre,
    LoadStoreUnscaled,
    LoadStoreUnpriv,
    LoadStoreExclusive,
    LoadStorePair,
    SimdLdSt,
    Simd,
    System,
};

enum class ShiftKind : uint8_t { LSL, LSR, ASR, ROR };
enum class ExtendKind : uint8_t { UXTB, UXTH, UXTW, UXTX, SXTB, SXTH, SXTW, SXTX };
enum class Cond : uint8_t { EQ, NE, CS, CC, MI, PL, VS, VC, HI, LS, GE, LT, GT, LE, AL, NV };

const char* cond_name(Cond c);

struct Operand {
    enum class Kind : uint8_t { None, Register, Immediate, Shift, Extend, Condition };
    Kind kind = Kind::None;
    Reg reg{};              // Kind::Register
    int64_t imm = 0;        // Kind::Immediate
    uint8_t imm_bits = 0;   // nominal width of the immediate field
    ShiftKind shift = ShiftKind::LSL;
    uint8_t shift_amount = 0;
    ExtendKind extend = ExtendKind::UXTB;
    uint8_t extend_amount = 0;
    Cond cond = Cond::EQ;

    static Operand make_reg(Reg r) {
        Operand o;
        o.kind = Kind::Register;
        o.reg = r;
        return o;
    }
    static Operand make_imm(int64_t v, uint8_t bits = 0) {
        Operand o;
        o.kind = Kind::Immediate;
        o.imm = v;
        o.imm_bits = bits;
        return o;
    }
    static Operand make_shift(ShiftKind k, uint8_t amount) {
        Operand o;
        o.kind = Kind::Shift;
        o.shift = k;
        o.shift_amount = amount;
        return o;
    }
    static Operand make_extend(ExtendKind k, uint8_t amount) {
        Operand o;
        o.kind = Kind::Extend;
        o.extend = k;
        o.extend_amount = amount;
        return o;
    }
    static Operand make_cond(Cond c) {
        Operand o;
        o.kind = Kind::Condition;
        o.cond = c;
        return o;
    }

    friend bool operator==(const Operand& a, const Operand& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case Kind::None: return true;
            case Kind::Register: return a.reg == b.reg;
            case Kind::Immediate: return a.imm == b.imm && a.imm_bits == b.imm_bits;
            case Kind::Shift: return a.shift == b.shift && a.shift_amount == b.shift_amount;
            case Kind::Extend: return a.extend == b.extend && a.extend_amount == b.extend_amount;
            case Kind::Condition: return a.cond == b.cond;
        }
        return false;
    }
};

struct DecodedInstr {
    Mnemonic mnemonic = Mnemonic::undefined;
    InstrForm form = InstrForm::None;
    Category category = Category::Undefined;
    std::array<Operand, 5> ops{};
    uint8_t op_count = 0;
    MachineWord raw{};

    void push(Operand o) { ops[op_count++] = o; }

    // Field identity: raw bit pattern is deliberately excluded (there is no
    // bijection between machine code and assembly).
    friend bool operator==(const DecodedInstr& a, const DecodedInstr& b) {
        if (a.mnemonic != b.mnemonic || a.form != b.form || a.op_count != b.op_count)
            return false;
        for (unsigned i = 0; i < a.op_count; ++i)
            if (!(a.ops[i] == b.ops[i])) return false;
        return true;
    }

    std::string text() const;  // disassembly-style rendering
};

}  // namespace a64
