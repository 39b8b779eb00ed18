#include "a64/instr.hpp"

#include <sstream>

namespace a64 {

const char* category_name(Category c) {
    switch (c) {
        case Category::DataProcessing: return "data-processing";
        case Category::Branch: return "branch";
        case Category::LoadStore: return "load-store";
        case Category::System: return "system";
        case Category::SimdFpCrypto: return "simd-fp-crypto";
        case Category::Undefined: return "undefined";
    }
    return "?";
}

const char* cond_name(Cond c) {
    static const char* names[16] = {"eq", "ne", "cs", "cc", "mi", "pl", "vs", "vc",
                                    "hi", "ls", "ge", "lt", "gt", "le", "al", "nv"};
    return names[(int)c & 15];
}

const char* mnemonic_name(Mnemonic m) {
    switch (m) {
#define N(x) case Mnemonic::x: return #x
        N(undefined);
        N(add); N(adds); N(sub); N(subs); N(adr); N(adrp);
        case Mnemonic::and_: return "and";
        N(orr); N(eor); N(ands); N(bic); N(orn); N(eon); N(bics);
        N(movn); N(movz); N(movk);
        N(sbfm); N(bfm); N(ubfm); N(extr);
        N(ccmn); N(ccmp);
        case Mnemonic::csel_family: return "csel-family";
        case Mnemonic::dp_misc: return "dp-misc";
        N(b); N(bl); N(cbz); N(cbnz); N(tbz); N(tbnz);
        case Mnemonic::b_cond: return "b.cond";
        case Mnemonic::br_family: return "br-family";
        N(ldr); N(str); N(ldrsw); N(prfm);
        N(ldrb); N(strb); N(ldrsb); N(ldrh); N(strh); N(ldrsh);
        N(ldurb); N(sturb); N(ldurh); N(sturh); N(ldur); N(stur); N(ldursb); N(ldursh);
        N(ldursw);
        N(ldtrb); N(sttrb); N(ldtrh); N(sttrh); N(ldtr); N(sttr); N(ldtrsb); N(ldtrsh);
        N(ldtrsw);
        N(ldxrb); N(stxrb); N(ldxrh); N(stxrh); N(ldxr); N(stxr);
        case Mnemonic::ldaxr_family: return "ldaxr-family";
        case Mnemonic::stlr_family: return "stlr-family";
        N(ldp); N(stp); N(ldnp); N(stnp); N(ldpsw);
        case Mnemonic::simd_ldst: return "simd-ldst";
        case Mnemonic::sys_family: return "sys-family";
        case Mnemonic::exc_family: return "exc-family";
        N(simd);
        N(cmhi); N(cmgt); N(cmge); N(cmhs); N(cmtst); N(cmeq);
        N(shl); N(sli); N(sri); N(sshl); N(ushl); N(srshl); N(urshl); N(sqshl); N(uqshl);
        N(sqrshl); N(uqrshl); N(sqshlu);
        N(smin); N(umin); N(smax); N(umax); N(sminp); N(smaxp); N(uminp); N(umaxp);
        N(sabd); N(uabd); N(saba); N(uaba);
        N(ssra); N(usra); N(srsra); N(ursra); N(sshr); N(ushr); N(srshr); N(urshr);
        N(saddl); N(uaddl); N(saddw); N(usubw); N(ssubl); N(ssubw); N(ssubw2); N(usubw2);
        N(addhn); N(raddhn); N(subhn); N(rsubhn);
        N(sabal); N(uabal); N(sabdl); N(uabdl);
        N(smlal); N(umlal); N(smlsl); N(umlsl); N(sqdmlal); N(sqdmlsl); N(smull); N(umull);
        N(sqdmull); N(pmull);
        N(uqxtn); N(sqxtn); N(xtn); N(shll);
        N(fcvtn); N(fcvtl); N(fcvtxn);
        N(uaddlv); N(saddlv); N(smaxv); N(sminv); N(umaxv); N(uminv); N(addv);
        N(zip1); N(zip2); N(uzp1); N(uzp2); N(trn1); N(trn2); N(ext);
        N(mla); N(mls);
        case Mnemonic::mul_v: return "mul";
        N(pmul);
        case Mnemonic::add_v: return "add";
        case Mnemonic::sub_v: return "sub";
        N(mvni); N(movi);
        case Mnemonic::fmov_v: return "fmov";
        case Mnemonic::orr_vimm: return "orr";
        case Mnemonic::bic_vimm: return "bic";
        N(dup); N(ins); N(smov); N(umov);
#undef N
    }
    return "?";
}

namespace {

std::string reg_name(const Reg& r) {
    bool is_x = r.width == RegWidth::X64;
    if (r.index == 31) {
        if (r.role == RegRole::StackPointer) return is_x ? "sp" : "wsp";
        return is_x ? "xzr" : "wzr";
    }
    return (is_x ? "x" : "w") + std::to_string(r.index);
}

const char* shift_name(ShiftKind k) {
    switch (k) {
        case ShiftKind::LSL: return "lsl";
        case ShiftKind::LSR: return "lsr";
        case ShiftKind::ASR: return "asr";
        case ShiftKind::ROR: return "ror";
    }
    return "?";
}

const char* extend_name(ExtendKind k) {
    static const char* names[8] = {"uxtb", "uxth", "uxtw", "uxtx",
                                   "sxtb", "sxth", "sxtw", "sxtx"};
    return names[(int)k & 7];
}

void render_operand(std::ostringstream& os, const Operand& o) {
    switch (o.kind) {
        case Operand::Kind::None:
            break;
        case Operand::Kind::Register:
            os << reg_name(o.reg);
            break;
        case Operand::Kind::Immediate:
            if (o.imm < 0)
                os << "#-0x" << std::hex << -o.imm << std::dec;
            else
                os << "#0x" << std::hex << o.imm << std::dec;
            break;
        case Operand::Kind::Shift:
            os << shift_name(o.shift) << " #" << (int)o.shift_amount;
            break;
        case Operand::Kind::Extend:
            os << extend_name(o.extend);
            if (o.extend_amount) os << " #" << (int)o.extend_amount;
            break;
        case Operand::Kind::Condition:
            os << cond_name(o.cond);
            break;
    }
}

}  // namespace

std::string DecodedInstr::text() const {
    std::ostringstream os;
    os << mnemonic_name(mnemonic);
    bool mem_form = form == InstrForm::LoadStoreUImm || form == InstrForm::LoadStoreRegOff ||
                    form == InstrForm::LoadStorePost || form == InstrForm::LoadStorePre ||
                    form == InstrForm::LoadStoreUnscaled ||
                    form == InstrForm::LoadStoreUnpriv;
    if (!mem_form) {
        for (unsigned i = 0; i < op_count; ++i) {
            os << (i ? ", " : " ");
            render_operand(os, ops[i]);
        }
        return os.str();
    }
    // memory addressing rendering: rt, [rn, offset...]
    os << " ";
    render_operand(os, ops[0]);
    os << ", [";
    render_operand(os, ops[1]);
    if (form == InstrForm::LoadStorePost) {
        os << "], ";
        render_operand(os, ops[2]);
        return os.str();
    }
    for (unsigned i = 2; i < op_count; ++i) {
        if (ops[i].kind == Operand::Kind::Immediate && ops[i].imm == 0) continue;
        if (ops[i].kind == Operand::Kind::Extend && i > 2 && ops[i].extend_amount == 0 &&
            ops[i].extend == ExtendKind::UXTX)
            continue;
        os << ", ";
        render_operand(os, ops[i]);
    }
    os << "]";
    if (form == InstrForm::LoadStorePre) os << "!";
    return os.str();
}

}  // namespace a64
