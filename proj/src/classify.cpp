#include "a64/classify.hpp"

#include <ostream>

namespace a64 {

namespace {

// The curated usable subset: opcodes with enough alphanumeric operand
// freedom to build the decoder vector from.
const std::set<std::string>& amax_list() {
    static const std::set<std::string> s = {
        "adds", "sub",  "subs", "adr",  "ands", "bics", "orr", "eor",  "eon",
        "ccmp", "cbz",  "cbnz", "tbz",  "tbnz", "b.cond", "ldr", "ldrb", "strb",
        "ldrh", "sbfm", "ubfm",
    };
    return s;
}

}  // namespace

nlohmann::json InstrSetReport::to_json() const {
    nlohmann::json j;
    j["total_alnum_words"] = total_alnum_words;
    j["valid_instructions"] = valid_instructions;
    j["per_category"] = per_category;
    j["a1_opcodes"] = a1_opcodes;
    j["amax_opcodes"] = amax_opcodes;
    return j;
}

InstrSetReport classify_space() {
    InstrSetReport rep;
    rep.amax_opcodes = amax_list();
    uint64_t cat_counts[6] = {};
    for_each_alnum_word([&](MachineWord w) {
        ++rep.total_alnum_words;
        DecodedInstr d = decode(w);
        cat_counts[(int)d.category]++;
        if (d.category != Category::Undefined) {
            ++rep.valid_instructions;
            rep.a1_opcodes.insert(mnemonic_name(d.mnemonic));
        }
    });
    for (int c = 0; c < 6; ++c)
        rep.per_category[category_name((Category)c)] = cat_counts[c];
    return rep;
}

void export_table(std::ostream& out) {
    char hexbuf[16];
    for_each_alnum_word([&](MachineWord w) {
        DecodedInstr d = decode(w);
        snprintf(hexbuf, sizeof hexbuf, "0x%08X", w.value);
        nlohmann::json j;
        j["word"] = hexbuf;
        j["chars"] = w.str();
        j["mnemonic"] = mnemonic_name(d.mnemonic);
        j["category"] = category_name(d.category);
        out << j.dump() << "\n";
    });
}

std::vector<MachineWord> find_nop_candidates(const std::set<uint8_t>& live_regs) {
    std::vector<MachineWord> out;
    for_each_alnum_word([&](MachineWord w) {
        DecodedInstr d = decode(w);
        if (d.category != Category::DataProcessing) return;
        switch (d.form) {
            case InstrForm::AddSubImm:
            case InstrForm::AddSubShifted:
            case InstrForm::AddSubExtended:
            case InstrForm::LogicalImm:
            case InstrForm::LogicalShifted:
            case InstrForm::Bitfield:
            case InstrForm::Extract:
            case InstrForm::Adr:
                break;
            case InstrForm::CcmpImm:
            case InstrForm::CcmpReg:
                // flag-only effect; the vector never consumes flags across words
                out.push_back(w);
                return;
            default:
                return;  // coarse decode or side effects: keep out
        }
        const Reg& rd = d.ops[0].reg;
        if (rd.role == RegRole::StackPointer) return;  // never touch sp
        if (rd.index != 31 && live_regs.count(rd.index)) return;
        out.push_back(w);
    });
    return out;
}

}  // namespace a64
