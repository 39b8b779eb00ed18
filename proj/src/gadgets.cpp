#include "a64/gadgets.hpp"

#include <algorithm>
#include <cstdio>

#include "a64/decode.hpp"

#include <json.hpp>

namespace a64 {

namespace {

std::string reg_str(Reg r) {
    return (r.width == RegWidth::X64 ? "x" : "w") + std::to_string(r.index);
}

void require_w(Reg r, const char* what) {
    if (r.width != RegWidth::W32)
        throw GadgetError(std::string(what) + " must be a W register");
}

// ands r, r, r, lsr #k
uint32_t zero_word(uint8_t r, uint8_t k) {
    return 0x6A400000u | ((uint32_t)r << 16) | ((uint32_t)k << 10) | ((uint32_t)r << 5) | r;
}

// adds/subs w-immediate on (r, r)
uint32_t addsub_word(uint8_t r, uint16_t imm12, bool subs) {
    return (subs ? 0x71000000u : 0x31000000u) | ((uint32_t)imm12 << 10) |
           ((uint32_t)r << 5) | r;
}

// eon/bics Rd, Rn, Rm with lsl/lsr #16
uint32_t eon_word(uint8_t d, uint8_t n, uint8_t m, bool lsr) {
    return 0x4A204000u | (lsr ? 0x400000u : 0u) | ((uint32_t)m << 16) |
           ((uint32_t)n << 5) | d;
}

uint32_t bics_word(uint8_t d, uint8_t n, uint8_t m, bool lsr) {
    return 0x6A204000u | (lsr ? 0x400000u : 0u) | ((uint32_t)m << 16) |
           ((uint32_t)n << 5) | d;
}

void push_alnum(GadgetSeq& g, uint32_t word, const char* what) {
    MachineWord w{word};
    if (!w.is_alnum())
        throw GadgetError(std::string("no alphanumeric encoding: ") + what + " (" +
                          std::to_string(word) + ")");
    g.words.push_back(w);
}

// a -> b pairs of the halfword-eon xor schedule with temp w17
const std::set<std::pair<uint8_t, uint8_t>>& xor_pairs() {
    static const std::set<std::pair<uint8_t, uint8_t>> s = {
        {16, 18}, {16, 19}, {16, 25}, {16, 26}, {18, 19}, {18, 25}, {18, 26},
        {19, 25}, {19, 26}, {20, 25}, {20, 26}, {21, 25}, {21, 26}, {22, 25},
        {22, 26}, {23, 25}, {23, 26}, {24, 25}, {24, 26}, {25, 26},
    };
    return s;
}

}  // namespace

std::string GadgetSeq::str() const {
    std::string s;
    s.reserve(words.size() * 4);
    for (auto w : words) s += w.str();
    return s;
}

GadgetSeq& GadgetSeq::operator+=(const GadgetSeq& other) {
    words.insert(words.end(), other.words.begin(), other.words.end());
    clobbers.insert(other.clobbers.begin(), other.clobbers.end());
    sets_flags = sets_flags || other.sets_flags;
    return *this;
}

const std::set<uint8_t>& workhorse_regs() {
    static const std::set<uint8_t> s = {2, 3, 10, 11, 17, 18, 19, 25, 26};
    return s;
}

std::vector<uint8_t> zero_shift_choices(uint8_t r) {
    std::vector<uint8_t> out;
    for (uint8_t k = 16; k <= 31; ++k)
        if (MachineWord{zero_word(r, k)}.is_alnum()) out.push_back(k);
    return out;
}

std::vector<uint16_t> addsub_imm_choices(uint8_t r, bool subs) {
    std::vector<uint16_t> out;
    for (uint32_t imm = 0; imm < 4096; ++imm)
        if (MachineWord{addsub_word(r, (uint16_t)imm, subs)}.is_alnum())
            out.push_back((uint16_t)imm);
    return out;
}

GadgetSeq zero_low(Reg r) {
    require_w(r, "zero_low target");
    if (!workhorse_regs().count(r.index)) {
        std::string s = "zero_low: unsupported register " + reg_str(r) + "; supported:";
        for (uint8_t x : workhorse_regs()) s += " w" + std::to_string(x);
        throw GadgetError(s);
    }
    // default shift: the published per-register choice
    uint8_t k = r.index == 2 ? 27 : r.index == 3 ? 25 : 16;
    GadgetSeq g;
    g.effect = reg_str(r) + " <- 0";
    push_alnum(g, zero_word(r.index, k), "zero pair");
    push_alnum(g, zero_word(r.index, k), "zero pair");
    return g;
}

GadgetSeq add_const(Reg r, int64_t delta) {
    require_w(r, "add_const target");
    if (!workhorse_regs().count(r.index))
        throw GadgetError("add_const: unsupported register " + reg_str(r));
    if (delta == 0) throw GadgetError("add_const: delta must be nonzero");
    GadgetSeq g;
    g.effect = reg_str(r) + " += " + std::to_string(delta);
    bool up = delta > 0;
    for (int64_t i = 0; i < (up ? delta : -delta); ++i) {
        // net +1: adds #0xc1a; subs #0xc19.  net -1: subs #0xc1a; adds #0xc19.
        push_alnum(g, addsub_word(r.index, 0xc1a, !up), "adds/subs pair");
        push_alnum(g, addsub_word(r.index, 0xc19, up), "adds/subs pair");
    }
    return g;
}

GadgetSeq xor_into(Reg b, Reg a, Reg c) {
    require_w(b, "xor destination");
    require_w(a, "xor source");
    require_w(c, "xor temp");
    if (c.index == a.index || c.index == b.index)
        throw GadgetError("xor_into: temp must differ from operands");
    if (!xor_pairs().count({a.index, b.index}))
        throw GadgetError("xor_into: unsupported pair (" + reg_str(a) + ", " + reg_str(b) +
                          ")");
    GadgetSeq g = zero_low(c);
    g.effect = reg_str(b) + " ^= " + reg_str(a);
    g.clobbers = {c.index};
    push_alnum(g, eon_word(c.index, c.index, a.index, false), "eon c,c,a,lsl");
    push_alnum(g, eon_word(c.index, c.index, a.index, true), "eon c,c,a,lsr");
    push_alnum(g, eon_word(b.index, b.index, c.index, false), "eon b,b,c,lsl");
    push_alnum(g, eon_word(b.index, b.index, c.index, true), "eon b,b,c,lsr");
    return g;
}

GadgetSeq move(Reg dst, Reg src) {
    require_w(dst, "move destination");
    require_w(src, "move source");
    if (dst.index == 16 && src.index == 11) {
        // adds w17, w11, #0xc10 ; subs w16, w17, #0xc10
        GadgetSeq g;
        g.effect = "w16 <- w11";
        g.clobbers = {17};
        push_alnum(g, 0x31000000u | (0xc10u << 10) | (11u << 5) | 17u, "adds via temp");
        push_alnum(g, 0x71000000u | (0xc10u << 10) | (17u << 5) | 16u, "subs via temp");
        return g;
    }
    if (xor_pairs().count({src.index, dst.index}) && workhorse_regs().count(dst.index)) {
        GadgetSeq g = zero_low(dst);
        g += xor_into(dst, src, w(17));
        g.effect = reg_str(dst) + " <- " + reg_str(src);
        return g;
    }
    throw GadgetError("move: no route for (" + reg_str(dst) + " <- " + reg_str(src) +
                      "); available: w16<-w11, or xor-table pairs into a zeroable dst");
}

GadgetSeq not_into(Reg b, Reg c) {
    require_w(b, "not destination");
    require_w(c, "not temp");
    if (!xor_pairs().count({c.index, b.index}))
        throw GadgetError("not_into: no xor route with temp " + reg_str(c));
    GadgetSeq g = zero_low(c);        // c <- 0
    g += add_const(c, -1);            // c <- 0xFFFFFFFF
    g += xor_into(b, c, w(17));       // b ^= c
    g.effect = reg_str(b) + " = ~" + reg_str(b);
    g.clobbers = {c.index, 17};
    return g;
}

namespace {

void check_and_regs(Reg d, Reg a, Reg b, Reg c, Reg e, Reg f) {
    require_w(d, "and destination");
    uint8_t idx[6] = {d.index, a.index, b.index, c.index, e.index, f.index};
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            if (idx[i] == idx[j]) throw GadgetError("and: register collision");
    for (uint8_t r : {d.index, c.index, e.index, f.index})
        if (!workhorse_regs().count(r))
            throw GadgetError("and: register w" + std::to_string(r) +
                              " cannot be zeroed alphanumerically");
}

}  // namespace

GadgetSeq logical_and(Reg d, Reg a, Reg b, Reg c, Reg e, Reg f) {
    check_and_regs(d, a, b, c, e, f);
    GadgetSeq g;
    g.effect = reg_str(d) + " <- " + reg_str(a) + " & " + reg_str(b);
    g.clobbers = {c.index, e.index, f.index};
    g += zero_low(d);
    g += zero_low(c);
    g += zero_low(e);
    g += zero_low(f);
    // low halves: d = 0xFFFF:(a_low & b_low)
    push_alnum(g, eon_word(c.index, c.index, b.index, false), "eon c,c,b,lsl");
    push_alnum(g, eon_word(e.index, e.index, a.index, false), "eon e,e,a,lsl");
    push_alnum(g, eon_word(f.index, f.index, e.index, true), "eon f,f,e,lsr");
    push_alnum(g, bics_word(d.index, f.index, c.index, true), "bics d,f,c,lsr");
    // high halves, folded into d in place so the low half survives
    g += zero_low(c);
    g += zero_low(e);
    push_alnum(g, eon_word(c.index, c.index, b.index, true), "eon c,c,b,lsr");
    push_alnum(g, eon_word(e.index, e.index, a.index, true), "eon e,e,a,lsr");
    push_alnum(g, bics_word(d.index, d.index, e.index, false), "bics d,d,e,lsl");
    push_alnum(g, bics_word(d.index, d.index, c.index, false), "bics d,d,c,lsl");
    return g;
}

GadgetSeq and_halfword_upper(Reg d, Reg a, Reg b, Reg c, Reg e, Reg f) {
    check_and_regs(d, a, b, c, e, f);
    GadgetSeq g;
    g.effect = reg_str(d) + " <- ((" + reg_str(a) + " & " + reg_str(b) +
               ") & 0xFFFF0000) | 0xFFFF";
    g.clobbers = {c.index, e.index, f.index};
    g += zero_low(d);
    g += zero_low(c);
    g += zero_low(e);
    g += zero_low(f);
    push_alnum(g, eon_word(c.index, c.index, b.index, false), "eon c,c,b,lsl");
    push_alnum(g, eon_word(e.index, e.index, a.index, false), "eon e,e,a,lsl");
    push_alnum(g, eon_word(f.index, f.index, e.index, true), "eon f,f,e,lsr");
    push_alnum(g, bics_word(d.index, f.index, c.index, true), "bics d,f,c,lsr");
    g += zero_low(c);
    g += zero_low(e);
    g += zero_low(f);
    push_alnum(g, eon_word(c.index, c.index, b.index, true), "eon c,c,b,lsr");
    push_alnum(g, eon_word(e.index, e.index, a.index, true), "eon e,e,a,lsr");
    push_alnum(g, eon_word(f.index, f.index, e.index, false), "eon f,f,e,lsl");
    push_alnum(g, bics_word(d.index, f.index, c.index, false), "bics d,f,c,lsl");
    return g;
}

GadgetSeq load_byte_imm(Reg dst, Reg base, unsigned offset) {
    require_w(dst, "load destination");
    if (base.width != RegWidth::X64) throw GadgetError("load base must be an X register");
    uint32_t word = 0x39400000u | (offset << 10) | ((uint32_t)base.index << 5) | dst.index;
    if (offset > 4095 || !MachineWord{word}.is_alnum()) {
        // report the nearest workable offsets
        std::string near;
        for (int d = 1; d < 4096 && near.size() < 24; ++d) {
            for (int s : {-d, d}) {
                int n = (int)offset + s;
                if (n < 0 || n > 4095) continue;
                uint32_t cand = 0x39400000u | ((uint32_t)n << 10) |
                                ((uint32_t)base.index << 5) | dst.index;
                if (MachineWord{cand}.is_alnum()) {
                    near += " " + std::to_string(n);
                    break;
                }
            }
            if (!near.empty()) break;
        }
        throw GadgetError("load_byte_imm: no alphanumeric encoding for offset " +
                          std::to_string(offset) + "; nearest feasible:" + near);
    }
    GadgetSeq g;
    g.effect = reg_str(dst) + " <- byte[" + reg_str(base) + " + " + std::to_string(offset) +
               "]";
    g.sets_flags = false;
    g.words.push_back(MachineWord{word});
    return g;
}

GadgetSeq load_byte_reg(Reg dst, Reg base, Reg idx) {
    require_w(dst, "load destination");
    require_w(idx, "load index");
    if (base.width != RegWidth::X64) throw GadgetError("load base must be an X register");
    uint32_t word = 0x38604800u | ((uint32_t)idx.index << 16) |
                    ((uint32_t)base.index << 5) | dst.index;
    GadgetSeq g;
    g.effect = reg_str(dst) + " <- byte[" + reg_str(base) + " + " + reg_str(idx) + "]";
    g.sets_flags = false;
    push_alnum(g, word, "ldrb register-offset");
    return g;
}

GadgetSeq load_byte_post(Reg dst, Reg base, int delta) {
    require_w(dst, "load destination");
    if (base.width != RegWidth::X64) throw GadgetError("load base must be an X register");
    if (delta < -256 || delta > 255)
        throw GadgetError("load_byte_post: delta out of imm9 range");
    uint32_t imm9 = (uint32_t)delta & 0x1FF;
    uint32_t word =
        0x38400400u | (imm9 << 12) | ((uint32_t)base.index << 5) | dst.index;
    GadgetSeq g;
    g.effect = reg_str(dst) + " <- byte[" + reg_str(base) + "]; " + reg_str(base) +
               " += " + std::to_string(delta);
    g.sets_flags = false;
    push_alnum(g, word, "ldrb post-index");
    return g;
}

GadgetSeq store_byte(Reg src, Reg base, Reg idx) {
    require_w(src, "store source");
    require_w(idx, "store index");
    if (base.width != RegWidth::X64) throw GadgetError("store base must be an X register");
    uint32_t word = 0x38204800u | ((uint32_t)idx.index << 16) |
                    ((uint32_t)base.index << 5) | src.index;
    GadgetSeq g;
    g.effect = "byte[" + reg_str(base) + " + " + reg_str(idx) + "] <- " + reg_str(src);
    g.sets_flags = false;
    push_alnum(g, word, "strb register-offset");
    return g;
}

// ------------------------------------------------------------------ branches

namespace {

uint32_t tb_word(bool on_set, uint8_t reg, unsigned bit, uint32_t imm14) {
    return (on_set ? 0x37000000u : 0x36000000u) | ((bit & 0x1Fu) << 19) |
           ((imm14 & 0x3FFFu) << 5) | reg;
}

}  // namespace

std::vector<int64_t> branch_offset_choices(bool on_set, Reg reg, unsigned bit,
                                           bool forward) {
    if (bit > 31) throw GadgetError("branch: bits above 31 have no alphanumeric encoding");
    std::vector<int64_t> out;
    for (uint32_t imm14 = 1; imm14 < 0x4000; ++imm14) {
        int64_t off = ((int64_t)(imm14 ^ 0x2000) - 0x2000) * 4;
        if ((off > 0) != forward) continue;
        if (MachineWord{tb_word(on_set, reg.index, bit, imm14)}.is_alnum())
            out.push_back(off);
    }
    std::sort(out.begin(), out.end(),
              [](int64_t a, int64_t b) { return std::llabs(a) < std::llabs(b); });
    return out;
}

BranchGadget branch(bool on_set, Reg reg, unsigned bit, bool forward,
                    std::optional<int64_t> exact_offset) {
    auto choices = branch_offset_choices(on_set, reg, bit, forward);
    int64_t off;
    if (exact_offset) {
        if (std::find(choices.begin(), choices.end(), *exact_offset) == choices.end())
            throw GadgetError("branch: requested offset has no alphanumeric encoding");
        off = *exact_offset;
    } else {
        if (choices.empty())
            throw GadgetError("branch: no alphanumeric offset for this register/bit");
        off = choices.front();
    }
    BranchGadget bg;
    bg.offset = off;
    bg.seq.effect = std::string(on_set ? "tbnz" : "tbz") + " " + reg_str(reg) + ", #" +
                    std::to_string(bit) + ", " + std::to_string(off);
    bg.seq.sets_flags = false;
    push_alnum(bg.seq, tb_word(on_set, reg.index, bit, (uint32_t)(off / 4) & 0x3FFF),
               "tbz/tbnz");
    return bg;
}

namespace {

int64_t scan_branch_minimum(bool forward) {
    int64_t best = 0;
    for_each_alnum_word([&](MachineWord w) {
        if ((w.value & 0x7E000000u) != 0x36000000u) return;  // tbz/tbnz, b5 == 0
        uint32_t imm14 = (w.value >> 5) & 0x3FFF;
        int64_t off = ((int64_t)(imm14 ^ 0x2000) - 0x2000) * 4;
        if (off == 0 || (off > 0) != forward) return;
        if (best == 0 || std::llabs(off) < std::llabs(best)) best = off;
    });
    return best;
}

}  // namespace

int64_t min_forward_branch_offset() { return scan_branch_minimum(true); }
int64_t min_backward_branch_offset() { return scan_branch_minimum(false); }

void export_gadget_catalog(std::ostream& out) {
    auto emit = [&](const GadgetSeq& g) {
        nlohmann::json j;
        j["effect"] = g.effect;
        j["chars"] = g.str();
        j["clobbers"] = g.clobbers;
        j["sets_flags"] = g.sets_flags;
        out << j.dump() << "\n";
    };
    for (uint8_t r : workhorse_regs()) {
        emit(zero_low(w(r)));
        emit(add_const(w(r), 1));
        emit(add_const(w(r), -1));
    }
    emit(move(w(16), w(11)));
    for (auto& [a, b] : xor_pairs()) emit(xor_into(w(b), w(a), w(17)));
    emit(logical_and(w(11), w(18), w(25), w(17), w(19), w(26)));
    emit(and_halfword_upper(w(11), w(18), w(25), w(17), w(19), w(26)));
    emit(load_byte_imm(w(25), x(10), 77));
    emit(store_byte(w(25), x(11), w(19)));
    emit(load_byte_post(w(18), x(10), 100));
}

}  // namespace a64
