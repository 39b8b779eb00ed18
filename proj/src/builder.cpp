#include "a64/builder.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "json.hpp"

#include "a64/decode.hpp"
#include "a64/gadgets.hpp"
#include "a64/poly.hpp"

namespace a64 {

using nlohmann::json;

const char* addressing_profile_name(AddressingProfile p) {
    return p == AddressingProfile::sub4g ? "sub4g" : "full64";
}

std::optional<AddressingProfile> addressing_profile_from_name(const std::string& s) {
    if (s == "sub4g") return AddressingProfile::sub4g;
    if (s == "full64") return AddressingProfile::full64;
    return std::nullopt;
}

uint64_t default_base(AddressingProfile p) {
    // one base per pointer-arithmetic regime: below and above the 4 GiB line
    return p == AddressingProfile::sub4g ? 0x00400000ull : 0x4'0000'1000ull;
}

namespace {

// ---- word constructors (verified alphanumeric + decodable on emission) ----

MachineWord emit(uint32_t w, const char* what) {
    MachineWord mw(w);
    if (!mw.is_alnum())
        throw BuildError(std::string("generated non-alphanumeric word for ") + what + ": " +
                         mw.str());
    DecodedInstr d = decode(mw);
    if (d.mnemonic == Mnemonic::undefined)
        throw BuildError(std::string("generated undefined encoding for ") + what);
    return mw;
}

uint32_t w_addsub_imm(bool subs, uint8_t r, uint16_t imm12, bool lsl12) {
    return (subs ? 0x71000000u : 0x31000000u) | ((uint32_t)lsl12 << 22) |
           ((uint32_t)imm12 << 10) | ((uint32_t)r << 5) | r;
}

uint32_t w_ands_lsr(uint8_t rd, uint8_t rn, uint8_t rm, uint8_t shift) {
    return 0x6A400000u | ((uint32_t)rm << 16) | ((uint32_t)shift << 10) | ((uint32_t)rn << 5) | rd;
}

uint32_t w_eon(uint8_t rd, uint8_t rn, uint8_t rm, bool lsr, uint8_t shift) {
    return 0x4A200000u | ((uint32_t)lsr << 22) | ((uint32_t)rm << 16) | ((uint32_t)shift << 10) |
           ((uint32_t)rn << 5) | rd;
}

uint32_t w_ldrb_uimm(uint8_t rt, uint8_t rn, uint16_t imm12) {
    return 0x39400000u | ((uint32_t)imm12 << 10) | ((uint32_t)rn << 5) | rt;
}

uint32_t w_ldrb_post(uint8_t rt, uint8_t rn, int imm9) {
    return 0x38400400u | (((uint32_t)imm9 & 0x1FF) << 12) | ((uint32_t)rn << 5) | rt;
}

uint32_t w_strb_uxtw(uint8_t rt, uint8_t rn, uint8_t rm) {
    return 0x38204800u | ((uint32_t)rm << 16) | ((uint32_t)rn << 5) | rt;
}

uint32_t w_tb(bool on_set, uint8_t rt, unsigned bit, int64_t byte_off) {
    uint32_t imm14 = (uint32_t)((byte_off / 4) & 0x3FFF);
    return (on_set ? 0x37000000u : 0x36000000u) | (((uint32_t)bit >> 5) << 31) |
           (((uint32_t)bit & 0x1F) << 19) | (imm14 << 5) | rt;
}

uint32_t w_adr(uint8_t rd, uint32_t immhi, uint32_t immlo) {
    return 0x10000000u | (immlo << 29) | (immhi << 5) | rd;
}

constexpr uint8_t kSrc = 10, kDst = 11, kWA = 18, kWB = 25, kWZ = 19, kCnt = 2, kSpare = 17;
constexpr uint32_t kSetupNop = 0x6A514231;  // ands w17, w17, w17, lsr #16  ("1BQj")
constexpr uint32_t kPinnedAnds = 0x72304F39;  // ands w25, w25, #0xFFFF000F ("9O0r")

// ---- feasibility tables & small-sum solver -------------------------------

struct Atom {
    int64_t value;
    uint32_t word;
};

class SumSolver {
 public:
    explicit SumSolver(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        for (int i = 0; i < (int)atoms_.size(); ++i) {
            singles_.emplace(atoms_[i].value, i);
            max_mag_ = std::max(max_mag_, std::abs(atoms_[i].value));
        }
        for (int i = 0; i < (int)atoms_.size(); ++i)
            for (int j = i; j < (int)atoms_.size(); ++j)
                pairs_.emplace(atoms_[i].value + atoms_[j].value, std::make_pair(i, j));
    }

    int64_t max_magnitude() const { return max_mag_; }

    const Atom* largest_toward(int64_t target) const {
        const Atom* best = nullptr;
        for (const auto& a : atoms_) {
            if ((target > 0) != (a.value > 0)) continue;
            if (!best || std::abs(a.value) > std::abs(best->value)) best = &a;
        }
        return best;
    }

    // Up to four atoms summing exactly to target.
    std::optional<std::vector<uint32_t>> solve(int64_t target) const {
        if (target == 0) return std::vector<uint32_t>{};
        if (auto it = singles_.find(target); it != singles_.end())
            return std::vector<uint32_t>{atoms_[it->second].word};
        if (auto it = pairs_.find(target); it != pairs_.end())
            return std::vector<uint32_t>{atoms_[it->second.first].word,
                                         atoms_[it->second.second].word};
        for (int i = 0; i < (int)atoms_.size(); ++i) {
            if (auto it = pairs_.find(target - atoms_[i].value); it != pairs_.end())
                return std::vector<uint32_t>{atoms_[i].word, atoms_[it->second.first].word,
                                             atoms_[it->second.second].word};
        }
        for (int i = 0; i < (int)atoms_.size(); ++i)
            for (int j = i; j < (int)atoms_.size(); ++j) {
                int64_t rest = target - atoms_[i].value - atoms_[j].value;
                if (auto it = pairs_.find(rest); it != pairs_.end())
                    return std::vector<uint32_t>{atoms_[i].word, atoms_[j].word,
                                                 atoms_[it->second.first].word,
                                                 atoms_[it->second.second].word};
            }
        return std::nullopt;
    }

    // Greedy reduction with the largest same-sign atom, then exact tail.
    std::optional<std::vector<uint32_t>> solve_greedy(int64_t target, int64_t window) const {
        std::vector<uint32_t> out;
        int64_t rem = target;
        while (std::abs(rem) > window) {
            const Atom* a = largest_toward(rem);
            if (!a || std::abs(a->value) > std::abs(rem) + window) break;
            out.push_back(a->word);
            rem -= a->value;
            if (out.size() > 4096) return std::nullopt;
        }
        auto tail = solve(rem);
        if (!tail) return std::nullopt;
        out.insert(out.end(), tail->begin(), tail->end());
        return out;
    }

 private:
    std::vector<Atom> atoms_;
    std::unordered_map<int64_t, int> singles_;
    std::unordered_map<int64_t, std::pair<int, int>> pairs_;
    int64_t max_mag_ = 0;
};

const SumSolver& plain_solver(uint8_t r) {
    static std::map<uint8_t, SumSolver> cache;
    auto it = cache.find(r);
    if (it != cache.end()) return it->second;
    std::vector<Atom> atoms;
    for (uint32_t imm = 1; imm < 4096; ++imm) {
        if (MachineWord(w_addsub_imm(false, r, (uint16_t)imm, false)).is_alnum())
            atoms.push_back({(int64_t)imm, w_addsub_imm(false, r, (uint16_t)imm, false)});
        if (MachineWord(w_addsub_imm(true, r, (uint16_t)imm, false)).is_alnum())
            atoms.push_back({-(int64_t)imm, w_addsub_imm(true, r, (uint16_t)imm, false)});
    }
    return cache.emplace(r, SumSolver(std::move(atoms))).first->second;
}

const SumSolver& coarse_solver(uint8_t r) {
    static std::map<uint8_t, SumSolver> cache;
    auto it = cache.find(r);
    if (it != cache.end()) return it->second;
    std::vector<Atom> atoms;
    for (uint32_t imm = 1; imm < 4096; ++imm) {
        if (MachineWord(w_addsub_imm(false, r, (uint16_t)imm, true)).is_alnum())
            atoms.push_back({(int64_t)imm << 12, w_addsub_imm(false, r, (uint16_t)imm, true)});
        if (MachineWord(w_addsub_imm(true, r, (uint16_t)imm, true)).is_alnum())
            atoms.push_back({-((int64_t)imm << 12), w_addsub_imm(true, r, (uint16_t)imm, true)});
    }
    return cache.emplace(r, SumSolver(std::move(atoms))).first->second;
}

const SumSolver& post_solver(uint8_t rn, uint8_t rt) {
    static std::map<uint16_t, SumSolver> cache;
    uint16_t key = (uint16_t)(rn << 8 | rt);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<Atom> atoms;
    for (int imm = -256; imm <= 255; ++imm) {
        if (imm == 0) continue;
        if (MachineWord(w_ldrb_post(rt, rn, imm)).is_alnum())
            atoms.push_back({imm, w_ldrb_post(rt, rn, imm)});
    }
    return cache.emplace(key, SumSolver(std::move(atoms))).first->second;
}

// Minimal-offset alphanumeric adr for rd (all feasible offsets are positive).
std::pair<int64_t, uint32_t> min_adr(uint8_t rd) {
    static std::map<uint8_t, std::pair<int64_t, uint32_t>> cache;
    auto it = cache.find(rd);
    if (it != cache.end()) return it->second;
    std::pair<int64_t, uint32_t> best{-1, 0};
    for (uint32_t immhi = 0; immhi < (1u << 19) && best.first < 0; ++immhi)
        for (uint32_t immlo = 1; immlo < 4; ++immlo) {
            uint32_t w = w_adr(rd, immhi, immlo);
            if (!MachineWord(w).is_alnum()) continue;
            best = {(int64_t)(immhi << 2 | immlo), w};
            break;
        }
    if (best.first < 0) throw BuildError("no alphanumeric adr encoding for register");
    return cache.emplace(rd, best).first->second;
}

// Canonical adds/subs pair with the requested net effect on r_low32.
std::vector<uint32_t> imm_pair(uint8_t r, int net) {
    bool first_subs = net < 0;
    int mag = std::abs(net);
    for (uint32_t k = 1; k < 4096; ++k) {
        if (k <= (uint32_t)mag) continue;
        uint32_t a = w_addsub_imm(first_subs, r, (uint16_t)k, false);
        uint32_t b = w_addsub_imm(!first_subs, r, (uint16_t)(k - mag), false);
        if (MachineWord(a).is_alnum() && MachineWord(b).is_alnum()) return {a, b};
    }
    throw BuildError("no alphanumeric adds/subs immediate pair for register");
}

// ---- setup emission -------------------------------------------------------

struct Emitted {
    std::vector<MachineWord> words;
    std::vector<WordNote> notes;
    int64_t guard_lo = 0, guard_hi = 0;  // image-relative read/write span

    size_t byte_len() const { return words.size() * 4; }
    void note(WordRole role, int32_t partner = -1, int64_t net = 0, uint8_t rd = 0,
              uint8_t rn = 0) {
        notes.push_back({(uint32_t)(words.size() - 1), role, partner, net, rd, rn});
    }
    void widen_guard(int64_t lo, int64_t hi) {
        guard_lo = std::min(guard_lo, lo);
        guard_hi = std::max(guard_hi, hi);
    }
};

// r_low32 += delta with adds/subs immediates (sub-4GiB pointer regime).
void emit_const32(Emitted& out, uint8_t r, int64_t delta, const char* what) {
    const SumSolver& fine = plain_solver(r);
    std::vector<uint32_t> words;
    if (std::abs(delta) > 16 * fine.max_magnitude()) {
        const SumSolver& coarse = coarse_solver(r);
        int64_t q = (delta >= 0 ? delta + 2048 : delta - 2047) >> 12;
        auto qw = coarse.solve_greedy(q << 12, 2 * coarse.max_magnitude());
        if (!qw) throw BuildError(std::string("no coarse immediate schedule for ") + what);
        words = *qw;
        delta -= q << 12;
    }
    auto fw = fine.solve_greedy(delta, 2000);
    if (!fw) throw BuildError(std::string("no immediate schedule for ") + what);
    words.insert(words.end(), fw->begin(), fw->end());
    for (uint32_t w : words) out.words.push_back(emit(w, what));
}

// x_base += delta via dummy post-index byte loads (full 64-bit regime).
// start is the image-relative position of the base register before the chain;
// every intermediate position is read from, so the guard span widens.
void emit_const_post(Emitted& out, uint8_t rn, uint8_t rt, int64_t start, int64_t delta,
                     const char* what) {
    const SumSolver& solver = post_solver(rn, rt);
    auto words_opt = solver.solve_greedy(delta, 900);
    if (!words_opt) throw BuildError(std::string("no post-index walk for ") + what);
    int64_t pos = start;
    for (uint32_t w : *words_opt) {
        out.widen_guard(pos, pos + 1);  // the dummy load reads one byte here
        out.words.push_back(emit(w, what));
        pos += (int64_t)(int32_t)(((w >> 12) & 0x1FF) << 23) >> 23;  // signed imm9
    }
    if (pos != start + delta) throw BuildError(std::string("post-index walk drift for ") + what);
}

// Point cursor at image-relative target: adr + profile-specific fixup.
void emit_cursor(Emitted& out, AddressingProfile profile, uint8_t r, int64_t target,
                 const char* what) {
    auto [adr_off, adr_word] = min_adr(r);
    int64_t site = (int64_t)out.byte_len();
    out.words.push_back(emit(adr_word, what));
    int64_t delta = target - (site + adr_off);
    if (profile == AddressingProfile::sub4g) {
        emit_const32(out, r, delta, what);
    } else {
        emit_const_post(out, r, kSpare, site + adr_off, delta, what);
    }
}

struct LoopGeometry {
    size_t body_words;   // loop head .. skip branch inclusive
    unsigned counter_bit;
    int64_t backward;    // branch magnitude K; loop branch sits at H + K
    int64_t forward;     // skip-pool branch offset
    size_t pool_len;
};

size_t body_word_count(AddressingProfile profile) {
    return profile == AddressingProfile::sub4g ? 13 : 15;
}

// Chooses counter bit, backward offset and skip offset for a payload of n
// bytes. Everything here is measured relative to the loop head.
LoopGeometry choose_geometry(size_t n, AddressingProfile profile) {
    LoopGeometry g{};
    g.pool_len = 2 * n;
    size_t body_len = body_word_count(profile) * 4;
    int64_t skip_site = (int64_t)body_len - 4;           // relative to loop head
    int64_t pool_end = (int64_t)(body_len + g.pool_len);  // ditto

    unsigned bit = 0;
    std::vector<int64_t> back;
    for (unsigned b = 6; b <= 14 && back.empty(); ++b) {
        if ((1ull << b) < n) continue;
        auto offs = branch_offset_choices(true, w(kCnt), b, false);
        if (offs.empty()) continue;
        bit = b;
        back = std::move(offs);
    }
    if (back.empty()) throw BuildError("payload too large for branch span");

    auto fwd = branch_offset_choices(false, w(kWZ), 9, true);
    for (int64_t koff : back) {
        int64_t k = -koff;
        if (k < pool_end + 8) continue;
        // largest forward offset that still lands between pool end and the
        // loop branch
        int64_t best_f = -1;
        for (int64_t f : fwd) {
            if (skip_site + f > pool_end && skip_site + f <= k && f > best_f) best_f = f;
        }
        if (best_f < 0) continue;
        g.counter_bit = bit;
        g.backward = k;
        g.forward = best_f;
        g.body_words = body_word_count(profile);
        return g;
    }
    throw BuildError("payload too large for branch span");
}

Emitted emit_setup(size_t head_len, const LoopGeometry& g, size_t n, AddressingProfile profile) {
    Emitted out;
    int64_t H = (int64_t)head_len;
    int64_t pool_off = H + (int64_t)g.body_words * 4;
    int64_t dest = H + g.backward + 4;  // fall-through address past the loop branch

    // wZ <- 0 (two-instruction self-and; any lsr >= 16 works)
    out.words.push_back(emit(w_ands_lsr(kWZ, kWZ, kWZ, 16), "zero wZ"));
    out.note(WordRole::zero_shift, -1, 0, kWZ, kWZ);
    out.words.push_back(emit(w_ands_lsr(kWZ, kWZ, kWZ, 16), "zero wZ"));
    out.note(WordRole::zero_shift, -1, 0, kWZ, kWZ);
    // counter <- 0 in one word off the already-zero wZ
    out.words.push_back(emit(w_ands_lsr(kCnt, kWZ, kWZ, 12), "zero counter"));
    out.note(WordRole::zero_shift, -1, 0, kCnt, kWZ);
    // counter <- 2^bit + n - 1: the loop branch tests the bit, which clears
    // after exactly n decrements
    emit_const32(out, kCnt, (int64_t)(1ull << g.counter_bit) + (int64_t)n - 1, "counter bias");

    emit_cursor(out, profile, kSrc, pool_off - 76, "source cursor");
    emit_cursor(out, profile, kDst, dest, "destination cursor");
    return out;
}

void append_body(Emitted& img, const LoopGeometry& g, AddressingProfile profile) {
    size_t H = img.byte_len();
    img.words.push_back(emit(w_ldrb_uimm(kWA, kSrc, 76), "load wA"));
    img.words.push_back(emit(w_ldrb_uimm(kWB, kSrc, 77), "load wB"));
    if (profile == AddressingProfile::sub4g) {
        auto p = imm_pair(kSrc, 2);
        img.words.push_back(emit(p[0], "advance source"));
        img.note(WordRole::imm_pair, (int32_t)img.words.size(), 2, kSrc, kSrc);
        img.words.push_back(emit(p[1], "advance source"));
        img.note(WordRole::imm_pair, (int32_t)img.words.size() - 2, 2, kSrc, kSrc);
    } else {
        int64_t src_pos = (int64_t)H + (int64_t)g.body_words * 4 - 76;
        emit_const_post(img, kSrc, kSpare, src_pos, 2, "advance source");
        img.widen_guard(src_pos, src_pos + 1024 + (int64_t)g.pool_len);
    }
    img.words.push_back(emit(w_eon(kWA, kWZ, kWA, false, 20), "decode wA"));
    img.words.push_back(
        emit_pinned_word(decode(MachineWord(kPinnedAnds)), MachineWord(kPinnedAnds)));
    img.words.push_back(emit(w_eon(kWB, kWB, kWA, true, 16), "decode wB"));
    img.words.push_back(emit(w_strb_uxtw(kWB, kDst, kWZ), "store byte"));
    if (profile == AddressingProfile::sub4g) {
        auto p = imm_pair(kDst, 1);
        img.words.push_back(emit(p[0], "advance destination"));
        img.note(WordRole::imm_pair, (int32_t)img.words.size(), 1, kDst, kDst);
        img.words.push_back(emit(p[1], "advance destination"));
        img.note(WordRole::imm_pair, (int32_t)img.words.size() - 2, 1, kDst, kDst);
    } else {
        int64_t dst_pos = (int64_t)H + g.backward + 4;
        emit_const_post(img, kDst, kSpare, dst_pos, 1, "advance destination");
        img.widen_guard(dst_pos, dst_pos + 1024 + (int64_t)(g.pool_len / 2));
    }
    {
        auto p = imm_pair(kCnt, -1);
        img.words.push_back(emit(p[0], "decrement counter"));
        img.note(WordRole::imm_pair, (int32_t)img.words.size(), -1, kCnt, kCnt);
        img.words.push_back(emit(p[1], "decrement counter"));
        img.note(WordRole::imm_pair, (int32_t)img.words.size() - 2, -1, kCnt, kCnt);
    }
    img.words.push_back(emit(w_tb(false, kWZ, 9, g.forward), "skip pool"));
    if (img.byte_len() != H + g.body_words * 4)
        throw BuildError("loop body length drifted from plan");
}

ShellcodeImage assemble(const std::vector<uint8_t>& payload, AddressingProfile profile) {
    if (payload.empty()) throw BuildError("payload must be non-empty");
    size_t n = payload.size();
    LoopGeometry g = choose_geometry(n, profile);

    // The setup length depends on the cursor targets, which depend on where
    // the loop head ends up; iterate to a fixed point, padding the gap with
    // executed-nop filler.
    size_t head = 16;
    Emitted setup;
    for (int iter = 0;; ++iter) {
        if (iter > 64) throw BuildError("setup layout failed to converge");
        setup = emit_setup(head, g, n, profile);
        if (setup.byte_len() <= head) break;
        head = setup.byte_len() + 32;
    }
    size_t pad_nops = (head - setup.byte_len()) / 4;
    for (size_t i = 0; i < pad_nops; ++i) {
        setup.words.push_back(emit(kSetupNop, "setup filler"));
        setup.note(WordRole::setup_nop);
    }

    Emitted img = std::move(setup);
    append_body(img, g, profile);

    size_t pool_off = img.byte_len();
    EncodedPayload enc = encode_payload(payload, NibbleOrder::HighFirst);
    std::string bytes;
    for (const MachineWord& w : img.words) bytes += w.str();
    bytes += enc.chars;

    int64_t skip_site = (int64_t)pool_off - 4;
    size_t landing = (size_t)(skip_site + g.forward);
    size_t branch_site = head + (size_t)g.backward;
    if (landing < bytes.size() || landing > branch_site)
        throw BuildError("forward landing escaped the pad region");
    bytes.append(landing - bytes.size(), 'B');  // never executed
    size_t exec_nops = (branch_site - landing) / 4;
    for (size_t i = 0; i < exec_nops; ++i) {
        MachineWord w = emit(kSetupNop, "pad nop");
        img.notes.push_back({(uint32_t)(bytes.size() / 4), WordRole::exec_nop, -1, 0, 0, 0});
        bytes += w.str();
    }
    bytes += emit(w_tb(true, kCnt, g.counter_bit, -g.backward), "loop branch").str();

    ShellcodeImage out;
    out.bytes = std::move(bytes);
    out.payload_len = n;
    out.decoded_payload_addr = out.bytes.size();
    out.layout.vector_head_len = pool_off;
    out.layout.pool_offset = pool_off;
    out.layout.pool_len = g.pool_len;
    out.layout.forward_jump = g.forward;
    out.layout.backward_jump = g.backward;
    out.layout.pad_len = branch_site - (pool_off + g.pool_len);
    out.layout.loop_head = head;
    out.layout.src_cursor = x(kSrc);
    out.layout.dst_cursor = x(kDst);
    out.layout.scratch_regs = {{"wA", kWA}, {"wB", kWB}, {"wZ", kWZ},
                               {"counter", kCnt}, {"spare", kSpare}};
    out.layout.profile = profile;
    out.layout.counter_bit = g.counter_bit;
    out.notes = std::move(img.notes);
    int64_t image_len = (int64_t)out.bytes.size();
    out.guard_lo = std::min<int64_t>(0, img.guard_lo);
    out.guard_hi = std::max<int64_t>({image_len + (int64_t)n + 512, img.guard_hi + 4});

    for (char ch : out.bytes)
        if (!is_alnum_byte((uint8_t)ch)) throw BuildError("image byte escaped the alphabet");
    if (out.bytes.size() % 4 != 0) throw BuildError("image length not word-aligned");
    if ((size_t)(head + g.backward + 4) != out.bytes.size())
        throw BuildError("loop-closure arithmetic broken");
    return out;
}

}  // namespace

MachineWord emit_pinned_word(const DecodedInstr& instr, MachineWord pattern_hint) {
    DecodedInstr d = decode(pattern_hint);
    if (!(d == instr))
        throw BuildError("pinned pattern does not decode to the requested instruction");
    return pattern_hint;
}

MachineWord retarget_pinned_word(MachineWord pattern, int rd_delta, int rn_delta) {
    uint32_t rd = (pattern.value + (uint32_t)rd_delta) & 0x1F;
    uint32_t rn = ((pattern.value >> 5) + (uint32_t)rn_delta) & 0x1F;
    MachineWord w((pattern.value & ~0x3FFu) | (rn << 5) | rd);
    if (!w.is_alnum()) throw BuildError("retargeted pattern left the alphabet");
    DecodedInstr a = decode(pattern), b = decode(w);
    if (b.mnemonic != a.mnemonic || b.form != a.form)
        throw BuildError("retargeted pattern changed instruction identity");
    return w;
}

ShellcodeImage build(const std::vector<uint8_t>& payload, AddressingProfile profile,
                     const MutationProfile* mutation) {
    ShellcodeImage img = assemble(payload, profile);
    if (mutation) img = mutate_image(img, *mutation);
    return img;
}

LayoutPlan plan_layout(size_t encoded_len, AddressingProfile profile) {
    if (encoded_len < 2 || encoded_len % 2 != 0)
        throw BuildError("encoded length must be a positive multiple of 2");
    std::vector<uint8_t> zeros(encoded_len / 2, 0);
    return assemble(zeros, profile).layout;
}

MachineWord ShellcodeImage::word(size_t index) const {
    return MachineWord::from_str(bytes.substr(index * 4, 4));
}

void ShellcodeImage::set_word(size_t index, MachineWord w) {
    std::string s = w.str();
    bytes.replace(index * 4, 4, s);
}

std::string ShellcodeImage::metadata_json() const {
    json j;
    j["format"] = 1;
    j["profile"] = addressing_profile_name(layout.profile);
    j["seed"] = seed;
    j["payload_len"] = payload_len;
    j["decoded_payload_addr"] = decoded_payload_addr;
    j["guard"] = {{"lo", guard_lo}, {"hi", guard_hi}};
    j["layout"] = {{"vector_head_len", layout.vector_head_len},
                   {"pool_offset", layout.pool_offset},
                   {"pool_len", layout.pool_len},
                   {"forward_jump", layout.forward_jump},
                   {"backward_jump", layout.backward_jump},
                   {"pad_len", layout.pad_len},
                   {"loop_head", layout.loop_head},
                   {"counter_bit", layout.counter_bit},
                   {"src_cursor", layout.src_cursor.index},
                   {"dst_cursor", layout.dst_cursor.index},
                   {"scratch", layout.scratch_regs}};
    json notes_j = json::array();
    for (const auto& n : notes)
        notes_j.push_back({n.index, (int)n.role, n.partner, n.net, n.rd, n.rn});
    j["notes"] = std::move(notes_j);
    return j.dump(2);
}

ShellcodeImage ShellcodeImage::from_parts(std::string image_bytes,
                                          const std::string& metadata_json) {
    json j = json::parse(metadata_json);
    ShellcodeImage img;
    img.bytes = std::move(image_bytes);
    auto prof = addressing_profile_from_name(j.at("profile").get<std::string>());
    if (!prof) throw BuildError("metadata names an unknown addressing profile");
    img.layout.profile = *prof;
    img.seed = j.at("seed").get<uint64_t>();
    img.payload_len = j.at("payload_len").get<size_t>();
    img.decoded_payload_addr = j.at("decoded_payload_addr").get<size_t>();
    img.guard_lo = j.at("guard").at("lo").get<int64_t>();
    img.guard_hi = j.at("guard").at("hi").get<int64_t>();
    const json& l = j.at("layout");
    img.layout.vector_head_len = l.at("vector_head_len").get<size_t>();
    img.layout.pool_offset = l.at("pool_offset").get<size_t>();
    img.layout.pool_len = l.at("pool_len").get<size_t>();
    img.layout.forward_jump = l.at("forward_jump").get<int64_t>();
    img.layout.backward_jump = l.at("backward_jump").get<int64_t>();
    img.layout.pad_len = l.at("pad_len").get<size_t>();
    img.layout.loop_head = l.at("loop_head").get<size_t>();
    img.layout.counter_bit = l.at("counter_bit").get<unsigned>();
    img.layout.src_cursor = x(l.at("src_cursor").get<uint8_t>());
    img.layout.dst_cursor = x(l.at("dst_cursor").get<uint8_t>());
    img.layout.scratch_regs = l.at("scratch").get<std::map<std::string, uint8_t>>();
    for (const json& n : j.at("notes"))
        img.notes.push_back({n.at(0).get<uint32_t>(), (WordRole)n.at(1).get<int>(),
                             n.at(2).get<int32_t>(), n.at(3).get<int64_t>(),
                             n.at(4).get<uint8_t>(), n.at(5).get<uint8_t>()});
    return img;
}

RunResult run_image(const ShellcodeImage& image, uint64_t base, uint64_t step_limit,
                    bool want_trace) {
    Emulator emu;
    std::vector<uint8_t> code(image.bytes.begin(), image.bytes.end());
    emu.mem.map(base, std::move(code));
    if (image.guard_lo < 0)
        emu.mem.map_zero(base + (uint64_t)image.guard_lo, (size_t)(-image.guard_lo));
    if ((size_t)image.guard_hi > image.bytes.size())
        emu.mem.map_zero(base + image.bytes.size(),
                         (size_t)image.guard_hi - image.bytes.size());
    // deterministic junk: the vector must not depend on initial register state
    for (unsigned i = 0; i < 31; ++i)
        emu.st.x[i] = 0xC0FFEE0000000000ull ^ (0x0101010101010101ull * i);
    emu.st.sp = base - 0x10000;
    emu.st.pc = base;
    emu.target_begin = base + image.decoded_payload_addr;
    emu.target_end = emu.target_begin + image.payload_len + 4;

    RunResult res;
    if (want_trace) {
        emu.trace_hook = [&res](uint64_t pc, MachineWord w, const DecodedInstr& d) {
            char buf[32];
            snprintf(buf, sizeof buf, "%012llx  %08x  ", (unsigned long long)pc,
                     (unsigned)w.value);
            res.trace += buf;
            res.trace += d.text();
            res.trace += '\n';
        };
    }
    res.halt = emu.run(step_limit, &res.steps);
    res.state = emu.st;
    res.decoded.resize(image.payload_len);
    for (size_t i = 0; i < image.payload_len; ++i) {
        auto b = emu.mem.read8(base + image.decoded_payload_addr + i);
        res.decoded[i] = b.value_or(0);
    }
    return res;
}

bool verify_image(const ShellcodeImage& image, std::string* why) {
    uint64_t base = default_base(image.layout.profile);
    uint64_t limit = 1'000'000 + 400ull * image.payload_len;
    RunResult res = run_image(image, base, limit);
    if (res.halt != HaltReason::reached_target) {
        if (why)
            *why = std::string("halt: ") + halt_reason_name(res.halt) + " after " +
                   std::to_string(res.steps) + " steps at pc offset " +
                   std::to_string((int64_t)(res.state.pc - base));
        return false;
    }
    EncodedPayload enc;
    enc.chars = image.bytes.substr(image.layout.pool_offset, image.layout.pool_len);
    enc.nibble_order = NibbleOrder::HighFirst;
    std::vector<uint8_t> expect = reference_decode(enc);
    if (expect != res.decoded) {
        if (why) *why = "decoded bytes differ from the pool's reference decoding";
        return false;
    }
    return true;
}

}  // namespace a64
