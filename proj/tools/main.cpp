#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "a64/builder.hpp"
#include "a64/classify.hpp"
#include "a64/codec.hpp"
#include "a64/decode.hpp"
#include "a64/gadgets.hpp"
#include "a64/poly.hpp"

namespace {

constexpr int kExitOk = 0, kExitVerify = 1, kExitUsage = 2, kExitInfeasible = 3, kExitInternal = 4;

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << data)) throw std::runtime_error("cannot write " + path);
}

a64::Reg parse_reg(const std::string& s) {
    if (s.size() < 2 || (s[0] != 'w' && s[0] != 'x'))
        throw CLI::ValidationError("register", "expected wN or xN, got " + s);
    int idx = std::stoi(s.substr(1));
    if (idx < 0 || idx > 30) throw CLI::ValidationError("register", "index out of range: " + s);
    return s[0] == 'w' ? a64::w((uint8_t)idx) : a64::x((uint8_t)idx);
}

a64::ShellcodeImage load_image(const std::string& path) {
    auto bytes = read_file(path);
    auto meta = read_file(path + ".json");
    return a64::ShellcodeImage::from_parts(std::string(bytes.begin(), bytes.end()),
                                           std::string(meta.begin(), meta.end()));
}

void store_image(const std::string& path, const a64::ShellcodeImage& img) {
    write_file(path, img.bytes);
    write_file(path + ".json", img.metadata_json());
}

a64::MutationProfile parse_mutation(const std::string& what, uint64_t seed) {
    a64::MutationProfile p(seed);
    p.mutate_payload = p.mutate_padding = p.mutate_nops = p.mutate_vector = false;
    std::stringstream ss(what);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "all")
            p.mutate_payload = p.mutate_padding = p.mutate_nops = p.mutate_vector = true;
        else if (item == "payload")
            p.mutate_payload = true;
        else if (item == "padding")
            p.mutate_padding = true;
        else if (item == "nops")
            p.mutate_nops = true;
        else if (item == "vector")
            p.mutate_vector = true;
        else if (item != "none")
            throw CLI::ValidationError("--mutate", "unknown category: " + item);
    }
    return p;
}

int run(int argc, char** argv) {
    CLI::App app{"alphanumeric AArch64 shellcode toolkit"};
    app.require_subcommand(1);

    // scan
    auto* scan = app.add_subcommand("scan", "census of the alphanumeric instruction space");
    bool scan_summary = false;
    std::string scan_table, scan_json;
    scan->add_flag("--summary", scan_summary, "print one-line totals");
    scan->add_option("--table", scan_table, "write the full JSON-lines table here");
    scan->add_option("-o,--report", scan_json, "write the census report JSON here");

    // gadget
    auto* gad = app.add_subcommand("gadget", "print a gadget's byte string");
    std::vector<std::string> gad_args;
    gad->add_option("args", gad_args, "name and register/value arguments")->expected(-1);

    // encode
    auto* enc = app.add_subcommand("encode", "encode a payload file to pool characters");
    std::string enc_in, enc_out;
    enc->add_option("-i,--input", enc_in, "payload file")->required();
    enc->add_option("-o,--output", enc_out, "encoded output file")->required();

    // build
    auto* bld = app.add_subcommand("build", "build a self-decoding alphanumeric image");
    std::string bld_in, bld_out, bld_profile = "sub4g", bld_mutate = "none";
    uint64_t bld_seed = 1;
    bld->add_option("-i,--input", bld_in, "payload file")->required();
    bld->add_option("-o,--output", bld_out, "image file (metadata sidecar: <file>.json)")
        ->required();
    bld->add_option("--profile", bld_profile, "addressing profile: sub4g | full64");
    bld->add_option("--mutate", bld_mutate, "categories: payload,padding,nops,vector,all,none");
    bld->add_option("--seed", bld_seed, "mutation seed");

    // mutate
    auto* mut = app.add_subcommand("mutate", "re-seed polymorphism on an existing image");
    std::string mut_in, mut_out, mut_what = "all";
    uint64_t mut_seed = 1;
    mut->add_option("-i,--input", mut_in, "image file with sidecar")->required();
    mut->add_option("-o,--output", mut_out, "mutated image file")->required();
    mut->add_option("--mutate", mut_what, "categories: payload,padding,nops,vector,all,none");
    mut->add_option("--seed", mut_seed, "mutation seed");

    // verify
    auto* ver = app.add_subcommand("verify", "emulator oracle: decoded bytes must match");
    std::string ver_in;
    ver->add_option("-i,--input", ver_in, "image file with sidecar")->required();

    // trace
    auto* trc = app.add_subcommand("trace", "per-instruction execution trace");
    std::string trc_in, trc_out;
    uint64_t trc_limit = 2'000'000;
    trc->add_option("-i,--input", trc_in, "image file with sidecar")->required();
    trc->add_option("-o,--output", trc_out, "trace file (default stdout)");
    trc->add_option("--step-limit", trc_limit, "maximum instructions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (*scan) {
        a64::InstrSetReport rep = a64::classify_space();
        if (!scan_table.empty()) {
            std::ofstream f(scan_table);
            a64::export_table(f);
        }
        if (!scan_json.empty()) write_file(scan_json, rep.to_json().dump(2));
        if (scan_summary || (scan_table.empty() && scan_json.empty()))
            std::cout << rep.total_alnum_words << " words scanned, " << rep.valid_instructions
                      << " valid instructions, " << rep.a1_opcodes.size() << " opcodes\n";
        return kExitOk;
    }

    if (*gad) {
        if (gad_args.empty()) throw CLI::ValidationError("gadget", "missing gadget name");
        const std::string& name = gad_args[0];
        auto reg = [&](size_t i) {
            if (i >= gad_args.size())
                throw CLI::ValidationError("gadget", "missing register argument");
            return parse_reg(gad_args[i]);
        };
        a64::GadgetSeq seq;
        if (name == "zero")
            seq = a64::zero_low(reg(1));
        else if (name == "add")
            seq = a64::add_const(reg(1), std::stoll(gad_args.at(2)));
        else if (name == "move")
            seq = a64::move(reg(1), reg(2));
        else if (name == "xor")
            seq = a64::xor_into(reg(1), reg(2), reg(3));
        else if (name == "not")
            seq = a64::not_into(reg(1), reg(2));
        else if (name == "and")
            seq = a64::logical_and(reg(1), reg(2), reg(3), reg(4), reg(5), reg(6));
        else if (name == "and-upper")
            seq = a64::and_halfword_upper(reg(1), reg(2), reg(3), reg(4), reg(5), reg(6));
        else if (name == "loadb")
            seq = a64::load_byte_imm(reg(1), reg(2), (unsigned)std::stoul(gad_args.at(3)));
        else if (name == "storeb")
            seq = a64::store_byte(reg(1), reg(2), reg(3));
        else if (name == "tbz" || name == "tbnz")
            seq = a64::branch(name == "tbnz", reg(1), (unsigned)std::stoul(gad_args.at(2)),
                              gad_args.at(3) == "forward")
                      .seq;
        else
            throw CLI::ValidationError("gadget", "unknown gadget: " + name);
        std::cout << seq.str() << "\n";
        return kExitOk;
    }

    if (*enc) {
        auto payload = read_file(enc_in);
        a64::EncodedPayload e = a64::encode_payload(payload);
        write_file(enc_out, e.chars);
        return kExitOk;
    }

    if (*bld) {
        auto profile = a64::addressing_profile_from_name(bld_profile);
        if (!profile) throw CLI::ValidationError("--profile", "expected sub4g or full64");
        auto payload = read_file(bld_in);
        std::optional<a64::MutationProfile> mp;
        if (bld_mutate != "none") mp = parse_mutation(bld_mutate, bld_seed);
        a64::ShellcodeImage img =
            a64::build(payload, *profile, mp ? &*mp : nullptr);
        store_image(bld_out, img);
        std::cout << "image: " << img.bytes.size() << " bytes, pool at "
                  << img.layout.pool_offset << ", payload decodes at +"
                  << img.decoded_payload_addr << "\n";
        return kExitOk;
    }

    if (*mut) {
        a64::ShellcodeImage img = load_image(mut_in);
        a64::ShellcodeImage out = a64::mutate_image(img, parse_mutation(mut_what, mut_seed));
        store_image(mut_out, out);
        return kExitOk;
    }

    if (*ver) {
        a64::ShellcodeImage img = load_image(ver_in);
        std::string why;
        if (!a64::verify_image(img, &why)) {
            std::cerr << "verification failed: " << why << "\n";
            return kExitVerify;
        }
        std::cout << "ok\n";
        return kExitOk;
    }

    if (*trc) {
        a64::ShellcodeImage img = load_image(trc_in);
        a64::RunResult res =
            a64::run_image(img, a64::default_base(img.layout.profile), trc_limit, true);
        if (trc_out.empty())
            std::cout << res.trace;
        else
            write_file(trc_out, res.trace);
        std::cerr << "halt: " << a64::halt_reason_name(res.halt) << " after " << res.steps
                  << " steps\n";
        return kExitOk;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const a64::BuildError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const a64::GadgetError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
