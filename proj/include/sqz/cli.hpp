#pragma once

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sqz/comparison_sorter.hpp"
#include "sqz/container.hpp"
#include "sqz/harness.hpp"
#include "sqz/text_stats.hpp"

namespace sqz::cli {

// Exit codes: 0 success, 2 usage, 3 I/O, 4 corruption.

namespace detail {

inline std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed on " + path);
    return data;
}

inline void write_file(const std::string& path, std::span<const uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed on " + path);
}

inline std::vector<uint32_t> widen(std::span<const uint8_t> bytes, uint32_t sigma) {
    std::vector<uint32_t> out;
    out.reserve(bytes.size());
    for (uint8_t b : bytes) {
        if (b >= sigma)
            throw std::invalid_argument("input byte " + std::to_string(int(b)) +
                                        " outside alphabet of size " + std::to_string(sigma));
        out.push_back(b);
    }
    return out;
}

inline std::vector<uint8_t> narrow(std::span<const uint32_t> symbols) {
    std::vector<uint8_t> out;
    out.reserve(symbols.size());
    for (uint32_t a : symbols) {
        if (a > 0xff) throw CorruptError("decoded symbol does not fit a byte");
        out.push_back(static_cast<uint8_t>(a));
    }
    return out;
}

inline std::vector<std::string> tokenize(std::span<const uint8_t> bytes) {
    std::string text(bytes.begin(), bytes.end());
    std::istringstream in(text);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

} // namespace detail

inline int run(const std::vector<std::string>& args) {
    CLI::App app{"sequential-access compression toolkit"};
    app.require_subcommand(1);

    // --- encode ---
    auto* encode = app.add_subcommand("encode", "compress a file into a container");
    std::string enc_codec = "adaptive";
    uint32_t enc_sigma = 256;
    double enc_lambda = 1.0, enc_mu = 1.0;
    unsigned enc_k = 0;
    std::string enc_in, enc_out, enc_dump_bwt, enc_dump_mtf;
    encode->add_option("--codec", enc_codec)
        ->check(CLI::IsMember({"adaptive", "bounded", "bwt", "gaplists"}));
    encode->add_option("--sigma", enc_sigma, "alphabet size")->check(CLI::Range(1u, 256u));
    encode->add_option("--lambda", enc_lambda)->check(CLI::Range(1.0, 16.0));
    encode->add_option("--k", enc_k)->check(CLI::Range(0u, 8u));
    encode->add_option("--mu", enc_mu)->check(CLI::Range(0.5, 16.0));
    encode->add_option("--dump-bwt", enc_dump_bwt, "write the BWT stage here (bwt codec)");
    encode->add_option("--dump-mtf", enc_dump_mtf, "write the MTF indices here (bwt codec)");
    encode->add_option("input", enc_in)->required();
    encode->add_option("output", enc_out)->required();

    // --- decode ---
    auto* decode = app.add_subcommand("decode", "decompress a container");
    std::string dec_in, dec_out;
    decode->add_option("input", dec_in)->required();
    decode->add_option("output", dec_out)->required();

    // --- analyze ---
    auto* analyze = app.add_subcommand("analyze", "print n, sigma and H_0..H_kmax");
    std::string ana_in;
    unsigned ana_kmax = 3;
    uint32_t ana_sigma = 256;
    analyze->add_option("--kmax", ana_kmax)->check(CLI::Range(0u, 8u));
    analyze->add_option("--sigma", ana_sigma)->check(CLI::Range(1u, 256u));
    analyze->add_option("input", ana_in)->required();

    // --- sortperm ---
    auto* sortperm = app.add_subcommand("sortperm", "stable-sort permutation via gap lists");
    std::string sp_in, sp_raw, sp_format = "bytes";
    sortperm->add_option("--format", sp_format)->check(CLI::IsMember({"bytes", "tokens"}));
    sortperm->add_option("--raw", sp_raw, "write the gap-list container here instead of text");
    sortperm->add_option("input", sp_in)->required();

    // --- sortcmp ---
    auto* sortcmp = app.add_subcommand("sortcmp", "comparison-counting online stable sort");
    std::string sc_in = "-", sc_format = "tokens";
    sortcmp->add_option("--format", sc_format)->check(CLI::IsMember({"bytes", "tokens"}));
    sortcmp->add_option("input", sc_in, "input file, - for stdin");

    // --- gen ---
    auto* gen = app.add_subcommand("gen", "emit structured test inputs");
    auto* gen_db = gen->add_subcommand("debruijn", "binary De Bruijn cycle of order k");
    unsigned db_k = 3;
    std::string db_out;
    gen_db->add_option("--k", db_k)->required()->check(CLI::Range(1u, 24u));
    gen_db->add_option("--out", db_out, "output file, stdout if omitted");
    auto* gen_per = gen->add_subcommand("periodic", "periodic string from a period file");
    std::string per_file, per_out;
    uint64_t per_len = 0;
    gen_per->add_option("--period-file", per_file)->required();
    gen_per->add_option("--length", per_len)->required();
    gen_per->add_option("--out", per_out, "output file, stdout if omitted");

    // --- audit ---
    auto* audit = app.add_subcommand("audit", "run a codec under the one-pass harness");
    std::string au_codec = "adaptive", au_in;
    uint32_t au_sigma = 256;
    double au_lambda = 1.0, au_mu = 1.0;
    unsigned au_k = 0;
    audit->add_option("--codec", au_codec)
        ->check(CLI::IsMember({"adaptive", "bounded", "gaplists", "sortcmp"}));
    audit->add_option("--sigma", au_sigma)->check(CLI::Range(1u, 256u));
    audit->add_option("--lambda", au_lambda)->check(CLI::Range(1.0, 16.0));
    audit->add_option("--k", au_k)->check(CLI::Range(0u, 8u));
    audit->add_option("--mu", au_mu)->check(CLI::Range(0.5, 16.0));
    audit->add_option("input", au_in)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*encode) {
            const auto bytes = detail::read_file(enc_in);
            const auto symbols = detail::widen(bytes, enc_sigma);
            std::vector<uint8_t> out;
            if (enc_codec == "adaptive")
                out = encode_adaptive_container(symbols, enc_sigma);
            else if (enc_codec == "bounded")
                out = encode_bounded_container(symbols, enc_sigma,
                                               BoundedFixedParams::from(enc_lambda, enc_k, enc_mu));
            else if (enc_codec == "bwt")
                out = encode_bwt_container(symbols, enc_sigma);
            else
                out = encode_gaplists_container(symbols, enc_sigma);
            detail::write_file(enc_out, out);
            if (!enc_dump_bwt.empty() || !enc_dump_mtf.empty()) {
                if (enc_codec != "bwt")
                    throw std::invalid_argument("stage dumps apply to the bwt codec only");
                const auto transform = bwt(symbols, enc_sigma);
                if (!enc_dump_bwt.empty()) {
                    // sentinel rendered as '$' for inspection
                    std::vector<uint8_t> dump;
                    for (uint32_t a : transform)
                        dump.push_back(a == enc_sigma ? '$' : static_cast<uint8_t>(a));
                    detail::write_file(enc_dump_bwt, dump);
                }
                if (!enc_dump_mtf.empty()) {
                    const auto indices = mtf_encode(transform, enc_sigma + 1);
                    std::string text;
                    for (uint32_t idx : indices) {
                        text += std::to_string(idx);
                        text += '\n';
                    }
                    detail::write_file(enc_dump_mtf,
                                       std::vector<uint8_t>(text.begin(), text.end()));
                }
            }
        } else if (*decode) {
            const auto file = detail::read_file(dec_in);
            const auto symbols = decode_container(file);
            detail::write_file(dec_out, detail::narrow(symbols));
        } else if (*analyze) {
            const auto bytes = detail::read_file(ana_in);
            const auto symbols = detail::widen(bytes, ana_sigma);
            if (symbols.empty()) throw std::invalid_argument("empty input");
            const FrequencyTable t = FrequencyTable::from(symbols, ana_sigma);
            std::printf("n %zu\n", symbols.size());
            std::printf("sigma %u\n", t.used());
            for (unsigned k = 0; k <= ana_kmax && k < symbols.size(); ++k)
                std::printf("H_%u %.6f\n", k, hk(symbols, k, ana_sigma));
        } else if (*sortperm) {
            const auto bytes = detail::read_file(sp_in);
            if (sp_format == "bytes") {
                if (!sp_raw.empty()) {
                    detail::write_file(sp_raw,
                                       encode_gaplists_container(detail::widen(bytes, 256), 256));
                } else {
                    GapListSorter<uint32_t> sorter(8);
                    for (uint8_t b : bytes) sorter.push(b);
                    for (uint64_t p : sorter.permutation()) std::printf("%llu\n",
                                                                        (unsigned long long)p);
                }
            } else {
                if (!sp_raw.empty())
                    throw std::invalid_argument("--raw is only available for byte inputs");
                GapListSorter<std::string> sorter(32);
                for (auto& tok : detail::tokenize(bytes)) sorter.push(tok);
                for (uint64_t p : sorter.permutation()) std::printf("%llu\n",
                                                                    (unsigned long long)p);
            }
        } else if (*sortcmp) {
            std::vector<uint8_t> bytes;
            if (sc_in == "-") {
                std::string all((std::istreambuf_iterator<char>(std::cin)),
                                std::istreambuf_iterator<char>());
                bytes.assign(all.begin(), all.end());
            } else {
                bytes = detail::read_file(sc_in);
            }
            auto emit = [](const std::vector<uint64_t>& pi, uint64_t comparisons) {
                for (uint64_t p : pi) std::printf("%llu\n", (unsigned long long)p);
                std::printf("comparisons %llu\n", (unsigned long long)comparisons);
            };
            if (sc_format == "bytes") {
                ComparisonSorter<uint32_t> sorter;
                for (uint8_t b : bytes) sorter.push(b);
                emit(sorter.permutation(), sorter.comparisons());
            } else {
                ComparisonSorter<std::string> sorter;
                for (auto& tok : detail::tokenize(bytes)) sorter.push(tok);
                emit(sorter.permutation(), sorter.comparisons());
            }
        } else if (*gen_db) {
            const auto d = gen_debruijn(db_k);
            std::vector<uint8_t> out(d.size());
            for (size_t i = 0; i < d.size(); ++i) out[i] = d[i] ? '1' : '0';
            if (db_out.empty())
                std::fwrite(out.data(), 1, out.size(), stdout);
            else
                detail::write_file(db_out, out);
        } else if (*gen_per) {
            const auto period = detail::read_file(per_file);
            if (period.empty()) throw std::invalid_argument("period file is empty");
            std::vector<uint32_t> t(period.begin(), period.end());
            const auto s = gen_periodic(t, per_len);
            std::vector<uint8_t> out(s.begin(), s.end());
            if (per_out.empty())
                std::fwrite(out.data(), 1, out.size(), stdout);
            else
                detail::write_file(per_out, out);
        } else if (*audit) {
            const auto bytes = detail::read_file(au_in);
            const auto symbols = detail::widen(bytes, au_sigma);
            StreamAccount acc;
            uint64_t resident = 0;
            if (au_codec == "adaptive") {
                AdaptiveEncoder enc(au_sigma, symbols.size());
                acc = run_one_pass(enc, symbols);
            } else if (au_codec == "bounded") {
                BoundedEncoder enc(BoundedFixedParams::from(au_lambda, au_k, au_mu).make(au_sigma));
                acc = run_one_pass(enc, symbols);
                resident = enc.params().resident_block_bits();
            } else if (au_codec == "gaplists") {
                GapListSorter<uint32_t> sorter(sqz::detail::key_bits(au_sigma));
                acc = run_one_pass(sorter, symbols);
            } else {
                ComparisonSorter<uint32_t> sorter;
                acc = run_one_pass(sorter, symbols);
            }
            std::printf("{\"codec\":\"%s\",\"n\":%llu,\"sigma\":%u,\"passes\":%llu,"
                        "\"peak_state_bits\":%llu,\"resident_block_bits\":%llu}\n",
                        au_codec.c_str(), (unsigned long long)acc.n, au_sigma,
                        (unsigned long long)acc.passes, (unsigned long long)acc.peak_state_bits,
                        (unsigned long long)resident);
        }
    } catch (const CorruptError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        // crafted containers can demand absurd allocations; treat any other
        // failure while processing as corrupt input
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace sqz::cli
