#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "sqz/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sqz_cli_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::vector<uint8_t>& data) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

std::vector<uint8_t> read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(std::initializer_list<std::string> args) {
    return sqz::cli::run(std::vector<std::string>(args));
}

} // namespace

TEST(Cli, EncodeDecodeRoundTripAllCodecs) {
    TempDir dir;
    std::mt19937_64 rng(90);
    std::vector<uint8_t> data(20000);
    for (auto& b : data) b = static_cast<uint8_t>(rng() % 251);
    write(dir.file("in.bin"), data);
    for (const std::string codec : {"adaptive", "bounded", "bwt", "gaplists"}) {
        ASSERT_EQ(run({"encode", "--codec", codec, dir.file("in.bin"), dir.file("out.sqz")}), 0)
            << codec;
        ASSERT_EQ(run({"decode", dir.file("out.sqz"), dir.file("back.bin")}), 0) << codec;
        ASSERT_EQ(read(dir.file("back.bin")), data) << codec;
    }
}

TEST(Cli, ExitCodes) {
    TempDir dir;
    // usage: unknown subcommand / bad flags
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_EQ(run({"encode", "--codec", "nope", "a", "b"}), 2);
    // io: missing input file
    EXPECT_EQ(run({"encode", "--codec", "adaptive", dir.file("missing.bin"), dir.file("o")}), 3);
    // corruption: flip a payload byte
    write(dir.file("in.bin"), {'h', 'e', 'l', 'l', 'o', ' ', 'w', 'o', 'r', 'l', 'd'});
    ASSERT_EQ(run({"encode", "--codec", "adaptive", dir.file("in.bin"), dir.file("c.sqz")}), 0);
    auto c = read(dir.file("c.sqz"));
    c[8] ^= 0x40; // inside the header region
    write(dir.file("bad.sqz"), c);
    EXPECT_EQ(run({"decode", dir.file("bad.sqz"), dir.file("x.bin")}), 4);
    // corruption: not a container at all
    write(dir.file("junk.sqz"), {1, 2, 3});
    EXPECT_EQ(run({"decode", dir.file("junk.sqz"), dir.file("x.bin")}), 4);
}

TEST(Cli, SigmaValidation) {
    TempDir dir;
    write(dir.file("in.bin"), {200, 10});
    EXPECT_EQ(run({"encode", "--codec", "adaptive", "--sigma", "16", dir.file("in.bin"),
                   dir.file("o.sqz")}),
              2);
    EXPECT_EQ(run({"encode", "--codec", "adaptive", "--sigma", "256", dir.file("in.bin"),
                   dir.file("o.sqz")}),
              0);
}

TEST(Cli, GenCommands) {
    TempDir dir;
    ASSERT_EQ(run({"gen", "debruijn", "--k", "3", "--out", dir.file("d.bin")}), 0);
    const auto d = read(dir.file("d.bin"));
    EXPECT_EQ(std::string(d.begin(), d.end()), "00010111");

    write(dir.file("period.bin"), {'a', 'b'});
    ASSERT_EQ(run({"gen", "periodic", "--period-file", dir.file("period.bin"), "--length", "5",
                   "--out", dir.file("p.bin")}),
              0);
    const auto p = read(dir.file("p.bin"));
    EXPECT_EQ(std::string(p.begin(), p.end()), "ababa");
}

TEST(Cli, SortpermRawContainerRoundTrips) {
    TempDir dir;
    write(dir.file("in.bin"), {'a', 'b', 'r', 'a', 'c', 'a', 'd', 'a', 'b', 'r', 'a'});
    ASSERT_EQ(run({"sortperm", "--raw", dir.file("pi.sqz"), dir.file("in.bin")}), 0);
    ASSERT_EQ(run({"decode", dir.file("pi.sqz"), dir.file("back.bin")}), 0);
    EXPECT_EQ(read(dir.file("back.bin")), read(dir.file("in.bin")));
}

TEST(Cli, BwtStageDumps) {
    TempDir dir;
    write(dir.file("in.bin"), {'b', 'a', 'n', 'a', 'n', 'a'});
    ASSERT_EQ(run({"encode", "--codec", "bwt", "--dump-bwt", dir.file("t.bwt"), "--dump-mtf",
                   dir.file("t.mtf"), dir.file("in.bin"), dir.file("out.sqz")}),
              0);
    const auto t = read(dir.file("t.bwt"));
    EXPECT_EQ(std::string(t.begin(), t.end()), "annb$aa");
    EXPECT_FALSE(read(dir.file("t.mtf")).empty());
    // dumps are refused for codecs without those stages
    EXPECT_EQ(run({"encode", "--codec", "adaptive", "--dump-bwt", dir.file("x"),
                   dir.file("in.bin"), dir.file("y.sqz")}),
              2);
}

TEST(Cli, AnalyzeUnaryReportsZeroEntropy) {
    TempDir dir;
    write(dir.file("u.bin"), std::vector<uint8_t>(1000, 'x'));
    testing::internal::CaptureStdout();
    ASSERT_EQ(run({"analyze", "--kmax", "0", dir.file("u.bin")}), 0);
    const std::string out = testing::internal::GetCapturedStdout();
    EXPECT_NE(out.find("n 1000"), std::string::npos);
    EXPECT_NE(out.find("sigma 1"), std::string::npos);
    EXPECT_NE(out.find("H_0 0.000000"), std::string::npos);
}

TEST(Cli, AuditEmitsJsonAccount) {
    TempDir dir;
    write(dir.file("in.bin"), std::vector<uint8_t>(4096, 'q'));
    testing::internal::CaptureStdout();
    ASSERT_EQ(run({"audit", "--codec", "adaptive", dir.file("in.bin")}), 0);
    const std::string out = testing::internal::GetCapturedStdout();
    EXPECT_NE(out.find("\"codec\":\"adaptive\""), std::string::npos);
    EXPECT_NE(out.find("\"passes\":1"), std::string::npos);
    EXPECT_NE(out.find("\"peak_state_bits\":"), std::string::npos);
}
