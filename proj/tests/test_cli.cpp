#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <livegen/cli.hpp>

#include "support.hpp"

using namespace livegen;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& tag)
{
    fs::path p = fs::temp_directory_path() / ("livegen-cli-" + std::to_string(::getpid()) + "-" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST(Cli, GenerateIsDeterministic)
{
    CliRun a = run({"generate", "--seed", "42"});
    CliRun b = run({"generate", "--seed", "42"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.rfind("/* livegen seed=42 ", 0), 0u);
    EXPECT_NE(a.out, run({"generate", "--seed", "43"}).out);
}

TEST(Cli, MissingSeedIsDrawnAndPrinted)
{
    CliRun a = run({"generate"});
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(a.err.rfind("seed: ", 0), 0u);
    std::string seed = a.err.substr(6, a.err.find('\n') - 6);
    EXPECT_EQ(run({"generate", "--seed", seed}).out, a.out);
}

TEST(Cli, IntOnlyNoDivisionScan)
{
    for (int seed = 0; seed < 20; ++seed) {
        CliRun r = run({"generate", "--seed", std::to_string(seed), "--int-only", "--no-division"});
        ASSERT_EQ(r.code, 0);
        EXPECT_TRUE(fixtures::scan_int_only(r.out).empty()) << seed;
        EXPECT_TRUE(fixtures::scan_no_division(r.out).empty()) << seed;
    }
}

TEST(Cli, BadFlagsExitTwo)
{
    EXPECT_EQ(run({"generate", "--bogus"}).code, 2);
    EXPECT_EQ(run({"generate", "--int-only", "--float-only"}).code, 2);
    EXPECT_EQ(run({"generate", "--max-block-stmts", "0"}).code, 2);
    EXPECT_EQ(run({"generate", "--seed", "abc"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"check"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, OutputAndJsonFiles)
{
    fs::path dir = temp_dir("files");
    CliRun r = run({"generate", "--seed", "9", "-o", (dir / "f.c").string(), "--emit-json", (dir / "f.json").string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream c(dir / "f.c");
    std::stringstream text;
    text << c.rdbuf();
    EXPECT_EQ(text.str(), run({"generate", "--seed", "9"}).out);

    CliRun chk = run({"check", (dir / "f.json").string()});
    EXPECT_EQ(chk.code, 0) << chk.out;
    EXPECT_EQ(chk.out.rfind("fully live; live-in ", 0), 0u);
    fs::remove_all(dir);
}

TEST(Cli, CheckRejectsDeadStore)
{
    fs::path dir = temp_dir("check");
    fs::path file = dir / "dead.json";
    std::ofstream(file) << to_json(fixtures::dead_store()).dump();
    CliRun r = run({"check", file.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("structural: assign-target-dead at body/0"), std::string::npos);
    EXPECT_NE(r.out.find("oracle: dead assignment at body/0"), std::string::npos);
    EXPECT_EQ(r.out.find("disagreement"), std::string::npos);

    std::ofstream(dir / "fib.json") << to_json(fixtures::fibonacci()).dump();
    r = run({"check", (dir / "fib.json").string(), "--oracle"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("oracle: node "), std::string::npos);
    EXPECT_NE(r.out.find("fully live; live-in {n}"), std::string::npos);

    std::ofstream(dir / "junk.json") << "{ not json";
    EXPECT_EQ(run({"check", (dir / "junk.json").string()}).code, 2);
    EXPECT_EQ(run({"check", (dir / "missing.json").string()}).code, 2);
    fs::remove_all(dir);
}

TEST(Cli, CorpusWritesManifest)
{
    fs::path dir = temp_dir("corpus");
    CliRun r = run({"corpus", "--count", "5", "--seed-base", "100", "--out-dir", dir.string(), "--jobs", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream manifest(dir / "manifest.jsonl");
    std::string line;
    std::uint64_t expected_seed = 100;
    GeneratorConfig cfg;
    while (std::getline(manifest, line)) {
        auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["seed"].get<std::uint64_t>(), expected_seed);
        EXPECT_EQ(j["config_hash"].get<std::string>(), config_hash(cfg));
        std::string file = j["file"].get<std::string>();
        std::ifstream c(dir / file);
        std::stringstream text;
        text << c.rdbuf();
        EXPECT_EQ(text.str(), run({"generate", "--seed", std::to_string(expected_seed)}).out);
        ++expected_seed;
    }
    EXPECT_EQ(expected_seed, 105u);
    fs::remove_all(dir);
}

TEST(Cli, EvalProducesReports)
{
    fs::path dir = temp_dir("eval");
    ASSERT_EQ(run({"corpus", "--count", "4", "--out-dir", dir.string()}).code, 0);
    CliRun r = run({"eval", "--dir", dir.string(), "--jobs", "2", "--opt-flags", "-O1", "--report",
                 (dir / "report.json").string(), "--csv", (dir / "table.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("metric,min,median,max,total\n", 0), 0u);
    std::ifstream in(dir / "report.json");
    auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["files"], 4);
    EXPECT_EQ(j["optimization_flags"], "-O1");
    EXPECT_GT(j["lines_per_second"].get<double>(), 0);
    EXPECT_TRUE(fs::exists(dir / "table.csv"));
    EXPECT_EQ(run({"eval", "--dir", dir.string(), "--timeout", "0"}).code, 2);
    fs::remove_all(dir);
}
