#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = new fs::path(fs::temp_directory_path() / ("motifrules_cli_" + std::to_string(::getpid())));
        fs::remove_all(*root_);
        fs::create_directories(*root_);
        // One shared synthetic train/test pair for the suite.
        ASSERT_EQ(run_raw("synth --length 4000 --instances 10 --seed 3 --out-dir " + (*root_ / "train").string()), 0);
        ASSERT_EQ(run_raw("synth --length 4000 --instances 10 --seed 4 --out-dir " + (*root_ / "test").string()), 0);
    }
    static void TearDownTestSuite() {
        fs::remove_all(*root_);
        delete root_;
    }

    static int run_raw(const std::string& args) {
        const std::string cmd = std::string("\"") + MOTIFRULES_CLI + "\" " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    static CliResult run(const std::string& args) {
        const auto err = *root_ / "stderr.txt";
        const std::string cmd =
            std::string("\"") + MOTIFRULES_CLI + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
        const int status = std::system(cmd.c_str());
        return CliResult{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
    }

    static std::string train(const std::string& f) { return (*root_ / "train" / f).string(); }
    static std::string test(const std::string& f) { return (*root_ / "test" / f).string(); }
    static fs::path dir(const std::string& name) { return *root_ / name; }

    static std::string mine_args() {
        const auto truth = read_json(*root_ / "train" / "truth.json");
        std::ostringstream a;
        a.precision(17);
        a << "mine --series-a " << train("T_A.csv") << " --series-b " << train("T_B.csv")
          << " --motif-lengths 40,30 --tau " << truth["suggested_tau"].get<double>() << " --theta "
          << truth["suggested_theta"].get<double>();
        return a.str();
    }

    static fs::path* root_;
};
fs::path* Cli::root_ = nullptr;

} // namespace

TEST_F(Cli, HelpExitsZero) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("mine --help").code, 0);
}

TEST_F(Cli, SynthWritesSeriesAndTruth) {
    const auto head = slurp(train("T_A.csv")).substr(0, 7);
    EXPECT_EQ(head, "time,A\n");
    EXPECT_EQ(slurp(train("T_B.csv")).substr(0, 7), "time,B\n");
    const auto truth = read_json(dir("train") / "truth.json");
    EXPECT_EQ(truth["instances"].size(), 10u);
    const auto manifest = read_json(dir("train") / "manifest.json");
    EXPECT_EQ(manifest["command"], "synth");
    EXPECT_EQ(manifest["seed"], 3);
}

TEST_F(Cli, MineThenEval) {
    const auto out = dir("mined");
    const auto r = run(mine_args() + " --out " + out.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rules = read_json(out / "rules.json");
    EXPECT_EQ(rules["manifest"], "manifest.json");
    ASSERT_FALSE(rules["rules"].empty());
    EXPECT_EQ(rules["rules"][0]["rank"], 1);
    const auto manifest = read_json(out / "manifest.json");
    EXPECT_EQ(manifest["command"], "mine");
    ASSERT_EQ(manifest["inputs"].size(), 2u);
    EXPECT_EQ(manifest["inputs"][0]["sha256"].get<std::string>().size(), 64u);
    EXPECT_TRUE(manifest["timings"].contains("score_ms"));
    EXPECT_FALSE(manifest["version"].get<std::string>().empty());

    const std::string eval = "eval --rules " + (out / "rules.json").string() + " --test-a " + test("T_A.csv") +
                             " --test-b " + test("T_B.csv") + " --repetitions 200 --seed 5";
    const auto e1 = run(eval + " --plot --out " + dir("eval1").string());
    ASSERT_EQ(e1.code, 0) << e1.err;
    const auto e2 = run(eval + " --out " + dir("eval2").string());
    ASSERT_EQ(e2.code, 0) << e2.err;
    const auto report = read_json(dir("eval1") / "report.json");
    ASSERT_TRUE(report["top5_mean_Q"].is_number());
    EXPECT_LT(report["top5_mean_Q"].get<double>(), 0.5);
    EXPECT_GT(report["rules"][0]["N_firings"].get<int>(), 0);
    // The report carries no timings, so reruns are byte-identical.
    EXPECT_EQ(slurp(dir("eval1") / "report.json"), slurp(dir("eval2") / "report.json"));
    const auto plot = slurp(dir("eval1") / "plot_rule_1.csv");
    EXPECT_EQ(plot.rfind("index,actual,predicted_overlay\n", 0), 0u);
    EXPECT_FALSE(fs::exists(dir("eval2") / "plot_rule_1.csv"));
}

TEST_F(Cli, NoRulesExitsTwo) {
    const auto r = run(mine_args() + " --k-rules 0 --out " + dir("none").string());
    EXPECT_EQ(r.code, 2) << r.err;
    EXPECT_TRUE(read_json(dir("none") / "rules.json")["rules"].empty());
}

TEST_F(Cli, BadArgumentsNameTheFlag) {
    auto r = run(mine_args() + " --tau 0 --out " + dir("bad").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--tau"), std::string::npos) << r.err;
    r = run(mine_args() + " --bits 1 --out " + dir("bad").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--bits"), std::string::npos) << r.err;
    r = run("mine --series-a " + train("T_A.csv") + " --motif-lengths 3000 --out " + dir("bad").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--motif-lengths"), std::string::npos) << r.err;
    r = run("mine --series-a " + dir("missing.csv").string() + " --out " + dir("bad").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--series-a"), std::string::npos) << r.err;
    r = run("mine --out " + dir("bad").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
}

TEST_F(Cli, EvalRejectsUnknownSeries) {
    const auto out = dir("mined_for_names");
    ASSERT_EQ(run(mine_args() + " --out " + out.string()).code, 0);
    // Only T_A is supplied, so rules whose consequent lives in "B" cannot be resolved.
    const auto r =
        run("eval --rules " + (out / "rules.json").string() + " --test-a " + test("T_A.csv") + " --out " + dir("e").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("'B'"), std::string::npos) << r.err;
}

TEST_F(Cli, PairsDirMinesEveryOrderedPair) {
    const auto in = dir("pairs_in");
    fs::create_directories(in);
    fs::copy_file(train("T_A.csv"), in / "a.csv");
    fs::copy_file(train("T_B.csv"), in / "b.csv");
    const auto truth = read_json(dir("train") / "truth.json");
    std::ostringstream a;
    a.precision(17);
    a << "mine --pairs-dir " << in.string() << " --motif-lengths 40,30 --tau " << truth["suggested_tau"].get<double>()
      << " --theta " << truth["suggested_theta"].get<double>() << " --out " << dir("pairs_out").string();
    const auto r = run(a.str());
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir("pairs_out") / "rules_A__B.json"));
    EXPECT_TRUE(fs::exists(dir("pairs_out") / "rules_B__A.json"));
    EXPECT_EQ(read_json(dir("pairs_out") / "manifest.json")["outputs"].size(), 2u);

    // A third file reusing the header "A" is ambiguous.
    fs::copy_file(train("T_A.csv"), in / "c.csv");
    const auto dup = run(a.str());
    EXPECT_EQ(dup.code, 1);
    EXPECT_NE(dup.err.find("--pairs-dir"), std::string::npos) << dup.err;
}
