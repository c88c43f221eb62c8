#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nfp/metrics.hpp"

// End-to-end checks of the installed binary: subcommands, exit codes, and
// artifact layout. The binary path arrives via NFP_CLI_PATH from the build.

namespace nfp {
namespace {

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

std::string cli_path() {
    const char* p = std::getenv("NFP_CLI_PATH");
    if (p == nullptr) ADD_FAILURE() << "NFP_CLI_PATH is not set";
    return p == nullptr ? "" : p;
}

struct CmdResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

CmdResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string log = temp_path("cli_log_" + std::to_string(counter++) + ".txt");
    const std::string cmd = cli_path() + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    CmdResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream body;
    body << in.rdbuf();
    res.output = body.str();
    return res;
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

std::string write_config(const std::string& name, const std::string& extra = "") {
    const std::string path = temp_path(name + ".cfg");
    std::ofstream out(path);
    out << "seed = 11\n"
           "task.kind = 1d\n"
           "task.n_points = 32\n"
           "net.hidden = 8\n"
           "net.activation = gaussian\n"
           "optim.algorithm = adam\n"
           "optim.eta = 0.01\n"
           "train.iters = 40\n"
           "train.batch = 8\n"
           "train.eval_interval = 10\n"
        << "out_dir = " << temp_path(name + "_out") << "\n"
        << extra;
    return path;
}

// ------------------------------------------------------------------- train

TEST(CliTrain, WritesArtifactsAndExitsZero) {
    const std::string cfg = write_config("basic");
    const CmdResult res = run_cli("train " + cfg);
    EXPECT_EQ(res.exit_code, 0) << res.output;
    const std::string out = temp_path("basic_out");
    EXPECT_TRUE(std::filesystem::exists(out + "/metrics.csv"));
    EXPECT_TRUE(std::filesystem::exists(out + "/checkpoint.nfpc"));
    EXPECT_NE(res.output.find("final mse"), std::string::npos) << res.output;
}

TEST(CliTrain, ZeroIterationsYieldsExactlyTheStepZeroRow) {
    const std::string cfg = write_config("zero");
    const CmdResult res = run_cli("train " + cfg + " --iters 0");
    EXPECT_EQ(res.exit_code, 0) << res.output;
    const auto rows = parse_metrics_csv(temp_path("zero_out") + "/metrics.csv");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].iteration, 0);
}

TEST(CliTrain, RerunsAreByteIdentical) {
    const std::string cfg = write_config("det");
    ASSERT_EQ(run_cli("train " + cfg + " --out-dir " + temp_path("det_a")).exit_code, 0);
    ASSERT_EQ(run_cli("train " + cfg + " --out-dir " + temp_path("det_b")).exit_code, 0);
    const std::string a = read_bytes(temp_path("det_a") + "/metrics.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, read_bytes(temp_path("det_b") + "/metrics.csv"));
    EXPECT_EQ(read_bytes(temp_path("det_a") + "/checkpoint.nfpc"),
              read_bytes(temp_path("det_b") + "/checkpoint.nfpc"));
}

TEST(CliTrain, SeedOverrideChangesTheRun) {
    const std::string cfg = write_config("seeds");
    ASSERT_EQ(run_cli("train " + cfg + " --out-dir " + temp_path("seed_a")).exit_code, 0);
    ASSERT_EQ(
        run_cli("train " + cfg + " --seed 99 --out-dir " + temp_path("seed_b")).exit_code, 0);
    EXPECT_NE(read_bytes(temp_path("seed_a") + "/metrics.csv"),
              read_bytes(temp_path("seed_b") + "/metrics.csv"));
}

TEST(CliTrain, ResumeContinuesTheMetricSequence) {
    const std::string cfg = write_config("resume");
    ASSERT_EQ(run_cli("train " + cfg + " --out-dir " + temp_path("res_full")).exit_code, 0);
    ASSERT_EQ(run_cli("train " + cfg + " --iters 20 --out-dir " + temp_path("res_half"))
                  .exit_code,
              0);
    ASSERT_EQ(run_cli("train " + cfg + " --out-dir " + temp_path("res_tail") + " --resume " +
                      temp_path("res_half") + "/checkpoint.nfpc")
                  .exit_code,
              0);
    const auto full = parse_metrics_csv(temp_path("res_full") + "/metrics.csv");
    const auto tail = parse_metrics_csv(temp_path("res_tail") + "/metrics.csv");
    ASSERT_EQ(tail.size(), 3u);  // rows 20, 30, 40: no gap, no repeat of 0/10
    EXPECT_EQ(tail[0].iteration, 20);
    EXPECT_EQ(tail[1].iteration, 30);
    EXPECT_EQ(tail[2].iteration, 40);
    for (const auto& t : tail) {
        bool matched = false;
        for (const auto& f : full)
            if (f.iteration == t.iteration) {
                EXPECT_EQ(f.loss, t.loss) << "iteration " << t.iteration;
                matched = true;
            }
        EXPECT_TRUE(matched) << "iteration " << t.iteration;
    }
}

// -------------------------------------------------------------- exit codes

TEST(CliExitCodes, ConfigProblemsExitTwo) {
    EXPECT_EQ(run_cli("train " + temp_path("does_not_exist.cfg")).exit_code, 2);
    const std::string bad = temp_path("bad_key.cfg");
    {
        std::ofstream out(bad);
        out << "seed = 1\nunknown.key = 1\n";
    }
    EXPECT_EQ(run_cli("train " + bad).exit_code, 2);
    const std::string noseed = temp_path("no_seed.cfg");
    {
        std::ofstream out(noseed);
        out << "task.kind = 1d\n";
    }
    EXPECT_EQ(run_cli("train " + noseed).exit_code, 2);
    EXPECT_EQ(run_cli("bogus-subcommand").exit_code, 2);
    EXPECT_EQ(run_cli("train").exit_code, 2);  // missing config positional
}

TEST(CliExitCodes, NumericFailureExitsThreeAndKeepsLastGoodCheckpoint) {
    const std::string cfg =
        write_config("blowup", "optim.algorithm = sgd\noptim.eta = 1e30\n");
    const CmdResult res = run_cli("train " + cfg);
    EXPECT_EQ(res.exit_code, 3) << res.output;
    EXPECT_NE(res.output.find("numeric failure"), std::string::npos) << res.output;
    // the pre-divergence snapshot survives for post-mortem diagnosis
    EXPECT_TRUE(std::filesystem::exists(temp_path("blowup_out") + "/checkpoint.nfpc"));
}

TEST(CliExitCodes, KappaOverParameterLimitExitsFour) {
    const std::string cfg =
        write_config("overlimit", "net.hidden = 64,64\ndiag.kappa = true\n");
    const CmdResult res = run_cli("train " + cfg);
    EXPECT_EQ(res.exit_code, 4) << res.output;
    EXPECT_NE(res.output.find("3000"), std::string::npos) << res.output;
}

TEST(CliExitCodes, HelpExitsZero) {
    EXPECT_EQ(run_cli("--help").exit_code, 0);
    EXPECT_EQ(run_cli("train --help").exit_code, 0);
}

// ---------------------------------------------------------------- diagnose

TEST(CliDiagnose, FlagsSelectReports) {
    const std::string cfg = write_config("diag");
    ASSERT_EQ(run_cli("train " + cfg).exit_code, 0);
    const std::string ckpt = temp_path("diag_out") + "/checkpoint.nfpc";

    ASSERT_EQ(run_cli("diagnose " + cfg + " --checkpoint " + ckpt + " --kappa --out-dir " +
                      temp_path("diag_k"))
                  .exit_code,
              0);
    EXPECT_TRUE(std::filesystem::exists(temp_path("diag_k") + "/spectrum.csv"));
    EXPECT_FALSE(std::filesystem::exists(temp_path("diag_k") + "/sparsity.csv"));

    // no flags = both reports
    ASSERT_EQ(run_cli("diagnose " + cfg + " --checkpoint " + ckpt + " --out-dir " +
                      temp_path("diag_b"))
                  .exit_code,
              0);
    EXPECT_TRUE(std::filesystem::exists(temp_path("diag_b") + "/spectrum.csv"));
    EXPECT_TRUE(std::filesystem::exists(temp_path("diag_b") + "/sparsity.csv"));

    const std::string spectrum = read_bytes(temp_path("diag_b") + "/spectrum.csv");
    EXPECT_EQ(spectrum.find("kappa_raw,kappa_jacobi,kappa_equilibrated"), 0u);
}

TEST(CliDiagnose, CheckpointFlagIsRequired) {
    const std::string cfg = write_config("diag_req");
    EXPECT_EQ(run_cli("diagnose " + cfg).exit_code, 2);
}

// ----------------------------------------------------------------- compare

TEST(CliCompare, SelfComparisonShowsZeroDifferences) {
    const std::string cfg = write_config("cmp_self");
    const std::string out = temp_path("cmp_self.csv");
    const CmdResult res =
        run_cli("compare " + cfg + " " + cfg + " --out " + out + " --out-dir " +
                temp_path("cmp_self_runs"));
    ASSERT_EQ(res.exit_code, 0) << res.output;
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "iteration,cmp_self_loss,cmp_self_metric,cmp_self_2_loss,cmp_self_2_metric");
    while (std::getline(in, line) && !line.empty()) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        const std::string first = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string third = line.substr(c3 + 1, line.find(',', c3 + 1) - c3 - 1);
        EXPECT_EQ(first, third) << line;  // same config + seed: identical columns
    }
}

TEST(CliCompare, UnreachedThresholdUsesSentinel) {
    const std::string cfg = write_config("cmp_thr");
    const std::string out = temp_path("cmp_thr.csv");
    ASSERT_EQ(run_cli("compare " + cfg + " " + cfg + " --out " + out + " --threshold 1e-30" +
                      " --out-dir " + temp_path("cmp_thr_runs"))
                  .exit_code,
              0);
    const std::string bytes = read_bytes(out);
    EXPECT_NE(bytes.find("unreached"), std::string::npos);
}

TEST(CliCompare, MismatchedTasksExitTwo) {
    const std::string a = write_config("cmp_a");
    const std::string b =
        write_config("cmp_b", "task.kind = image\ntask.size = 8\ntrain.batch = 0\n");
    EXPECT_EQ(run_cli("compare " + a + " " + b + " --out " + temp_path("cmp_bad.csv"))
                  .exit_code,
              2);
    EXPECT_EQ(run_cli("compare " + a + " --out " + temp_path("cmp_one.csv")).exit_code, 2);
}

}  // namespace
}  // namespace nfp
