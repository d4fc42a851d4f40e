#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct CliRun {
    int status;
    std::string out;
};

CliRun cli(const std::string& args) {
    const std::string cmd = std::string(KNOTFIELD_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    char buf[4096];
    while (const std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::vector<std::vector<double>> numeric_rows(const std::string& csv) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / ("knotfield_cli_test_" + name);
    std::ofstream(p) << content;
    return p;
}

} // namespace

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli("--help").status, 0);
    EXPECT_EQ(cli("").status, 2);
    EXPECT_EQ(cli("dance").status, 2);
    EXPECT_EQ(cli("sweep --trials 0").status, 2);
    EXPECT_EQ(cli("sweep --kinds sideways").status, 2);
    EXPECT_EQ(cli("insert --start 1,2").status, 2);
    EXPECT_EQ(cli("insert --loop square").status, 2);
    EXPECT_EQ(cli("knot 9_9").status, 2);
    EXPECT_EQ(cli("knot 3_1 --wave-ratio 0.2 --loop-speed 0.2").status, 2);
    EXPECT_EQ(cli("knot 3_1 --config /nonexistent.cfg").status, 2);
    // Insertion against the field never reaches the loop.
    EXPECT_EQ(cli("insert --start 0.5,0,2").status, 1);
    EXPECT_EQ(cli("insert").status, 0);
}

TEST(Cli, FailedKnotExitsOne) {
    const fs::path prog = temp_file("bad.prog", "step 1\nstep 4\n");
    const CliRun r = cli("knot " + prog.string());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find(",0,"), std::string::npos);
}

TEST(Cli, KnotSummaryRow) {
    const CliRun r = cli("knot unknot --seed 2");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(r.out, "program,seed,completed,insertion_count,twist_count,link_check,ticks,error\n"
                     "unknot,2,1,1,0,1,121,\"\"\n");
}

TEST(Cli, ConfigFileMatchesFlags) {
    const fs::path cfg = temp_file("sweep.cfg", "# small\ntrials = 3\nsigmas=0,0.2\nkinds=cylindrical\nseed=5\n");
    const CliRun from_file = cli("sweep --config " + cfg.string());
    const CliRun from_flags = cli("sweep --trials 3 --sigmas 0,0.2 --kinds cylindrical --seed 5");
    ASSERT_EQ(from_file.status, 0);
    EXPECT_EQ(from_file.out, from_flags.out);
    // Later flags win.
    EXPECT_EQ(cli("sweep --config " + cfg.string() + " --trials 2").out,
              cli("sweep --trials 2 --sigmas 0,0.2 --kinds cylindrical --seed 5").out);
    const fs::path bad = temp_file("bad.cfg", "trials 3\n");
    EXPECT_EQ(cli("sweep --config " + bad.string()).status, 2);
}

TEST(Cli, OutputIndependentOfWorkers) {
    for (const std::string cmd : {"sweep --trials 4 --sigmas 0,0.3 --seed 11", "probe-field --count 9,3,9",
                                  "knot 3_1 --runs 3 --loop-speed 0.5"}) {
        const CliRun one = cli(cmd + " --workers 1");
        ASSERT_EQ(one.status, 0) << cmd;
        EXPECT_EQ(cli(cmd + " --workers 2").out, one.out) << cmd;
        EXPECT_EQ(cli(cmd + " --workers 8").out, one.out) << cmd;
    }
}

TEST(Cli, ProbeAxisMatchesFormula) {
    const CliRun r = cli("probe-field --min 0,0,-2 --max 0,0,2 --count 1,1,9");
    ASSERT_EQ(r.status, 0);
    const auto rows = numeric_rows(r.out);
    ASSERT_EQ(rows.size(), 9u);
    for (const auto& row : rows) {
        const double z = row[2];
        const double expected = 2.0 * std::numbers::pi / std::pow(1.0 + z * z, 1.5);
        EXPECT_NEAR(row[6] / expected, 1.0, 0.005) << z;
    }
}

TEST(Cli, ProbeSymmetryAndReversal) {
    const CliRun plain = cli("probe-field --count 7,1,7");
    const CliRun rev = cli("probe-field --count 7,1,7 --reverse");
    const auto a = numeric_rows(plain.out);
    const auto b = numeric_rows(rev.out);
    ASSERT_EQ(a.size(), 49u);
    ASSERT_EQ(b.size(), a.size());
    int checked = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        // Mirror in x: row i <-> row with reversed x index.
        const std::size_t m = (i / 7) * 7 + (6 - i % 7);
        if (std::isnan(a[i][6]) || std::isnan(a[m][6])) continue; // on the wire
        for (int k = 3; k < 6; ++k) EXPECT_NEAR(a[i][k], -b[i][k], 1e-9 * (1.0 + std::abs(a[i][k])));
        // The polygon is not mirror symmetric, so only roughly.
        EXPECT_NEAR(a[i][6], a[m][6], 2e-2 * a[i][6]);
        ++checked;
    }
    EXPECT_GT(checked, 40);
}

TEST(Cli, ProbeFlagsSingularSamples) {
    // (1, 0, 0) is a vertex of the unit circle.
    const CliRun r = cli("probe-field --min 1,0,0 --max 1,0,0 --count 1,1,1");
    ASSERT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("nan"), std::string::npos);
}

TEST(Cli, InsertDumpAndLoops) {
    for (const char* shape : {"planar", "folded", "double"}) {
        const CliRun r = cli(std::string("insert --orient --start 0.3,-0.4,1.8 --dump - --loop ") + shape);
        // The folded loop stops in the fold without crossing a fitted plane.
        EXPECT_EQ(r.status, std::string(shape) == "folded" ? 1 : 0) << shape;
        EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "iter,x,y,z,flux") << shape;
    }
    const CliRun base = cli("insert --dump -");
    const CliRun alpha = cli("insert --alpha 2 --dump -");
    EXPECT_NE(base.out, alpha.out);
    const fs::path loop = temp_file("loop.txt", "# square\n-1 -1 0\n1 -1 0\n1 1 0\n-1 1 0\n");
    EXPECT_EQ(cli("insert --loop-file " + loop.string()).status, 0);
}
