#include "knotfield/error.hpp"
#include "knotfield/sweep.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace knotfield;

namespace {

SweepConfig small() {
    SweepConfig c;
    c.sigmas = {0.0, 0.1, 0.3};
    c.trials = 6;
    c.master_seed = 3;
    return c;
}

std::string csv(const std::vector<SweepRow>& rows) {
    std::ostringstream s;
    write_rows_csv(s, rows);
    return s.str();
}

} // namespace

TEST(Sweep, RowCountAndOrder) {
    const SweepConfig c = small();
    const auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), c.cell_count() * 6u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].trial, static_cast<int>(i % 6));
        EXPECT_EQ(rows[i].seed, derive_seed(c.master_seed, i));
    }
    // noise kind, then sigma, then alpha/beta
    EXPECT_EQ(rows.front().kind, NoiseKind::Isotropic);
    EXPECT_EQ(rows.back().kind, NoiseKind::Cylindrical);
    EXPECT_EQ(rows[6].alpha, 2.0);
    EXPECT_EQ(rows[18].sigma, 0.1);
}

TEST(Sweep, WorkerCountDoesNotChangeBytes) {
    SweepConfig c = small();
    c.workers = 1;
    const std::string one = csv(run_sweep(c));
    for (int w : {2, 3, 8}) {
        c.workers = w;
        EXPECT_EQ(csv(run_sweep(c)), one) << w;
    }
}

TEST(Sweep, TrialRerunsFromItsRow) {
    const SweepConfig c = small();
    const auto rows = run_sweep(c);
    for (std::size_t i : {0u, 25u, 40u}) {
        const auto& r = rows[i];
        const SweepRow again = run_trial(c, r.kind, r.sigma, r.alpha, r.beta, r.trial, r.seed);
        EXPECT_EQ(again.quality, r.quality);
        EXPECT_EQ(again.delay, r.delay);
        EXPECT_EQ(again.success, r.success);
    }
}

TEST(Sweep, NoiselessCellsAgree) {
    const auto rows = run_sweep(small());
    std::map<std::pair<double, double>, std::optional<double>> q;
    for (const auto& r : rows) {
        if (r.sigma != 0.0) continue;
        EXPECT_TRUE(r.success);
        auto [it, fresh] = q.emplace(std::make_pair(r.alpha, r.beta), r.quality);
        if (!fresh) EXPECT_EQ(it->second, r.quality);
    }
}

TEST(Sweep, SummaryRecomputableFromRows) {
    const auto rows = run_sweep(small());
    std::ostringstream s;
    write_rows_csv(s, rows);
    std::istringstream in(s.str());
    const auto back = read_rows_csv(in);
    ASSERT_EQ(back.size(), rows.size());
    const auto cells = summarize(back);
    ASSERT_EQ(cells.size(), small().cell_count());
    for (const auto& cell : cells) {
        double sum = 0.0;
        double sq = 0.0;
        int n = 0;
        int failures = 0;
        for (const auto& r : rows) {
            if (r.kind != cell.kind || r.sigma != cell.sigma || r.alpha != cell.alpha || r.beta != cell.beta) continue;
            failures += r.success ? 0 : 1;
            if (!r.quality) continue;
            sum += *r.quality;
            sq += *r.quality * *r.quality;
            ++n;
        }
        EXPECT_EQ(cell.failures, failures);
        EXPECT_EQ(cell.scored, n);
        EXPECT_NEAR(cell.mean_quality, sum / n, 1e-9);
        const double var = n > 1 ? (sq - sum * sum / n) / (n - 1) : 0.0;
        // Either the sample or the population convention.
        const double pop = (sq - sum * sum / n) / n;
        EXPECT_TRUE(std::abs(cell.std_quality - std::sqrt(std::max(0.0, var))) < 1e-6 ||
                    std::abs(cell.std_quality - std::sqrt(std::max(0.0, pop))) < 1e-6);
    }
}

TEST(Sweep, ConfigLines) {
    std::istringstream in("# comment\ntrials = 12\nsigmas=0:0.2:0.1\nkinds=cylindrical\nalpha-beta=1:1,3:1\n"
                          "start=0,0.5,2\nseed=9\nworkers=2\n");
    const SweepConfig c = read_sweep_config(in);
    EXPECT_EQ(c.trials, 12);
    ASSERT_EQ(c.sigmas.size(), 3u);
    EXPECT_NEAR(c.sigmas[2], 0.2, 1e-12);
    EXPECT_EQ(c.kinds, std::vector<NoiseKind>{NoiseKind::Cylindrical});
    EXPECT_EQ(c.alpha_beta.size(), 2u);
    EXPECT_EQ(c.alpha_beta[1].first, 3.0);
    EXPECT_EQ(c.start, Vec3(0, 0.5, 2));
    EXPECT_EQ(c.master_seed, 9u);
    EXPECT_EQ(c.workers, 2);

    std::istringstream bad_key("nonsense=1\n");
    EXPECT_THROW(read_sweep_config(bad_key), Error);
    std::istringstream no_eq("trials 5\n");
    EXPECT_THROW(read_sweep_config(no_eq), Error);
}

TEST(Sweep, Validation) {
    SweepConfig c;
    c.trials = 0;
    EXPECT_THROW(c.validate(), Error);
    c = SweepConfig{};
    c.sigmas = {0.1, -0.1};
    EXPECT_THROW(c.validate(), Error);
    EXPECT_EQ(SweepConfig{}.cell_count(), 42u);
}

TEST(Sweep, DefaultWorkersFromEnvironment) {
    setenv("KNOTFIELD_WORKERS", "3", 1);
    EXPECT_EQ(default_worker_count(), 3);
    unsetenv("KNOTFIELD_WORKERS");
    EXPECT_GE(default_worker_count(), 1);
}
