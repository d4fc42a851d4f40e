#pragma once

#include "knotfield/insertion.hpp"
#include "knotfield/perturbation.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace knotfield {

struct SweepConfig {
    std::vector<double> sigmas{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    std::vector<NoiseKind> kinds{NoiseKind::Isotropic, NoiseKind::Cylindrical};
    std::vector<std::pair<double, double>> alpha_beta{{1.0, 1.0}, {2.0, 1.0}, {1.0, 2.0}};
    int trials = 1000;
    double gamma = 0.01;
    // The nominal loop is a circle of this radius in the XY plane, oriented so
    // that the field at `start` points towards it.
    double radius = 1.0;
    double angular_step = 0.1;
    // Off axis: on the axis the in-plane field is pure noise and alpha only
    // amplifies it.
    Vec3 start{0.5, 0.0, 2.0};
    int stop_persistence = 10;
    int max_iters = 0; // 0: default_max_iters(start, loop, gamma)
    std::uint64_t master_seed = 1;
    int workers = 1;

    void validate() const;
    std::size_t cell_count() const { return kinds.size() * sigmas.size() * alpha_beta.size(); }
};

// Parses key=value lines ('#' comments). Keys mirror the CLI flags:
// sigmas, kinds, alpha-beta, trials, gamma, radius, angular-step, start,
// stop-persistence, max-iters, seed, workers.
void apply_config_line(SweepConfig& config, const std::string& key, const std::string& value);
SweepConfig read_sweep_config(std::istream& in, SweepConfig base = {});

struct SweepRow {
    NoiseKind kind;
    double sigma;
    double alpha;
    double beta;
    int trial;
    std::uint64_t seed;
    bool success;
    std::optional<double> quality;
    std::optional<int> delay;
    Termination termination;
};

struct CellSummary {
    NoiseKind kind;
    double sigma;
    double alpha;
    double beta;
    int trials = 0;
    int failures = 0;
    int scored = 0; // trials that reached the loop plane
    double mean_quality = 0.0;
    double std_quality = 0.0;
    double mean_delay = 0.0;
    double std_delay = 0.0;
};

// Cell c covers rows [c * trials, (c + 1) * trials); cells are ordered by
// noise kind, then sigma, then alpha/beta combination. Trial i of cell c uses
// seed derive_seed(master_seed, c * trials + i).
std::vector<SweepRow> run_sweep(const SweepConfig& config);

SweepRow run_trial(const SweepConfig& config, NoiseKind kind, double sigma, double alpha, double beta, int trial,
                   std::uint64_t seed);

std::vector<CellSummary> summarize(const std::vector<SweepRow>& rows);

void write_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells);
std::vector<SweepRow> read_rows_csv(std::istream& in);

// Worker count from KNOTFIELD_WORKERS, else hardware concurrency.
int default_worker_count();

std::string format_double(double v);

} // namespace knotfield
