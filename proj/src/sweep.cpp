#include "knotfield/sweep.hpp"

#include "knotfield/error.hpp"
#include "knotfield/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace knotfield {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
    }
    return out;
}

std::string trim(const std::string& text) {
    const auto b = text.find_first_not_of(" \t\r");
    const auto e = text.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : text.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "not a number: '" + text + "'");
    }
    if (used != text.size()) throw Error(ErrorKind::Parse, "not a number: '" + text + "'");
    return v;
}

long long parse_int(const std::string& text) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "not an integer: '" + text + "'");
    }
    if (used != text.size()) throw Error(ErrorKind::Parse, "not an integer: '" + text + "'");
    return v;
}

std::vector<double> parse_sigmas(const std::string& text) {
    // Either a list "0,0.1,0.2" or a range "start:stop:step".
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw Error(ErrorKind::Parse, "sigma range must be start:stop:step");
        const double lo = parse_double(parts[0]);
        const double hi = parse_double(parts[1]);
        const double step = parse_double(parts[2]);
        if (!(step > 0.0)) throw Error(ErrorKind::Parse, "sigma step must be positive");
        std::vector<double> out;
        const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
        for (int i = 0; i <= n; ++i) out.push_back(std::round((lo + i * step) * 1e12) / 1e12);
        return out;
    }
    std::vector<double> out;
    for (const auto& s : split(text, ',')) out.push_back(parse_double(s));
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void SweepConfig::validate() const {
    if (trials < 1) throw Error(ErrorKind::InvalidParameter, "trials must be >= 1");
    if (sigmas.empty() || kinds.empty() || alpha_beta.empty()) {
        throw Error(ErrorKind::InvalidParameter, "sweep needs at least one sigma, kind and alpha/beta pair");
    }
    for (double s : sigmas) {
        if (!(s >= 0.0)) throw Error(ErrorKind::InvalidParameter, "sigmas must be non-negative");
    }
    for (const auto& [a, b] : alpha_beta) FieldParams{1.0, gamma, a, b}.validate();
    if (!(radius > 0.0)) throw Error(ErrorKind::InvalidParameter, "radius must be positive");
    if (stop_persistence < 1) throw Error(ErrorKind::InvalidParameter, "stop persistence must be >= 1");
    if (max_iters < 0) throw Error(ErrorKind::InvalidParameter, "max_iters must be >= 0");
    if (workers < 1) throw Error(ErrorKind::InvalidParameter, "workers must be >= 1");
}

void apply_config_line(SweepConfig& c, const std::string& key, const std::string& value) {
    if (key == "sigmas") {
        c.sigmas = parse_sigmas(value);
    } else if (key == "kinds") {
        c.kinds.clear();
        for (const auto& k : split(value, ',')) c.kinds.push_back(parse_noise_kind(k));
    } else if (key == "alpha-beta") {
        // "1:1,2:1,1:2"
        c.alpha_beta.clear();
        for (const auto& pair : split(value, ',')) {
            const auto ab = split(pair, ':');
            if (ab.size() != 2) throw Error(ErrorKind::Parse, "alpha-beta entries look like 2:1");
            c.alpha_beta.emplace_back(parse_double(ab[0]), parse_double(ab[1]));
        }
    } else if (key == "trials") {
        c.trials = static_cast<int>(parse_int(value));
    } else if (key == "gamma") {
        c.gamma = parse_double(value);
    } else if (key == "radius") {
        c.radius = parse_double(value);
    } else if (key == "angular-step") {
        c.angular_step = parse_double(value);
    } else if (key == "start") {
        const auto xyz = split(value, ',');
        if (xyz.size() != 3) throw Error(ErrorKind::Parse, "start looks like x,y,z");
        c.start = Vec3(parse_double(xyz[0]), parse_double(xyz[1]), parse_double(xyz[2]));
    } else if (key == "stop-persistence") {
        c.stop_persistence = static_cast<int>(parse_int(value));
    } else if (key == "max-iters") {
        c.max_iters = static_cast<int>(parse_int(value));
    } else if (key == "seed") {
        c.master_seed = static_cast<std::uint64_t>(parse_int(value));
    } else if (key == "workers") {
        c.workers = static_cast<int>(parse_int(value));
    } else {
        throw Error(ErrorKind::Parse, "unknown sweep key '" + key + "'");
    }
}

SweepConfig read_sweep_config(std::istream& in, SweepConfig base) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected key=value");
        }
        apply_config_line(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

int default_worker_count() {
    if (const char* env = std::getenv("KNOTFIELD_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SweepRow run_trial(const SweepConfig& config, NoiseKind kind, double sigma, double alpha, double beta, int trial,
                   std::uint64_t seed) {
    const Loop nominal = orient_toward(make_circle(config.radius, config.angular_step), config.start);
    const LoopPerturber perturber(nominal, NoiseSpec{kind, sigma});

    InsertionParams params;
    params.field = FieldParams{1.0, config.gamma, alpha, beta};
    params.planar_mode = true;
    params.stop_persistence = config.stop_persistence;
    params.halt_plane = perturber.frame();
    params.max_iters =
        config.max_iters > 0 ? config.max_iters : default_max_iters(config.start, nominal, config.gamma);

    Rng rng(seed);
    const auto outcome = run_insertion(
        config.start, [&](int) { return perturber(rng); }, params, nominal);
    return SweepRow{kind, sigma, alpha, beta, trial, seed, outcome.success, outcome.quality, outcome.delay,
                    outcome.termination};
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
    config.validate();
    struct Cell {
        NoiseKind kind;
        double sigma;
        double alpha;
        double beta;
    };
    std::vector<Cell> cells;
    for (auto kind : config.kinds) {
        for (double sigma : config.sigmas) {
            for (const auto& [a, b] : config.alpha_beta) cells.push_back({kind, sigma, a, b});
        }
    }
    const std::size_t trials = static_cast<std::size_t>(config.trials);
    const std::size_t total = cells.size() * trials;
    std::vector<std::optional<SweepRow>> slots(total);
    parallel_for(total, config.workers, [&](std::size_t i) {
        const Cell& cell = cells[i / trials];
        const int trial = static_cast<int>(i % trials);
        slots[i] = run_trial(config, cell.kind, cell.sigma, cell.alpha, cell.beta, trial,
                             derive_seed(config.master_seed, i));
    });

    std::vector<SweepRow> rows;
    rows.reserve(total);
    for (auto& s : slots) rows.push_back(*s);
    return rows;
}

std::vector<CellSummary> summarize(const std::vector<SweepRow>& rows) {
    struct Acc {
        CellSummary cell;
        double sq = 0.0, sq2 = 0.0, sd = 0.0, sd2 = 0.0;
    };
    std::vector<Acc> accs;
    std::map<std::tuple<int, double, double, double>, std::size_t> index;
    for (const auto& r : rows) {
        const auto key = std::make_tuple(static_cast<int>(r.kind), r.sigma, r.alpha, r.beta);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, accs.size()).first;
            Acc a;
            a.cell.kind = r.kind;
            a.cell.sigma = r.sigma;
            a.cell.alpha = r.alpha;
            a.cell.beta = r.beta;
            accs.push_back(a);
        }
        Acc& a = accs[it->second];
        ++a.cell.trials;
        if (!r.success) ++a.cell.failures;
        if (r.quality && r.delay) {
            ++a.cell.scored;
            a.sq += *r.quality;
            a.sq2 += *r.quality * *r.quality;
            a.sd += *r.delay;
            a.sd2 += static_cast<double>(*r.delay) * *r.delay;
        }
    }
    std::vector<CellSummary> out;
    out.reserve(accs.size());
    for (auto& a : accs) {
        const double n = a.cell.scored;
        if (n > 0) {
            a.cell.mean_quality = a.sq / n;
            a.cell.mean_delay = a.sd / n;
            a.cell.std_quality = std::sqrt(std::max(0.0, a.sq2 / n - a.cell.mean_quality * a.cell.mean_quality));
            a.cell.std_delay = std::sqrt(std::max(0.0, a.sd2 / n - a.cell.mean_delay * a.cell.mean_delay));
        }
        out.push_back(a.cell);
    }
    return out;
}

void write_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "noise_kind,sigma,alpha,beta,trial,seed,success,quality,delay,termination\n";
    for (const auto& r : rows) {
        out << to_string(r.kind) << ',' << format_double(r.sigma) << ',' << format_double(r.alpha) << ','
            << format_double(r.beta) << ',' << r.trial << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
            << (r.quality ? format_double(*r.quality) : std::string()) << ','
            << (r.delay ? std::to_string(*r.delay) : std::string()) << ',' << to_string(r.termination) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
    out << "noise_kind,sigma,alpha,beta,trials,failures,scored,mean_quality,std_quality,mean_delay,std_delay\n";
    for (const auto& c : cells) {
        out << to_string(c.kind) << ',' << format_double(c.sigma) << ',' << format_double(c.alpha) << ','
            << format_double(c.beta) << ',' << c.trials << ',' << c.failures << ',' << c.scored << ','
            << format_double(c.mean_quality) << ',' << format_double(c.std_quality) << ','
            << format_double(c.mean_delay) << ',' << format_double(c.std_delay) << '\n';
    }
}

std::vector<SweepRow> read_rows_csv(std::istream& in) {
    std::vector<SweepRow> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 10) throw Error(ErrorKind::Parse, "sweep row needs 10 fields: " + line);
        SweepRow r{};
        r.kind = parse_noise_kind(f[0]);
        r.sigma = parse_double(f[1]);
        r.alpha = parse_double(f[2]);
        r.beta = parse_double(f[3]);
        r.trial = static_cast<int>(parse_int(f[4]));
        r.seed = std::stoull(f[5]);
        r.success = f[6] == "1";
        if (!f[7].empty()) r.quality = parse_double(f[7]);
        if (!f[8].empty()) r.delay = static_cast<int>(parse_int(f[8]));
        r.termination = f[9] == "stopped"         ? Termination::StoppedByFieldDrop
                        : f[9] == "reached-plane" ? Termination::ReachedPlane
                        : f[9] == "max-iters"     ? Termination::MaxIters
                                                  : Termination::Error;
        rows.push_back(r);
    }
    return rows;
}

} // namespace knotfield
