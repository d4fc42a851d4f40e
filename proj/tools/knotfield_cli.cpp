// knotfield: sweep, insert, probe-field and knot subcommands.
// Exit status: 0 success, 1 run failure, 2 invalid arguments.

#include "knotfield/error.hpp"
#include "knotfield/field.hpp"
#include "knotfield/insertion.hpp"
#include "knotfield/knot.hpp"
#include "knotfield/loop.hpp"
#include "knotfield/parallel.hpp"
#include "knotfield/perturbation.hpp"
#include "knotfield/sweep.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace knotfield;

constexpr int kExitRunFailure = 1;
constexpr int kExitBadArguments = 2;

// Thrown for argument problems found after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Vec3 parse_vec3(const std::string& text, const std::string& what) {
    const auto parts = split(text, ',');
    if (parts.size() != 3) throw UsageError(what + " looks like x,y,z");
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
        try {
            std::size_t used = 0;
            v[k] = std::stod(parts[static_cast<std::size_t>(k)], &used);
            if (used != parts[static_cast<std::size_t>(k)].size()) throw std::invalid_argument("trailing");
        } catch (const std::logic_error&) {
            throw UsageError("bad number in " + what + ": '" + text + "'");
        }
    }
    return v;
}

// "--config FILE" is replaced in place by one "--key=value" per line of the
// file, so flags after it override the file.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> out;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        std::string path;
        if (arg == "--config") {
            if (i + 1 >= argc) throw UsageError("--config needs a file");
            path = argv[++i];
        } else if (arg.rfind("--config=", 0) == 0) {
            path = arg.substr(9);
        } else {
            out.push_back(std::move(arg));
            continue;
        }
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open config file '" + path + "'");
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "config") throw UsageError(path + ": config files do not nest");
            if (value == "true" || value == "false") {
                // flags
                if (value == "true") out.push_back("--" + key);
            } else {
                out.push_back("--" + key + "=" + value);
            }
        }
    }
    return out;
}

// Output target: "-" is stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw Error(ErrorKind::Parse, "cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close() {
        stream().flush();
        if (!stream()) throw Error(ErrorKind::Parse, "write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

int workers_or_default(int w) { return w > 0 ? w : default_worker_count(); }

// sweep

struct SweepArgs {
    std::optional<std::string> sigmas, kinds, alpha_beta, start;
    std::optional<int> trials, stop_persistence, max_iters;
    std::optional<double> gamma, radius, angular_step;
    std::uint64_t seed = 1;
    int workers = 0;
    std::string out = "-";
    std::string summary;
};

void add_sweep(CLI::App& app, SweepArgs& a) {
    auto* cmd = app.add_subcommand("sweep", "Noise sweep over sigma, noise kind and alpha/beta");
    cmd->add_option("--sigmas", a.sigmas, "list like 0,0.05,0.1 or range 0:0.3:0.05");
    cmd->add_option("--kinds", a.kinds, "isotropic,cylindrical");
    cmd->add_option("--alpha-beta", a.alpha_beta, "pairs like 1:1,2:1,1:2");
    cmd->add_option("--trials", a.trials, "trials per cell");
    cmd->add_option("--gamma", a.gamma, "offset length per iteration [m]");
    cmd->add_option("--radius", a.radius, "nominal circle radius [m]");
    cmd->add_option("--angular-step", a.angular_step, "circle discretization [rad]");
    cmd->add_option("--start", a.start, "start position x,y,z");
    cmd->add_option("--stop-persistence", a.stop_persistence, "flux decreases before stopping");
    cmd->add_option("--max-iters", a.max_iters, "0: derived from the start distance");
    cmd->add_option("--seed", a.seed, "master seed");
    cmd->add_option("--workers", a.workers, "0: KNOTFIELD_WORKERS or all cores");
    cmd->add_option("--out", a.out, "rows CSV, - for stdout");
    cmd->add_option("--summary", a.summary, "per-cell summary CSV");
}

int run_sweep_cmd(const SweepArgs& a) {
    SweepConfig c;
    auto apply = [&](const char* key, const auto& v) {
        if (!v) return;
        std::ostringstream s;
        s << *v;
        apply_config_line(c, key, s.str());
    };
    try {
        apply("sigmas", a.sigmas);
        apply("kinds", a.kinds);
        apply("alpha-beta", a.alpha_beta);
        apply("start", a.start);
        if (a.trials) c.trials = *a.trials;
        if (a.stop_persistence) c.stop_persistence = *a.stop_persistence;
        if (a.max_iters) c.max_iters = *a.max_iters;
        if (a.gamma) c.gamma = *a.gamma;
        if (a.radius) c.radius = *a.radius;
        if (a.angular_step) c.angular_step = *a.angular_step;
        c.master_seed = a.seed;
        c.workers = workers_or_default(a.workers);
        c.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    const auto rows = run_sweep(c);
    Output out(a.out);
    write_rows_csv(out.stream(), rows);
    out.close();

    const auto cells = summarize(rows);
    if (!a.summary.empty()) {
        Output s(a.summary);
        write_summary_csv(s.stream(), cells);
        s.close();
    }
    int failures = 0;
    for (const auto& cell : cells) failures += cell.failures;
    std::cerr << "trials " << rows.size() << ", failures " << failures << ", start " << format_double(c.start.x())
              << ',' << format_double(c.start.y()) << ',' << format_double(c.start.z()) << '\n';
    return 0;
}

// loop sources shared by insert and probe-field

struct LoopArgs {
    std::string shape = "planar";
    std::string file;
    double radius = 1.0;
    double angular_step = 0.1;
    double fold_angle = std::numbers::pi / 2.0;
    double pitch = 0.2;
    bool reverse = false;
};

void add_loop_options(CLI::App* cmd, LoopArgs& a) {
    cmd->add_option("--loop", a.shape, "planar, folded or double")
        ->check(CLI::IsMember({"planar", "folded", "double"}));
    cmd->add_option("--loop-file", a.file, "vertex list, one 'x y z' per line");
    cmd->add_option("--radius", a.radius, "generated loop radius [m]");
    cmd->add_option("--angular-step", a.angular_step, "generated loop discretization [rad]");
    cmd->add_option("--fold-angle", a.fold_angle, "folded loop angle [rad]");
    cmd->add_option("--pitch", a.pitch, "double loop rise per turn [m]");
    cmd->add_flag("--reverse", a.reverse, "reverse the current direction");
}

Loop make_loop(const LoopArgs& a) {
    Loop loop = [&] {
        try {
            if (!a.file.empty()) return read_loop_file(a.file);
            if (a.shape == "folded") return make_folded(a.radius, a.angular_step, a.fold_angle);
            if (a.shape == "double") return make_double(a.radius, a.angular_step, a.pitch);
            return make_circle(a.radius, a.angular_step);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }();
    return a.reverse ? loop.reversed() : loop;
}

// insert

struct InsertArgs {
    LoopArgs loop;
    std::string start = "0.5,0,-2";
    bool orient = false;
    double gamma = 0.01;
    double alpha = 1.0;
    double beta = 1.0;
    bool planar_mode = false;
    int stop_persistence = 1;
    int max_iters = 0;
    std::string noise_kind = "isotropic";
    double sigma = 0.0;
    std::uint64_t seed = 1;
    std::string dump;
};

void add_insert(CLI::App& app, InsertArgs& a) {
    auto* cmd = app.add_subcommand("insert", "Single field-guided insertion with trajectory dump");
    add_loop_options(cmd, a.loop);
    cmd->add_option("--start", a.start, "start position x,y,z");
    cmd->add_flag("--orient", a.orient, "reverse the loop if its field at the start points away");
    cmd->add_option("--gamma", a.gamma, "offset length per iteration [m]");
    cmd->add_option("--alpha", a.alpha, "in-plane weight");
    cmd->add_option("--beta", a.beta, "normal weight");
    cmd->add_flag("--planar-mode", a.planar_mode, "alpha/beta weighted offset (implied by alpha != beta)");
    cmd->add_option("--stop-persistence", a.stop_persistence, "flux decreases before stopping");
    cmd->add_option("--max-iters", a.max_iters, "0: derived from the start distance");
    cmd->add_option("--noise-kind", a.noise_kind, "isotropic or cylindrical")
        ->check(CLI::IsMember({"isotropic", "cylindrical"}));
    cmd->add_option("--sigma", a.sigma, "vertex noise, re-sampled every iteration [m]");
    cmd->add_option("--seed", a.seed, "noise seed");
    cmd->add_option("--dump", a.dump, "trajectory CSV iter,x,y,z,flux; - for stdout");
}

int run_insert_cmd(const InsertArgs& a) {
    const Vec3 start = parse_vec3(a.start, "--start");
    Loop nominal = make_loop(a.loop);
    if (a.orient) nominal = orient_toward(nominal, start);

    InsertionParams params;
    params.field = FieldParams{1.0, a.gamma, a.alpha, a.beta};
    params.planar_mode = a.planar_mode || a.alpha != a.beta;
    params.stop_persistence = a.stop_persistence;
    std::optional<LoopPerturber> perturber;
    try {
        params.max_iters = a.max_iters > 0 ? a.max_iters : default_max_iters(start, nominal, a.gamma);
        params.validate();
        if (!(a.sigma >= 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma must be non-negative");
        perturber.emplace(nominal, NoiseSpec{parse_noise_kind(a.noise_kind), a.sigma});
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    Rng rng(a.seed);
    const LoopProvider loop_at = [&](int) { return a.sigma > 0.0 ? (*perturber)(rng) : nominal; };
    const InsertionOutcome o = run_insertion(start, loop_at, params, nominal);

    if (!a.dump.empty()) {
        Output out(a.dump);
        out.stream() << "iter,x,y,z,flux\n";
        const auto& t = o.trajectory;
        for (std::size_t i = 0; i < t.positions.size(); ++i) {
            const Vec3& p = t.positions[i];
            out.stream() << i << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
                         << format_double(p.z()) << ',' << (i < t.flux.size() ? format_double(t.flux[i]) : "")
                         << '\n';
        }
        out.close();
    }
    std::ostream& info = a.dump == "-" ? std::cerr : std::cout;
    info << "success=" << (o.success ? 1 : 0) << " termination=" << to_string(o.termination)
         << " quality=" << (o.quality ? format_double(*o.quality) : "none")
         << " delay=" << (o.delay ? std::to_string(*o.delay) : "none") << " stop=" << format_double(o.stop_point.x())
         << ',' << format_double(o.stop_point.y()) << ',' << format_double(o.stop_point.z())
         << " iterations=" << (o.trajectory.positions.empty() ? 0 : o.trajectory.positions.size() - 1) << '\n';
    if (!o.error.empty()) std::cerr << "error: " << o.error << '\n';
    return o.success ? 0 : kExitRunFailure;
}

// probe-field

struct ProbeArgs {
    LoopArgs loop;
    std::string min = "-1.5,0,-1.5";
    std::string max = "1.5,0,1.5";
    std::string count = "31,1,31";
    double scale_c = 1.0;
    int workers = 0;
    std::string out = "-";
};

void add_probe(CLI::App& app, ProbeArgs& a) {
    auto* cmd = app.add_subcommand("probe-field", "Field on a regular grid as CSV x,y,z,Bx,By,Bz,Bnorm");
    add_loop_options(cmd, a.loop);
    cmd->add_option("--min", a.min, "grid corner x,y,z");
    cmd->add_option("--max", a.max, "opposite grid corner x,y,z");
    cmd->add_option("--count", a.count, "samples per axis nx,ny,nz; 1 samples the min");
    cmd->add_option("--scale-c", a.scale_c, "lumped mu0 I / 4 pi");
    cmd->add_option("--workers", a.workers, "0: KNOTFIELD_WORKERS or all cores");
    cmd->add_option("--out", a.out, "CSV, - for stdout");
}

int run_probe_cmd(const ProbeArgs& a) {
    const Loop loop = make_loop(a.loop);
    const Vec3 lo = parse_vec3(a.min, "--min");
    const Vec3 hi = parse_vec3(a.max, "--max");
    const Vec3 nc = parse_vec3(a.count, "--count");
    std::array<std::size_t, 3> n{};
    for (int k = 0; k < 3; ++k) {
        if (!(nc[k] >= 1.0) || nc[k] != std::floor(nc[k]) || nc[k] > 1e6) {
            throw UsageError("--count entries must be positive integers");
        }
        n[static_cast<std::size_t>(k)] = static_cast<std::size_t>(nc[k]);
    }
    FieldParams params;
    params.scale_c = a.scale_c;
    try {
        params.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    auto coord = [&](int k, std::size_t i) {
        const std::size_t m = n[static_cast<std::size_t>(k)];
        return m == 1 ? lo[k] : lo[k] + (hi[k] - lo[k]) * static_cast<double>(i) / static_cast<double>(m - 1);
    };
    const std::size_t total = n[0] * n[1] * n[2];
    std::vector<std::string> lines(total);
    // x fastest, then y, then z.
    parallel_for(total, workers_or_default(a.workers), [&](std::size_t idx) {
        const std::size_t i = idx % n[0];
        const std::size_t j = (idx / n[0]) % n[1];
        const std::size_t k = idx / (n[0] * n[1]);
        const Vec3 p(coord(0, i), coord(1, j), coord(2, k));
        std::string line = format_double(p.x()) + ',' + format_double(p.y()) + ',' + format_double(p.z());
        try {
            const Vec3 b = field(loop, p, params);
            line += ',' + format_double(b.x()) + ',' + format_double(b.y()) + ',' + format_double(b.z()) + ',' +
                    format_double(b.norm());
        } catch (const Error&) {
            // on the conductor
            line += ",nan,nan,nan,nan";
        }
        lines[idx] = std::move(line);
    });

    Output out(a.out);
    out.stream() << "x,y,z,Bx,By,Bz,Bnorm\n";
    for (const auto& l : lines) out.stream() << l << '\n';
    out.close();
    return 0;
}

// knot

struct KnotArgs {
    std::string program = "3_1";
    std::uint64_t seed = 1;
    int runs = 1;
    int workers = 0;
    double wave_ratio = 0.0;
    std::string wave_direction = "perpendicular";
    int spatial_frequency = 2;
    std::string loop_segments = "1x";
    double loop_speed = 0.0;
    double loop_travel = 0.1;
    double anchor_radius = 0.1;
    int max_ticks = 20000;
    std::string out = "-";
    std::string log;
    std::string steps;
};

void add_knot(CLI::App& app, KnotArgs& a) {
    auto* cmd = app.add_subcommand("knot", "Run a knot program on the simulated robot");
    cmd->add_option("program", a.program, "unknot, 3_1, 4_1, 5_2, 7_3 or a program file");
    cmd->add_option("--seed", a.seed, "first seed");
    cmd->add_option("--runs", a.runs, "seeds seed .. seed+runs-1");
    cmd->add_option("--workers", a.workers, "0: KNOTFIELD_WORKERS or all cores");
    cmd->add_option("--wave-ratio", a.wave_ratio, "anchor wave amplitude / radius; 0 for none");
    cmd->add_option("--wave-direction", a.wave_direction, "parallel or perpendicular")
        ->check(CLI::IsMember({"parallel", "perpendicular"}));
    cmd->add_option("--spatial-frequency", a.spatial_frequency, "wave periods around the loop");
    cmd->add_option("--loop-segments", a.loop_segments, "anchor refinement, e.g. 4x (48 vertices per x)");
    cmd->add_option("--loop-speed", a.loop_speed, "anchor peak speed / base speed; 0 for a still anchor");
    cmd->add_option("--loop-travel", a.loop_travel, "anchor swing half-length [m]");
    cmd->add_option("--anchor-radius", a.anchor_radius, "anchor radius [m]");
    cmd->add_option("--max-ticks", a.max_ticks, "tick budget per run");
    cmd->add_option("--out", a.out, "one summary row per run, - for stdout");
    cmd->add_option("--log", a.log, "per-tick log CSV (single run only)");
    cmd->add_option("--steps", a.steps, "step log CSV seed,step,status,tick");
}

int run_knot_cmd(const KnotArgs& a) {
    KnotProgram program;
    KnotConfig config;
    AnchorParams anchor;
    try {
        const bool builtin = std::find(builtin_program_names().begin(), builtin_program_names().end(), a.program) !=
                             builtin_program_names().end();
        program = builtin ? builtin_program(a.program) : read_program_file(a.program);

        std::string seg = a.loop_segments;
        if (!seg.empty() && (seg.back() == 'x' || seg.back() == 'X')) seg.pop_back();
        std::size_t used = 0;
        anchor.refine = std::stoi(seg, &used);
        if (used != seg.size()) throw Error(ErrorKind::Parse, "bad --loop-segments '" + a.loop_segments + "'");

        if (a.wave_ratio > 0.0 && a.loop_speed > 0.0) {
            throw Error(ErrorKind::InvalidParameter, "--wave-ratio and --loop-speed are exclusive");
        }
        if (a.wave_ratio > 0.0) {
            anchor.motion = AnchorMotion::Wave;
            anchor.wave_ratio = a.wave_ratio;
        } else if (a.loop_speed > 0.0) {
            anchor.motion = AnchorMotion::Moving;
            anchor.speed_fraction = a.loop_speed;
        } else if (a.wave_ratio < 0.0 || a.loop_speed < 0.0) {
            throw Error(ErrorKind::InvalidParameter, "--wave-ratio and --loop-speed must be non-negative");
        }
        anchor.wave_direction =
            a.wave_direction == "parallel" ? WaveDirection::Parallel : WaveDirection::Perpendicular;
        anchor.spatial_frequency = a.spatial_frequency;
        anchor.travel = a.loop_travel;
        anchor.radius = a.anchor_radius;
        anchor.validate();
        config.max_ticks = a.max_ticks;
        config.validate();
        if (a.runs < 1) throw Error(ErrorKind::InvalidParameter, "--runs must be >= 1");
        if (!a.log.empty() && a.runs != 1) throw Error(ErrorKind::InvalidParameter, "--log needs --runs 1");
    } catch (const Error& e) {
        throw UsageError(e.what());
    } catch (const std::logic_error&) {
        throw UsageError("bad --loop-segments '" + a.loop_segments + "'");
    }

    const std::size_t runs = static_cast<std::size_t>(a.runs);
    std::vector<KnotResult> results(runs);
    parallel_for(runs, workers_or_default(a.workers), [&](std::size_t r) {
        const std::uint64_t seed = a.seed + r;
        results[r] = run_program(program, config, make_anchor(anchor, config, seed), seed);
    });

    Output out(a.out);
    out.stream() << "program,seed,completed,insertion_count,twist_count,link_check,ticks,error\n";
    int failed = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        const auto& k = results[r];
        if (!k.completed) ++failed;
        out.stream() << program.name << ',' << a.seed + r << ',' << (k.completed ? 1 : 0) << ','
                     << k.insertion_count << ',' << k.twist_count << ','
                     << (k.link_check ? std::to_string(*k.link_check) : "") << ',' << k.ticks << ",\"" << k.error
                     << "\"\n";
    }
    out.close();

    if (!a.steps.empty()) {
        Output s(a.steps);
        s.stream() << "seed,step,status,tick\n";
        for (std::size_t r = 0; r < runs; ++r) {
            for (const auto& st : results[r].steps) {
                s.stream() << a.seed + r << ',' << st.step << ',' << to_string(st.status) << ',' << st.tick << '\n';
            }
        }
        s.close();
    }
    if (!a.log.empty()) {
        Output l(a.log);
        write_tick_log_csv(l.stream(), results.front().log);
        l.close();
    }
    for (std::size_t r = 0; r < runs; ++r) {
        const auto& k = results[r];
        if (k.completed) continue;
        std::cerr << "seed " << a.seed + r << ": " << k.error << '\n';
        for (const auto& st : k.steps) {
            std::cerr << "  tick " << st.tick << " step " << st.step << ' ' << to_string(st.status) << '\n';
        }
    }
    return failed == 0 ? 0 : kExitRunFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual magnetic field rope insertion and knot tying simulator"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.footer("Any subcommand accepts --config FILE with key=value lines named like its flags.\n"
               "KNOTFIELD_WORKERS sets the default worker count.");

    SweepArgs sweep;
    InsertArgs insert;
    ProbeArgs probe;
    KnotArgs knot;
    add_sweep(app, sweep);
    add_insert(app, insert);
    add_probe(app, probe);
    add_knot(app, knot);

    try {
        auto args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadArguments;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadArguments;
    }

    try {
        if (app.got_subcommand("sweep")) return run_sweep_cmd(sweep);
        if (app.got_subcommand("insert")) return run_insert_cmd(insert);
        if (app.got_subcommand("probe-field")) return run_probe_cmd(probe);
        return run_knot_cmd(knot);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadArguments;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRunFailure;
    }
}
