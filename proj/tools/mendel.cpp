// mendel — config-driven simulation, equilibrium and verification CLI.
//
// Subcommands: simulate, equilibria, verify, sweep.
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 verification failure.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mendel/analysis.hpp"
#include "mendel/config.hpp"
#include "mendel/equilibria.hpp"
#include "mendel/integrate.hpp"

namespace fs = std::filesystem;
using namespace mendel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed_override = -1;
    bool quiet = false;
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("parse error: ") + e.what());
    }
}

RunConfig load_config(const CommonOpts& opts) {
    RunConfig cfg = parse_config(load_json(opts.config_path));
    if (opts.seed_override >= 0)
        cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
    return cfg;
}

void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

double tol_or(const RunConfig& cfg, const std::string& key, double fallback) {
    const auto it = cfg.tolerances.find(key);
    return it == cfg.tolerances.end() ? fallback : it->second;
}

// Reduction kind used when a full model feeds reduced-model machinery.
ReductionKind full_kind(const TwoPhaseParams& p) {
    return p.scaling == PhaseScaling::LarvaFast ? ReductionKind::Slow
                                                : ReductionKind::Fast;
}

// Runs the selected checks.  With strict=false, precondition violations
// (neutrality/assumption) become failed entries instead of errors so a
// simulate run can still report them.
VerificationReport run_checks(const RunConfig& cfg, const Trajectory* traj,
                              bool strict) {
    VerificationReport all;
    for (const std::string& name : cfg.checks) {
        try {
            VerificationReport rep;
            if (name == "slow_manifold") {
                if (!cfg.full)
                    throw ConfigError("config.verify.checks",
                                      "slow_manifold needs a full model");
                std::vector<double> eps =
                    cfg.eps.empty() ? std::vector<double>{cfg.full->epsilon}
                                    : cfg.eps;
                GenotypeVector x0{1.0, 1.0, 1.0};
                if (cfg.state0)
                    x0 = full_kind(*cfg.full) == ReductionKind::Fast
                             ? GenotypeVector{cfg.state0->L.AA / cfg.full->omega[0],
                                              cfg.state0->L.Aa / cfg.full->omega[1],
                                              cfg.state0->L.aa / cfg.full->omega[2]}
                             : cfg.state0->A;
                rep = slow_manifold_consistency(*cfg.full, full_kind(*cfg.full), eps,
                                                cfg.manifold_horizon, x0);
            } else if (name == "rate_ordering") {
                if (!cfg.reduced)
                    throw ConfigError("config.verify.checks",
                                      "rate_ordering needs a reduced model");
                rep = verify_rate_ordering(*cfg.reduced, cfg.samples, cfg.seed,
                                           tol_or(cfg, "ordering_slack", 1e-12));
            } else {
                if (!cfg.reduced)
                    throw ConfigError("config.verify.checks",
                                      name + " needs a reduced model");
                if (!traj)
                    throw ConfigError("config.initial",
                                      name + " needs a trajectory (set x0)");
                if (name == "hardy_weinberg")
                    rep = verify_hardy_weinberg(*traj, *cfg.reduced,
                                                tol_or(cfg, "tol_freq", 1e-7),
                                                tol_or(cfg, "tol_state", 1e-5));
                else if (name == "selection_convergence")
                    rep = verify_selection_convergence(
                        *traj, *cfg.reduced, tol_or(cfg, "tol_state", 1e-4),
                        tol_or(cfg, "min_reduction", 1e-6),
                        tol_or(cfg, "freq_tol", 1e-4));
                else  // boundedness
                    rep = verify_boundedness(*traj, *cfg.reduced,
                                             tol_or(cfg, "bound_slack", 1e-6));
            }
            for (auto& c : rep.checks) {
                c.name = name + "." + c.name;
                all.checks.push_back(std::move(c));
            }
        } catch (const NeutralityError& e) {
            if (strict) throw;
            all.add(name + ".precondition", false, 0.0, 0.0, e.what());
        } catch (const AssumptionError& e) {
            if (strict) throw;
            all.add(name + ".precondition", false, 0.0, 0.0, e.what());
        }
    }
    return all;
}

bool needs_trajectory(const RunConfig& cfg) {
    for (const std::string& c : cfg.checks)
        if (c == "hardy_weinberg" || c == "selection_convergence" ||
            c == "boundedness")
            return true;
    return false;
}

std::string trajectory_csv(const RunConfig& cfg, Trajectory* out_traj) {
    if (!cfg.reduced || !cfg.x0)
        throw ConfigError("config.initial", "reduced simulation needs model and x0");
    Trajectory traj = integrate(*cfg.reduced, *cfg.x0, cfg.sim);
    std::ostringstream os;
    write_csv(os, traj);
    if (out_traj) *out_traj = std::move(traj);
    return os.str();
}

int cmd_simulate(const CommonOpts& opts) {
    const RunConfig cfg = load_config(opts);
    const fs::path out_dir = opts.out_dir;
    const fs::path csv_path =
        out_dir / (cfg.csv_path.empty() ? "trajectory.csv" : cfg.csv_path);

    std::string csv;
    Trajectory traj;
    if (cfg.kind == "full") {
        if (!cfg.state0)
            throw ConfigError("config.initial", "full simulation needs (L0, A0)");
        const TwoPhaseTrajectory t = integrate(*cfg.full, *cfg.state0, cfg.sim);
        std::ostringstream os;
        write_csv(os, t);
        csv = os.str();
    } else {
        csv = trajectory_csv(cfg, &traj);
    }
    atomic_write(csv_path, csv);
    if (!opts.quiet) std::cout << "wrote " << csv_path.string() << "\n";

    if (!cfg.checks.empty()) {
        const VerificationReport rep =
            run_checks(cfg, cfg.kind == "full" ? nullptr : &traj, false);
        const fs::path report_path =
            out_dir / (cfg.report_path.empty() ? "report.txt" : cfg.report_path);
        atomic_write(report_path, rep.to_text());
        if (!opts.quiet) std::cout << rep.to_text();
    }
    return kExitOk;
}

int cmd_equilibria(const CommonOpts& opts) {
    const RunConfig cfg = load_config(opts);
    ReducedModel model = cfg.reduced
                             ? *cfg.reduced
                             : (full_kind(*cfg.full) == ReductionKind::Fast
                                    ? reduce_fast(*cfg.full)
                                    : reduce_slow(*cfg.full));

    std::ostringstream os;
    const CapacityResult c1 = monomorphic_capacity(model, 1);
    const CapacityResult c3 = monomorphic_capacity(model, 3);
    os << "c1_star value=" << detail::format_double(c1.value)
       << " residual=" << detail::format_double(c1.residual) << '\n';
    os << "c3_star value=" << detail::format_double(c3.value)
       << " residual=" << detail::format_double(c3.residual) << '\n';
    if (model.selectively_neutral()) {
        GenotypeVector dir{0.25, 0.5, 0.25};
        if (cfg.x0 && cfg.x0->total() >= kZeroTotal) {
            const double p = allele_frequency(*cfg.x0, Allele::A);
            dir = {p * p, 2.0 * p * (1.0 - p), (1.0 - p) * (1.0 - p)};
        }
        const CapacityResult sn = neutral_capacity(model, dir, 1e-10, false);
        os << "c_sn_star value=" << detail::format_double(sn.value)
           << " residual=" << detail::format_double(sn.residual)
           << " direction=" << detail::format_double(dir.AA) << ','
           << detail::format_double(dir.Aa) << ','
           << detail::format_double(dir.aa) << '\n';
    }
    const PopulationBoundResult bound = population_bound(model);
    os << "c_star value=" << detail::format_double(bound.value)
       << " grid_size=" << bound.grid_size
       << " grid_max_ratio=" << detail::format_double(bound.grid_max_ratio) << '\n';

    const fs::path report_path =
        fs::path(opts.out_dir) /
        (cfg.report_path.empty() ? "equilibria.txt" : cfg.report_path);
    atomic_write(report_path, os.str());
    if (!opts.quiet) std::cout << os.str();
    return kExitOk;
}

int cmd_verify(const CommonOpts& opts) {
    const RunConfig cfg = load_config(opts);
    if (cfg.checks.empty())
        throw ConfigError("config.verify.checks", "no checks selected");

    Trajectory traj;
    Trajectory* traj_ptr = nullptr;
    if (needs_trajectory(cfg)) {
        trajectory_csv(cfg, &traj);
        traj_ptr = &traj;
    }
    const VerificationReport rep = run_checks(cfg, traj_ptr, true);
    const fs::path report_path =
        fs::path(opts.out_dir) /
        (cfg.report_path.empty() ? "report.txt" : cfg.report_path);
    atomic_write(report_path, rep.to_text());
    if (!opts.quiet) std::cout << rep.to_text();
    return rep.passed() ? kExitOk : kExitVerification;
}

struct SweepPoint {
    double value = 0.0;
    std::string csv_file;
    bool ok = false;
    std::string error;
    GenotypeVector terminal;
    double total = 0.0;
    bool verify_pass = true;
};

int cmd_sweep(const CommonOpts& opts) {
    const json base = load_json(opts.config_path);
    RunConfig probe = parse_config(base);  // validates the base config
    if (!probe.sweep_path)
        throw ConfigError("config.sweep", "missing sweep section");
    if (probe.sweep_values.empty())
        throw ConfigError("config.sweep.values", "empty value list");

    json::json_pointer ptr;
    try {
        ptr = json::json_pointer(*probe.sweep_path);
    } catch (const json::exception& e) {
        throw ConfigError("config.sweep.path", e.what());
    }
    {
        json test = base;
        if (!test.contains(ptr) || !test.at(ptr).is_number())
            throw ConfigError("config.sweep.path",
                              "does not address a numeric leaf");
    }

    const fs::path out_dir = opts.out_dir;
    fs::create_directories(out_dir);
    std::vector<SweepPoint> points(probe.sweep_values.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= points.size()) return;
            SweepPoint& pt = points[k];
            pt.value = probe.sweep_values[k];
            pt.csv_file = "point_" + std::to_string(k) + ".csv";
            try {
                json j = base;
                j.at(ptr) = pt.value;
                j.erase("sweep");
                RunConfig cfg = parse_config(j);
                if (opts.seed_override >= 0)
                    cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
                Trajectory traj;
                const std::string csv = trajectory_csv(cfg, &traj);
                atomic_write(out_dir / pt.csv_file, csv);
                pt.terminal = traj.back();
                pt.total = pt.terminal.total();
                if (!cfg.checks.empty())
                    pt.verify_pass = run_checks(cfg, &traj, false).passed();
                pt.ok = true;
            } catch (const std::exception& e) {
                pt.error = e.what();
            }
        }
    };
    const unsigned n_workers = std::min<unsigned>(
        std::max(1u, std::thread::hardware_concurrency()),
        static_cast<unsigned>(points.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ostringstream idx;
    idx << "value,csv,status,x1,x2,x3,total,verify_pass\n";
    bool any_ok = false;
    for (const SweepPoint& pt : points) {
        any_ok = any_ok || pt.ok;
        idx << detail::format_double(pt.value) << ',' << pt.csv_file << ','
            << (pt.ok ? "ok" : "error: " + pt.error) << ','
            << detail::format_double(pt.terminal.AA) << ','
            << detail::format_double(pt.terminal.Aa) << ','
            << detail::format_double(pt.terminal.aa) << ','
            << detail::format_double(pt.total) << ','
            << (pt.verify_pass ? "true" : "false") << '\n';
    }
    atomic_write(out_dir / "index.csv", idx.str());
    if (!opts.quiet) std::cout << idx.str();
    return any_ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-allele population dynamics: simulation and verification"};
    app.require_subcommand(1);

    CommonOpts opts;
    int (*handler)(const CommonOpts&) = nullptr;
    for (auto [name, desc, fn] :
         {std::tuple{"simulate", "integrate a model and write a trajectory CSV",
                     &cmd_simulate},
          std::tuple{"equilibria", "solve capacities and the population bound",
                     &cmd_equilibria},
          std::tuple{"verify", "run verification checks, exit 4 on failure",
                     &cmd_verify},
          std::tuple{"sweep", "run a parameter sweep with an index file",
                     &cmd_sweep}}) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", opts.config_path, "config file (JSON)")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed_override, "override the config seed");
        sub->add_flag("--quiet", opts.quiet, "suppress stdout");
        sub->callback([&handler, fn = fn]() { handler = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        return handler(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NeutralityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const AssumptionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
