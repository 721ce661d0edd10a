// Command-line driver: single runs, parameter sweeps, mesh-convergence studies
// and decay-rate fits on recorded time series.

#include "fingering/config.hpp"
#include "fingering/diagnostics.hpp"
#include "fingering/error.hpp"
#include "fingering/output.hpp"
#include "fingering/studies.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace fingering;

namespace {

enum ExitCode : int { kOk = 0, kRunFailed = 1, kBadInput = 2, kNotMonotone = 3 };

int default_jobs() {
    if (const char* env = std::getenv("FINGERING_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring invalid FINGERING_THREADS='" << env << "'\n";
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

RunConfig load_with_overrides(const std::string& path, const std::vector<std::string>& sets,
                              const std::optional<long long>& seed) {
    RunConfig cfg = load_config(path);
    std::vector<std::string> problems;
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            problems.push_back("--set expects key=value, got '" + kv + "'");
            continue;
        }
        if (auto err = apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1)); !err.empty()) problems.push_back(err);
    }
    if (seed) {
        if (*seed < 0) problems.emplace_back("--seed must be non-negative");
        else cfg.ic.seed = static_cast<std::uint64_t>(*seed);
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    cfg.validate();
    return cfg;
}

void print_stats(const RunResult& r) {
    const auto& s = r.state.stats;
    const auto last = r.series.at(r.series.size() - 1);
    std::printf("t = %g after %ld steps\n", r.state.t, r.state.step_count);
    std::printf("  energy %.6e  variance %.6e  mixing %s\n", last.energy, last.variance,
                last.mixing ? format_double(*last.mixing).c_str() : "n/a");
    std::printf("  concentration range [%.12g, %.12g], worst mass defect %.2e\n", s.min_c, s.max_c,
                s.max_mass_defect);
    std::printf("  pressure: %ld solves, %ld iterations, max |div u| / (tol |rhs|) = %.3f\n", s.pressure_solves,
                s.pressure_iterations, s.max_divergence_ratio);
    std::printf("  max CFL %.3g, transport iterations %ld, worst L2 growth %.2e\n", s.max_cfl,
                s.transport_iterations, s.max_l2_growth);
}

std::pair<double, double> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InvalidArgument("--window expects t1:t2, got '" + text + "'");
    try {
        return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw InvalidArgument("--window expects t1:t2, got '" + text + "'");
    }
}

MeshSize parse_mesh(const std::string& text) {
    const auto x = text.find('x');
    try {
        if (x != std::string::npos) {
            std::size_t used = 0;
            const int nx = std::stoi(text.substr(0, x), &used);
            if (used == x) {
                const int ny = std::stoi(text.substr(x + 1), &used);
                if (used == text.size() - x - 1) return {nx, ny};
            }
        }
    } catch (const std::exception&) {
    }
    throw InvalidArgument("mesh must look like NXxNY (e.g. 48x96), got '" + text + "'");
}

SweepAxis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("--axis expects name=v1,v2,..., got '" + text + "'");
    SweepAxis axis{text.substr(0, eq), {}};
    std::string rest = text.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
        const auto comma = rest.find(',', start);
        const auto end = comma == std::string::npos ? rest.size() : comma;
        if (end > start) axis.values.push_back(rest.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return axis;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Miscible viscous/gravity fingering in a porous medium (Darcy flow with concentration-dependent "
        "viscosity and density, retarded transport with first-order reaction).\n"
        "Config files are `key = value` lines; see README.md for the keys.\n"
        "FINGERING_THREADS sets the default worker count for sweep and converge."};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::optional<long long> seed;
    std::string out;
    int jobs = default_jobs();
    bool quiet = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--set", sets, "Override a config key, e.g. --set alpha=2 (repeatable)");
        cmd->add_option("--seed", seed, "Override the initial-perturbation seed");
        cmd->add_flag("-q,--quiet", quiet, "Only print errors");
    };

    auto* run_cmd = app.add_subcommand("run", "Run one simulation");
    add_common(run_cmd);
    run_cmd->add_option("--out", out,
                        "Output directory: writes timeseries.csv (and snapshots/ when snapshot_every > 0); "
                        "overrides the config's output paths");

    std::vector<std::string> axes;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the Cartesian product of parameter axes");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--axis", axes, "Axis as key=v1,v2,... (repeatable; any config key)")->required();
    sweep_cmd->add_option("--out", out, "Output directory; each run writes to <out>/<key=value_...>/")->required();
    sweep_cmd->add_option("-j,--jobs", jobs, "Concurrent runs (default: FINGERING_THREADS or core count)")
        ->check(CLI::PositiveNumber);

    std::vector<std::string> meshes;
    std::string reference;
    auto* conv_cmd = app.add_subcommand("converge", "Mesh-refinement study on the energy and variance series");
    add_common(conv_cmd);
    conv_cmd->add_option("--meshes", meshes, "Ladder of meshes, coarse to fine, e.g. 24x48,48x96,96x192")
        ->required()
        ->delimiter(',');
    conv_cmd->add_option("--reference", reference, "Reference mesh (default: twice the finest ladder mesh)");
    conv_cmd->add_option("--out", out, "Write the error table as CSV to this file");
    conv_cmd->add_option("-j,--jobs", jobs, "Concurrent runs (default: FINGERING_THREADS or core count)")
        ->check(CLI::PositiveNumber);

    std::string csv_path, column = "l2", window, norm_name = "Lp";
    std::optional<double> kappa, retardation;
    auto* fit_cmd = app.add_subcommand("fitdecay", "Fit an exponential decay rate to a time-series column");
    fit_cmd->add_option("csv", csv_path, "Time-series CSV written by run or sweep")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--column", column, "Column to fit (default l2)");
    fit_cmd->add_option("--window", window, "Fit window t1:t2 (default: last half of the series)");
    fit_cmd->add_option("--norm", norm_name,
                        "L1 or Lp: fit the column as is; L2_squared: square the column first (use with l2)")
        ->check(CLI::IsMember({"L1", "Lp", "L2_squared"}));
    fit_cmd->add_option("--kappa", kappa, "Reaction rate, to compare against the theoretical rate");
    fit_cmd->add_option("--k", retardation, "Retardation factor for the comparison (default 1)");

    CLI11_PARSE(app, argc, argv);

    auto log = [&](const std::string& line) {
        if (!quiet) std::cout << line << std::endl;
    };

    try {
        if (*run_cmd) {
            RunConfig cfg = load_with_overrides(config_path, sets, seed);
            if (!out.empty()) {
                cfg.output.timeseries = (fs::path(out) / "timeseries.csv").string();
                cfg.output.snapshot_dir = cfg.output.snapshot_every > 0 ? (fs::path(out) / "snapshots").string() : "";
            }
            const RunResult r = run_with_outputs(cfg);
            if (!quiet) print_stats(r);
            return kOk;
        }

        if (*sweep_cmd) {
            SweepSpec spec;
            spec.base = load_with_overrides(config_path, sets, seed);
            for (const auto& a : axes) spec.axes.push_back(parse_axis(a));
            spec.parallelism = jobs;
            spec.output_dir = out;
            const auto outcomes = run_sweep(spec, log);
            int failed = 0;
            for (const auto& o : outcomes)
                if (!o.result) {
                    ++failed;
                    std::cerr << o.label << ": " << o.error << "\n";
                }
            log("summary written to " + (fs::path(out) / "summary.csv").string());
            if (failed) {
                std::cerr << failed << " of " << outcomes.size() << " runs failed\n";
                return kRunFailed;
            }
            return kOk;
        }

        if (*conv_cmd) {
            ConvergenceSpec spec;
            spec.base = load_with_overrides(config_path, sets, seed);
            for (const auto& m : meshes) spec.ladder.push_back(parse_mesh(m));
            if (!reference.empty()) spec.reference = parse_mesh(reference);
            else if (!spec.ladder.empty())
                spec.reference = {2 * spec.ladder.back().nx, 2 * spec.ladder.back().ny};
            spec.parallelism = jobs;
            log("reference mesh " + std::to_string(spec.reference.nx) + "x" + std::to_string(spec.reference.ny));
            const auto table = run_convergence(spec, log);
            const auto text = format_convergence_table(table);
            std::cout << text;
            if (!out.empty()) {
                std::FILE* f = std::fopen(out.c_str(), "wb");
                if (!f) throw Error("cannot write '" + out + "'");
                std::fwrite(text.data(), 1, text.size(), f);
                std::fclose(f);
            }
            if (!table.monotone) {
                for (const auto& m : table.non_monotone) std::cerr << "not monotone: " << m << "\n";
                return kNotMonotone;
            }
            return kOk;
        }

        if (*fit_cmd) {
            auto [times, values] = read_column(csv_path, column);
            const DecayNorm norm = norm_name == "L1" ? DecayNorm::L1
                                   : norm_name == "Lp" ? DecayNorm::Lp
                                                       : DecayNorm::L2Squared;
            if (norm == DecayNorm::L2Squared)
                for (auto& v : values) v *= v;
            const auto [t1, t2] = window.empty() ? trailing_window(times) : parse_window(window);
            const DecayFit fit = fit_decay_rate(times, values, t1, t2);
            std::printf("fitted rate %.10g over [%g, %g] (%zu samples, rms log residual %.3e)\n", fit.rate,
                        fit.t_begin, fit.t_end, fit.samples, fit.residual);
            if (kappa) {
                PhysicalParams p;
                p.kappa = *kappa;
                p.k = retardation.value_or(1.0);
                const double expected = theoretical_decay_rate(p, norm);
                std::printf("theoretical rate %.10g, relative difference %.3e\n", expected,
                            expected != 0.0 ? std::abs(fit.rate - expected) / expected : std::abs(fit.rate));
            }
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration:\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
        return kBadInput;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kRunFailed;
    }
    return kOk;
}
