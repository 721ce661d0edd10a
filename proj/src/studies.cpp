#include "fingering/studies.hpp"

#include "fingering/config.hpp"
#include "fingering/error.hpp"
#include "fingering/output.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

namespace fingering {

namespace fs = std::filesystem;

RunResult run_with_outputs(const RunConfig& config, const Sinks& extra) {
    const auto& out = config.output;
    Sinks sinks = extra;
    if (!out.snapshot_dir.empty() && out.snapshot_every > 0) {
        fs::create_directories(out.snapshot_dir);
        auto counter = std::make_shared<long>(0);
        sinks.on_sample = [out, counter, next = extra.on_sample](const SimState& st, const Sample& s) {
            const long n = (*counter)++;
            if (n % out.snapshot_every == 0) {
                char name[64];
                std::snprintf(name, sizeof name, "c_%06ld.txt%s", n, out.snapshot_gzip ? ".gz" : "");
                write_snapshot(st.c, s.t, (fs::path(out.snapshot_dir) / name).string());
            }
            if (next) next(st, s);
        };
    }
    RunResult r = run(config, sinks);
    if (!out.timeseries.empty()) {
        if (auto parent = fs::path(out.timeseries).parent_path(); !parent.empty()) fs::create_directories(parent);
        write_timeseries(r.series, out.timeseries);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Sweeps

std::size_t SweepSpec::size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<std::string> SweepSpec::violations() const {
    std::vector<std::string> out;
    if (axes.empty()) out.emplace_back("sweep needs at least one axis");
    for (const auto& a : axes) {
        if (a.values.empty()) out.push_back("axis '" + a.name + "' has no values");
        for (const auto& v : a.values) {
            RunConfig probe = base;
            if (auto err = apply_setting(probe, a.name, v); !err.empty()) {
                out.push_back("axis '" + a.name + "': " + err);
                continue;
            }
            for (const auto& problem : probe.violations())
                out.push_back("axis '" + a.name + "' value '" + v + "': " + problem);
        }
    }
    for (std::size_t i = 0; i < axes.size(); ++i)
        for (std::size_t j = i + 1; j < axes.size(); ++j)
            if (axes[i].name == axes[j].name) out.push_back("axis '" + axes[i].name + "' given twice");
    if (parallelism < 1) out.emplace_back("parallelism must be >= 1");
    return out;
}

namespace {

std::vector<SweepOutcome> expand(const SweepSpec& spec) {
    std::vector<SweepOutcome> runs;
    const std::size_t total = spec.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        SweepOutcome o;
        o.config = spec.base;
        std::size_t rem = flat;
        // Last axis varies fastest.
        std::vector<std::size_t> idx(spec.axes.size());
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            idx[a] = rem % spec.axes[a].values.size();
            rem /= spec.axes[a].values.size();
        }
        for (std::size_t a = 0; a < spec.axes.size(); ++a) {
            const auto& axis = spec.axes[a];
            const auto& value = axis.values[idx[a]];
            apply_setting(o.config, axis.name, value);
            o.assignment.emplace_back(axis.name, value);
            if (!o.label.empty()) o.label += '_';
            o.label += axis.name + '=' + value;
        }
        if (!spec.output_dir.empty()) {
            const fs::path dir = fs::path(spec.output_dir) / o.label;
            o.config.output.timeseries = (dir / "timeseries.csv").string();
            if (o.config.output.snapshot_every > 0) o.config.output.snapshot_dir = (dir / "snapshots").string();
        } else {
            o.config.output = OutputSpec{};
        }
        runs.push_back(std::move(o));
    }
    return runs;
}

template <class Job>
void parallel_for(std::size_t count, int parallelism, Job job) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) job(i);
    };
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)), count);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

std::string summary_csv(const std::vector<SweepOutcome>& runs) {
    std::string out = "label,status,t_end,energy,mixing,min_c,max_c,steps,max_divergence_ratio,error\n";
    for (const auto& o : runs) {
        out += o.label + ',';
        if (o.result) {
            const auto& r = *o.result;
            const auto last = r.series.at(r.series.size() - 1);
            const auto& st = r.state.stats;
            out += "ok," + format_double(last.t) + ',' + format_double(last.energy) + ',' +
                   (last.mixing ? format_double(*last.mixing) : std::string()) + ',' + format_double(st.min_c) + ',' +
                   format_double(st.max_c) + ',' + std::to_string(r.state.step_count) + ',' +
                   format_double(st.max_divergence_ratio) + ",\n";
        } else {
            std::string err = o.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            out += "failed,,,,,,,," + err + '\n';
        }
    }
    return out;
}

}  // namespace

std::vector<SweepOutcome> run_sweep(const SweepSpec& spec, const std::function<void(const std::string&)>& log) {
    if (auto v = spec.violations(); !v.empty()) throw ConfigError(std::move(v));
    auto runs = expand(spec);
    for (const auto& o : runs)
        if (auto v = o.config.violations(); !v.empty()) {
            for (auto& s : v) s = o.label + ": " + s;
            throw ConfigError(std::move(v));
        }
    if (log) log("sweep: " + std::to_string(runs.size()) + " runs, parallelism " + std::to_string(spec.parallelism));

    std::mutex log_mutex;
    parallel_for(runs.size(), spec.parallelism, [&](std::size_t i) {
        auto& o = runs[i];
        try {
            o.result = run_with_outputs(o.config);
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        if (log) {
            std::lock_guard lock(log_mutex);
            log("  " + o.label + (o.result ? ": ok" : ": FAILED: " + o.error));
        }
    });

    if (!spec.output_dir.empty()) {
        fs::create_directories(spec.output_dir);
        std::FILE* f = std::fopen((fs::path(spec.output_dir) / "summary.csv").string().c_str(), "wb");
        if (!f) throw Error("cannot write sweep summary in '" + spec.output_dir + "'");
        const auto text = summary_csv(runs);
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    }
    return runs;
}

// ---------------------------------------------------------------------------
// Mesh convergence

std::vector<std::string> ConvergenceSpec::violations() const {
    std::vector<std::string> out;
    if (ladder.empty()) out.emplace_back("mesh ladder is empty");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i].nx > ladder[i - 1].nx && ladder[i].ny > ladder[i - 1].ny))
            out.emplace_back("mesh ladder must be sorted coarse to fine");
    for (const auto& m : ladder)
        if (m.nx > reference.nx || m.ny > reference.ny)
            out.emplace_back("reference mesh must be at least as fine as every ladder mesh");
    return out;
}

double interpolate(const std::vector<double>& times, const std::vector<double>& values, double t) {
    if (times.empty()) throw InvalidArgument("interpolate: empty series");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin()), lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return (1.0 - w) * values[lo] + w * values[hi];
}

namespace {

/// sqrt of the trapezoidal integral of v^2 over t.
double l2_in_time(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() < 2) return v.empty() ? 0.0 : std::abs(v.front());
    double s = 0.0;
    for (std::size_t n = 1; n < t.size(); ++n) s += 0.5 * (t[n] - t[n - 1]) * (v[n] * v[n] + v[n - 1] * v[n - 1]);
    return std::sqrt(s);
}

ConvergenceRow compare(const MeshSize& mesh, const RunConfig& base, const TimeSeries& s, const TimeSeries& ref) {
    ConvergenceRow row;
    row.mesh = mesh;
    row.h = std::max(base.grid.Lx / mesh.nx, base.grid.Ly / mesh.ny);
    const auto& t = ref.times;
    std::vector<double> de(t.size()), dv(t.size());
    double vlinf = 0.0;
    for (std::size_t n = 0; n < t.size(); ++n) {
        de[n] = interpolate(s.times, s.energy, t[n]) - ref.energy[n];
        dv[n] = interpolate(s.times, s.variance, t[n]) - ref.variance[n];
        row.energy_linf = std::max(row.energy_linf, std::abs(de[n]));
        if (ref.variance[n] != 0.0) vlinf = std::max(vlinf, std::abs(dv[n] / ref.variance[n]));
    }
    row.variance_linf_rel = vlinf;
    row.energy_l2 = l2_in_time(t, de);
    const double eref = l2_in_time(t, ref.energy);
    row.energy_l2_rel = eref > 0.0 ? row.energy_l2 / eref : 0.0;
    const double vref = l2_in_time(t, ref.variance);
    row.variance_l2_rel = vref > 0.0 ? l2_in_time(t, dv) / vref : 0.0;
    return row;
}

}  // namespace

ConvergenceTable run_convergence(const ConvergenceSpec& spec, const std::function<void(const std::string&)>& log) {
    if (auto v = spec.violations(); !v.empty()) throw ConfigError(std::move(v));
    std::vector<MeshSize> meshes = spec.ladder;
    meshes.push_back(spec.reference);
    // A ladder entry equal to the reference reuses the reference run.
    std::vector<MeshSize> unique;
    for (const auto& m : meshes)
        if (std::find(unique.begin(), unique.end(), m) == unique.end()) unique.push_back(m);

    std::vector<std::optional<TimeSeries>> series(unique.size());
    std::vector<std::string> errors(unique.size());
    parallel_for(unique.size(), spec.parallelism, [&](std::size_t i) {
        RunConfig cfg = spec.base;
        cfg.grid.nx = unique[i].nx;
        cfg.grid.ny = unique[i].ny;
        cfg.output = OutputSpec{};
        try {
            series[i] = run(cfg).series;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < unique.size(); ++i)
        if (!series[i])
            throw Error("convergence run " + std::to_string(unique[i].nx) + "x" + std::to_string(unique[i].ny) +
                        " failed: " + errors[i]);
    auto lookup = [&](const MeshSize& m) -> const TimeSeries& {
        return *series[static_cast<std::size_t>(std::find(unique.begin(), unique.end(), m) - unique.begin())];
    };

    ConvergenceTable table;
    table.reference = lookup(spec.reference);
    for (const auto& m : spec.ladder) {
        table.rows.push_back(compare(m, spec.base, lookup(m), table.reference));
        if (log) {
            const auto& r = table.rows.back();
            log("  " + std::to_string(m.nx) + "x" + std::to_string(m.ny) + ": energy Linf " +
                format_double(r.energy_linf) + ", variance Linf(rel) " + format_double(r.variance_linf_rel));
        }
    }
    struct Column {
        const char* name;
        double ConvergenceRow::*member;
    };
    for (const Column c : {Column{"energy_linf", &ConvergenceRow::energy_linf},
                           Column{"energy_l2", &ConvergenceRow::energy_l2},
                           Column{"variance_linf_rel", &ConvergenceRow::variance_linf_rel},
                           Column{"variance_l2_rel", &ConvergenceRow::variance_l2_rel}}) {
        for (std::size_t i = 1; i < table.rows.size(); ++i)
            if (!(table.rows[i].*c.member < table.rows[i - 1].*c.member)) {
                table.monotone = false;
                table.non_monotone.push_back(std::string(c.name) + " does not decrease from " +
                                             std::to_string(table.rows[i - 1].mesh.nx) + "x" +
                                             std::to_string(table.rows[i - 1].mesh.ny) + " to " +
                                             std::to_string(table.rows[i].mesh.nx) + "x" +
                                             std::to_string(table.rows[i].mesh.ny));
                break;
            }
    }
    return table;
}

std::string format_convergence_table(const ConvergenceTable& t) {
    std::string out = "nx,ny,h,energy_linf,energy_l2,energy_l2_rel,variance_linf_rel,variance_l2_rel\n";
    for (const auto& r : t.rows)
        out += std::to_string(r.mesh.nx) + ',' + std::to_string(r.mesh.ny) + ',' + format_double(r.h) + ',' +
               format_double(r.energy_linf) + ',' + format_double(r.energy_l2) + ',' + format_double(r.energy_l2_rel) +
               ',' + format_double(r.variance_linf_rel) + ',' + format_double(r.variance_l2_rel) + '\n';
    return out;
}

}  // namespace fingering
