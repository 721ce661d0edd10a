#pragma once

#include "fingering/simulation.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fingering {

/// run() plus the file outputs requested in config.output (time series CSV and
/// snapshots named c_<sample index>.txt[.gz]).
RunResult run_with_outputs(const RunConfig& config, const Sinks& extra = {});

struct SweepAxis {
    std::string name;                 ///< any config key
    std::vector<std::string> values;  ///< raw values as they would appear in a config
};

struct SweepSpec {
    RunConfig base;
    std::vector<SweepAxis> axes;
    int parallelism = 1;
    std::string output_dir;  ///< each run writes to output_dir/<label>/ when non-empty

    std::size_t size() const;  ///< Cartesian product size
    std::vector<std::string> violations() const;
};

struct SweepOutcome {
    std::vector<std::pair<std::string, std::string>> assignment;
    std::string label;  ///< e.g. "alpha=2_k=1"
    RunConfig config;
    std::optional<RunResult> result;  ///< empty when the run failed
    std::string error;
};

/// Runs the Cartesian product of the axes over a pool of worker threads.
/// Results come back in product order regardless of completion order. When
/// output_dir is set each run writes timeseries.csv (and snapshots) under its own
/// label directory, and summary.csv is written once at the end.
std::vector<SweepOutcome> run_sweep(const SweepSpec& spec,
                                    const std::function<void(const std::string&)>& log = {});

struct MeshSize {
    int nx = 0;
    int ny = 0;
    bool operator==(const MeshSize&) const = default;
};

struct ConvergenceSpec {
    RunConfig base;
    std::vector<MeshSize> ladder;  ///< coarse to fine
    MeshSize reference;
    int parallelism = 1;

    std::vector<std::string> violations() const;
};

struct ConvergenceRow {
    MeshSize mesh;
    double h = 0.0;                  ///< max(dx, dy)
    double energy_linf = 0.0;        ///< max_t |E_h - E_ref|
    double energy_l2 = 0.0;          ///< ||E_h - E_ref||_{L2(0,T)}
    double energy_l2_rel = 0.0;      ///< energy_l2 / ||E_ref||
    double variance_linf_rel = 0.0;  ///< max_t |V_h - V_ref| / |V_ref|
    double variance_l2_rel = 0.0;    ///< ||V_h - V_ref|| / ||V_ref||
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    TimeSeries reference;
    bool monotone = true;                   ///< every error strictly decreases coarse -> fine
    std::vector<std::string> non_monotone;  ///< which columns failed, if any
};

/// Runs the ladder and the reference mesh, interpolates each series onto the
/// reference sample times and tabulates time-series errors.
ConvergenceTable run_convergence(const ConvergenceSpec& spec,
                                 const std::function<void(const std::string&)>& log = {});

std::string format_convergence_table(const ConvergenceTable& table);

/// Linear interpolation of (times, values) at t; clamps outside the range.
double interpolate(const std::vector<double>& times, const std::vector<double>& values, double t);

}  // namespace fingering
