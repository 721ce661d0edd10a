#pragma once

#include "fingering/diagnostics.hpp"
#include "fingering/elliptic.hpp"
#include "fingering/grid.hpp"
#include "fingering/model.hpp"
#include "fingering/transport.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fingering {

struct GridSpec {
    double Lx = 100.0;
    double Ly = 200.0;
    int nx = 96;
    int ny = 192;
};

struct OutputSpec {
    std::string timeseries;    ///< CSV path; empty disables
    std::string snapshot_dir;  ///< directory for field snapshots; empty disables
    int snapshot_every = 0;    ///< write a snapshot every n-th sample (0 = never)
    bool snapshot_gzip = false;
};

/// Everything needed to reproduce one simulation.
struct RunConfig {
    GridSpec grid;
    PhysicalParams params;
    InitialCondition ic;
    double T_end = 150.0;
    double sample_interval = 1.0;
    double dt_max = 0.1;
    double safety = 0.5;
    double pressure_tol = 1e-10;
    double transport_tol = 1e-12;
    PreconditionerKind preconditioner = PreconditionerKind::Multigrid;
    int pressure_every = 1;  ///< re-solve pressure every n transport steps (always at samples)
    OutputSpec output;

    std::vector<std::string> violations() const;
    void validate() const;
    StructuredGrid make_grid() const { return {grid.Lx, grid.Ly, grid.nx, grid.ny}; }
};

struct SolverStats {
    long pressure_solves = 0;
    long pressure_iterations = 0;
    long transport_iterations = 0;
    double max_divergence = 0.0;        ///< max over solves of ||div u||_inf
    double max_divergence_ratio = 0.0;  ///< max of ||div u||_inf / (tol ||rhs||_inf)
    double max_compatibility_defect = 0.0;
    double max_cfl = 0.0;
    double min_c = 0.0;  ///< extrema over every step
    double max_c = 0.0;
    double max_mass_defect = 0.0;  ///< worst relative deviation from the discrete mass law
    double max_l2_growth = 0.0;    ///< worst one-step increase of ||c||_2 (checked when kappa = 0)
};

struct SimState {
    double t = 0.0;
    CellField c;
    CellField p;
    FaceField u;
    long step_count = 0;
    SolverStats stats;
};

/// Optional observers; each is called from the thread running the simulation.
struct Sinks {
    std::function<void(const SimState&, const Sample&)> on_sample;
    std::function<void(const SimState&, const StepReport&)> on_step;
};

struct RunResult {
    SimState state;
    TimeSeries series;
    double initial_variance = 0.0;
};

/// Integrates from t = 0 to T_end: pressure solve, velocity, stable dt, transport
/// step. Steps are shortened so that samples land exactly on multiples of
/// sample_interval (and on T_end). Transport invariants are checked every step
/// and abort the run with InvariantViolation; solver failures are rethrown with the
/// failing step index.
RunResult run(const RunConfig& config, const Sinks& sinks = {});

}  // namespace fingering
