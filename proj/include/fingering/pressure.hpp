#pragma once

#include "fingering/elliptic.hpp"
#include "fingering/grid.hpp"
#include "fingering/model.hpp"

#include <optional>
#include <vector>

namespace fingering {

struct EllipticSolveReport {
    int iterations = 0;
    double residual = 0.0;              ///< final relative residual (max-norm)
    double compatibility_defect = 0.0;  ///< |mean(rhs)| / ||rhs||_inf removed before solving
    double rhs_norm = 0.0;              ///< ||rhs||_inf of the system actually solved
    std::vector<double> history;
};

struct PressureOptions {
    double tol = 1e-10;
    PreconditionerKind preconditioner = PreconditionerKind::Multigrid;
    int max_iterations = 0;  ///< 0 selects 50 * max(nx, ny)
};

/// Output of a pressure solve.
///
/// The pressure is split as p = p_hydro + p_dyn, where p_hydro integrates
/// rho g_y up every column. The buoyancy left over after subtracting grad p_hydro
/// lives on x-faces only, so a horizontally uniform density gives a zero
/// right-hand side and an exactly quiescent velocity.
struct PressureSolution {
    CellField p;          ///< full pressure, zero mean
    CellField p_dynamic;  ///< non-hydrostatic part, zero mean; what CG solves for
    FaceField velocity;   ///< Darcy velocity, zero normal component on the walls
    EllipticSolveReport report;
};

/// Solves div(m grad p) = div(m rho g), m = K/mu(c) harmonically averaged to faces,
/// rho arithmetically averaged, and recovers the face velocity.
///
/// `warm_start` (a previous p_dynamic on the same grid) seeds CG when given.
PressureSolution solve_pressure(const CellField& c, const PhysicalParams& params, const PressureOptions& opts,
                                const CellField* warm_start = nullptr);

/// u = -m (grad p - rho g) on interior faces, zero on the walls. Buoyancy acts
/// along g, so with g pointing to -y the denser fluid sinks.
FaceField recover_velocity(const CellField& p, const CellField& c, const PhysicalParams& params);

/// Same as above but reuses the split held in a solution (better conditioned).
FaceField recover_velocity(const PressureSolution& sol, const CellField& c, const PhysicalParams& params);

/// Face mobility K/mu(c), harmonic mean.
FaceField face_mobility(const CellField& c, const PhysicalParams& params);

/// Generic variable-coefficient Neumann problem  div(m grad p) = f  (f is projected to
/// zero mean). Returns zero-mean p.
CellField solve_neumann(const FaceField& mobility, const CellField& f, const PressureOptions& opts,
                        EllipticSolveReport* report = nullptr);

/// Holds the previous dynamic pressure between calls to warm-start CG.
class PressureSolver {
public:
    explicit PressureSolver(PressureOptions opts) : opts_(opts) {}

    const PressureSolution& solve(const CellField& c, const PhysicalParams& params);
    const std::optional<PressureSolution>& last() const noexcept { return last_; }
    const PressureOptions& options() const noexcept { return opts_; }

private:
    PressureOptions opts_;
    std::optional<PressureSolution> last_;
};

}  // namespace fingering
