#include "fingering/pressure.hpp"

#include "fingering/error.hpp"

#include <algorithm>
#include <cmath>

namespace fingering {

namespace {

void require_finite(const CellField& c, const char* where) {
    for (double v : c.values)
        if (!std::isfinite(v)) throw InvalidArgument(std::string(where) + ": non-finite concentration");
}

int iteration_cap(const StructuredGrid& g, const PressureOptions& opts) {
    return opts.max_iterations > 0 ? opts.max_iterations : 50 * std::max(g.nx(), g.ny());
}

/// Column-wise integral of rho g_y dy, zero in the bottom row.
CellField hydrostatic_pressure(const FaceField& rho_face, const PhysicalParams& params) {
    const auto& g = rho_face.grid;
    CellField ph(g);
    const double dy = g.dy();
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 1; j < g.ny(); ++j) ph(i, j) = ph(i, j - 1) + dy * rho_face.y(i, j) * params.g[1];
    return ph;
}

/// Buoyancy not balanced by grad p_hydro: d/dx p_hydro - rho g_x on x-faces, nothing on y-faces.
FaceField residual_forcing(const FaceField& rho_face, const CellField& ph, const PhysicalParams& params) {
    const auto& g = rho_face.grid;
    FaceField F(g);
    const double idx = 1.0 / g.dx();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i)
            F.x(i, j) = (ph(i, j) - ph(i - 1, j)) * idx - rho_face.x(i, j) * params.g[0];
    return F;
}

FaceField darcy_velocity(const FaceField& m, const CellField& p_dyn, const FaceField& F) {
    const auto& g = m.grid;
    FaceField u(g);
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i)
            u.x(i, j) = -m.x(i, j) * ((p_dyn(i, j) - p_dyn(i - 1, j)) * idx + F.x(i, j));
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            u.y(i, j) = -m.y(i, j) * ((p_dyn(i, j) - p_dyn(i, j - 1)) * idy + F.y(i, j));
    return u;
}

}  // namespace

FaceField face_mobility(const CellField& c, const PhysicalParams& params) {
    CellField mob(c.grid);
    for (std::size_t n = 0; n < c.values.size(); ++n) mob.values[n] = mobility(c.values[n], params);
    return face_harmonic_mean(mob);
}

namespace {

FaceField face_density(const CellField& c, const PhysicalParams& params) {
    CellField rho(c.grid);
    for (std::size_t n = 0; n < c.values.size(); ++n) rho.values[n] = density(c.values[n], params);
    return face_arithmetic_mean(rho);
}

CellField solve_projected(const DiffusionOperator& A, CellField rhs, const PressureOptions& opts,
                          const CellField* guess, EllipticSolveReport& rep) {
    const double bnorm = reduce(rhs, Reduction::Linf);
    const double mean = reduce(rhs, Reduction::Mean);
    rep.compatibility_defect = bnorm > 0.0 ? std::abs(mean) / bnorm : 0.0;
    remove_mean(rhs.values);
    rep.rhs_norm = reduce(rhs, Reduction::Linf);

    CellField x = guess ? *guess : CellField(rhs.grid);
    auto M = make_preconditioner(A, opts.preconditioner);
    auto cg = conjugate_gradient(A, *M, rhs.values, x.values, opts.tol, iteration_cap(rhs.grid, opts));
    rep.iterations = cg.iterations;
    rep.residual = cg.residual;
    rep.history = std::move(cg.history);
    return x;
}

}  // namespace

CellField solve_neumann(const FaceField& mobility, const CellField& f, const PressureOptions& opts,
                        EllipticSolveReport* report) {
    require_same_grid(mobility.grid, f.grid, "solve_neumann");
    if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw InvalidArgument("solve_neumann: tol must lie in (0, 1)");
    DiffusionOperator A(mobility);
    // A = -div(m grad), so div(m grad p) = f becomes A p = -f.
    CellField rhs = f;
    for (double& v : rhs.values) v = -v;
    EllipticSolveReport rep;
    CellField p = solve_projected(A, std::move(rhs), opts, nullptr, rep);
    if (report) *report = std::move(rep);
    return p;
}

PressureSolution solve_pressure(const CellField& c, const PhysicalParams& params, const PressureOptions& opts,
                                const CellField* warm_start) {
    require_finite(c, "solve_pressure");
    if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw InvalidArgument("solve_pressure: tol must lie in (0, 1)");
    if (warm_start) require_same_grid(warm_start->grid, c.grid, "solve_pressure warm start");

    const FaceField m = face_mobility(c, params);
    const FaceField rho = face_density(c, params);
    const CellField ph = hydrostatic_pressure(rho, params);
    FaceField mF = residual_forcing(rho, ph, params);
    const FaceField F = mF;
    for (std::size_t n = 0; n < mF.xvals.size(); ++n) mF.xvals[n] *= m.xvals[n];
    mF.zero_boundary_normals();

    // -div(m grad p_dyn) = div(m F)
    DiffusionOperator A(m);
    EllipticSolveReport rep;
    CellField p_dyn = solve_projected(A, divergence(mF), opts, warm_start, rep);

    FaceField u = darcy_velocity(m, p_dyn, F);
    u.zero_boundary_normals();
    PressureSolution sol{CellField(c.grid), std::move(p_dyn), std::move(u), std::move(rep)};
    for (std::size_t n = 0; n < sol.p.values.size(); ++n) sol.p.values[n] = ph.values[n] + sol.p_dynamic.values[n];
    remove_mean(sol.p.values);
    return sol;
}

FaceField recover_velocity(const PressureSolution& sol, const CellField& c, const PhysicalParams& params) {
    require_same_grid(sol.p_dynamic.grid, c.grid, "recover_velocity");
    const FaceField rho = face_density(c, params);
    const CellField ph = hydrostatic_pressure(rho, params);
    FaceField u = darcy_velocity(face_mobility(c, params), sol.p_dynamic, residual_forcing(rho, ph, params));
    u.zero_boundary_normals();
    return u;
}

FaceField recover_velocity(const CellField& p, const CellField& c, const PhysicalParams& params) {
    require_same_grid(p.grid, c.grid, "recover_velocity");
    const FaceField rho = face_density(c, params);
    const CellField ph = hydrostatic_pressure(rho, params);
    CellField p_dyn = p;
    for (std::size_t n = 0; n < p.values.size(); ++n) p_dyn.values[n] -= ph.values[n];
    FaceField u = darcy_velocity(face_mobility(c, params), p_dyn, residual_forcing(rho, ph, params));
    u.zero_boundary_normals();
    return u;
}

const PressureSolution& PressureSolver::solve(const CellField& c, const PhysicalParams& params) {
    const CellField* guess = (last_ && last_->p_dynamic.grid == c.grid) ? &last_->p_dynamic : nullptr;
    auto sol = solve_pressure(c, params, opts_, guess);
    last_ = std::move(sol);
    return *last_;
}

}  // namespace fingering
