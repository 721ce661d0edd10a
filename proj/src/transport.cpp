#include "fingering/transport.hpp"

#include "fingering/elliptic.hpp"
#include "fingering/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fingering {

std::vector<std::string> InitialCondition::violations() const {
    std::vector<std::string> out;
    if (!(std::isfinite(c_lower) && c_lower >= 0.0)) out.emplace_back("c_lower must be >= 0");
    if (!(std::isfinite(c_upper) && c_upper >= c_lower)) out.emplace_back("c_upper must be >= c_lower");
    if (!(std::isfinite(perturbation_amplitude) && perturbation_amplitude >= 0.0))
        out.emplace_back("perturbation_amplitude must be >= 0");
    if (!(std::isfinite(perturbation_spacing) && perturbation_spacing > 0.0))
        out.emplace_back("perturbation_spacing must be > 0");
    if (!std::isfinite(interface_y)) out.emplace_back("interface_y must be finite");
    return out;
}

namespace {

double uniform01(std::mt19937_64& gen) {
    // 53 random mantissa bits; avoids implementation-defined distributions.
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

int segment_count(const StructuredGrid& grid, const InitialCondition& ic) {
    return std::max(1, static_cast<int>(std::lround(grid.Lx() / ic.perturbation_spacing)));
}

}  // namespace

std::vector<double> interface_displacement(const StructuredGrid& grid, const InitialCondition& ic) {
    const int n = segment_count(grid, ic);
    std::vector<double> eta(static_cast<std::size_t>(n), 0.0);
    const double a = ic.perturbation_amplitude;
    if (a == 0.0) return eta;
    std::mt19937_64 gen(ic.seed);
    for (double& e : eta) e = a * (2.0 * uniform01(gen) - 1.0);
    remove_mean(eta);
    double peak = 0.0;
    for (double e : eta) peak = std::max(peak, std::abs(e));
    if (peak > a)
        for (double& e : eta) e *= a / peak;
    return eta;
}

CellField initial_condition(const StructuredGrid& grid, const InitialCondition& ic) {
    if (auto v = ic.violations(); !v.empty()) throw InvalidArgument("initial_condition: " + v.front());
    if (!(ic.interface_y > 0.0 && ic.interface_y < grid.Ly()))
        throw InvalidArgument("initial_condition: interface_y outside (0, Ly)");

    const auto eta = interface_displacement(grid, ic);
    const int nseg = static_cast<int>(eta.size());
    const int nx = grid.nx(), ny = grid.ny();
    const double jump = ic.c_upper - ic.c_lower;
    CellField c(grid, ic.c_lower);

    // Work in cell units so an unperturbed interface on a face is hit exactly.
    for (int i = 0; i < nx; ++i) {
        // Segment boundaries in units of the cell width: segment s covers [s, s+1) * nx/nseg.
        const double x0 = static_cast<double>(i), x1 = static_cast<double>(i + 1);
        std::vector<std::pair<double, double>> pieces;  // (weight, interface height in cell units)
        for (int s = 0; s < nseg; ++s) {
            const double s0 = static_cast<double>(s) * nx / nseg, s1 = static_cast<double>(s + 1) * nx / nseg;
            const double overlap = std::min(x1, s1) - std::max(x0, s0);
            if (overlap <= 0.0) continue;
            pieces.emplace_back(overlap, (ic.interface_y + eta[static_cast<std::size_t>(s)]) * ny / grid.Ly());
        }
        for (int j = 0; j < ny; ++j) {
            double heavy = 0.0;
            for (const auto& [w, h] : pieces) heavy += w * std::clamp(static_cast<double>(j + 1) - h, 0.0, 1.0);
            double v = ic.c_lower + jump * heavy;
            c(i, j) = std::clamp(v, ic.c_lower, ic.c_upper);
        }
    }
    return c;
}

double stable_dt(const FaceField& u, const PhysicalParams& params, double safety, double dt_max) {
    double ux = 0.0, uy = 0.0;
    for (double v : u.xvals) ux = std::max(ux, std::abs(v));
    for (double v : u.yvals) uy = std::max(uy, std::abs(v));
    const double rate = ux / u.grid.dx() + uy / u.grid.dy() + 1e-30;
    return std::min(safety * params.retardation() / rate, dt_max);
}

double advective_cfl(const FaceField& u, const PhysicalParams& params, double dt) {
    const auto& g = u.grid;
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    double worst = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double out = (std::max(u.x(i + 1, j), 0.0) + std::max(-u.x(i, j), 0.0)) * idx +
                               (std::max(u.y(i, j + 1), 0.0) + std::max(-u.y(i, j), 0.0)) * idy;
            const double in = (std::max(-u.x(i + 1, j), 0.0) + std::max(u.x(i, j), 0.0)) * idx +
                              (std::max(-u.y(i, j + 1), 0.0) + std::max(u.y(i, j), 0.0)) * idy;
            worst = std::max({worst, out, in});
        }
    return worst * dt / params.retardation();
}

namespace {

/// Adds the tiny mass defect back with weights proportional to the distance from
/// the bound it moves towards, so no value leaves the current [min, max] range.
void restore_mass(CellField& c, double target) {
    auto& v = c.values;
    const double defect = target - compensated_sum(v);
    if (defect == 0.0) return;
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double bound = defect > 0.0 ? *hi_it : *lo_it;
    std::vector<double> w(v.size());
    for (std::size_t n = 0; n < v.size(); ++n) w[n] = std::abs(bound - v[n]);
    const double total = compensated_sum(w);
    if (total <= std::abs(defect)) {
        const double shift = defect / static_cast<double>(v.size());
        for (double& x : v) x += shift;
        return;
    }
    const double scale = defect / total;
    for (std::size_t n = 0; n < v.size(); ++n) v[n] += scale * w[n];
}

}  // namespace

FaceField upwind_flux(const CellField& c, const FaceField& u) {
    require_same_grid(c.grid, u.grid, "upwind_flux");
    const auto& g = c.grid;
    FaceField F(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) {
            const double v = u.x(i, j);
            F.x(i, j) = v * (v > 0.0 ? c(i - 1, j) : c(i, j));
        }
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double v = u.y(i, j);
            F.y(i, j) = v * (v > 0.0 ? c(i, j - 1) : c(i, j));
        }
    return F;
}

double reaction_coefficient(const PhysicalParams& params, double dt) {
    const double storage = params.retardation() / dt;
    return storage * std::expm1(params.kappa * dt / params.retardation());
}

TransportResult advance(const CellField& c, const FaceField& u, double dt, const PhysicalParams& params, double tol) {
    require_same_grid(c.grid, u.grid, "advance");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("advance: dt must be positive");
    if (!(tol > 0.0 && tol < 1.0)) throw InvalidArgument("advance: tol must lie in (0, 1)");

    StepReport rep;
    rep.dt = dt;
    rep.cfl = advective_cfl(u, params, dt);
    if (rep.cfl > 1.0 + 1e-12)
        throw InvariantViolation("advance: CFL number " + std::to_string(rep.cfl) + " exceeds 1; step refused");

    const auto& g = c.grid;
    const double storage = params.retardation() / dt;
    const double shift = storage + reaction_coefficient(params, dt);

    // Upwind flux divergence minus c div(u): the pressure solve leaves div(u) at
    // solver tolerance rather than zero, and dropping that remainder turns the
    // advective update into a convex combination of neighbouring values.
    const CellField flux_div = divergence(upwind_flux(c, u));
    const CellField div_u = divergence(u);
    CellField rhs(g);
    for (std::size_t n = 0; n < rhs.values.size(); ++n)
        rhs.values[n] = storage * c.values[n] - (flux_div.values[n] - c.values[n] * div_u.values[n]);

    DiffusionOperator A(FaceField(g, params.D), shift);
    JacobiPreconditioner M(A);
    CellField next(g);
    for (std::size_t n = 0; n < next.values.size(); ++n) next.values[n] = rhs.values[n] / shift;
    const int cap = 50 * std::max(g.nx(), g.ny());
    auto cg = conjugate_gradient(A, M, rhs.values, next.values, tol, cap);
    rep.iterations = cg.iterations;
    rep.residual = cg.residual;

    // The conservative fluxes telescope and the wall-closed Laplacian sums to
    // zero, so the exact mass after the step is (storage sum(c) - sum(div F)) / shift.
    const double target =
        (storage * compensated_sum(c.values) - compensated_sum(flux_div.values)) / shift;
    restore_mass(next, target);
    rep.c_min = min_value(next);
    rep.c_max = max_value(next);
    rep.mass = reduce(next, Reduction::Integral);
    return {std::move(next), rep};
}

}  // namespace fingering
