#include "helpers.hpp"

#include "fingering/elliptic.hpp"
#include "fingering/error.hpp"
#include "fingering/pressure.hpp"
#include "fingering/transport.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fingering;
using std::numbers::pi;
using testing_helpers::random_cells;

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_speed(const FaceField& u) { return std::max(max_abs(u.xvals), max_abs(u.yvals)); }

/// div(m grad p) = f on the unit square with m = e^x and p = cos(pi x) cos(pi y);
/// returns the L2 error of the zero-mean discrete solution.
double manufactured_error(int n) {
    const StructuredGrid g(1.0, 1.0, n, n);
    FaceField m(g);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) m.x(i, j) = std::exp(i * g.dx());
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i) m.y(i, j) = std::exp(g.xc(i));
    CellField f(g), exact(g);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = g.xc(i), y = g.yc(j);
            exact(i, j) = std::cos(pi * x) * std::cos(pi * y);
            f(i, j) = std::exp(x) * std::cos(pi * y) * (-2.0 * pi * pi * std::cos(pi * x) - pi * std::sin(pi * x));
        }
    remove_mean(exact.values);
    PressureOptions opts;
    opts.tol = 1e-12;
    const CellField p = solve_neumann(m, f, opts);
    CellField err(g);
    for (std::size_t k = 0; k < err.values.size(); ++k) err.values[k] = p.values[k] - exact.values[k];
    return reduce(err, Reduction::L2);
}

CellField blob(const StructuredGrid& g) {
    CellField c(g, 1.0);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (std::hypot(g.xc(i) - 0.5 * g.Lx(), g.yc(j) - 0.5 * g.Ly()) < 0.2 * g.Lx()) c(i, j) = 2.0;
    return c;
}

}  // namespace

TEST_CASE("diffusion operator is symmetric and positive semidefinite") {
    const StructuredGrid g(1.0, 2.0, 9, 7);
    FaceField w(g);
    const CellField coeff = random_cells(g, 3, 0.1, 2.0);
    w = face_harmonic_mean(coeff);
    const DiffusionOperator A(w);
    const CellField x = random_cells(g, 4), y = random_cells(g, 5);
    std::vector<double> Ax(x.values.size()), Ay(y.values.size());
    A.apply(x.values, Ax);
    A.apply(y.values, Ay);
    double xAy = 0.0, yAx = 0.0, xAx = 0.0;
    for (std::size_t k = 0; k < Ax.size(); ++k) {
        xAy += x.values[k] * Ay[k];
        yAx += y.values[k] * Ax[k];
        xAx += x.values[k] * Ax[k];
    }
    CHECK(xAy == doctest::Approx(yAx).epsilon(1e-13));
    CHECK(xAx > 0.0);
    CHECK(A.singular());

    std::vector<double> ones(x.values.size(), 1.0), A1(x.values.size());
    A.apply(ones, A1);
    CHECK(max_abs(A1) < 1e-13);
}

TEST_CASE("multigrid preconditioner is symmetric") {
    const StructuredGrid g(100.0, 200.0, 32, 64);
    const DiffusionOperator A(face_harmonic_mean(random_cells(g, 6, 0.1, 1.0)));
    const MultigridPreconditioner M(A);
    CHECK(M.levels() > 1);
    CellField r = random_cells(g, 7), s = random_cells(g, 8);
    remove_mean(r.values);
    remove_mean(s.values);
    std::vector<double> Mr(r.values.size()), Ms(s.values.size());
    M.apply(r.values, Mr);
    M.apply(s.values, Ms);
    double sMr = 0.0, rMs = 0.0;
    for (std::size_t k = 0; k < Mr.size(); ++k) {
        sMr += s.values[k] * Mr[k];
        rMs += r.values[k] * Ms[k];
    }
    CHECK(sMr == doctest::Approx(rMs).epsilon(1e-10));
}

TEST_CASE("both preconditioners solve a shifted problem to tolerance") {
    const StructuredGrid g(1.0, 1.0, 24, 24);
    const DiffusionOperator A(FaceField(g, 0.3), 2.0);
    const CellField b = random_cells(g, 9);
    for (auto kind : {PreconditionerKind::Jacobi, PreconditionerKind::Multigrid}) {
        const auto M = make_preconditioner(A, kind);
        std::vector<double> x(b.values.size(), 0.0), Ax(b.values.size());
        const CgReport rep = conjugate_gradient(A, *M, b.values, x, 1e-11, 1000);
        A.apply(x, Ax);
        double worst = 0.0;
        for (std::size_t k = 0; k < Ax.size(); ++k) worst = std::max(worst, std::abs(Ax[k] - b.values[k]));
        CHECK(worst <= 1e-11 * max_abs(b.values) * (1.0 + 1e-9));
        CHECK(rep.iterations > 0);
        CHECK(!rep.history.empty());
    }
}

TEST_CASE("manufactured solution converges at second order") {
    const double e32 = manufactured_error(32), e64 = manufactured_error(64), e128 = manufactured_error(128);
    const double order1 = std::log2(e32 / e64), order2 = std::log2(e64 / e128);
    CHECK(order1 >= 1.9);
    CHECK(order2 >= 1.9);
}

TEST_CASE("uniform concentration is in exact hydrostatic balance") {
    const StructuredGrid g(100.0, 200.0, 48, 96);
    for (double alpha : {0.0, 2.0, 4.0})
        for (double R : {0.0, 2.0}) {
            PhysicalParams p;
            p.alpha = alpha;
            p.R = R;
            const auto sol = solve_pressure(CellField(g, 1.7), p, PressureOptions{});
            CHECK(max_speed(sol.velocity) <= 1e-10);
        }
}

TEST_CASE("horizontally layered density stays at rest") {
    const StructuredGrid g(100.0, 200.0, 24, 48);
    InitialCondition ic;
    ic.perturbation_amplitude = 0.0;
    PhysicalParams p;
    p.alpha = 3.0;
    const auto sol = solve_pressure(initial_condition(g, ic), p, PressureOptions{});
    CHECK(max_speed(sol.velocity) == 0.0);
}

TEST_CASE("a dense blob sinks along gravity and the flow is discretely divergence free") {
    const StructuredGrid g(1.0, 1.0, 32, 32);
    PhysicalParams p;
    for (auto kind : {PreconditionerKind::Multigrid, PreconditionerKind::Jacobi}) {
        PressureOptions opts;
        opts.preconditioner = kind;
        const auto sol = solve_pressure(blob(g), p, opts);
        CHECK(sol.velocity.y(16, 16) < 0.0);
        for (int j = 0; j < g.ny(); ++j) CHECK(sol.velocity.x(0, j) == 0.0);
        const double div = reduce(divergence(sol.velocity), Reduction::Linf);
        CHECK(div <= 10.0 * opts.tol * sol.report.rhs_norm);
        CHECK(sol.report.residual <= opts.tol);
        CHECK(std::abs(reduce(sol.p, Reduction::Mean)) < 1e-12);
    }

    p.g = {0.0, 1.0};
    const auto up = solve_pressure(blob(g), p, PressureOptions{});
    CHECK(up.velocity.y(16, 16) > 0.0);
}

TEST_CASE("velocity recovered from the full pressure matches the solve") {
    const StructuredGrid g(1.0, 1.0, 16, 16);
    const PhysicalParams p;
    const CellField c = blob(g);
    const auto sol = solve_pressure(c, p, PressureOptions{});
    const FaceField u = recover_velocity(sol.p, c, p);
    for (std::size_t k = 0; k < u.yvals.size(); ++k)
        CHECK(u.yvals[k] == doctest::Approx(sol.velocity.yvals[k]).epsilon(1e-9).scale(1e-12));
    const FaceField again = recover_velocity(sol, c, p);
    CHECK(again.yvals == sol.velocity.yvals);
}

TEST_CASE("higher viscosity contrast slows the flow") {
    const StructuredGrid g(1.0, 1.0, 16, 16);
    PhysicalParams slow, fast;
    slow.R = 2.0;
    fast.R = 0.0;
    const CellField c = blob(g);
    CHECK(max_speed(solve_pressure(c, slow, {}).velocity) < max_speed(solve_pressure(c, fast, {}).velocity));
}

TEST_CASE("warm start reuses the previous solution") {
    const StructuredGrid g(1.0, 1.0, 32, 32);
    PressureSolver solver(PressureOptions{});
    const CellField c = blob(g);
    const PhysicalParams p;
    const int first = solver.solve(c, p).report.iterations;
    const int second = solver.solve(c, p).report.iterations;
    CHECK(first > 0);
    CHECK(second < first);
}

TEST_CASE("iteration cap raises a solver error with the residual history") {
    const StructuredGrid g(1.0, 1.0, 64, 64);
    PressureOptions opts;
    opts.preconditioner = PreconditionerKind::Jacobi;
    opts.max_iterations = 2;
    opts.tol = 1e-14;
    try {
        solve_pressure(blob(g), PhysicalParams{}, opts);
        FAIL("expected a solver error");
    } catch (const SolverError& e) {
        CHECK(!e.residual_history().empty());
    }
}

TEST_CASE("non-finite concentration is rejected") {
    const StructuredGrid g(1.0, 1.0, 4, 4);
    CellField c(g, 1.0);
    c(1, 1) = std::nan("");
    CHECK_THROWS_AS(solve_pressure(c, PhysicalParams{}, {}), InvalidArgument);
}
