#include "fingering/elliptic.hpp"

#include "fingering/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fingering {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s;
}

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

void remove_mean(std::span<double> v) {
    if (v.empty()) return;
    const double mean = compensated_sum(v) / static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

// ---------------------------------------------------------------------------
// DiffusionOperator

DiffusionOperator::DiffusionOperator(const FaceField& w, double shift)
    : grid_(w.grid), nx_(w.grid.nx()), ny_(w.grid.ny()), shift_(shift) {
    if (!(shift >= 0.0) || !std::isfinite(shift)) throw InvalidArgument("DiffusionOperator: shift must be >= 0");
    const double idx2 = 1.0 / (grid_.dx() * grid_.dx());
    const double idy2 = 1.0 / (grid_.dy() * grid_.dy());
    wx_.assign(w.xvals.size(), 0.0);
    wy_.assign(w.yvals.size(), 0.0);
    for (int j = 0; j < ny_; ++j)
        for (int i = 1; i < nx_; ++i) wx_[grid_.xface(i, j)] = w.x(i, j) * idx2;
    for (int j = 1; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i) wy_[grid_.yface(i, j)] = w.y(i, j) * idy2;
    for (double v : wx_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("DiffusionOperator: negative or non-finite coefficient");
    for (double v : wy_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("DiffusionOperator: negative or non-finite coefficient");
    build_diagonal();
}

DiffusionOperator::DiffusionOperator(const StructuredGrid& g, std::vector<double> wx, std::vector<double> wy,
                                     double shift)
    : grid_(g), nx_(g.nx()), ny_(g.ny()), wx_(std::move(wx)), wy_(std::move(wy)), shift_(shift) {
    build_diagonal();
}

void DiffusionOperator::build_diagonal() {
    diag_.assign(static_cast<std::size_t>(nx_) * ny_, shift_);
    for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i)
            diag_[grid_.cell(i, j)] += wx(i, j) + wx(i + 1, j) + wy(i, j) + wy(i, j + 1);
}

void DiffusionOperator::apply(std::span<const double> x, std::span<double> y) const {
    const int nx = nx_;
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t n = static_cast<std::size_t>(j) * nx + i;
            double v = diag_[n] * x[n];
            if (i > 0) v -= wx(i, j) * x[n - 1];
            if (i + 1 < nx) v -= wx(i + 1, j) * x[n + 1];
            if (j > 0) v -= wy(i, j) * x[n - nx];
            if (j + 1 < ny_) v -= wy(i, j + 1) * x[n + nx];
            y[n] = v;
        }
    }
}

void DiffusionOperator::gauss_seidel(std::span<const double> b, std::span<double> x, bool forward) const {
    const int nx = nx_;
    auto relax = [&](int i, int j) {
        const std::size_t n = static_cast<std::size_t>(j) * nx + i;
        double v = b[n];
        if (i > 0) v += wx(i, j) * x[n - 1];
        if (i + 1 < nx) v += wx(i + 1, j) * x[n + 1];
        if (j > 0) v += wy(i, j) * x[n - nx];
        if (j + 1 < ny_) v += wy(i, j + 1) * x[n + nx];
        x[n] = v / diag_[n];
    };
    if (forward) {
        for (int j = 0; j < ny_; ++j)
            for (int i = 0; i < nx; ++i) relax(i, j);
    } else {
        for (int j = ny_ - 1; j >= 0; --j)
            for (int i = nx - 1; i >= 0; --i) relax(i, j);
    }
}

bool DiffusionOperator::can_coarsen() const noexcept {
    return nx_ % 2 == 0 && ny_ % 2 == 0 && nx_ / 2 >= 2 && ny_ / 2 >= 2;
}

DiffusionOperator DiffusionOperator::coarsen() const {
    if (!can_coarsen()) throw InvalidArgument("DiffusionOperator::coarsen: grid not divisible by two");
    const int NX = nx_ / 2, NY = ny_ / 2;
    StructuredGrid cg(grid_.Lx(), grid_.Ly(), NX, NY);
    // Fine coefficients carry 1/h^2; the coarse spacing is 2h, hence the extra 1/4.
    std::vector<double> cwx(static_cast<std::size_t>(NX + 1) * NY, 0.0);
    std::vector<double> cwy(static_cast<std::size_t>(NX) * (NY + 1), 0.0);
    for (int J = 0; J < NY; ++J)
        for (int I = 1; I < NX; ++I)
            cwx[cg.xface(I, J)] = 0.125 * (wx(2 * I, 2 * J) + wx(2 * I, 2 * J + 1));
    for (int J = 1; J < NY; ++J)
        for (int I = 0; I < NX; ++I)
            cwy[cg.yface(I, J)] = 0.125 * (wy(2 * I, 2 * J) + wy(2 * I + 1, 2 * J));
    return DiffusionOperator(cg, std::move(cwx), std::move(cwy), shift_);
}

// ---------------------------------------------------------------------------
// Preconditioners

JacobiPreconditioner::JacobiPreconditioner(const DiffusionOperator& A) : inv_diag_(A.size()) {
    for (std::size_t n = 0; n < A.size(); ++n) inv_diag_[n] = 1.0 / A.diagonal(n);
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    for (std::size_t n = 0; n < r.size(); ++n) z[n] = inv_diag_[n] * r[n];
}

namespace {

constexpr std::size_t kDenseCoarseLimit = 256;
constexpr std::size_t kCoarsenAbove = 64;
constexpr int kCoarseSweeps = 12;

/// Dense Cholesky of the coarsest operator. A singular operator is regularised
/// by adding c * 1 1^T, which leaves zero-mean solutions unchanged.
class DenseCoarseSolver {
public:
    explicit DenseCoarseSolver(const DiffusionOperator& A) : n_(A.size()), L_(n_ * n_, 0.0) {
        std::vector<double> e(n_, 0.0), col(n_);
        for (std::size_t c = 0; c < n_; ++c) {
            e[c] = 1.0;
            A.apply(e, col);
            e[c] = 0.0;
            for (std::size_t r = 0; r < n_; ++r) L_[r * n_ + c] = col[r];
        }
        if (A.singular()) {
            double mean_diag = 0.0;
            for (std::size_t i = 0; i < n_; ++i) mean_diag += A.diagonal(i);
            const double shift = mean_diag / static_cast<double>(n_ * n_);
            for (double& v : L_) v += shift;
        }
        for (std::size_t j = 0; j < n_; ++j) {
            double d = L_[j * n_ + j];
            for (std::size_t k = 0; k < j; ++k) d -= L_[j * n_ + k] * L_[j * n_ + k];
            if (!(d > 0.0)) throw SolverError("coarse-grid Cholesky failed: matrix not positive definite", {});
            d = std::sqrt(d);
            L_[j * n_ + j] = d;
            for (std::size_t i = j + 1; i < n_; ++i) {
                double s = L_[i * n_ + j];
                for (std::size_t k = 0; k < j; ++k) s -= L_[i * n_ + k] * L_[j * n_ + k];
                L_[i * n_ + j] = s / d;
            }
        }
    }

    void solve(std::span<const double> b, std::span<double> x) const {
        for (std::size_t i = 0; i < n_; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= L_[i * n_ + k] * x[k];
            x[i] = s / L_[i * n_ + i];
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            double s = x[ii];
            for (std::size_t k = ii + 1; k < n_; ++k) s -= L_[k * n_ + ii] * x[k];
            x[ii] = s / L_[ii * n_ + ii];
        }
    }

private:
    std::size_t n_;
    std::vector<double> L_;
};

}  // namespace

struct MultigridPreconditioner::Hierarchy {
    std::vector<DiffusionOperator> ops;
    std::unique_ptr<DenseCoarseSolver> dense;
    int sweeps = 2;
    // Per-level scratch; apply() is logically const but not reentrant.
    mutable std::vector<std::vector<double>> b, x, r;

    void vcycle(std::size_t level) const {
        const auto& A = ops[level];
        auto& bl = b[level];
        auto& xl = x[level];
        std::fill(xl.begin(), xl.end(), 0.0);
        if (level + 1 == ops.size()) {
            if (A.singular()) remove_mean(bl);
            if (dense) {
                dense->solve(bl, xl);
            } else {
                for (int s = 0; s < kCoarseSweeps; ++s) {
                    A.gauss_seidel(bl, xl, true);
                    A.gauss_seidel(bl, xl, false);
                }
            }
            if (A.singular()) remove_mean(xl);
            return;
        }
        for (int s = 0; s < sweeps; ++s) A.gauss_seidel(bl, xl, true);
        auto& rl = r[level];
        A.apply(xl, rl);
        for (std::size_t n = 0; n < rl.size(); ++n) rl[n] = bl[n] - rl[n];

        const int nx = A.nx();
        const auto& C = ops[level + 1];
        const int NX = C.nx(), NY = C.ny();
        auto& bc = b[level + 1];
        for (int J = 0; J < NY; ++J)
            for (int I = 0; I < NX; ++I) {
                const std::size_t f = static_cast<std::size_t>(2 * J) * nx + 2 * I;
                bc[static_cast<std::size_t>(J) * NX + I] = 0.25 * (rl[f] + rl[f + 1] + rl[f + nx] + rl[f + nx + 1]);
            }
        vcycle(level + 1);
        const auto& xc = x[level + 1];
        for (int J = 0; J < NY; ++J)
            for (int I = 0; I < NX; ++I) {
                const double e = xc[static_cast<std::size_t>(J) * NX + I];
                const std::size_t f = static_cast<std::size_t>(2 * J) * nx + 2 * I;
                xl[f] += e;
                xl[f + 1] += e;
                xl[f + nx] += e;
                xl[f + nx + 1] += e;
            }
        for (int s = 0; s < sweeps; ++s) A.gauss_seidel(bl, xl, false);
    }
};

MultigridPreconditioner::MultigridPreconditioner(const DiffusionOperator& A, int smoothing_sweeps)
    : h_(std::make_unique<Hierarchy>()) {
    h_->sweeps = smoothing_sweeps;
    h_->ops.push_back(A);
    while (h_->ops.back().size() > kCoarsenAbove && h_->ops.back().can_coarsen())
        h_->ops.push_back(h_->ops.back().coarsen());
    if (h_->ops.back().size() <= kDenseCoarseLimit) h_->dense = std::make_unique<DenseCoarseSolver>(h_->ops.back());
    for (const auto& op : h_->ops) {
        h_->b.emplace_back(op.size());
        h_->x.emplace_back(op.size());
        h_->r.emplace_back(op.size());
    }
}

MultigridPreconditioner::~MultigridPreconditioner() = default;

std::size_t MultigridPreconditioner::levels() const noexcept { return h_->ops.size(); }

void MultigridPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    std::copy(r.begin(), r.end(), h_->b[0].begin());
    h_->vcycle(0);
    std::copy(h_->x[0].begin(), h_->x[0].end(), z.begin());
}

std::unique_ptr<Preconditioner> make_preconditioner(const DiffusionOperator& A, PreconditionerKind kind) {
    if (kind == PreconditionerKind::Multigrid) return std::make_unique<MultigridPreconditioner>(A);
    return std::make_unique<JacobiPreconditioner>(A);
}

// ---------------------------------------------------------------------------
// Conjugate gradients

CgReport conjugate_gradient(const DiffusionOperator& A, const Preconditioner& M, std::span<const double> b,
                            std::span<double> x, double tol, int max_iterations) {
    const std::size_t n = A.size();
    const bool singular = A.singular();
    CgReport rep;
    const double bnorm = norm_inf(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return rep;
    }
    if (singular) remove_mean(x);

    std::vector<double> r(n), z(n), p(n), q(n);
    auto true_residual = [&] {
        A.apply(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        if (singular) remove_mean(r);
        return norm_inf(r) / bnorm;
    };
    auto precondition = [&] {
        M.apply(r, z);
        if (singular) remove_mean(z);
        return dot(r, z);
    };

    rep.residual = true_residual();
    if (rep.residual <= tol) return rep;
    double rz = precondition();
    p = z;

    for (int it = 1; it <= max_iterations; ++it) {
        A.apply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) break;
        const double a = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += a * p[i];
            r[i] -= a * q[i];
        }
        if (singular) remove_mean(r);
        rep.iterations = it;
        rep.residual = norm_inf(r) / bnorm;
        rep.history.push_back(rep.residual);
        if (rep.residual <= tol) {
            // Guard against drift of the recursively updated residual.
            rep.residual = true_residual();
            if (rep.residual <= tol) {
                if (singular) remove_mean(x);
                return rep;
            }
            rz = precondition();
            p = z;
            continue;
        }
        const double rz_new = precondition();
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("conjugate gradients did not converge: relative residual " + std::to_string(rep.residual) +
                          " after " + std::to_string(rep.iterations) + " iterations (tol " + std::to_string(tol) + ")",
                      rep.history);
}

}  // namespace fingering
