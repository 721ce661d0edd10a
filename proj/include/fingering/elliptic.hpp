#pragma once

#include "fingering/grid.hpp"

#include <memory>
#include <span>
#include <vector>

namespace fingering {

/// Cell-centred operator  A x = shift * x - div(w grad x)  with zero-flux walls.
///
/// `w` lives on faces; boundary-face entries are ignored. With shift == 0 the
/// operator is singular (constants span the null space) and every solve is done
/// on the zero-mean subspace.
class DiffusionOperator {
public:
    DiffusionOperator(const FaceField& w, double shift = 0.0);

    const StructuredGrid& grid() const noexcept { return grid_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return diag_.size(); }
    double shift() const noexcept { return shift_; }
    bool singular() const noexcept { return shift_ == 0.0; }

    void apply(std::span<const double> x, std::span<double> y) const;
    double diagonal(std::size_t n) const noexcept { return diag_[n]; }

    /// One lexicographic Gauss-Seidel sweep, forward or backward.
    void gauss_seidel(std::span<const double> b, std::span<double> x, bool forward) const;

    /// Operator on the 2x coarser grid (face coefficients averaged along each coarse face).
    DiffusionOperator coarsen() const;
    bool can_coarsen() const noexcept;

    /// Coefficient of the x-face between (i-1, j) and (i, j), pre-divided by dx^2.
    double wx(int i, int j) const noexcept { return wx_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
    double wy(int i, int j) const noexcept { return wy_[static_cast<std::size_t>(j) * nx_ + i]; }

private:
    DiffusionOperator(const StructuredGrid& g, std::vector<double> wx, std::vector<double> wy, double shift);
    void build_diagonal();

    StructuredGrid grid_;
    int nx_, ny_;
    std::vector<double> wx_, wy_, diag_;
    double shift_;
};

/// Symmetric preconditioner interface: z = M^{-1} r.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

class JacobiPreconditioner final : public Preconditioner {
public:
    explicit JacobiPreconditioner(const DiffusionOperator& A);
    void apply(std::span<const double> r, std::span<double> z) const override;

private:
    std::vector<double> inv_diag_;
};

/// One geometric multigrid V-cycle on cell-centred 2:1 coarsening.
///
/// Piecewise-constant prolongation, averaging restriction, rediscretised coarse
/// operators. Pre-smoothing is forward Gauss-Seidel and post-smoothing the
/// backward sweep, so the cycle is a symmetric operator and valid inside CG.
class MultigridPreconditioner final : public Preconditioner {
public:
    explicit MultigridPreconditioner(const DiffusionOperator& A, int smoothing_sweeps = 2);
    ~MultigridPreconditioner() override;

    void apply(std::span<const double> r, std::span<double> z) const override;
    std::size_t levels() const noexcept;

private:
    struct Hierarchy;
    std::unique_ptr<Hierarchy> h_;
};

enum class PreconditionerKind { Jacobi, Multigrid };

std::unique_ptr<Preconditioner> make_preconditioner(const DiffusionOperator& A, PreconditionerKind kind);

struct CgReport {
    int iterations = 0;
    double residual = 0.0;        ///< final ||b - Ax||_inf / ||b||_inf
    std::vector<double> history;  ///< relative residual after every iteration
};

/// Preconditioned conjugate gradients, stopping on ||b - A x||_inf <= tol ||b||_inf.
///
/// For a singular operator the right-hand side is assumed to be zero-mean already
/// and iterates are kept in the zero-mean subspace. `x` holds the initial guess on
/// entry. Throws SolverError after `max_iterations`.
CgReport conjugate_gradient(const DiffusionOperator& A, const Preconditioner& M, std::span<const double> b,
                            std::span<double> x, double tol, int max_iterations);

void remove_mean(std::span<double> v);

}  // namespace fingering
