#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fingering {

/// Uniform cell-centred rectangular grid on (0, Lx) x (0, Ly).
///
/// Cell (i, j) has centre ((i + 1/2) dx, (j + 1/2) dy). Vertical faces are indexed
/// i = 0..nx (face i sits at x = i dx, between cells i-1 and i); horizontal faces
/// j = 0..ny likewise in y.
class StructuredGrid {
public:
    StructuredGrid(double Lx, double Ly, int nx, int ny);

    double Lx() const noexcept { return Lx_; }
    double Ly() const noexcept { return Ly_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    double dx() const noexcept { return dx_; }
    double dy() const noexcept { return dy_; }
    double cell_volume() const noexcept { return dx_ * dy_; }
    double area() const noexcept { return Lx_ * Ly_; }
    std::size_t cells() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }

    double xc(int i) const noexcept { return (i + 0.5) * dx_; }
    double yc(int j) const noexcept { return (j + 0.5) * dy_; }

    std::size_t cell(int i, int j) const noexcept { return static_cast<std::size_t>(j) * nx_ + i; }
    std::size_t xface(int i, int j) const noexcept { return static_cast<std::size_t>(j) * (nx_ + 1) + i; }
    std::size_t yface(int i, int j) const noexcept { return static_cast<std::size_t>(j) * nx_ + i; }

    bool operator==(const StructuredGrid&) const = default;

private:
    double Lx_, Ly_;
    int nx_, ny_;
    double dx_, dy_;
};

/// Scalar sampled at cell centres.
struct CellField {
    explicit CellField(const StructuredGrid& g, double fill = 0.0) : grid(g), values(g.cells(), fill) {}

    double& operator()(int i, int j) noexcept { return values[grid.cell(i, j)]; }
    double operator()(int i, int j) const noexcept { return values[grid.cell(i, j)]; }

    StructuredGrid grid;
    std::vector<double> values;
};

/// Normal vector components sampled on the staggered faces.
struct FaceField {
    explicit FaceField(const StructuredGrid& g, double fill = 0.0)
        : grid(g),
          xvals(static_cast<std::size_t>(g.nx() + 1) * g.ny(), fill),
          yvals(static_cast<std::size_t>(g.nx()) * (g.ny() + 1), fill) {}

    double& x(int i, int j) noexcept { return xvals[grid.xface(i, j)]; }
    double x(int i, int j) const noexcept { return xvals[grid.xface(i, j)]; }
    double& y(int i, int j) noexcept { return yvals[grid.yface(i, j)]; }
    double y(int i, int j) const noexcept { return yvals[grid.yface(i, j)]; }

    /// Sets every boundary-normal entry to zero (no-flux walls).
    void zero_boundary_normals() noexcept;

    StructuredGrid grid;
    std::vector<double> xvals;
    std::vector<double> yvals;
};

/// Interior face value (f_R - f_L)/h; boundary faces are zero (homogeneous Neumann).
FaceField gradient_at_faces(const CellField& f);

/// (Fx[i+1] - Fx[i])/dx + (Fy[j+1] - Fy[j])/dy per cell.
CellField divergence(const FaceField& F);

/// 2 fL fR / (fL + fR) on interior faces; boundary faces copy the adjacent cell.
/// Throws InvalidArgument on a non-positive cell value.
FaceField face_harmonic_mean(const CellField& f);

/// (fL + fR)/2 on interior faces; boundary faces copy the adjacent cell.
FaceField face_arithmetic_mean(const CellField& f);

enum class Reduction { Integral, Mean, L1, L2, Linf, Variance };

double reduce(const CellField& f, Reduction kind);

double min_value(const CellField& f);
double max_value(const CellField& f);

/// Volume-weighted inner products; the face product weights every face by dx dy.
double inner(const CellField& a, const CellField& b);
double inner(const FaceField& a, const FaceField& b);

/// Neumaier-compensated sum; the reduction order is fixed, so results are reproducible.
double compensated_sum(std::span<const double> v);

void require_same_grid(const StructuredGrid& a, const StructuredGrid& b, const char* where);

}  // namespace fingering
