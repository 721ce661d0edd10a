#include "fingering/grid.hpp"

#include "fingering/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fingering {

StructuredGrid::StructuredGrid(double Lx, double Ly, int nx, int ny)
    : Lx_(Lx), Ly_(Ly), nx_(nx), ny_(ny), dx_(Lx / nx), dy_(Ly / ny) {
    if (!(std::isfinite(Lx) && Lx > 0.0) || !(std::isfinite(Ly) && Ly > 0.0))
        throw InvalidArgument("grid extents must be finite and positive");
    if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2 cells per direction");
}

void require_same_grid(const StructuredGrid& a, const StructuredGrid& b, const char* where) {
    if (!(a == b)) throw InvalidArgument(std::string(where) + ": mismatched grids");
}

void FaceField::zero_boundary_normals() noexcept {
    const int nx = grid.nx(), ny = grid.ny();
    for (int j = 0; j < ny; ++j) {
        x(0, j) = 0.0;
        x(nx, j) = 0.0;
    }
    for (int i = 0; i < nx; ++i) {
        y(i, 0) = 0.0;
        y(i, ny) = 0.0;
    }
}

FaceField gradient_at_faces(const CellField& f) {
    const auto& g = f.grid;
    const int nx = g.nx(), ny = g.ny();
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    FaceField out(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) out.x(i, j) = (f(i, j) - f(i - 1, j)) * idx;
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) out.y(i, j) = (f(i, j) - f(i, j - 1)) * idy;
    return out;
}

CellField divergence(const FaceField& F) {
    const auto& g = F.grid;
    const int nx = g.nx(), ny = g.ny();
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    CellField out(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            out(i, j) = (F.x(i + 1, j) - F.x(i, j)) * idx + (F.y(i, j + 1) - F.y(i, j)) * idy;
    return out;
}

namespace {

template <class Avg>
FaceField face_average(const CellField& f, Avg avg) {
    const auto& g = f.grid;
    const int nx = g.nx(), ny = g.ny();
    FaceField out(g);
    for (int j = 0; j < ny; ++j) {
        out.x(0, j) = f(0, j);
        for (int i = 1; i < nx; ++i) out.x(i, j) = avg(f(i - 1, j), f(i, j));
        out.x(nx, j) = f(nx - 1, j);
    }
    for (int i = 0; i < nx; ++i) {
        out.y(i, 0) = f(i, 0);
        out.y(i, ny) = f(i, ny - 1);
    }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) out.y(i, j) = avg(f(i, j - 1), f(i, j));
    return out;
}

}  // namespace

FaceField face_harmonic_mean(const CellField& f) {
    for (double v : f.values)
        if (!(v > 0.0)) throw InvalidArgument("face_harmonic_mean: non-positive cell value");
    return face_average(f, [](double a, double b) { return a == b ? a : 2.0 * a * b / (a + b); });
}

FaceField face_arithmetic_mean(const CellField& f) {
    return face_average(f, [](double a, double b) { return 0.5 * (a + b); });
}

double compensated_sum(std::span<const double> v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

double reduce(const CellField& f, Reduction kind) {
    const double vol = f.grid.cell_volume();
    const auto& v = f.values;
    switch (kind) {
        case Reduction::Integral:
            return compensated_sum(v) * vol;
        case Reduction::Mean:
            return compensated_sum(v) / static_cast<double>(v.size());
        case Reduction::L1: {
            std::vector<double> a(v.size());
            std::transform(v.begin(), v.end(), a.begin(), [](double x) { return std::abs(x); });
            return compensated_sum(a) * vol;
        }
        case Reduction::L2: {
            std::vector<double> a(v.size());
            std::transform(v.begin(), v.end(), a.begin(), [](double x) { return x * x; });
            return std::sqrt(compensated_sum(a) * vol);
        }
        case Reduction::Linf: {
            double m = 0.0;
            for (double x : v) m = std::max(m, std::abs(x));
            return m;
        }
        case Reduction::Variance: {
            const double mean = compensated_sum(v) / static_cast<double>(v.size());
            std::vector<double> a(v.size());
            std::transform(v.begin(), v.end(), a.begin(), [mean](double x) { return (x - mean) * (x - mean); });
            return compensated_sum(a) / static_cast<double>(v.size());
        }
    }
    return 0.0;
}

double min_value(const CellField& f) { return *std::min_element(f.values.begin(), f.values.end()); }
double max_value(const CellField& f) { return *std::max_element(f.values.begin(), f.values.end()); }

double inner(const CellField& a, const CellField& b) {
    require_same_grid(a.grid, b.grid, "inner");
    std::vector<double> p(a.values.size());
    for (std::size_t n = 0; n < p.size(); ++n) p[n] = a.values[n] * b.values[n];
    return compensated_sum(p) * a.grid.cell_volume();
}

double inner(const FaceField& a, const FaceField& b) {
    require_same_grid(a.grid, b.grid, "inner");
    std::vector<double> p;
    p.reserve(a.xvals.size() + a.yvals.size());
    for (std::size_t n = 0; n < a.xvals.size(); ++n) p.push_back(a.xvals[n] * b.xvals[n]);
    for (std::size_t n = 0; n < a.yvals.size(); ++n) p.push_back(a.yvals[n] * b.yvals[n]);
    return compensated_sum(p) * a.grid.cell_volume();
}

}  // namespace fingering
