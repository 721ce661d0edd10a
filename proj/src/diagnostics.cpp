#include "fingering/diagnostics.hpp"

#include "fingering/error.hpp"

#include <cmath>
#include <numbers>

namespace fingering {

void TimeSeries::push_back(const Sample& s) {
    times.push_back(s.t);
    energy.push_back(s.energy);
    mean.push_back(s.mean);
    variance.push_back(s.variance);
    mixing.push_back(s.mixing);
    l1.push_back(s.l1);
    l2.push_back(s.l2);
    linf.push_back(s.linf);
}

Sample TimeSeries::at(std::size_t n) const {
    return {times.at(n), energy.at(n), mean.at(n), variance.at(n), mixing.at(n), l1.at(n), l2.at(n), linf.at(n)};
}

std::vector<std::string> TimeSeries::violations() const {
    constexpr double eps = 1e-9;
    std::vector<std::string> out;
    for (std::size_t n = 0; n < size(); ++n) {
        const auto s = at(n);
        const std::string where = " at sample " + std::to_string(n);
        if (n > 0 && !(times[n] > times[n - 1])) out.push_back("times not strictly increasing" + where);
        for (double v : {s.t, s.energy, s.mean, s.variance, s.l1, s.l2, s.linf})
            if (!std::isfinite(v)) {
                out.push_back("non-finite entry" + where);
                break;
            }
        if (s.mixing && !(*s.mixing >= -eps && *s.mixing <= 1.0 + eps)) out.push_back("mixing outside [0, 1]" + where);
    }
    return out;
}

double kinetic_energy(const FaceField& u) {
    const auto& g = u.grid;
    std::vector<double> e(g.cells());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double uc = 0.5 * (u.x(i, j) + u.x(i + 1, j));
            const double vc = 0.5 * (u.y(i, j) + u.y(i, j + 1));
            e[g.cell(i, j)] = uc * uc + vc * vc;
        }
    return compensated_sum(e) * g.cell_volume();
}

MixingStats mixing_stats(const CellField& c, double sigma0_sq) {
    MixingStats s;
    s.mean = reduce(c, Reduction::Mean);
    s.variance = reduce(c, Reduction::Variance);
    if (sigma0_sq > 0.0) s.mixing = 1.0 - s.variance / sigma0_sq;
    return s;
}

Sample sample_state(double t, const CellField& c, const FaceField& u, double sigma0_sq) {
    const auto m = mixing_stats(c, sigma0_sq);
    return {t,        kinetic_energy(u),          m.mean,
            m.variance, m.mixing,                 reduce(c, Reduction::L1),
            reduce(c, Reduction::L2), reduce(c, Reduction::Linf)};
}

double theoretical_decay_rate(const PhysicalParams& params, DecayNorm norm) {
    const double per_norm = params.kappa / params.retardation();
    return norm == DecayNorm::L2Squared ? 2.0 * per_norm : per_norm;
}

EnergyBound energy_upper_bound(const PhysicalParams& params, const CellField& c0) {
    const double area = c0.grid.area();
    const double integral = reduce(c0, Reduction::Integral);
    const double l2 = reduce(c0, Reduction::L2);
    const double a = params.alpha;
    EnergyBound b;
    b.value = std::exp(-2.0 * params.R) * (area + 2.0 * a * integral + a * a * l2 * l2);
    auto fail = [&](const char* why) {
        b.valid = false;
        if (!b.reason.empty()) b.reason += "; ";
        b.reason += why;
    };
    if (min_value(c0) < 1.0) fail("initial concentration drops below 1");
    if (params.K != 1.0) fail("bound assumes K = 1");
    if (std::abs(std::hypot(params.g[0], params.g[1]) - 1.0) > 1e-12) fail("bound assumes |g| = 1");
    return b;
}

double poincare_constant(const StructuredGrid& grid) { return std::max(grid.Lx(), grid.Ly()) / std::numbers::pi; }

double mixing_lower_bound(double t, const PhysicalParams& params, const StructuredGrid& grid, PoincareVariant variant) {
    const double M = poincare_constant(grid);
    const double scale = variant == PoincareVariant::Linear ? M : M * M;
    return 1.0 - std::exp(-2.0 * params.D * t / (scale * params.retardation()));
}

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, double t1, double t2) {
    if (times.size() != values.size()) throw InvalidArgument("fit_decay_rate: times and values differ in length");
    if (!(t1 < t2)) throw InvalidArgument("fit_decay_rate: empty window");
    std::vector<double> ts, ys;
    for (std::size_t n = 0; n < times.size(); ++n) {
        if (times[n] < t1 || times[n] > t2) continue;
        if (!(values[n] > 0.0) || !std::isfinite(values[n]))
            throw InvalidArgument("fit_decay_rate: non-positive value at t = " + std::to_string(times[n]));
        ts.push_back(times[n]);
        ys.push_back(std::log(values[n]));
    }
    if (ts.size() < 3) throw InvalidArgument("fit_decay_rate: fewer than 3 samples in window");

    const double n = static_cast<double>(ts.size());
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        tm += ts[i];
        ym += ys[i];
    }
    tm /= n;
    ym /= n;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - tm) * (ts[i] - tm);
        sty += (ts[i] - tm) * (ys[i] - ym);
    }
    const double slope = sty / stt;
    DecayFit fit;
    fit.rate = -slope;
    fit.intercept = ym - slope * tm;
    fit.t_begin = ts.front();
    fit.t_end = ts.back();
    fit.samples = ts.size();
    double ss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = ys[i] - (fit.intercept + slope * ts[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

std::pair<double, double> trailing_window(std::span<const double> times, double fraction) {
    if (times.empty()) throw InvalidArgument("trailing_window: no samples");
    const double t0 = times.front(), t1 = times.back();
    return {t1 - fraction * (t1 - t0), t1};
}

}  // namespace fingering
