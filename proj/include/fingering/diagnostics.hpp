#pragma once

#include "fingering/grid.hpp"
#include "fingering/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fingering {

/// One diagnostic sample.
struct Sample {
    double t = 0.0;
    double energy = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> mixing;  ///< absent when the initial variance is zero
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
};

/// Column-oriented diagnostic history.
struct TimeSeries {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<std::optional<double>> mixing;
    std::vector<double> l1;
    std::vector<double> l2;
    std::vector<double> linf;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }
    void push_back(const Sample& s);
    Sample at(std::size_t n) const;

    /// Violated invariants (time ordering, finiteness, mixing range); empty if valid.
    std::vector<std::string> violations() const;
};

/// Integral of |u|^2 with face values averaged to cell centres.
double kinetic_energy(const FaceField& u);

struct MixingStats {
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> mixing;
};

/// mean, variance, and chi = 1 - var/sigma0_sq (absent unless sigma0_sq > 0).
MixingStats mixing_stats(const CellField& c, double sigma0_sq);

/// Full sample of a concentration/velocity pair.
Sample sample_state(double t, const CellField& c, const FaceField& u, double sigma0_sq);

enum class DecayNorm { L1, Lp, L2Squared };

/// kappa/(1+k) for any L^p norm; twice that for the squared L2 norm.
double theoretical_decay_rate(const PhysicalParams& params, DecayNorm norm);

struct EnergyBound {
    double value = 0.0;
    bool valid = true;   ///< false when min(c0) < 1, K != 1 or |g| != 1
    std::string reason;  ///< why the bound does not apply, if it does not
};

/// e^{-2R} (|Omega| + 2 alpha int c0 + alpha^2 ||c0||^2).
EnergyBound energy_upper_bound(const PhysicalParams& params, const CellField& c0);

enum class PoincareVariant { Linear, Dimensional };

/// max(Lx, Ly)/pi.
double poincare_constant(const StructuredGrid& grid);

/// 1 - exp(-2 D t / (M (1+k))) for Linear, 1 - exp(-2 D t / (M^2 (1+k))) for Dimensional.
double mixing_lower_bound(double t, const PhysicalParams& params, const StructuredGrid& grid, PoincareVariant variant);

struct DecayFit {
    double rate = 0.0;       ///< -slope of log(values) vs t
    double intercept = 0.0;  ///< log-space intercept at t = 0
    double t_begin = 0.0;
    double t_end = 0.0;
    double residual = 0.0;   ///< RMS of log residuals
    std::size_t samples = 0;
};

/// Ordinary least squares on log(values) over samples with t1 <= t <= t2.
/// Throws InvalidArgument when fewer than three samples fall inside the window
/// or a value in the window is not strictly positive.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, double t1, double t2);

/// Window covering the last `fraction` of the sampled time span.
std::pair<double, double> trailing_window(std::span<const double> times, double fraction = 0.5);

}  // namespace fingering
