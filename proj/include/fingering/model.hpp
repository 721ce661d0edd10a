#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace fingering {

/// Model coefficients for Darcy flow coupled to adsorbing, reacting transport.
///
/// All quantities are dimensionless. The record is immutable once validated and
/// can be shared freely between threads.
struct PhysicalParams {
    double K = 1.0;        ///< permeability
    double R = 1.0;        ///< viscosity contrast, mu(c) = exp(R c)
    double alpha = 1.0;    ///< density contrast, rho(c) = 1 + alpha c
    double k = 1.0;        ///< linear adsorption coefficient
    double kappa = 0.0;    ///< first-order reaction rate (constant in space)
    double D = 0.005;      ///< molecular diffusion
    std::array<double, 2> g{0.0, -1.0};  ///< gravity; default points toward -y

    double retardation() const noexcept { return 1.0 + k; }

    /// Human-readable list of violated invariants; empty when the record is valid.
    std::vector<std::string> violations() const;

    /// Throws InvalidArgument listing every violation.
    void validate() const;
};

inline double viscosity(double c, const PhysicalParams& p) noexcept { return std::exp(p.R * c); }

inline double density(double c, const PhysicalParams& p) noexcept { return 1.0 + p.alpha * c; }

/// K / mu(c).
inline double mobility(double c, const PhysicalParams& p) noexcept { return p.K * std::exp(-p.R * c); }

}  // namespace fingering
