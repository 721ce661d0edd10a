#include "fingering/simulation.hpp"

#include "fingering/error.hpp"
#include "fingering/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fingering {

std::vector<std::string> RunConfig::violations() const {
    std::vector<std::string> out = params.violations();
    for (auto& v : ic.violations()) out.push_back(std::move(v));
    auto check = [&](bool ok, const char* msg) {
        if (!ok) out.emplace_back(msg);
    };
    check(std::isfinite(grid.Lx) && grid.Lx > 0.0, "Lx must be > 0");
    check(std::isfinite(grid.Ly) && grid.Ly > 0.0, "Ly must be > 0");
    check(grid.nx >= 2, "nx must be >= 2");
    check(grid.ny >= 2, "ny must be >= 2");
    check(ic.interface_y > 0.0 && ic.interface_y < grid.Ly, "interface_y must lie in (0, Ly)");
    check(std::isfinite(T_end) && T_end > 0.0, "T_end must be > 0");
    check(std::isfinite(sample_interval) && sample_interval > 0.0, "sample_interval must be > 0");
    check(std::isfinite(dt_max) && dt_max > 0.0, "dt_max must be > 0");
    check(safety > 0.0 && safety <= 1.0, "safety must lie in (0, 1]");
    check(pressure_tol > 0.0 && pressure_tol < 1.0, "pressure_tol must lie in (0, 1)");
    check(transport_tol > 0.0 && transport_tol < 1.0, "transport_tol must lie in (0, 1)");
    check(pressure_every >= 1, "pressure_every must be >= 1");
    check(output.snapshot_every >= 0, "snapshot_every must be >= 0");
    return out;
}

void RunConfig::validate() const {
    if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
}

namespace {

constexpr double kBoundSlack = 1e-8;
constexpr double kNonNegativeSlack = 1e-10;
constexpr double kMassLawTol = 1e-11;
constexpr double kMixingSlack = 1e-9;
constexpr double kL2Slack = 1e-10;

class Runner {
public:
    Runner(const RunConfig& cfg, const Sinks& sinks)
        : cfg_(cfg),
          sinks_(sinks),
          grid_(cfg.make_grid()),
          pressure_(PressureOptions{cfg.pressure_tol, cfg.preconditioner, 0}),
          state_{0.0, CellField(grid_), CellField(grid_), FaceField(grid_), 0, {}} {}

    RunResult execute() {
        state_.c = initial_condition(grid_, cfg_.ic);
        c0_min_ = min_value(state_.c);
        c0_max_ = max_value(state_.c);
        if (c0_min_ < 0.0) throw InvariantViolation("initial concentration is negative");
        state_.stats.min_c = c0_min_;
        state_.stats.max_c = c0_max_;
        sigma0_ = reduce(state_.c, Reduction::Variance);
        result_.initial_variance = sigma0_;

        solve_pressure_now();
        record_sample();

        const double h = cfg_.sample_interval;
        const long n_samples = static_cast<long>(std::ceil(cfg_.T_end / h - 1e-9));
        for (long n = 1; n <= n_samples; ++n) {
            const double target = std::min(static_cast<double>(n) * h, cfg_.T_end);
            bool reached = false;
            while (!reached) {
                double dt = stable_dt(state_.u, cfg_.params, cfg_.safety, cfg_.dt_max);
                if (state_.t + dt >= target - 1e-9 * h) {
                    dt = target - state_.t;
                    reached = true;
                }
                step(dt);
                state_.t = reached ? target : state_.t + dt;
                if (reached || state_.step_count % cfg_.pressure_every == 0) solve_pressure_now();
            }
            record_sample();
        }
        result_.state = std::move(state_);
        return std::move(result_);
    }

private:
    void solve_pressure_now() {
        try {
            const auto& sol = pressure_.solve(state_.c, cfg_.params);
            state_.p = sol.p;
            state_.u = sol.velocity;
            auto& st = state_.stats;
            st.pressure_solves++;
            st.pressure_iterations += sol.report.iterations;
            st.max_compatibility_defect = std::max(st.max_compatibility_defect, sol.report.compatibility_defect);
            const double div = reduce(divergence(state_.u), Reduction::Linf);
            st.max_divergence = std::max(st.max_divergence, div);
            const double scale = cfg_.pressure_tol * sol.report.rhs_norm;
            if (div > 0.0) st.max_divergence_ratio = std::max(st.max_divergence_ratio, scale > 0.0 ? div / scale : INFINITY);
        } catch (const SolverError& e) {
            throw SolverError("pressure solve failed at step " + std::to_string(state_.step_count) + ": " + e.what(),
                              e.residual_history());
        }
    }

    void step(double dt) {
        const double mass_before = reduce(state_.c, Reduction::Integral);
        const double l2_before = reduce(state_.c, Reduction::L2);
        TransportResult res = [&] {
            try {
                return advance(state_.c, state_.u, dt, cfg_.params, cfg_.transport_tol);
            } catch (const SolverError& e) {
                throw SolverError("transport solve failed at step " + std::to_string(state_.step_count) + ": " +
                                      e.what(),
                                  e.residual_history());
            } catch (const InvariantViolation& e) {
                throw InvariantViolation("step " + std::to_string(state_.step_count) + ": " + e.what());
            }
        }();
        state_.c = std::move(res.c);
        state_.step_count++;
        check_step(res.report, mass_before, l2_before);
        if (sinks_.on_step) sinks_.on_step(state_, res.report);
    }

    void check_step(const StepReport& r, double mass_before, double l2_before) {
        auto& st = state_.stats;
        st.transport_iterations += r.iterations;
        st.max_cfl = std::max(st.max_cfl, r.cfl);
        st.min_c = std::min(st.min_c, r.c_min);
        st.max_c = std::max(st.max_c, r.c_max);

        const auto& p = cfg_.params;
        const double storage = p.retardation() / r.dt;
        const double expected = mass_before * storage / (storage + reaction_coefficient(p, r.dt));
        const double defect = std::abs(r.mass - expected) / std::max(std::abs(mass_before), 1e-300);
        st.max_mass_defect = std::max(st.max_mass_defect, defect);

        auto fail = [&](const std::string& what) {
            throw InvariantViolation("step " + std::to_string(state_.step_count) + " (t = " +
                                     std::to_string(state_.t) + "): " + what);
        };
        if (!std::isfinite(r.c_min) || !std::isfinite(r.c_max)) fail("non-finite concentration");
        if (p.kappa == 0.0 && r.c_min < c0_min_ - kBoundSlack)
            fail("maximum principle: min c = " + std::to_string(r.c_min) + " below initial minimum");
        if (r.c_max > c0_max_ + kBoundSlack)
            fail("maximum principle: max c = " + std::to_string(r.c_max) + " above initial maximum");
        if (r.c_min < -kNonNegativeSlack) fail("negative concentration " + std::to_string(r.c_min));
        if (p.kappa == 0.0) {
            const double growth = reduce(state_.c, Reduction::L2) - l2_before;
            st.max_l2_growth = std::max(st.max_l2_growth, growth);
            if (growth > kL2Slack) fail("L2 norm grew by " + std::to_string(growth));
        }
        if (mass_before != 0.0 && defect > kMassLawTol) fail("discrete mass law violated, defect " + std::to_string(defect));
    }

    void record_sample() {
        Sample s = sample_state(state_.t, state_.c, state_.u, sigma0_);
        if (cfg_.params.kappa == 0.0 && s.mixing && last_mixing_ && *s.mixing < *last_mixing_ - kMixingSlack)
            throw InvariantViolation("degree of mixing decreased at t = " + std::to_string(s.t));
        last_mixing_ = s.mixing;
        result_.series.push_back(s);
        if (sinks_.on_sample) sinks_.on_sample(state_, s);
    }

    const RunConfig& cfg_;
    const Sinks& sinks_;
    StructuredGrid grid_;
    PressureSolver pressure_;
    SimState state_;
    RunResult result_{SimState{0.0, CellField(grid_), CellField(grid_), FaceField(grid_), 0, {}}, {}, 0.0};
    double c0_min_ = 0.0, c0_max_ = 0.0, sigma0_ = 0.0;
    std::optional<double> last_mixing_;
};

}  // namespace

RunResult run(const RunConfig& config, const Sinks& sinks) {
    config.validate();
    Runner r(config, sinks);
    return r.execute();
}

}  // namespace fingering
