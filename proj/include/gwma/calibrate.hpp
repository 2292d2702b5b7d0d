#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gwma/chart.hpp"
#include "gwma/errors.hpp"
#include "gwma/markov.hpp"
#include "gwma/simulate.hpp"

namespace gwma {

/// EWMA smoothing constant with the same asymptotic variance as the GWMA
/// design: lambda = 2Q/(1+Q), the inverse of Q_E = lambda/(2-lambda).
inline double match_lambda(const GwmaParams& params, long horizon = 200) {
    const double q = gwma_q_asymptotic(params, horizon);
    return 2.0 * q / (1.0 + q);
}

struct MatchPoint {
    double alpha = 0.0;
    double q_asymptotic = 0.0;
    double lambda = 0.0;
};

/// (alpha, Q, matching lambda) over an evenly spaced alpha grid at fixed q.
inline std::vector<MatchPoint> match_lambda_curve(double q,
                                                  double alpha_lo, double alpha_hi,
                                                  long steps, long horizon = 200) {
    if (steps < 1) throw std::invalid_argument("match_lambda_curve: steps must be >= 1");
    if (!(alpha_lo > 0.0) || alpha_hi < alpha_lo)
        throw std::invalid_argument("match_lambda_curve: need 0 < alpha_lo <= alpha_hi");
    std::vector<MatchPoint> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (long i = 0; i < steps; ++i) {
        const double a =
            steps == 1 ? alpha_lo
                       : alpha_lo + (alpha_hi - alpha_lo) * static_cast<double>(i) /
                             static_cast<double>(steps - 1);
        const GwmaParams p{q, a};
        const double qa = gwma_q_asymptotic(p, horizon);
        out.push_back({a, qa, 2.0 * qa / (1.0 + qa)});
    }
    return out;
}

enum class CalibrationEngine { Analytic, MonteCarlo };

inline const char* to_string(CalibrationEngine e) {
    return e == CalibrationEngine::Analytic ? "analytic" : "monte-carlo";
}

struct CalibrateOptions {
    double tol = 0.5;             // |achieved - target| acceptance, ARL units
    double bracket_lo = 2.0;
    double bracket_hi = 4.0;
    int max_iterations = 60;      // bisection steps before giving up
    SimConfig sim{.reps = 200000};            // per-iterate Monte Carlo config
    long confirm_reps = 1000000;              // final Monte Carlo confirmation
    MarkovConfig markov{201, 100000, 1e-12};  // wide horizon: bisection probes
                                              // limits far above the target
};

struct CalibrationResult {
    double limit_const = 0.0;
    double achieved_arl0 = 0.0;
    double achieved_std_error = 0.0; // 0 for the analytic engine
    int iterations = 0;              // bisection steps (midpoint evaluations)
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;

    double target_arl0 = 0.0;
    double tol = 0.0;
    CalibrationEngine engine = CalibrationEngine::Analytic;
    LimitMode limit_mode = LimitMode::TimeVarying;
};

namespace detail {

/// In-control ARL as a function of the limit constant, for one engine.
/// Values above stop_above may come back as +infinity (analytic early stop).
///
/// Monte Carlo evaluations run in two stages. A cheap probe (few replicates,
/// run length capped at ten targets; the truncated tail is e^-10 of the mass)
/// settles limits whose ARL is nowhere near the target; only limits inside
/// the ambiguity band pay for the full common-random-number evaluation, and
/// only full evaluations may declare convergence.
class Arl0Objective {
public:
    Arl0Objective(const ChartScheme& scheme, double target, CalibrationEngine engine,
                  LimitMode mode, const CalibrateOptions& opt, double stop_above)
        : scheme_(scheme), target_(target), engine_(engine), mode_(mode), opt_(opt),
          stop_above_(stop_above) {
        if (engine_ == CalibrationEngine::Analytic) {
            const ChartSpec probe{scheme_, {}, 3.0, mode_};
            const auto e = probe.as_ewma();
            if (!e)
                throw std::invalid_argument(
                    "calibrate_limit: analytic engine requires an EWMA scheme "
                    "(or GWMA with alpha = 1)");
            ewma_ = *e;
        }
    }

    double last_std_error() const { return last_se_; }
    bool last_was_full() const { return last_full_; }

    double operator()(double limit_const) {
        if (engine_ == CalibrationEngine::Analytic) {
            last_se_ = 0.0;
            last_full_ = true;
            if (mode_ == LimitMode::Asymptotic)
                return ewma_arl(ewma_, limit_const, 0.0, mode_, opt_.markov);
            return ewma_arl_in_control_above(ewma_, limit_const, mode_, opt_.markov,
                                             stop_above_);
        }
        // Common random numbers: every evaluation reuses the same seed, so
        // the estimate is monotone in the limit constant.
        const ChartSpec spec{scheme_, {}, limit_const, mode_};
        SimConfig probe = opt_.sim;
        probe.rl_cap = std::min(opt_.sim.rl_cap,
                                std::max<long>(1000, 10 * static_cast<long>(target_) + 10));
        probe.reps = std::clamp(opt_.sim.reps / 100, std::min<long>(1000, opt_.sim.reps),
                                std::min<long>(10000, opt_.sim.reps));
        const auto q = ced_mc(spec, {0.0, 1}, probe);
        if (probe.reps < opt_.sim.reps &&
            std::fabs(q.estimate - target_) > 8.0 * std::max(q.std_error, 1.0)) {
            last_se_ = q.std_error;
            last_full_ = false;
            return q.estimate;
        }
        SimConfig full = probe;
        full.reps = opt_.sim.reps;
        const auto s = ced_mc(spec, {0.0, 1}, full);
        last_se_ = s.std_error;
        last_full_ = true;
        return s.estimate;
    }

private:
    ChartScheme scheme_;
    double target_;
    CalibrationEngine engine_;
    LimitMode mode_;
    CalibrateOptions opt_;
    double stop_above_;
    EwmaParams ewma_{};
    double last_se_ = 0.0;
    bool last_full_ = false;
};

} // namespace detail

/// Solve for the control-limit constant giving the target in-control ARL.
/// Bisection over an auto-expanding bracket; the in-control ARL is strictly
/// increasing in the limit constant. Monte Carlo mode stops once the
/// midpoint estimate is within max(tol, 2 std errors) of the target, then
/// confirms at opt.confirm_reps replicates.
inline CalibrationResult calibrate_limit(const ChartScheme& scheme, double target_arl0,
                                         CalibrationEngine engine, LimitMode limit_mode,
                                         const CalibrateOptions& opt = {}) {
    if (!(target_arl0 > 1.0))
        throw std::invalid_argument("calibrate_limit: target ARL must exceed 1");
    if (!(opt.tol > 0.0))
        throw std::invalid_argument("calibrate_limit: tol must be > 0");
    if (!(opt.bracket_lo > 0.0 && opt.bracket_hi > opt.bracket_lo))
        throw std::invalid_argument("calibrate_limit: invalid bracket");

    detail::Arl0Objective f(scheme, target_arl0, engine, limit_mode, opt,
                            target_arl0 + opt.tol + 1.0);
    const bool mc = engine == CalibrationEngine::MonteCarlo;

    double lo = opt.bracket_lo;
    double hi = opt.bracket_hi;

    // Expand outward (doubling the width) until the bracket straddles the
    // target. The objective is monotone, so endpoint classification is all
    // that is needed here.
    int expansions = 0;
    while (f(lo) > target_arl0) {
        const double width = hi - lo;
        hi = lo;
        lo = std::max(lo - 2.0 * width, 1e-6);
        if (++expansions > 20 || (lo <= 1e-6 && f(lo) > target_arl0))
            throw CalibrationError("calibrate_limit: failed to bracket target below L = " +
                                   std::to_string(hi));
    }
    expansions = 0;
    while (f(hi) < target_arl0) {
        const double width = hi - lo;
        lo = hi;
        hi += 2.0 * width;
        if (++expansions > 20)
            throw CalibrationError("calibrate_limit: failed to bracket target above L = " +
                                   std::to_string(lo));
    }

    CalibrationResult res;
    res.target_arl0 = target_arl0;
    res.tol = opt.tol;
    res.engine = engine;
    res.limit_mode = limit_mode;

    double best_val = 0.0;
    double best_se = 0.0;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double val = f(mid);
        res.iterations = it;
        best_val = val;
        best_se = f.last_std_error();
        const double accept = mc ? std::max(opt.tol, 2.0 * best_se) : opt.tol;
        if (std::isfinite(val) && f.last_was_full() &&
            std::fabs(val - target_arl0) <= accept) {
            res.limit_const = mid;
            res.bracket_lo = lo;
            res.bracket_hi = hi;
            if (mc) {
                // Confirmation pass on a derived seed, decoupled from the
                // streams that steered the search.
                SimConfig confirm = opt.sim;
                confirm.reps = opt.confirm_reps;
                confirm.seed = opt.sim.seed ^ 0x636f6e6669726dULL;
                const ChartSpec spec{scheme, {}, mid, limit_mode};
                const auto s = zero_state_arl_mc(spec, 0.0, confirm);
                res.achieved_arl0 = s.estimate;
                res.achieved_std_error = s.std_error;
            } else {
                res.achieved_arl0 = val;
                res.achieved_std_error = 0.0;
            }
            return res;
        }
        if (val < target_arl0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-10)
            throw CalibrationError(
                "calibrate_limit: bracket collapsed at L = " + std::to_string(mid) +
                " with |ARL - target| = " + std::to_string(std::fabs(best_val - target_arl0)) +
                (mc ? " (std error " + std::to_string(best_se) +
                          "; Monte Carlo noise floor above tol)"
                    : ""));
    }
    throw CalibrationError(
        "calibrate_limit: no convergence in " + std::to_string(opt.max_iterations) +
        " bisection steps; last |ARL - target| = " +
        std::to_string(std::fabs(best_val - target_arl0)) +
        (mc ? " (std error " + std::to_string(best_se) + ")" : ""));
}

} // namespace gwma
