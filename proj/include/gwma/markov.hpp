#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gwma/chart.hpp"
#include "gwma/errors.hpp"
#include "gwma/normal.hpp"

namespace gwma {

/// Grid and stopping controls for the Markov-chain run-length engine.
struct MarkovConfig {
    int states = 201;      // odd; cells across the in-control region
    long max_t = 10000;    // transient step cap; hitting it raises HorizonError
    double tail_eps = 1e-12; // stop once survival mass falls below this

    void validate() const {
        if (states < 3 || states % 2 == 0)
            throw std::invalid_argument("MarkovConfig: states must be odd and >= 3");
        if (max_t < 1)
            throw std::invalid_argument("MarkovConfig: max_t must be >= 1");
        if (!(tail_eps > 0.0 && tail_eps < 1.0))
            throw std::invalid_argument("MarkovConfig: tail_eps must lie in (0, 1)");
    }
};

namespace detail {

/// Transient EWMA chain over the discretized in-control region. The region
/// at time t is mu0 +/- L sqrt(Var factor at t) in sigma0 units; each step
/// re-bins the surviving probability mass into the next region's cells by
/// Gaussian CDF differences taken from the current cell midpoints
/// (Brook-Evans style).
class EwmaChain {
public:
    EwmaChain(const EwmaParams& params, double limit_const, LimitMode mode,
              const MarkovConfig& cfg)
        : lam_(params.lambda), limit_(limit_const), mode_(mode), n_(cfg.states) {
        params.validate();
        cfg.validate();
        if (!(limit_const > 0.0))
            throw std::invalid_argument("limit constant must be > 0");
        if (lam_ * static_cast<double>(n_) < 2.0)
            throw ResolutionError("state grid too coarse for lambda = " +
                                  std::to_string(lam_) + " with " +
                                  std::to_string(n_) + " states");
        r_ = (1.0 - lam_) * (1.0 - lam_);
        q_e_ = lam_ / (2.0 - lam_);
        p_.assign(static_cast<std::size_t>(n_), 0.0);
        scratch_.assign(static_cast<std::size_t>(n_), 0.0);
    }

    long time() const { return t_; }

    /// Half-width of the in-control region at time t (standardized units).
    double half_width(long t) const {
        if (mode_ == LimitMode::Asymptotic) return limit_ * std::sqrt(q_e_);
        const double vf = q_e_ * (1.0 - std::pow(r_, static_cast<double>(t)));
        return limit_ * std::sqrt(vf);
    }

    /// Advance one observation with shift delta; returns the surviving mass
    /// (not renormalized).
    double step(double delta) {
        const long t_next = t_ + 1;
        const double h_next = half_width(t_next);
        const double w_next = 2.0 * h_next / static_cast<double>(n_);

        double mass = 0.0;
        if (point_mass_) {
            // First observation: Z_1 = lambda X from Z_0 = 0.
            fill_from_source(0.0, h_next, w_next, delta, p_);
            for (double v : p_) mass += v;
            point_mass_ = false;
        } else {
            ensure_matrix(h_cur_, h_next, delta);
            const std::size_t n = static_cast<std::size_t>(n_);
            for (std::size_t k = 0; k < n; ++k) {
                const double* row = mat_.data() + k * n;
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += row[j] * p_[j];
                scratch_[k] = acc;
                mass += acc;
            }
            p_.swap(scratch_);
        }
        h_cur_ = h_next;
        t_ = t_next;
        return mass;
    }

    double total_mass() const {
        double s = 0.0;
        for (double v : p_) s += v;
        return s;
    }

    void renormalize(double mass) {
        for (double& v : p_) v /= mass;
    }

    /// From-state transition matrix P (row j = source cell) over the current
    /// region under shift delta. Valid in Asymptotic mode where the region
    /// is fixed.
    std::vector<double> stationary_matrix(double delta) const {
        const double h = half_width(1);
        const double w = 2.0 * h / static_cast<double>(n_);
        const std::size_t n = static_cast<std::size_t>(n_);
        std::vector<double> from_major(n * n);
        std::vector<double> col(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double m = -h + (static_cast<double>(j) + 0.5) * w;
            fill_from_source(m, h, w, delta, col);
            double* row = from_major.data() + j * n;
            for (std::size_t k = 0; k < n; ++k) row[k] = col[k];
        }
        return from_major;
    }

    const std::vector<double>& mass_vector() const { return p_; }
    int states() const { return n_; }

private:
    /// Destination masses from a single source value m into the region of
    /// half-width h (cell width w) under shift delta.
    void fill_from_source(double m, double h, double w, double delta,
                          std::vector<double>& out) const {
        const double base = (1.0 - lam_) * m;
        double lo_cdf = norm_cdf((-h - base) / lam_ - delta);
        for (int k = 0; k < n_; ++k) {
            const double b_hi = -h + static_cast<double>(k + 1) * w;
            const double hi_cdf = norm_cdf((b_hi - base) / lam_ - delta);
            out[static_cast<std::size_t>(k)] = hi_cdf - lo_cdf;
            lo_cdf = hi_cdf;
        }
    }

    /// Rebuild the cached to-major step matrix when the source/target
    /// regions or the shift change. Once the variance factor saturates the
    /// regions stop moving and the matrix is reused verbatim.
    void ensure_matrix(double h_from, double h_to, double delta) {
        if (have_mat_ && h_from == built_from_ && h_to == built_to_ &&
            delta == built_delta_)
            return;
        const std::size_t n = static_cast<std::size_t>(n_);
        if (mat_.size() != n * n) mat_.assign(n * n, 0.0);
        const double w_from = 2.0 * h_from / static_cast<double>(n_);
        const double w_to = 2.0 * h_to / static_cast<double>(n_);
        std::vector<double> col(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double m = -h_from + (static_cast<double>(j) + 0.5) * w_from;
            fill_from_source(m, h_to, w_to, delta, col);
            for (std::size_t k = 0; k < n; ++k) mat_[k * n + j] = col[k];
        }
        built_from_ = h_from;
        built_to_ = h_to;
        built_delta_ = delta;
        have_mat_ = true;
    }

    double lam_;
    double limit_;
    LimitMode mode_;
    int n_;
    double r_ = 0.0;
    double q_e_ = 0.0;

    long t_ = 0;
    bool point_mass_ = true;
    double h_cur_ = 0.0;
    std::vector<double> p_;
    std::vector<double> scratch_;

    std::vector<double> mat_;
    bool have_mat_ = false;
    double built_from_ = -1.0;
    double built_to_ = -1.0;
    double built_delta_ = 0.0;
};

/// Solve A x = b in place by LU with partial pivoting. A is row-major n x n.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        double best_abs = std::fabs(a[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::fabs(a[r * n + col]);
            if (v > best_abs) {
                best_abs = v;
                best = r;
            }
        }
        if (best_abs == 0.0)
            throw std::runtime_error("singular transition system");
        if (best != col) {
            for (std::size_t k = 0; k < n; ++k)
                std::swap(a[col * n + k], a[best * n + k]);
            std::swap(b[col], b[best]);
        }
        const double inv_piv = 1.0 / a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv_piv;
            if (f == 0.0) continue;
            a[r * n + col] = 0.0;
            for (std::size_t k = col + 1; k < n; ++k)
                a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t k = i + 1; k < n; ++k) acc -= a[i * n + k] * x[k];
        x[i] = acc / a[i * n + i];
    }
    return x;
}

/// Expected absorption times a = (I - P)^{-1} 1 for a from-major
/// substochastic matrix P.
inline std::vector<double> fundamental_times(const std::vector<double>& p, std::size_t n) {
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i * n + j] = (i == j ? 1.0 : 0.0) - p[i * n + j];
    return solve_dense(std::move(a), std::vector<double>(n, 1.0));
}

/// In-control zero-state ARL, abandoned once the running lower bound passes
/// stop_above (returns +infinity then). Bisection only needs the comparison
/// against the target, so limits far above it never pay full convergence.
inline double ewma_arl_in_control_above(const EwmaParams& params, double limit_const,
                                        LimitMode limit_mode, const MarkovConfig& cfg,
                                        double stop_above) {
    EwmaChain chain(params, limit_const, limit_mode, cfg);
    double arl = 1.0;
    for (long t = 1; t <= cfg.max_t; ++t) {
        const double s = chain.step(0.0);
        arl += s;
        if (s < cfg.tail_eps) return arl;
        if (arl > stop_above) return std::numeric_limits<double>::infinity();
    }
    throw HorizonError("ewma_arl_in_control_above: no convergence within max_t = " +
                       std::to_string(cfg.max_t) + " steps; raise max_t");
}

} // namespace detail

/// Conditional expected delay D_tau = E(L - tau + 1 | L >= tau) for an EWMA
/// chart with a sustained shift of delta sigma0 units from observation tau.
///
/// TimeVarying mode runs the forward probability recursion: in-control
/// propagation restricted to no-signal paths up to tau - 1, renormalization,
/// then shifted propagation accumulating survival mass until it drops below
/// cfg.tail_eps (HorizonError at cfg.max_t). Asymptotic mode propagates over
/// the fixed region and finishes with the fundamental-matrix solve.
///
/// tau = 1 is the zero-state ARL (vacuous conditioning).
inline double ewma_ced(const EwmaParams& params, double limit_const, double delta,
                       long tau, LimitMode limit_mode, const MarkovConfig& cfg = {}) {
    if (tau < 1) throw std::invalid_argument("ewma_ced: tau must be >= 1");
    detail::EwmaChain chain(params, limit_const, limit_mode, cfg);

    if (tau - 1 > cfg.max_t)
        throw HorizonError("ewma_ced: change point " + std::to_string(tau) +
                           " exceeds max_t = " + std::to_string(cfg.max_t));

    // In-control phase, observations 1 .. tau-1.
    double survival = 1.0;
    for (long t = 1; t < tau; ++t) survival = chain.step(0.0);
    if (tau > 1) {
        if (!(survival > 1e-250))
            throw ConditioningError(
                "ewma_ced: no-signal probability underflows before tau = " +
                std::to_string(tau));
        chain.renormalize(survival);
    }

    if (limit_mode == LimitMode::Asymptotic) {
        const std::size_t n = static_cast<std::size_t>(chain.states());
        const auto p = chain.stationary_matrix(delta);
        const auto times = detail::fundamental_times(p, n);
        if (tau == 1) return times[n / 2]; // start cell holds mu0
        const auto& mass = chain.mass_vector();
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d += mass[j] * times[j];
        return d;
    }

    // Shifted phase: D = 1 + sum of survival masses.
    double d = 1.0;
    for (long k = 1; k <= cfg.max_t; ++k) {
        const double s = chain.step(delta);
        d += s;
        if (s < cfg.tail_eps) return d;
    }
    throw HorizonError("ewma_ced: survival mass " +
                       std::to_string(chain.total_mass()) +
                       " still above tail_eps after max_t = " +
                       std::to_string(cfg.max_t) + " steps; raise max_t");
}

/// Zero-state ARL for a sustained shift delta present from the first
/// observation. TimeVarying mode uses the transient recursion; Asymptotic
/// mode the classic state discretization with the fundamental-matrix solve.
inline double ewma_arl(const EwmaParams& params, double limit_const, double delta,
                       LimitMode limit_mode, const MarkovConfig& cfg = {}) {
    return ewma_ced(params, limit_const, delta, 1, limit_mode, cfg);
}

/// Steady-state ARL proxy: D_tau at tau = 100.
inline constexpr long kSteadyStateTau = 100;

inline double ewma_steady_state_arl(const EwmaParams& params, double limit_const,
                                    double delta, LimitMode limit_mode,
                                    const MarkovConfig& cfg = {}) {
    return ewma_ced(params, limit_const, delta, kSteadyStateTau, limit_mode, cfg);
}

/// In-control probability of surviving the first `steps` observations
/// without a signal, P(L > steps).
inline double ewma_no_signal_prob(const EwmaParams& params, double limit_const,
                                  long steps, LimitMode limit_mode,
                                  const MarkovConfig& cfg = {}) {
    if (steps < 0) throw std::invalid_argument("ewma_no_signal_prob: steps must be >= 0");
    detail::EwmaChain chain(params, limit_const, limit_mode, cfg);
    double survival = 1.0;
    for (long t = 1; t <= steps; ++t) survival = chain.step(0.0);
    return survival;
}

} // namespace gwma
