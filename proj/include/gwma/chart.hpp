#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gwma {

/// GWMA design parameters. Weight on the i-th most recent observation is
/// q^((i-1)^alpha) - q^(i^alpha); the residual weight q^(t^alpha) stays on
/// the in-control mean.
struct GwmaParams {
    double q = 0.75;
    double alpha = 1.0;

    void validate() const {
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("GwmaParams: q must lie in (0, 1)");
        if (!(alpha > 0.0))
            throw std::invalid_argument("GwmaParams: alpha must be > 0");
    }
};

/// EWMA smoothing parameter. lambda = 1 is admitted (Shewhart chart).
struct EwmaParams {
    double lambda = 0.25;

    void validate() const {
        if (!(lambda > 0.0 && lambda <= 1.0))
            throw std::invalid_argument("EwmaParams: lambda must lie in (0, 1]");
    }
};

/// In-control process: known mean and standard deviation.
struct ProcessModel {
    double mu0 = 0.0;
    double sigma0 = 1.0;

    void validate() const {
        if (!(sigma0 > 0.0))
            throw std::invalid_argument("ProcessModel: sigma0 must be > 0");
    }
};

enum class LimitMode { TimeVarying, Asymptotic };

inline const char* to_string(LimitMode m) {
    return m == LimitMode::TimeVarying ? "time-varying" : "asymptotic";
}

using ChartScheme = std::variant<GwmaParams, EwmaParams>;

/// Full chart design: scheme, process, limit constant, limit mode.
struct ChartSpec {
    ChartScheme scheme = GwmaParams{};
    ProcessModel process = {};
    double limit_const = 3.0;   // multiplier of the statistic's std dev
    LimitMode limit_mode = LimitMode::TimeVarying;

    void validate() const {
        std::visit([](const auto& p) { p.validate(); }, scheme);
        process.validate();
        if (!(limit_const >= 0.0))
            throw std::invalid_argument("ChartSpec: limit constant must be >= 0");
    }

    bool is_gwma() const { return std::holds_alternative<GwmaParams>(scheme); }

    /// EWMA view of the scheme: the EWMA itself, or the lambda = 1 - q
    /// reduction when the GWMA has alpha == 1. Empty otherwise.
    std::optional<EwmaParams> as_ewma() const {
        if (const auto* e = std::get_if<EwmaParams>(&scheme)) return *e;
        const auto& g = std::get<GwmaParams>(scheme);
        if (g.alpha == 1.0) return EwmaParams{1.0 - g.q};
        return std::nullopt;
    }

    std::string scheme_label() const {
        if (const auto* g = std::get_if<GwmaParams>(&scheme))
            return "gwma(q=" + std::to_string(g->q) + ",alpha=" + std::to_string(g->alpha) + ")";
        return "ewma(lambda=" + std::to_string(std::get<EwmaParams>(scheme).lambda) + ")";
    }
};

/// GWMA weights for the last t observations. weights[0] belongs to the most
/// recent observation X_t, weights[t-1] to X_1; head is the residual weight
/// on mu0. Nonnegative, and sum(weights) + head == 1 by telescoping.
struct WeightProfile {
    long t = 0;
    std::vector<double> weights;
    double head = 0.0;
};

namespace detail {

/// q^(i^alpha) evaluated as exp(i^alpha * ln q); avoids drift from chained
/// pow calls at large i.
inline double q_pow(double log_q, double alpha, double i) {
    return std::exp(std::pow(i, alpha) * log_q);
}

inline void require_time(long t) {
    if (t < 1) throw std::invalid_argument("time index t must be >= 1");
}

} // namespace detail

/// GWMA weight profile at time t.
inline WeightProfile gwma_weights(const GwmaParams& params, long t) {
    params.validate();
    detail::require_time(t);
    const double lq = std::log(params.q);
    WeightProfile wp;
    wp.t = t;
    wp.weights.resize(static_cast<std::size_t>(t));
    double prev = 1.0; // q^(0^alpha)
    for (long i = 1; i <= t; ++i) {
        const double cur = detail::q_pow(lq, params.alpha, static_cast<double>(i));
        wp.weights[static_cast<std::size_t>(i - 1)] = prev - cur;
        prev = cur;
    }
    wp.head = prev; // q^(t^alpha)
    return wp;
}

/// GWMA statistic sequence. Element t-1 is G_t. Every point is recomputed
/// from the full history: no recursion exists for alpha != 1, so the cost is
/// O(n^2) over the series. That is a property of the chart, not of this code.
inline std::vector<double> gwma_statistic(std::span<const double> series,
                                          const GwmaParams& params, double mu0) {
    params.validate();
    if (series.empty())
        throw std::invalid_argument("gwma_statistic: series must be nonempty");
    const long n = static_cast<long>(series.size());
    const WeightProfile wp = gwma_weights(params, n);
    const double lq = std::log(params.q);

    std::vector<double> out(series.size());
    for (long t = 1; t <= n; ++t) {
        double acc = 0.0;
        for (long i = 1; i <= t; ++i)
            acc += wp.weights[static_cast<std::size_t>(i - 1)] *
                   series[static_cast<std::size_t>(t - i)];
        const double head_t = detail::q_pow(lq, params.alpha, static_cast<double>(t));
        out[static_cast<std::size_t>(t - 1)] = acc + head_t * mu0;
    }
    return out;
}

/// EWMA statistic sequence, Z_0 = mu0, Z_t = (1-lambda) Z_{t-1} + lambda X_t.
inline std::vector<double> ewma_statistic(std::span<const double> series,
                                          const EwmaParams& params, double mu0) {
    params.validate();
    if (series.empty())
        throw std::invalid_argument("ewma_statistic: series must be nonempty");
    std::vector<double> out(series.size());
    double z = mu0;
    const double lam = params.lambda;
    for (std::size_t t = 0; t < series.size(); ++t) {
        z = (1.0 - lam) * z + lam * series[t];
        out[t] = z;
    }
    return out;
}

/// Finite-time GWMA variance factor Q_t = sum of squared weights;
/// Var(G_t) = Q_t sigma0^2. Nondecreasing in t, bounded above by 1.
inline double gwma_qt(const GwmaParams& params, long t) {
    params.validate();
    detail::require_time(t);
    const double lq = std::log(params.q);
    double sum = 0.0;
    double prev = 1.0;
    for (long i = 1; i <= t; ++i) {
        const double cur = detail::q_pow(lq, params.alpha, static_cast<double>(i));
        const double w = prev - cur;
        sum += w * w;
        prev = cur;
    }
    return sum;
}

/// Asymptotic GWMA variance factor, proxied by Q_horizon (default 200).
/// Stops early once a squared weight drops below 1e-16; the tail it ignores
/// is monotone and smaller still.
inline double gwma_q_asymptotic(const GwmaParams& params, long horizon = 200) {
    params.validate();
    if (horizon < 1) throw std::invalid_argument("gwma_q_asymptotic: horizon must be >= 1");
    const double lq = std::log(params.q);
    double sum = 0.0;
    double prev = 1.0;
    for (long i = 1; i <= horizon; ++i) {
        const double cur = detail::q_pow(lq, params.alpha, static_cast<double>(i));
        const double w = prev - cur;
        const double w2 = w * w;
        sum += w2;
        prev = cur;
        if (w2 < 1e-16) break;
    }
    return sum;
}

/// EWMA variance factor at finite t: (lambda/(2-lambda)) (1 - (1-lambda)^{2t}).
inline double ewma_variance_factor(const EwmaParams& params, long t) {
    params.validate();
    detail::require_time(t);
    const double lam = params.lambda;
    const double r = (1.0 - lam) * (1.0 - lam);
    return lam / (2.0 - lam) * (1.0 - std::pow(r, static_cast<double>(t)));
}

/// Limiting EWMA variance factor Q_E = lambda/(2-lambda).
inline double ewma_variance_factor_limit(const EwmaParams& params) {
    params.validate();
    return params.lambda / (2.0 - params.lambda);
}

struct ControlBand {
    double lcl = 0.0;
    double ucl = 0.0;
};

/// Variance factor of the chart statistic at time t under the chart's limit
/// mode (the asymptotic factor when mode == Asymptotic).
inline double variance_factor_at(const ChartSpec& spec, long t) {
    detail::require_time(t);
    if (const auto* g = std::get_if<GwmaParams>(&spec.scheme)) {
        return spec.limit_mode == LimitMode::TimeVarying ? gwma_qt(*g, t)
                                                         : gwma_q_asymptotic(*g);
    }
    const auto& e = std::get<EwmaParams>(spec.scheme);
    return spec.limit_mode == LimitMode::TimeVarying ? ewma_variance_factor(e, t)
                                                     : ewma_variance_factor_limit(e);
}

/// Control limits mu0 +/- L sqrt(variance factor) sigma0 at time t.
inline ControlBand control_limits(const ChartSpec& spec, long t) {
    spec.validate();
    const double half = spec.limit_const * std::sqrt(variance_factor_at(spec, t)) *
                        spec.process.sigma0;
    return {spec.process.mu0 - half, spec.process.mu0 + half};
}

struct TracePoint {
    long t = 0;
    double statistic = 0.0;
    double lcl = 0.0;
    double ucl = 0.0;
    bool outside = false;
};

struct ChartRun {
    std::vector<TracePoint> trace;
    std::optional<long> first_signal; // smallest t with statistic outside (lcl, ucl)
};

/// Run the chart over a series. A point exactly on a limit is in control;
/// the signal rule is strict inequality.
inline ChartRun apply_chart(std::span<const double> series, const ChartSpec& spec) {
    spec.validate();
    if (series.empty())
        throw std::invalid_argument("apply_chart: series must be nonempty");

    std::vector<double> stats;
    if (const auto* g = std::get_if<GwmaParams>(&spec.scheme))
        stats = gwma_statistic(series, *g, spec.process.mu0);
    else
        stats = ewma_statistic(series, std::get<EwmaParams>(spec.scheme), spec.process.mu0);

    ChartRun run;
    run.trace.reserve(series.size());
    for (std::size_t k = 0; k < series.size(); ++k) {
        const long t = static_cast<long>(k) + 1;
        const ControlBand band = control_limits(spec, t);
        const double s = stats[k];
        const bool out = s > band.ucl || s < band.lcl;
        run.trace.push_back({t, s, band.lcl, band.ucl, out});
        if (out && !run.first_signal) run.first_signal = t;
    }
    return run;
}

} // namespace gwma
