#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "gwma/accum.hpp"
#include "gwma/chart.hpp"
#include "gwma/detail/dot.hpp"
#include "gwma/errors.hpp"
#include "gwma/rng.hpp"

namespace gwma {

/// Sustained mean shift of delta sigma0 units from observation tau onward.
/// tau = 1 is the zero-state case.
struct ShiftModel {
    double delta = 0.0;
    long tau = 1;

    void validate() const {
        if (tau < 1) throw std::invalid_argument("ShiftModel: tau must be >= 1");
    }
};

/// Monte Carlo controls. Estimates depend on (reps, seed, window_cap,
/// rl_cap) only; the worker count changes scheduling, never results.
struct SimConfig {
    long reps = 100000;
    std::uint64_t seed = 0;
    long window_cap = 10000;   // stored past observations per replicate
    long rl_cap = 1000000;     // run-length cap per replicate (sentinel)
    int workers = 1;

    void validate() const {
        if (reps < 1) throw std::invalid_argument("SimConfig: reps must be >= 1");
        if (window_cap < 1) throw std::invalid_argument("SimConfig: window_cap must be >= 1");
        if (rl_cap < 1) throw std::invalid_argument("SimConfig: rl_cap must be >= 1");
        if (workers < 1) throw std::invalid_argument("SimConfig: workers must be >= 1");
    }
};

/// Monte Carlo estimate with its provenance. estimate is a run length
/// (tau = 1) or a conditional delay; replicates that reached rl_cap enter
/// at the cap value and are counted in `capped`, which marks the estimate
/// as biased low.
struct RunLengthSummary {
    double estimate = 0.0;
    double std_error = 0.0;
    long reps_total = 0;
    long reps_retained = 0; // replicates surviving the L >= tau conditioning
    long capped = 0;

    ChartSpec spec;
    ShiftModel shift;
    SimConfig config;
    std::string method;
    std::string rng = kRngId;

    bool biased_low() const { return capped > 0; }
};

namespace detail {

/// Precomputed per-design tables: truncated GWMA weights and standardized
/// signal thresholds. All simulation runs in standardized units (mu0 = 0,
/// sigma0 = 1); run lengths are invariant under that scaling.
struct ChartTables {
    bool is_gwma = false;
    double lambda = 0.0;           // EWMA recursion coefficient
    std::vector<double> weights;   // GWMA weights, newest observation first
    std::vector<double> thresh;    // |statistic| threshold at time t = index+1
    double thresh_inf = 0.0;       // threshold once the variance saturates

    static ChartTables build(const ChartSpec& spec, const SimConfig& cfg) {
        spec.validate();
        cfg.validate();
        ChartTables tab;
        const double L = spec.limit_const;
        if (const auto* g = std::get_if<GwmaParams>(&spec.scheme)) {
            tab.is_gwma = true;
            const double lq = std::log(g->q);
            // Truncate at the first weight below 1e-15 (or window_cap).
            // The residual mass telescopes onto the mu0 head weight, which
            // contributes nothing in standardized units.
            double prev = 1.0;
            for (long i = 1; i <= cfg.window_cap; ++i) {
                const double cur = gwma::detail::q_pow(lq, g->alpha, static_cast<double>(i));
                const double w = prev - cur;
                prev = cur;
                if (w < 1e-15 && !tab.weights.empty()) break;
                tab.weights.push_back(w);
            }
            if (spec.limit_mode == LimitMode::Asymptotic) {
                tab.thresh_inf = L * std::sqrt(gwma_q_asymptotic(*g));
            } else {
                // Exact Q_t (untruncated) until it saturates numerically.
                double qsum = 0.0;
                prev = 1.0;
                for (long t = 1; t <= cfg.rl_cap; ++t) {
                    const double cur =
                        gwma::detail::q_pow(lq, g->alpha, static_cast<double>(t));
                    const double w = prev - cur;
                    prev = cur;
                    const double next = qsum + w * w;
                    if (next == qsum && t > 1) break;
                    qsum = next;
                    tab.thresh.push_back(L * std::sqrt(qsum));
                }
                tab.thresh_inf = tab.thresh.back();
            }
        } else {
            const auto& e = std::get<EwmaParams>(spec.scheme);
            tab.lambda = e.lambda;
            const double qe = e.lambda / (2.0 - e.lambda);
            if (spec.limit_mode == LimitMode::Asymptotic) {
                tab.thresh_inf = L * std::sqrt(qe);
            } else {
                const double r = (1.0 - e.lambda) * (1.0 - e.lambda);
                for (long t = 1; t <= cfg.rl_cap; ++t) {
                    const double rt = std::pow(r, static_cast<double>(t));
                    tab.thresh.push_back(L * std::sqrt(qe * (1.0 - rt)));
                    if (1.0 - rt == 1.0) break;
                }
                tab.thresh_inf = tab.thresh.back();
            }
        }
        return tab;
    }

    double threshold_at(long t) const {
        return t <= static_cast<long>(thresh.size())
                   ? thresh[static_cast<std::size_t>(t - 1)]
                   : thresh_inf;
    }
};

/// One replicate: first signal time, or rl_cap if none. `ring` is caller
/// scratch of tab.weights.size() doubles (GWMA only).
///
/// The ring is mirrored so the window dot product reads both arrays with
/// unit stride: X_t lands at slot cap-1-((t-1) mod cap), which makes the
/// most recent m observations occupy ascending slots (mod cap) in age order.
inline long run_one(const ChartTables& tab, const ShiftModel& shift,
                    const ReplicateStream& stream, long rl_cap,
                    std::vector<double>& ring) {
    if (!tab.is_gwma) {
        const double lam = tab.lambda;
        double z = 0.0;
        for (long t = 1; t <= rl_cap; ++t) {
            double x = stream.normal_at(static_cast<std::uint64_t>(t));
            if (t >= shift.tau) x += shift.delta;
            z = (1.0 - lam) * z + lam * x;
            const double c = tab.threshold_at(t);
            if (z > c || z < -c) return t;
        }
        return rl_cap;
    }

    const long wlen = static_cast<long>(tab.weights.size());
    const long cap = wlen;
    const double* w = tab.weights.data();
    double* h = ring.data();
    for (long t = 1; t <= rl_cap; ++t) {
        double x = stream.normal_at(static_cast<std::uint64_t>(t));
        if (t >= shift.tau) x += shift.delta;
        const long s0 = cap - 1 - ((t - 1) % cap);
        h[s0] = x;
        const long m = t < wlen ? t : wlen;
        const long n1 = std::min(m, cap - s0);
        double g = dot(w, h + s0, static_cast<std::size_t>(n1));
        if (m > n1) g += dot(w + n1, h, static_cast<std::size_t>(m - n1));
        const double c = tab.threshold_at(t);
        if (g > c || g < -c) return t;
    }
    return rl_cap;
}

/// Replicates are processed in fixed chunks; per-chunk results merge in
/// chunk order afterwards, so summaries are bit-identical for any worker
/// count.
inline constexpr long kChunkSize = 1024;

template <typename ChunkState, typename MakeWorker>
std::vector<ChunkState> run_chunks(long reps, int workers, MakeWorker&& make_worker) {
    const long n_chunks = (reps + kChunkSize - 1) / kChunkSize;
    std::vector<ChunkState> chunks(static_cast<std::size_t>(n_chunks));
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto drive = [&](auto body) {
        for (;;) {
            const long c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks || failed.load(std::memory_order_relaxed)) break;
            const long lo = c * kChunkSize;
            const long hi = std::min(reps, lo + kChunkSize);
            try {
                body(lo, hi, chunks[static_cast<std::size_t>(c)]);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                break;
            }
        }
    };

    const int n_workers = static_cast<int>(std::min<long>(workers, n_chunks));
    if (n_workers <= 1) {
        drive(make_worker());
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i)
            pool.emplace_back([&] { drive(make_worker()); });
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return chunks;
}

struct ChunkAccum {
    RunningStat stat;
    long discarded = 0;
    long capped = 0;
};

} // namespace detail

/// Run one replicate of the chart under the shift model, reading the given
/// replicate stream. Returns the first signal time, or cfg.rl_cap if the
/// replicate never signals.
inline long simulate_run_length(const ChartSpec& spec, const ShiftModel& shift,
                                const ReplicateStream& stream,
                                const SimConfig& cfg = {}) {
    shift.validate();
    const auto tab = detail::ChartTables::build(spec, cfg);
    std::vector<double> ring(tab.weights.size());
    return detail::run_one(tab, shift, stream, cfg.rl_cap, ring);
}

/// Conditional-expected-delay estimate: mean of (L - tau + 1) over
/// replicates with L >= tau. Replicates signalling before tau are discarded
/// and counted. tau = 1 reduces to the zero-state ARL.
inline RunLengthSummary ced_mc(const ChartSpec& spec, const ShiftModel& shift,
                               const SimConfig& cfg) {
    spec.validate();
    shift.validate();
    cfg.validate();
    if (cfg.rl_cap <= shift.tau)
        throw std::invalid_argument("ced_mc: rl_cap must exceed tau");

    const auto tab = detail::ChartTables::build(spec, cfg);
    const auto chunks = detail::run_chunks<detail::ChunkAccum>(
        cfg.reps, cfg.workers, [&] {
            return [&, ring = std::vector<double>(tab.weights.size())](
                       long lo, long hi, detail::ChunkAccum& acc) mutable {
                for (long rep = lo; rep < hi; ++rep) {
                    const ReplicateStream stream(cfg.seed,
                                                 static_cast<std::uint64_t>(rep));
                    const long rl =
                        detail::run_one(tab, shift, stream, cfg.rl_cap, ring);
                    if (rl < shift.tau) {
                        ++acc.discarded;
                        continue;
                    }
                    if (rl == cfg.rl_cap) ++acc.capped;
                    acc.stat.add(static_cast<double>(rl - shift.tau + 1));
                }
            };
        });

    detail::ChunkAccum total;
    for (const auto& c : chunks) {
        total.stat.merge(c.stat);
        total.discarded += c.discarded;
        total.capped += c.capped;
    }
    if (total.stat.count == 0)
        throw ConditioningError("ced_mc: no replicate survived to tau = " +
                                std::to_string(shift.tau));

    RunLengthSummary out;
    out.estimate = total.stat.mean;
    out.std_error = total.stat.std_error();
    out.reps_total = cfg.reps;
    out.reps_retained = total.stat.count;
    out.capped = total.capped;
    out.spec = spec;
    out.shift = shift;
    out.config = cfg;
    out.method = shift.tau == 1 ? "zero-state" : "ced";
    return out;
}

/// Zero-state ARL: mean run length with the shift present from t = 1.
inline RunLengthSummary zero_state_arl_mc(const ChartSpec& spec, double delta,
                                          const SimConfig& cfg) {
    auto out = ced_mc(spec, ShiftModel{delta, 1}, cfg);
    if (out.capped == out.reps_total)
        throw EstimationError("zero_state_arl_mc: every replicate hit rl_cap");
    return out;
}

/// Steady-state ARL proxy: D_tau at tau = 100.
inline constexpr long kSteadyStateTauMc = 100;

inline RunLengthSummary steady_state_arl_mc(const ChartSpec& spec, double delta,
                                            const SimConfig& cfg) {
    auto out = ced_mc(spec, ShiftModel{delta, kSteadyStateTauMc}, cfg);
    out.method = "ced(tau=100, steady-state proxy)";
    return out;
}

namespace detail {

struct ProfileChunk {
    std::vector<RunningStat> stat;
    std::vector<long> discarded;
    std::vector<long> capped;

    void resize(long tau_max) {
        stat.resize(static_cast<std::size_t>(tau_max));
        discarded.assign(static_cast<std::size_t>(tau_max), 0);
        capped.assign(static_cast<std::size_t>(tau_max), 0);
    }
};

/// Single-pass profile replicate: the in-control prefix is simulated once;
/// each change point branches a shifted continuation off the shared prefix.
/// Draw t always comes from the same stream position, so all change points
/// see common random numbers.
struct ProfileWorker {
    const ChartTables* tab;
    double delta;
    long tau_max;
    std::uint64_t seed;
    long rl_cap;

    std::vector<double> prefix;   // in-control observations 1..tau_max-1
    std::vector<double> z_prefix; // EWMA statistic checkpoints, z_prefix[t] = Z_t
    std::vector<double> cont;     // continuation observation buffer

    void operator()(long lo, long hi, ProfileChunk& acc) {
        if (acc.stat.empty()) acc.resize(tau_max);
        for (long rep = lo; rep < hi; ++rep) replicate(rep, acc);
    }

    void replicate(long rep, ProfileChunk& acc) {
        const ReplicateStream stream(seed, static_cast<std::uint64_t>(rep));
        const long wlen = static_cast<long>(tab->weights.size());
        const double* w = tab->weights.data();
        const double lam = tab->lambda;

        // In-control prefix up to tau_max - 1, stopping at the first signal.
        long s_ic = 0; // first in-control signal time, 0 = none seen
        prefix.clear();
        z_prefix.clear();
        z_prefix.push_back(0.0);
        double z = 0.0;
        for (long t = 1; t < tau_max; ++t) {
            const double x = stream.normal_at(static_cast<std::uint64_t>(t));
            prefix.push_back(x);
            double stat;
            if (tab->is_gwma) {
                const long m = t < wlen ? t : wlen;
                stat = dot_rev(w, prefix.data() + (t - 1), static_cast<std::size_t>(m));
            } else {
                z = (1.0 - lam) * z + lam * x;
                z_prefix.push_back(z);
                stat = z;
            }
            const double c = tab->threshold_at(t);
            if (stat > c || stat < -c) {
                s_ic = t;
                break;
            }
        }

        for (long tau = 1; tau <= tau_max; ++tau) {
            const std::size_t ti = static_cast<std::size_t>(tau - 1);
            if (s_ic != 0 && s_ic < tau) {
                ++acc.discarded[ti];
                continue;
            }
            long rl = rl_cap; // first signal time for this change point
            if (tab->is_gwma) {
                cont.assign(prefix.begin(), prefix.begin() + (tau - 1));
                for (long t = tau; t <= rl_cap; ++t) {
                    const double x =
                        stream.normal_at(static_cast<std::uint64_t>(t)) + delta;
                    cont.push_back(x);
                    const long m = t < wlen ? t : wlen;
                    const double stat =
                        dot_rev(w, cont.data() + (t - 1), static_cast<std::size_t>(m));
                    const double c = tab->threshold_at(t);
                    if (stat > c || stat < -c) {
                        rl = t;
                        break;
                    }
                }
            } else {
                double zc = z_prefix[static_cast<std::size_t>(tau - 1)];
                for (long t = tau; t <= rl_cap; ++t) {
                    const double x =
                        stream.normal_at(static_cast<std::uint64_t>(t)) + delta;
                    zc = (1.0 - lam) * zc + lam * x;
                    const double c = tab->threshold_at(t);
                    if (zc > c || zc < -c) {
                        rl = t;
                        break;
                    }
                }
            }
            if (rl == rl_cap) ++acc.capped[ti];
            acc.stat[ti].add(static_cast<double>(rl - tau + 1));
        }
    }
};

} // namespace detail

/// CED profile D_tau for tau = 1..tau_max under one set of replicate
/// streams. All change points share each replicate's in-control prefix and
/// its per-time random draws (single-pass branching); tau = 1 therefore
/// reproduces zero_state_arl_mc exactly.
inline std::vector<RunLengthSummary> ced_profile(const ChartSpec& spec, double delta,
                                                 long tau_max, const SimConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (tau_max < 1) throw std::invalid_argument("ced_profile: tau_max must be >= 1");
    if (cfg.rl_cap <= tau_max)
        throw std::invalid_argument("ced_profile: rl_cap must exceed tau_max");

    const auto tab = detail::ChartTables::build(spec, cfg);
    const auto chunks = detail::run_chunks<detail::ProfileChunk>(
        cfg.reps, cfg.workers, [&] {
            return detail::ProfileWorker{&tab, delta, tau_max, cfg.seed, cfg.rl_cap};
        });

    detail::ProfileChunk total;
    total.resize(tau_max);
    for (const auto& c : chunks) {
        if (c.stat.empty()) continue;
        for (long i = 0; i < tau_max; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            total.stat[k].merge(c.stat[k]);
            total.discarded[k] += c.discarded[k];
            total.capped[k] += c.capped[k];
        }
    }

    std::vector<RunLengthSummary> out;
    out.reserve(static_cast<std::size_t>(tau_max));
    for (long tau = 1; tau <= tau_max; ++tau) {
        const std::size_t k = static_cast<std::size_t>(tau - 1);
        if (total.stat[k].count == 0)
            throw ConditioningError("ced_profile: no replicate survived to tau = " +
                                    std::to_string(tau));
        RunLengthSummary s;
        s.estimate = total.stat[k].mean;
        s.std_error = total.stat[k].std_error();
        s.reps_total = cfg.reps;
        s.reps_retained = total.stat[k].count;
        s.capped = total.capped[k];
        s.spec = spec;
        s.shift = ShiftModel{delta, tau};
        s.config = cfg;
        s.method = "ced-profile(single-pass branching)";
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace gwma
