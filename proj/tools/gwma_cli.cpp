// gwma-rl: run-length analysis for GWMA and EWMA control charts.
//
// Subcommands cover chart weights and variances, ARL/CED estimation
// (analytic for EWMA, Monte Carlo for both), control-limit calibration,
// design matching, file monitoring, and canned dataset presets.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwma/gwma.hpp"

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string quote_arg(const std::string& a) {
    if (a.find_first_of(" \t\"'") == std::string::npos) return a;
    std::string out = "'";
    for (char c : a) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

std::string g_command_line;

int default_workers() {
    if (const char* env = std::getenv("GWMA_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// ---------------------------------------------------------------------------
// Output plumbing: CSV files open with a '#' metadata block sufficient to
// re-run the command and reproduce the payload bytes.

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void write_meta(std::ostream& os,
                const std::vector<std::pair<std::string, std::string>>& kv) {
    os << "# gwma-rl " << GWMA_RL_VERSION << "\n";
    os << "# command: " << g_command_line << "\n";
    for (const auto& [k, v] : kv) os << "# " << k << ": " << v << "\n";
}

// ---------------------------------------------------------------------------
// Scheme selection shared by several subcommands.

struct SchemeOpts {
    std::string kind = "gwma";
    double q = 0.75;
    double alpha = 1.0;
    double lambda = 0.25;

    void attach(CLI::App* cmd, bool with_limit, double* limit) {
        cmd->add_option("--scheme", kind, "Chart scheme: gwma or ewma")
            ->check(CLI::IsMember({"gwma", "ewma"}))
            ->capture_default_str();
        cmd->add_option("--q", q, "GWMA q in (0,1)")->capture_default_str();
        cmd->add_option("--alpha", alpha, "GWMA alpha > 0")->capture_default_str();
        cmd->add_option("--lambda", lambda, "EWMA lambda in (0,1]")->capture_default_str();
        if (with_limit)
            cmd->add_option("--limit", *limit, "Control limit constant L")->required();
    }

    gwma::ChartScheme resolve() const {
        if (kind == "ewma") return gwma::EwmaParams{lambda};
        return gwma::GwmaParams{q, alpha};
    }

    std::string label() const {
        if (kind == "ewma") return "ewma(lambda=" + fmt(lambda) + ")";
        return "gwma(q=" + fmt(q) + ",alpha=" + fmt(alpha) + ")";
    }
};

gwma::LimitMode parse_mode(const std::string& s) {
    if (s == "time-varying" || s == "tv") return gwma::LimitMode::TimeVarying;
    if (s == "asymptotic") return gwma::LimitMode::Asymptotic;
    throw CLI::ValidationError("--limit-mode", "expected time-varying or asymptotic");
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::runtime_error("bad number in list: " + tok);
        out.push_back(v);
    }
    if (out.empty()) throw std::runtime_error("empty value list");
    return out;
}

// ---------------------------------------------------------------------------
// weights: GWMA weight profile at time t, newest observation first.

struct WeightsArgs {
    double q = 0.75, alpha = 1.0;
    long t = 20;
    std::string out;
};

void run_weights(const WeightsArgs& a) {
    const auto wp = gwma::gwma_weights({a.q, a.alpha}, a.t);
    Output o(a.out);
    write_meta(o.os(), {{"q", fmt(a.q)},
                        {"alpha", fmt(a.alpha)},
                        {"t", std::to_string(a.t)},
                        {"note", "index 1 = most recent observation; head = weight on mu0"}});
    o.os() << "index_from_newest,weight\n";
    for (long i = 1; i <= a.t; ++i)
        o.os() << i << "," << fmt(wp.weights[static_cast<std::size_t>(i - 1)]) << "\n";
    o.os() << "head," << fmt(wp.head) << "\n";
}

// ---------------------------------------------------------------------------
// variance: Q_t series; for alpha = 1 the EWMA closed form rides along.

struct VarianceArgs {
    double q = 0.75, alpha = 1.0;
    long t_max = 100;
    std::string out;
};

void run_variance(const VarianceArgs& a) {
    const gwma::GwmaParams p{a.q, a.alpha};
    p.validate();
    if (a.t_max < 1) throw std::runtime_error("--t-max must be >= 1");
    Output o(a.out);
    const bool closed = a.alpha == 1.0;
    write_meta(o.os(), {{"q", fmt(a.q)}, {"alpha", fmt(a.alpha)},
                        {"t_max", std::to_string(a.t_max)}});
    o.os() << (closed ? "t,q_t,ewma_variance_factor\n" : "t,q_t\n");
    const double lq = std::log(a.q);
    double sum = 0.0, prev = 1.0;
    for (long t = 1; t <= a.t_max; ++t) {
        const double cur = std::exp(std::pow(static_cast<double>(t), a.alpha) * lq);
        const double w = prev - cur;
        sum += w * w;
        prev = cur;
        o.os() << t << "," << fmt(sum);
        if (closed)
            o.os() << "," << fmt(gwma::ewma_variance_factor({1.0 - a.q}, t));
        o.os() << "\n";
    }
}

// ---------------------------------------------------------------------------
// match: asymptotic-variance-matched EWMA lambda for GWMA designs.

struct MatchArgs {
    double q = 0.75;
    std::vector<double> alpha;       // single values
    std::vector<double> range;       // lo hi
    long steps = 101;
    long horizon = 200;
    std::string out;
};

void run_match(const MatchArgs& a) {
    std::vector<gwma::MatchPoint> rows;
    if (!a.range.empty()) {
        rows = gwma::match_lambda_curve(a.q, a.range[0], a.range[1], a.steps, a.horizon);
    } else if (!a.alpha.empty()) {
        for (double al : a.alpha) {
            const gwma::GwmaParams p{a.q, al};
            const double qa = gwma::gwma_q_asymptotic(p, a.horizon);
            rows.push_back({al, qa, 2.0 * qa / (1.0 + qa)});
        }
    } else {
        throw std::runtime_error("match: give --alpha or --alpha-range");
    }
    Output o(a.out);
    write_meta(o.os(), {{"q", fmt(a.q)}, {"horizon", std::to_string(a.horizon)}});
    o.os() << "alpha,q_asymptotic,lambda\n";
    for (const auto& r : rows)
        o.os() << fmt(r.alpha) << "," << fmt(r.q_asymptotic) << "," << fmt(r.lambda) << "\n";
}

// ---------------------------------------------------------------------------
// arl: zero-state ARL over a shift list.

struct ArlArgs {
    SchemeOpts scheme;
    double limit = 3.0;
    std::string delta_list = "0";
    std::string engine = "auto";
    std::string mode = "time-varying";
    long reps = 100000;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    long window_cap = 10000;
    long rl_cap = 1000000;
    int states = 201;
    long max_t = 30000;
    std::string out;
};

void emit_arl_rows(std::ostream& os, const std::string& prefix,
                   const gwma::ChartScheme& scheme, double limit,
                   const std::string& engine, gwma::LimitMode mode,
                   const std::vector<double>& deltas, const ArlArgs& a) {
    const gwma::MarkovConfig mcfg{a.states, a.max_t, 1e-12};
    for (double d : deltas) {
        if (engine == "analytic") {
            const gwma::ChartSpec spec{scheme, {}, limit, mode};
            const auto e = spec.as_ewma();
            if (!e)
                throw std::runtime_error(
                    "analytic engine requires an EWMA scheme (or GWMA with alpha = 1)");
            const double arl = gwma::ewma_arl(*e, limit, d, mode, mcfg);
            os << prefix << fmt(d) << "," << fmt(arl) << ",0,0,0\n";
        } else {
            const gwma::ChartSpec spec{scheme, {}, limit, mode};
            gwma::SimConfig cfg{a.reps, a.seed, a.window_cap, a.rl_cap,
                                a.workers ? a.workers : default_workers()};
            const auto r = gwma::zero_state_arl_mc(spec, d, cfg);
            os << prefix << fmt(d) << "," << fmt(r.estimate) << ","
               << fmt(r.std_error) << "," << r.reps_retained << "," << r.capped << "\n";
        }
    }
}

void run_arl(const ArlArgs& a) {
    const auto scheme = a.scheme.resolve();
    const gwma::LimitMode mode = parse_mode(a.mode);
    std::string engine = a.engine;
    if (engine == "auto") engine = a.scheme.kind == "ewma" ? "analytic" : "mc";
    if (engine == "mc" && !a.seed_set)
        throw std::runtime_error("arl: Monte Carlo engine requires --seed");
    const auto deltas = parse_list(a.delta_list);

    Output o(a.out);
    write_meta(o.os(), {{"scheme", a.scheme.label()},
                        {"limit_const", fmt(a.limit)},
                        {"limit_mode", a.mode},
                        {"engine", engine},
                        {"reps", std::to_string(a.reps)},
                        {"seed", std::to_string(a.seed)},
                        {"window_cap", std::to_string(a.window_cap)},
                        {"rl_cap", std::to_string(a.rl_cap)},
                        {"markov_states", std::to_string(a.states)},
                        {"markov_max_t", std::to_string(a.max_t)},
                        {"rng", gwma::kRngId}});
    o.os() << "delta,arl,std_error,reps_retained,capped\n";
    emit_arl_rows(o.os(), "", scheme, a.limit, engine, mode, deltas, a);
}

// ---------------------------------------------------------------------------
// ced: Monte Carlo D_tau profile for tau = 1..tau_max.

struct CedArgs {
    SchemeOpts scheme;
    double limit = 3.0;
    double delta = 0.5;
    long tau_max = 100;
    std::string mode = "time-varying";
    long reps = 100000;
    std::uint64_t seed = 0;
    int workers = 0;
    long window_cap = 10000;
    long rl_cap = 1000000;
    std::string out;
};

void run_ced(const CedArgs& a) {
    const gwma::ChartSpec spec{a.scheme.resolve(), {}, a.limit, parse_mode(a.mode)};
    gwma::SimConfig cfg{a.reps, a.seed, a.window_cap, a.rl_cap,
                        a.workers ? a.workers : default_workers()};
    const auto profile = gwma::ced_profile(spec, a.delta, a.tau_max, cfg);

    Output o(a.out);
    write_meta(o.os(), {{"scheme", a.scheme.label()},
                        {"limit_const", fmt(a.limit)},
                        {"limit_mode", a.mode},
                        {"delta", fmt(a.delta)},
                        {"tau_max", std::to_string(a.tau_max)},
                        {"reps", std::to_string(a.reps)},
                        {"seed", std::to_string(a.seed)},
                        {"window_cap", std::to_string(a.window_cap)},
                        {"rl_cap", std::to_string(a.rl_cap)},
                        {"method", profile.front().method},
                        {"rng", gwma::kRngId}});
    o.os() << "tau,d_tau,std_error,reps_retained,capped\n";
    for (const auto& s : profile)
        o.os() << s.shift.tau << "," << fmt(s.estimate) << "," << fmt(s.std_error)
               << "," << s.reps_retained << "," << s.capped << "\n";
}

// ---------------------------------------------------------------------------
// calibrate: limit constant for a target in-control ARL. JSON output.

struct CalArgs {
    SchemeOpts scheme;
    double target = 500.0;
    std::string engine = "auto";
    std::string mode = "time-varying";
    double tol = 0.5;
    long reps = 200000;
    long confirm_reps = 1000000;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    int states = 201;
    long max_t = 100000;
    std::string out;
};

void run_calibrate(const CalArgs& a) {
    const auto scheme = a.scheme.resolve();
    std::string engine = a.engine;
    if (engine == "auto") engine = a.scheme.kind == "ewma" ? "analytic" : "mc";
    const auto eng = engine == "analytic" ? gwma::CalibrationEngine::Analytic
                                          : gwma::CalibrationEngine::MonteCarlo;
    if (eng == gwma::CalibrationEngine::MonteCarlo && !a.seed_set)
        throw std::runtime_error("calibrate: Monte Carlo engine requires --seed");

    gwma::CalibrateOptions opt;
    opt.tol = a.tol;
    opt.sim.reps = a.reps;
    opt.sim.seed = a.seed;
    opt.sim.workers = a.workers ? a.workers : default_workers();
    opt.confirm_reps = a.confirm_reps;
    opt.markov = gwma::MarkovConfig{a.states, a.max_t, 1e-12};

    const auto res = gwma::calibrate_limit(scheme, a.target, eng, parse_mode(a.mode), opt);

    json j;
    j["command"] = g_command_line;
    j["version"] = GWMA_RL_VERSION;
    j["scheme"] = a.scheme.label();
    j["engine"] = gwma::to_string(res.engine);
    j["limit_mode"] = gwma::to_string(res.limit_mode);
    j["target_arl0"] = res.target_arl0;
    j["tol"] = res.tol;
    j["limit_const"] = res.limit_const;
    j["achieved_arl0"] = res.achieved_arl0;
    j["achieved_std_error"] = res.achieved_std_error;
    j["iterations"] = res.iterations;
    j["bracket"] = {res.bracket_lo, res.bracket_hi};
    if (eng == gwma::CalibrationEngine::MonteCarlo) {
        j["seed"] = a.seed;
        j["reps_per_iterate"] = a.reps;
        j["confirm_reps"] = a.confirm_reps;
        j["rng"] = gwma::kRngId;
    } else {
        j["markov_states"] = a.states;
        j["markov_max_t"] = a.max_t;
    }
    Output o(a.out);
    o.os() << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// monitor: run a chart over a file of observations.

struct MonitorArgs {
    SchemeOpts scheme;
    double limit = 3.0;
    std::string mode = "time-varying";
    double mu0 = 0.0;
    double sigma0 = 1.0;
    std::string input;
    int csv_column = 0; // 0 = whole line
    long skip_lines = 0;
    std::string out;
};

int run_monitor(const MonitorArgs& a) {
    std::ifstream in(a.input);
    if (!in) throw std::runtime_error("cannot open input file: " + a.input);

    std::vector<double> series;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno <= a.skip_lines) continue;
        if (line.empty()) continue;
        std::string field = line;
        if (a.csv_column > 0) {
            std::stringstream ss(line);
            std::string tok;
            for (int k = 0; k < a.csv_column; ++k) {
                if (!std::getline(ss, tok, ','))
                    throw std::runtime_error("line " + std::to_string(lineno) +
                                             ": fewer than " + std::to_string(a.csv_column) +
                                             " columns");
            }
            field = tok;
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(field, &pos);
            while (pos < field.size() &&
                   (field[pos] == ' ' || field[pos] == '\r' || field[pos] == '\t'))
                ++pos;
            if (pos != field.size()) throw std::invalid_argument("trailing junk");
            series.push_back(v);
        } catch (const std::exception&) {
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": cannot parse observation '" + field + "'");
        }
    }
    if (series.empty()) throw std::runtime_error("monitor: no observations in input");

    const gwma::ChartSpec spec{a.scheme.resolve(), {a.mu0, a.sigma0}, a.limit,
                               parse_mode(a.mode)};
    const auto run = gwma::apply_chart(series, spec);

    Output o(a.out);
    write_meta(o.os(), {{"scheme", a.scheme.label()},
                        {"limit_const", fmt(a.limit)},
                        {"limit_mode", a.mode},
                        {"mu0", fmt(a.mu0)},
                        {"sigma0", fmt(a.sigma0)},
                        {"input", a.input},
                        {"observations", std::to_string(series.size())}});
    o.os() << "t,statistic,lcl,ucl,signal\n";
    for (const auto& p : run.trace)
        o.os() << p.t << "," << fmt(p.statistic) << "," << fmt(p.lcl) << ","
               << fmt(p.ucl) << "," << (p.outside ? 1 : 0) << "\n";

    if (run.first_signal) {
        std::cout << *run.first_signal << "\n";
        return 2;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// preset: canned reference datasets, one per name.

struct PresetArgs {
    std::string name;
    long reps = 100000;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    std::string out;
};

struct Design {
    const char* label;
    gwma::ChartScheme scheme;
    double limit;
    bool is_ewma;
    double lambda; // analytic engine parameter when is_ewma
};

const std::vector<Design>& five_designs() {
    static const std::vector<Design> d = {
        {"gwma(q=0.75;alpha=0.5)", gwma::GwmaParams{0.75, 0.5}, 3.063, false, 0.0},
        {"gwma(q=0.75;alpha=0.8)", gwma::GwmaParams{0.75, 0.8}, 3.021, false, 0.0},
        {"ewma(lambda=0.25)", gwma::EwmaParams{0.25}, 3.002, true, 0.25},
        {"ewma(lambda=0.206)", gwma::EwmaParams{0.206}, 2.971, true, 0.206},
        {"ewma(lambda=0.152)", gwma::EwmaParams{0.152}, 2.915, true, 0.152},
    };
    return d;
}

std::vector<double> shift_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 16; ++i) g.push_back(0.25 * i);
    return g;
}

void require_seed(const PresetArgs& a) {
    if (!a.seed_set)
        throw std::runtime_error("preset " + a.name + " simulates and requires --seed");
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "table-1", "table-2", "figure-1", "figure-2", "figure-3",
        "figure-4", "figure-5", "figure-6", "figure-7"};
    return names;
}

void run_preset(const PresetArgs& a) {
    // Validate everything before touching the output path, so a failed
    // invocation leaves no file behind.
    bool known = false;
    for (const auto& n : preset_names()) known = known || n == a.name;
    if (!known) throw std::runtime_error("unknown preset: " + a.name);
    if (a.name == "table-1" || a.name == "table-2" || a.name == "figure-4" ||
        a.name == "figure-5" || a.name == "figure-6" || a.name == "figure-7")
        require_seed(a);

    const gwma::MarkovConfig mcfg{201, 30000, 1e-12};
    const int workers = a.workers ? a.workers : default_workers();
    const auto meta_common = [&](std::initializer_list<std::pair<std::string, std::string>> extra) {
        std::vector<std::pair<std::string, std::string>> kv{
            {"preset", a.name},
            {"reps", std::to_string(a.reps)},
            {"seed", std::to_string(a.seed)},
            {"rng", gwma::kRngId}};
        kv.insert(kv.end(), extra.begin(), extra.end());
        return kv;
    };

    Output o(a.out.empty() ? a.name + ".csv" : a.out);
    std::ostream& os = o.os();

    if (a.name == "figure-1") {
        // Weight profiles at t = 20, q = 0.75, for five alpha values spanning
        // the monotone and non-monotone regimes (alpha = 1.75 is the classic
        // age-increasing case).
        write_meta(os, {{"preset", a.name}, {"q", "0.75"}, {"t", "20"}});
        os << "alpha,index_from_newest,weight\n";
        for (double al : {0.5, 0.75, 1.0, 1.25, 1.75}) {
            const auto wp = gwma::gwma_weights({0.75, al}, 20);
            for (long i = 1; i <= 20; ++i)
                os << fmt(al) << "," << i << ","
                   << fmt(wp.weights[static_cast<std::size_t>(i - 1)]) << "\n";
            os << fmt(al) << ",head," << fmt(wp.head) << "\n";
        }
        return;
    }
    if (a.name == "figure-2") {
        write_meta(os, {{"preset", a.name}, {"q", "0.75"}, {"t_max", "100"}});
        os << "alpha,t,q_t\n";
        for (double al : {0.8, 1.0, 1.2}) {
            for (long t = 1; t <= 100; ++t)
                os << fmt(al) << "," << t << "," << fmt(gwma::gwma_qt({0.75, al}, t)) << "\n";
        }
        return;
    }
    if (a.name == "figure-3") {
        write_meta(os, {{"preset", a.name}, {"q", "0.75"}, {"alpha_range", "[0.5,1.5]"},
                        {"horizon", "200"}});
        os << "alpha,q_asymptotic,lambda\n";
        for (const auto& r : gwma::match_lambda_curve(0.75, 0.5, 1.5, 101))
            os << fmt(r.alpha) << "," << fmt(r.q_asymptotic) << "," << fmt(r.lambda) << "\n";
        return;
    }

    if (a.name == "table-1" || a.name == "table-2") {
        struct Col { const char* label; double q, alpha, limit; };
        static const Col gw[] = {{"gwma(q=0.75;alpha=0.5)", 0.75, 0.5, 3.063},
                                 {"gwma(q=0.75;alpha=0.75)", 0.75, 0.75, 3.028},
                                 {"gwma(q=0.75;alpha=0.8)", 0.75, 0.8, 3.021},
                                 {"gwma(q=0.75;alpha=0.9)", 0.75, 0.9, 3.001}};
        std::vector<std::pair<double, double>> ew; // lambda, limit
        if (a.name == "table-1") ew = {{0.25, 3.002}};
        else ew = {{0.206, 2.971}, {0.152, 2.915}};
        const std::vector<double> deltas{0, 0.25, 0.5, 0.75, 1, 1.25, 1.5, 2, 3};

        write_meta(os, meta_common({{"limit_mode", "time-varying"},
                                    {"markov_states", "201"}}));
        os << "design,engine,delta,arl,std_error,reps_retained,capped\n";
        for (const auto& c : gw) {
            const gwma::ChartSpec spec{gwma::GwmaParams{c.q, c.alpha}, {}, c.limit,
                                       gwma::LimitMode::TimeVarying};
            gwma::SimConfig cfg{a.reps, a.seed, 10000, 1000000, workers};
            for (double d : deltas) {
                const auto r = gwma::zero_state_arl_mc(spec, d, cfg);
                os << c.label << ",monte-carlo," << fmt(d) << "," << fmt(r.estimate)
                   << "," << fmt(r.std_error) << "," << r.reps_retained << ","
                   << r.capped << "\n";
            }
        }
        for (const auto& [lam, lim] : ew) {
            for (double d : deltas) {
                const double arl =
                    gwma::ewma_arl({lam}, lim, d, gwma::LimitMode::TimeVarying, mcfg);
                os << "ewma(lambda=" << fmt(lam) << "),analytic," << fmt(d) << ","
                   << fmt(arl) << ",0,0,0\n";
            }
        }
        return;
    }

    if (a.name == "figure-4" || a.name == "figure-5") {
        const std::vector<double> deltas =
            a.name == "figure-4" ? std::vector<double>{0.5, 1.0}
                                 : std::vector<double>{2.0, 3.0};
        write_meta(os, meta_common({{"tau_max", "100"},
                                    {"limit_mode", "time-varying"},
                                    {"method", "ced-profile(single-pass branching)"}}));
        os << "design,delta,tau,d_tau,std_error,reps_retained\n";
        for (const auto& dsn : five_designs()) {
            const gwma::ChartSpec spec{dsn.scheme, {}, dsn.limit,
                                       gwma::LimitMode::TimeVarying};
            gwma::SimConfig cfg{a.reps, a.seed, 10000, 1000000, workers};
            for (double d : deltas) {
                const auto prof = gwma::ced_profile(spec, d, 100, cfg);
                for (const auto& s : prof)
                    os << dsn.label << "," << fmt(d) << "," << s.shift.tau << ","
                       << fmt(s.estimate) << "," << fmt(s.std_error) << ","
                       << s.reps_retained << "\n";
            }
        }
        return;
    }

    if (a.name == "figure-6" || a.name == "figure-7") {
        const bool f6 = a.name == "figure-6";
        const Design gw = f6 ? five_designs()[1] : five_designs()[0];
        const Design ewd = f6 ? five_designs()[3] : five_designs()[4];
        write_meta(os, meta_common({{"shift_grid", "0..4 step 0.25"},
                                    {"limit_mode", "time-varying"},
                                    {"steady_state", "D_100 proxy"}}));
        os << "design,engine,delta,zero_state_arl,zero_state_se,steady_state_arl,"
              "steady_state_se\n";
        for (double d : shift_grid()) {
            const gwma::ChartSpec spec{gw.scheme, {}, gw.limit,
                                       gwma::LimitMode::TimeVarying};
            gwma::SimConfig cfg{a.reps, a.seed, 10000, 1000000, workers};
            const auto z = gwma::zero_state_arl_mc(spec, d, cfg);
            const auto s = gwma::steady_state_arl_mc(spec, d, cfg);
            os << gw.label << ",monte-carlo," << fmt(d) << "," << fmt(z.estimate) << ","
               << fmt(z.std_error) << "," << fmt(s.estimate) << "," << fmt(s.std_error)
               << "\n";
        }
        for (double d : shift_grid()) {
            const double z =
                gwma::ewma_arl({ewd.lambda}, ewd.limit, d, gwma::LimitMode::TimeVarying, mcfg);
            const double s = gwma::ewma_steady_state_arl({ewd.lambda}, ewd.limit, d,
                                                         gwma::LimitMode::TimeVarying, mcfg);
            os << ewd.label << ",analytic," << fmt(d) << "," << fmt(z) << ",0,"
               << fmt(s) << ",0\n";
        }
        return;
    }

    throw std::runtime_error("unknown preset: " + a.name);
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        if (i) g_command_line += ' ';
        g_command_line += quote_arg(argv[i]);
    }

    CLI::App app{"Run-length analysis for GWMA and EWMA control charts"};
    app.require_subcommand(1);
    app.set_version_flag("--version", GWMA_RL_VERSION);

    WeightsArgs wa;
    auto* weights = app.add_subcommand("weights", "GWMA weight profile at time t");
    weights->add_option("--q", wa.q)->capture_default_str();
    weights->add_option("--alpha", wa.alpha)->capture_default_str();
    weights->add_option("--t", wa.t)->capture_default_str();
    weights->add_option("--out", wa.out, "Output CSV ('-' = stdout)");

    VarianceArgs va;
    auto* variance = app.add_subcommand("variance", "GWMA variance factor series Q_t");
    variance->add_option("--q", va.q)->capture_default_str();
    variance->add_option("--alpha", va.alpha)->capture_default_str();
    variance->add_option("--t-max", va.t_max)->capture_default_str();
    variance->add_option("--out", va.out);

    MatchArgs ma;
    auto* match = app.add_subcommand("match", "Variance-matched EWMA lambda for GWMA designs");
    match->add_option("--q", ma.q)->capture_default_str();
    match->add_option("--alpha", ma.alpha, "One or more alpha values");
    match->add_option("--alpha-range", ma.range, "alpha_lo alpha_hi")->expected(2);
    match->add_option("--steps", ma.steps)->capture_default_str();
    match->add_option("--horizon", ma.horizon)->capture_default_str();
    match->add_option("--out", ma.out);

    ArlArgs aa;
    auto* arl = app.add_subcommand("arl", "Zero-state ARL over a shift list");
    aa.scheme.attach(arl, true, &aa.limit);
    arl->add_option("--delta-list", aa.delta_list, "Comma-separated shifts (sigma0 units)")
        ->capture_default_str();
    arl->add_option("--engine", aa.engine, "auto, analytic, or mc")
        ->check(CLI::IsMember({"auto", "analytic", "mc"}))->capture_default_str();
    arl->add_option("--limit-mode", aa.mode)->capture_default_str();
    arl->add_option("--reps", aa.reps)->capture_default_str();
    auto* arl_seed = arl->add_option("--seed", aa.seed, "Master seed (required for mc)");
    arl->add_option("--workers", aa.workers, "Worker threads (default: GWMA_WORKERS or cores)");
    arl->add_option("--window-cap", aa.window_cap)->capture_default_str();
    arl->add_option("--rl-cap", aa.rl_cap)->capture_default_str();
    arl->add_option("--states", aa.states)->capture_default_str();
    arl->add_option("--max-t", aa.max_t)->capture_default_str();
    arl->add_option("--out", aa.out);

    CedArgs ca;
    auto* ced = app.add_subcommand("ced", "Monte Carlo conditional expected delay profile");
    ca.scheme.attach(ced, true, &ca.limit);
    ced->add_option("--delta", ca.delta)->capture_default_str();
    ced->add_option("--tau-max", ca.tau_max)->capture_default_str();
    ced->add_option("--limit-mode", ca.mode)->capture_default_str();
    ced->add_option("--reps", ca.reps)->capture_default_str();
    ced->add_option("--seed", ca.seed)->required();
    ced->add_option("--workers", ca.workers);
    ced->add_option("--window-cap", ca.window_cap)->capture_default_str();
    ced->add_option("--rl-cap", ca.rl_cap)->capture_default_str();
    ced->add_option("--out", ca.out);

    CalArgs cala;
    auto* cal = app.add_subcommand("calibrate", "Limit constant for a target in-control ARL");
    cala.scheme.attach(cal, false, nullptr);
    cal->add_option("--target", cala.target)->capture_default_str();
    cal->add_option("--engine", cala.engine)->check(CLI::IsMember({"auto", "analytic", "mc"}))
        ->capture_default_str();
    cal->add_option("--limit-mode", cala.mode)->capture_default_str();
    cal->add_option("--tol", cala.tol)->capture_default_str();
    cal->add_option("--reps", cala.reps, "Replicates per bisection iterate")
        ->capture_default_str();
    cal->add_option("--confirm-reps", cala.confirm_reps)->capture_default_str();
    auto* cal_seed = cal->add_option("--seed", cala.seed);
    cal->add_option("--workers", cala.workers);
    cal->add_option("--states", cala.states)->capture_default_str();
    cal->add_option("--max-t", cala.max_t)->capture_default_str();
    cal->add_option("--out", cala.out);

    MonitorArgs mo;
    auto* mon = app.add_subcommand("monitor", "Run a chart over a file of observations");
    mo.scheme.attach(mon, true, &mo.limit);
    mon->add_option("--limit-mode", mo.mode)->capture_default_str();
    mon->add_option("--mu0", mo.mu0)->capture_default_str();
    mon->add_option("--sigma0", mo.sigma0)->capture_default_str();
    mon->add_option("--input", mo.input, "One observation per line, or CSV")->required();
    mon->add_option("--csv-column", mo.csv_column, "1-based CSV column (0 = whole line)")
        ->capture_default_str();
    mon->add_option("--skip-lines", mo.skip_lines, "Header lines to skip")
        ->capture_default_str();
    mon->add_option("--out", mo.out, "Trace CSV ('-' = stdout)");

    PresetArgs pa;
    auto* preset = app.add_subcommand("preset", "Emit one canned dataset: table-1, table-2, figure-1..figure-7");
    preset->add_option("name", pa.name, "Preset name")->required();
    preset->add_option("--reps", pa.reps)->capture_default_str();
    auto* preset_seed = preset->add_option("--seed", pa.seed);
    preset->add_option("--workers", pa.workers);
    preset->add_option("--out", pa.out, "Output CSV (default <name>.csv)");

    CLI11_PARSE(app, argc, argv);

    aa.seed_set = arl_seed->count() > 0;
    cala.seed_set = cal_seed->count() > 0;
    pa.seed_set = preset_seed->count() > 0;

    try {
        if (weights->parsed()) run_weights(wa);
        else if (variance->parsed()) run_variance(va);
        else if (match->parsed()) run_match(ma);
        else if (arl->parsed()) run_arl(aa);
        else if (ced->parsed()) run_ced(ca);
        else if (cal->parsed()) run_calibrate(cala);
        else if (mon->parsed()) return run_monitor(mo);
        else if (preset->parsed()) run_preset(pa);
    } catch (const std::exception& e) {
        std::cerr << "gwma-rl: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
