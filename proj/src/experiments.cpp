#include "ose/experiments.hpp"

#include "ose/error.hpp"
#include "ose/parallel.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"

namespace ose {

using detail::format_real;

// ---------------------------------------------------------------------------
// Sweeps

std::vector<Index> geometric_grid(Index lo, Index hi, double factor) {
    require(lo >= 1 && lo <= hi, ErrorKind::Parameter, "geometric grid: need 1 <= m_lo <= m_hi");
    require(std::isfinite(factor) && factor > 1.0, ErrorKind::Parameter, "geometric grid: factor must exceed 1");
    std::vector<Index> grid;
    for (int k = 0;; ++k) {
        const double x = static_cast<double>(lo) * std::pow(factor, k);
        // Guard against pow() landing a hair above an integer.
        const auto m = static_cast<Index>(std::ceil(x * (1.0 - 1e-12)));
        if (m > hi) break;
        if (grid.empty() || m > grid.back()) grid.push_back(m);
    }
    return grid;
}

void validate(const SweepConfig& cfg) {
    require(!cfg.d_list.empty(), ErrorKind::Parameter, "sweep: d list is empty");
    require(!cfg.eps_list.empty(), ErrorKind::Parameter, "sweep: eps list is empty");
    require(!cfg.delta_list.empty(), ErrorKind::Parameter, "sweep: delta list is empty");
    require(!cfg.m_grid.empty(), ErrorKind::Parameter, "sweep: m grid is empty");
    require(cfg.trials_per_point >= 100, ErrorKind::Parameter, "sweep: trials per point must be at least 100");
    for (Index k = 1; k < cfg.m_grid.size(); ++k)
        require(cfg.m_grid[k - 1] < cfg.m_grid[k], ErrorKind::Parameter, "sweep: m grid must be strictly increasing");
    require(cfg.m_grid.front() >= 1, ErrorKind::Parameter, "sweep: m must be at least 1");
    for (Index d : cfg.d_list) require(d >= 1, ErrorKind::Parameter, "sweep: d must be at least 1");
    for (double e : cfg.eps_list)
        require(e > 0.0 && e < 1.0, ErrorKind::Parameter, "sweep: eps must lie in (0,1)");
    for (double dl : cfg.delta_list)
        require(dl > 0.0 && dl < 1.0, ErrorKind::Parameter, "sweep: delta must lie in (0,1)");
    require(cfg.n_cap >= 1, ErrorKind::Parameter, "sweep: n cap must be positive");
}

Index sweep_n(const SweepConfig& cfg, Index d, double eps) {
    Index n = 0;
    if (cfg.n_override) {
        n = *cfg.n_override;
    } else {
        const double delta = *std::min_element(cfg.delta_list.begin(), cfg.delta_list.end());
        const double want = std::ceil(8.0 * static_cast<double>(d * d) * std::max(1.0, 1.0 / (eps * eps * delta)));
        n = want >= static_cast<double>(cfg.n_cap) ? cfg.n_cap : static_cast<Index>(want);
    }
    require(n >= 1, ErrorKind::Parameter, "sweep: n must be at least 1");
    require(n <= kDefaultNCap || cfg.force_large_n, ErrorKind::Parameter,
            fmt::format("sweep: n = {} exceeds 10^7 columns; pass --force-large-n to allow it", n));
    return n;
}

namespace {

// Small dense least squares via the normal equations with partial pivoting.
std::vector<double> solve_normal(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    const Index p = x.front().size();
    std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
    for (Index row = 0; row < x.size(); ++row) {
        for (Index i = 0; i < p; ++i) {
            for (Index j = 0; j < p; ++j) a[i][j] += x[row][i] * x[row][j];
            a[i][p] += x[row][i] * y[row];
        }
    }
    for (Index col = 0; col < p; ++col) {
        Index piv = col;
        for (Index i = col + 1; i < p; ++i)
            if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
        std::swap(a[col], a[piv]);
        require(std::abs(a[col][col]) > 1e-12, ErrorKind::Precondition, "scaling fit: singular design");
        for (Index i = 0; i < p; ++i) {
            if (i == col) continue;
            const double f = a[i][col] / a[col][col];
            for (Index j = col; j <= p; ++j) a[i][j] -= f * a[col][j];
        }
    }
    std::vector<double> beta(p);
    for (Index i = 0; i < p; ++i) beta[i] = a[i][p] / a[i][i];
    return beta;
}

template <class F>
bool varies(const std::vector<ThresholdPoint>& pts, F get) {
    std::set<double> seen;
    for (const auto& p : pts) seen.insert(get(p));
    return seen.size() > 1;
}

}  // namespace

std::optional<ScalingFit> fit_scaling(const std::vector<ThresholdPoint>& points) {
    std::vector<ThresholdPoint> pts;
    for (const auto& p : points)
        if (p.m_star) pts.push_back(p);
    if (pts.size() < 3) return std::nullopt;

    const bool vd = varies(pts, [](const ThresholdPoint& p) { return static_cast<double>(p.d); });
    const bool ve = varies(pts, [](const ThresholdPoint& p) { return p.eps; });
    const bool vdel = varies(pts, [](const ThresholdPoint& p) { return p.delta; });
    const Index params = 1 + Index(vd) + Index(ve) + Index(vdel);
    if (params == 1 || pts.size() <= params) return std::nullopt;

    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (const auto& p : pts) {
        std::vector<double> row{1.0};
        if (vd) row.push_back(std::log(static_cast<double>(p.d)));
        if (ve) row.push_back(std::log(p.eps));
        if (vdel) row.push_back(std::log(p.delta));
        x.push_back(std::move(row));
        y.push_back(std::log(static_cast<double>(*p.m_star)));
    }
    const auto beta = solve_normal(x, y);

    ScalingFit fit;
    fit.points = pts.size();
    fit.intercept = beta[0];
    Index k = 1;
    if (vd) fit.exponent_d = beta[k++];
    if (ve) fit.exponent_eps = beta[k++];
    if (vdel) fit.exponent_delta = beta[k++];

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        double pred = 0.0;
        for (Index j = 0; j < beta.size(); ++j) pred += beta[j] * x[i][j];
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

SweepResult threshold_sweep(const SweepConfig& cfg) {
    validate(cfg);
    SweepResult res;
    for (Index d : cfg.d_list) {
        for (double eps : cfg.eps_list) {
            const Index n = sweep_n(cfg, d, eps);
            const Distribution dist{cfg.family, d, cfg.r, eps};
            const Index first = res.rows.size();
            for (Index m : cfg.m_grid) {
                const ConstructionSpec spec{cfg.kind, m, n, cfg.s, eps, 0};
                SweepRow row;
                row.d = d;
                row.eps = eps;
                row.m = m;
                row.n = n;
                row.seed = derive_seed(cfg.seed, {d, m});
                row.estimate = estimate_random_sketch_failure(spec, dist, eps, cfg.trials_per_point, row.seed,
                                                              cfg.threads);
                res.rows.push_back(row);
            }
            for (double delta : cfg.delta_list) {
                ThresholdPoint tp{d, eps, delta, std::nullopt};
                for (Index k = first; k < res.rows.size(); ++k) {
                    if (res.rows[k].estimate.wilson_high <= delta) {
                        tp.m_star = res.rows[k].m;
                        break;
                    }
                }
                res.thresholds.push_back(tp);
            }
        }
    }
    res.fit = fit_scaling(res.thresholds);
    return res;
}

namespace {

std::string label_for(const SweepConfig& cfg, Index d, double eps) {
    return Distribution{cfg.family, d, cfg.r, eps}.csv_label();
}

template <class T>
std::string join_list(const std::vector<T>& v) {
    std::string out;
    for (Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>) out += format_real(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

nlohmann::ordered_json config_json(const SweepConfig& cfg) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(cfg.kind);
    j["s"] = cfg.s;
    j["d_list"] = cfg.d_list;
    j["eps_list"] = cfg.eps_list;
    j["delta_list"] = cfg.delta_list;
    j["m_grid"] = cfg.m_grid;
    j["trials_per_point"] = cfg.trials_per_point;
    j["family"] = to_string(cfg.family);
    j["r"] = cfg.r;
    j["seed"] = cfg.seed;
    j["n_override"] = cfg.n_override ? nlohmann::ordered_json(*cfg.n_override) : nlohmann::ordered_json();
    j["n_cap"] = cfg.n_cap;
    j["force_large_n"] = cfg.force_large_n;
    return j;
}

std::string threshold_key(const ThresholdPoint& p) {
    return fmt::format("d={},eps={},delta={}", p.d, format_real(p.eps), format_real(p.delta));
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepConfig& cfg, const SweepResult& result) {
    // Thread count is deliberately not echoed: outputs do not depend on it.
    fmt::print(out, "# sweep kind={} s={} family={} r={} seed={} trials_per_point={}\n", to_string(cfg.kind),
               cfg.s, to_string(cfg.family), cfg.r, cfg.seed, cfg.trials_per_point);
    fmt::print(out, "# d_list={} eps_list={} delta_list={}\n", join_list(cfg.d_list), join_list(cfg.eps_list),
               join_list(cfg.delta_list));
    fmt::print(out, "# m_grid={}\n", join_list(cfg.m_grid));
    out << failure_csv_header() << '\n';
    for (const auto& row : result.rows)
        out << failure_csv_row(row.m, row.n, row.d, label_for(cfg, row.d, row.eps), row.eps, row.estimate, row.seed)
            << '\n';
}

void write_sweep_json(std::ostream& out, const SweepConfig& cfg, const SweepResult& result) {
    nlohmann::ordered_json j;
    j["config"] = config_json(cfg);
    nlohmann::ordered_json ms = nlohmann::ordered_json::object();
    for (const auto& p : result.thresholds)
        ms[threshold_key(p)] = p.m_star ? nlohmann::ordered_json(*p.m_star) : nlohmann::ordered_json();
    j["m_star"] = ms;
    if (result.fit) {
        const auto& f = *result.fit;
        auto opt = [](const std::optional<double>& v) {
            return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
        };
        j["fit"] = {{"exponent_d", opt(f.exponent_d)},
                    {"exponent_eps", opt(f.exponent_eps)},
                    {"exponent_delta", opt(f.exponent_delta)},
                    {"intercept", f.intercept},
                    {"r_squared", f.r_squared},
                    {"points", f.points}};
    } else {
        j["fit"] = nullptr;
    }
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Hadamard tightness

double hadamard_duplicate_prob(Index m, Index n, Index d) {
    require(m >= 1 && d >= 1 && d <= n, ErrorKind::Parameter, "duplicate probability: need 1 <= d <= n, m >= 1");
    // e_j over class sizes, each divided by C(n, j) on the fly is awkward;
    // long double has ample range for the sizes used here.
    std::vector<long double> e(d + 1, 0.0L);
    e[0] = 1.0L;
    for (Index k = 0; k < std::min(m, n); ++k) {
        const long double size = static_cast<long double>(n / m + (k < n % m ? 1 : 0));
        for (Index j = std::min<Index>(d, k + 1); j >= 1; --j) e[j] += e[j - 1] * size;
    }
    long double choose = 1.0L;
    for (Index j = 0; j < d; ++j) choose = choose * static_cast<long double>(n - j) / static_cast<long double>(j + 1);
    return static_cast<double>(1.0L - e[d] / choose);
}

HadamardDemo demo_hadamard_tightness(double eps, Index d, std::uint64_t trials, Seed seed, Index c,
                                     std::optional<Index> n) {
    require(trials >= 1, ErrorKind::Parameter, "hadamard demo: trials must be at least 1");
    require(d >= 1 && c >= 1, ErrorKind::Parameter, "hadamard demo: d and c must be at least 1");
    HadamardDemo demo;
    demo.m = c * d * d;
    demo.n = n.value_or(demo.m);
    require(d <= demo.n, ErrorKind::Infeasible, "hadamard demo: d exceeds n");
    const SketchMatrix pi = gen_hadamard_block(eps, demo.m, demo.n);
    const Distribution dist{Family::DBeta, d, 1, eps};

    std::uint64_t failures = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto [inst, label] = sample(dist, demo.n, derive_seed(seed, {t}));
        const auto report = fast_check_embedding(pi, inst, kIsometryTolerance);
        if (!report.pass) ++failures;
        std::set<Index> classes;
        for (Index col : inst.selectors()) classes.insert(col % demo.m);
        if (classes.size() < d) {
            ++demo.duplicate_trials;
        } else {
            demo.max_eps_effective_distinct = std::max(demo.max_eps_effective_distinct, report.eps_effective);
        }
    }
    demo.estimate = wilson_estimate(failures, trials);
    demo.duplicate_prob = hadamard_duplicate_prob(demo.m, demo.n, d);
    return demo;
}

// ---------------------------------------------------------------------------
// Audit

AuditReport heavy_entry_audit(const SketchMatrix& pi, double eps) {
    require(eps > 0.0 && eps < 1.0 / 16.0, ErrorKind::Parameter, "heavy entry audit: eps must lie in (0, 1/16)");
    AuditReport rep;
    rep.eps = eps;
    rep.eps_pow_delta = std::pow(eps, general_delta_prime(eps));
    rep.columns_total = pi.cols();
    const auto levels = static_cast<Index>(general_mixture_levels(eps));

    std::vector<Index> kept;
    double sq_total = 0.0;
    for (Index j = 0; j < pi.cols(); ++j) {
        const double sq = squared_norm(pi.column(j));
        const double norm = std::sqrt(sq);
        if (norm >= 1.0 - eps && norm <= 1.0 + eps) {
            kept.push_back(j);
            sq_total += sq;
        }
    }
    rep.columns_kept = kept.size();
    rep.empty = kept.empty();
    const double denom = rep.empty ? 1.0 : static_cast<double>(kept.size());
    rep.mean_squared_norm = rep.empty ? 0.0 : sq_total / denom;

    double prev = 0.0;
    for (Index ell = 0; ell <= levels; ++ell) {
        AuditRow row;
        row.ell = ell;
        row.theta = std::sqrt(std::ldexp(1.0, -static_cast<int>(ell)));
        Index count = 0;
        for (Index j : kept)
            for (const Entry& e : pi.column(j))
                if (is_heavy(e.value, row.theta)) ++count;
        row.average = static_cast<double>(count) / denom;
        row.cap = rep.eps_pow_delta * std::ldexp(1.0, static_cast<int>(ell));
        row.within_cap = row.average <= row.cap * (1.0 + 1e-12);
        // Entries heavy at ell but not at ell-1 have value^2 < 2^-(ell-1);
        // those heavy at level 0 are bounded by the column norm.
        const double top = ell == 0 ? (1.0 + eps) * (1.0 + eps) : std::ldexp(1.0, -static_cast<int>(ell) + 1);
        rep.dyadic_mass_bound += (row.average - prev) * top;
        prev = row.average;
        rep.rows.push_back(row);
    }
    rep.norm_budget = 4.0 * rep.eps_pow_delta * std::log2(1.0 / eps) +
                      static_cast<double>(pi.max_col_nnz()) * 8.0 * eps;
    return rep;
}

void write_audit(std::ostream& out, const AuditReport& rep) {
    fmt::print(out, "eps: {}\n", format_real(rep.eps));
    fmt::print(out, "eps_pow_delta: {}\n", format_real(rep.eps_pow_delta));
    fmt::print(out, "columns_total: {}\n", rep.columns_total);
    fmt::print(out, "columns_kept: {}\n", rep.columns_kept);
    fmt::print(out, "empty: {}\n", rep.empty ? "true" : "false");
    fmt::print(out, "mean_squared_norm: {}\n", format_real(rep.mean_squared_norm));
    fmt::print(out, "dyadic_mass_bound: {}\n", format_real(rep.dyadic_mass_bound));
    fmt::print(out, "norm_budget: {}\n", format_real(rep.norm_budget));
    out << "ell,theta,average,cap,within_cap\n";
    for (const auto& r : rep.rows)
        fmt::print(out, "{},{},{},{},{}\n", r.ell, format_real(r.theta), format_real(r.average), format_real(r.cap),
                   r.within_cap ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Collision statistics

namespace {

// Ordered colliding pairs of good columns, (c, c) included: returns
// (sum of shared heavy rows, number of pairs).
std::pair<double, double> t1_totals(const SketchMatrix& pi, const std::vector<Index>& good, double theta) {
    std::map<Index, std::vector<Index>> by_row;
    std::vector<std::vector<Index>> heavy_rows(good.size());
    for (Index k = 0; k < good.size(); ++k)
        for (const Entry& e : pi.column(good[k]))
            if (is_heavy(e.value, theta)) {
                heavy_rows[k].push_back(e.row);
                by_row[e.row].push_back(k);
            }
    double shared = 0.0, pairs = 0.0;
    for (Index k = 0; k < good.size(); ++k) {
        std::map<Index, Index> partners;
        for (Index row : heavy_rows[k])
            for (Index other : by_row[row]) ++partners[other];
        pairs += static_cast<double>(partners.size());
        for (const auto& [other, cnt] : partners) shared += static_cast<double>(cnt);
    }
    return {shared, pairs};
}

}  // namespace

CollisionSummary collision_pair_stats(const SketchMatrix& pi, const std::vector<Seed>& inst_seeds, double eps,
                                      const PairStatsParams& params) {
    CollisionSummary sum;
    sum.target = params.general ? std::ldexp(1.0, -static_cast<int>(params.ell)) - params.kappa * eps
                                : (8.0 - params.kappa) * eps;
    double shared_total = 0.0;
    Index emitted = 0;
    bool have_t1 = false;
    for (Seed s : inst_seeds) {
        const auto [inst, label] = sample(params.dist, pi.cols(), s);
        const Seed search_seed = derive_seed(s, {1});
        const PairSearchResult res =
            params.general ? find_colliding_pairs_general(pi, inst, eps, params.ell, params.ell_prime, params.eta,
                                                          search_seed, params.budget_override)
                           : find_colliding_pairs(pi, inst, eps, params.eta, search_seed, params.budget_override);
        const double theta = res.thresholds.theta;
        sum.pairs_per_run.push_back(res.pairs.size());
        bool success = false;
        for (const auto& p : res.pairs) {
            const double ip = column_inner_product(pi, p.first, p.second);
            if (ip >= sum.target - 1e-12) success = true;
            shared_total += static_cast<double>(shared_heavy_rows(pi, p.first, p.second, theta).size());
            ++emitted;
        }
        if (success) ++sum.success_runs;
        // The initial good set depends on Pi and the thresholds only, so one
        // run suffices.
        if (!have_t1) {
            have_t1 = true;
            const auto [shared, pairs] = t1_totals(pi, res.initial_g, theta);
            if (pairs > 0.0) sum.delta_t1 = shared / pairs;
        }
    }
    const double runs = static_cast<double>(inst_seeds.size());
    if (!inst_seeds.empty()) {
        Index total = 0;
        for (Index p : sum.pairs_per_run) total += p;
        sum.mean_pairs = static_cast<double>(total) / runs;
        sum.success_fraction = static_cast<double>(sum.success_runs) / runs;
    }
    if (emitted > 0) sum.delta_hat = shared_total / static_cast<double>(emitted);
    return sum;
}

}  // namespace ose
