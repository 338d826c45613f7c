#include "ose/adversary.hpp"

#include "ose/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace ose {

// ---------------------------------------------------------------------------
// Heavy entries

HeavyProfile heavy_profile(const SketchMatrix& pi, double theta, double eps, Index good_count_threshold) {
    require(theta > 0.0, ErrorKind::Parameter, "heavy_profile: theta must be positive");
    HeavyProfile prof;
    prof.theta = theta;
    prof.per_column_counts.resize(pi.cols());
    double total = 0.0;
    for (Index c = 0; c < pi.cols(); ++c) {
        Index count = 0;
        for (const Entry& e : pi.column(c))
            if (is_heavy(e.value, theta)) ++count;
        prof.per_column_counts[c] = count;
        total += static_cast<double>(count);
        const double norm = pi.column_norm(c);
        if (count >= good_count_threshold && norm >= 1.0 - eps && norm <= 1.0 + eps) prof.good_columns.push_back(c);
    }
    prof.average = pi.cols() ? total / static_cast<double>(pi.cols()) : 0.0;
    return prof;
}

std::vector<Index> shared_heavy_rows(const SketchMatrix& pi, Index a, Index b, double theta) {
    const auto ca = pi.column(a);
    const auto cb = pi.column(b);
    std::vector<Index> rows;
    auto ia = ca.begin();
    auto ib = cb.begin();
    while (ia != ca.end() && ib != cb.end()) {
        if (ia->row < ib->row) {
            ++ia;
        } else if (ib->row < ia->row) {
            ++ib;
        } else {
            if (is_heavy(ia->value, theta) && is_heavy(ib->value, theta)) rows.push_back(ia->row);
            ++ia;
            ++ib;
        }
    }
    return rows;
}

bool collide(const SketchMatrix& pi, Index a, Index b, double theta) {
    return !shared_heavy_rows(pi, a, b, theta).empty();
}

// ---------------------------------------------------------------------------
// Thresholds

namespace {

Index ceil_count(double x) { return static_cast<Index>(std::max(0.0, std::ceil(x - 1e-9))); }
Index floor_count(double x) { return static_cast<Index>(std::max(0.0, std::floor(x + 1e-9))); }

void check_search_params(double eps, double eta) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::Parameter, "pair search: eps must lie in (0,1)");
    require(eta > 0.0, ErrorKind::Parameter, "pair search: eta must be positive");
}

}  // namespace

PairSearchThresholds basic_thresholds(const HardInstance& inst, double eps, double eta) {
    check_search_params(eps, eta);
    const double d = static_cast<double>(inst.d());
    PairSearchThresholds t;
    t.eps = eps;
    t.theta = std::sqrt(8.0 * eps);
    t.good_count = std::max<Index>(1, ceil_count(1.0 / (16.0 * eps)));
    t.phi_bound = eta / d;
    t.budget = inst.d() / 16;
    t.considered = inst.selectors().size();
    t.eps_pow_delta = 1.0;
    return t;
}

double general_delta_prime(double eps) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::Parameter, "delta': eps must lie in (0,1)");
    const double log_inv = std::log2(1.0 / eps);
    const double inner = 72.0 * log_inv;  // log2(1/eps^72)
    require(inner > 1.0, ErrorKind::Parameter, "delta': eps too close to 1");
    return std::log2(inner) / log_inv;
}

PairSearchThresholds general_thresholds(const HardInstance& inst, double eps, Index ell, Index ell_prime,
                                        double eta) {
    check_search_params(eps, eta);
    require(ell < 62 && ell_prime < 62, ErrorKind::Parameter, "pair search: ell out of range");
    require(inst.r() == (Index{1} << ell_prime), ErrorKind::Parameter,
            fmt::format("pair search: instance has r = {} but ell' = {} needs r = {}", inst.r(), ell_prime,
                        Index{1} << ell_prime));
    const double scale = std::pow(eps, general_delta_prime(eps));
    const double two_ell = std::ldexp(1.0, static_cast<int>(ell));
    const double pool = scale * static_cast<double>(inst.d()) * std::ldexp(1.0, static_cast<int>(ell_prime));
    PairSearchThresholds t;
    t.eps = eps;
    t.theta = std::sqrt(std::ldexp(1.0, -static_cast<int>(ell)));
    t.good_count = std::max<Index>(1, ceil_count(scale * two_ell / 3.0));
    t.phi_bound = eta / pool;
    t.budget = floor_count(pool / 16.0);
    t.considered = std::min<Index>(inst.selectors().size(), ceil_count(pool));
    t.eps_pow_delta = scale;
    return t;
}

const char* to_string(TraceKind kind) noexcept {
    switch (kind) {
        case TraceKind::RowPruned: return "row_pruned";
        case TraceKind::RowPair: return "row_pair";
        case TraceKind::RowSingle: return "row_single";
        case TraceKind::Idle: return "idle";
        case TraceKind::ProbePair: return "probe_pair";
        case TraceKind::ProbeLone: return "probe_lone";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Pair search

namespace {

class PairSearch {
public:
    PairSearch(const SketchMatrix& pi, const HardInstance& inst, const PairSearchThresholds& th, Seed seed)
        : th_(th), rng_(seed), heavy_(pi.cols()), in_g_(pi.cols(), 0), rows_(pi.rows()),
          stamp_(pi.cols(), 0) {
        const Index n = pi.cols();
        for (Index c = 0; c < n; ++c) {
            for (const Entry& e : pi.column(c))
                if (is_heavy(e.value, th.theta)) heavy_[c].push_back(e.row);
            const double norm = pi.column_norm(c);
            if (heavy_[c].size() >= th.good_count && norm >= 1.0 - th.eps && norm <= 1.0 + th.eps) {
                in_g_[c] = 1;
                result_.initial_g.push_back(c);
                for (Index l : heavy_[c]) rows_[l].push_back(c);
            }
        }
        g_size_ = result_.initial_g.size();
        const Index considered = std::min<Index>(th.considered, inst.selectors().size());
        for (Index t = 0; t < considered; ++t)
            if (in_g_[inst.selectors()[t]]) result_.good_selectors.push_back(inst.selectors()[t]);
        in_s_.assign(result_.good_selectors.size(), 1);
        s_size_ = result_.good_selectors.size();
        result_.thresholds = th;
    }

    PairSearchResult run() {
        const auto& sel = result_.good_selectors;
        for (Index j = 0; j < th_.budget; ++j) {
            std::vector<Index> s_prime;
            std::vector<Index> g_row;
            Index ell = 0;
            for (;;) {
                const bool phi_small = all_phi_small();
                if (g_size_ > 0) {
                    ell = heaviest_row();
                    g_row = members(ell);
                    s_prime.clear();
                    for (Index i = 0; i < sel.size(); ++i)
                        if (in_s_[i] && has_heavy(sel[i], ell)) s_prime.push_back(i);
                }
                if (phi_small) {
                    s_prime.clear();
                    break;
                }
                if (!s_prime.empty()) break;
                TraceEvent ev = event(j, TraceKind::RowPruned);
                ev.row = ell;
                for (Index c : g_row) drop_g(c, ev);
                finish(ev);
                ++k_;
            }

            if (!s_prime.empty()) {
                if (s_prime.size() >= 2) {
                    const Index a = rng_.below(s_prime.size());
                    Index b = rng_.below(s_prime.size() - 1);
                    if (b >= a) ++b;
                    TraceEvent ev = event(j, TraceKind::RowPair);
                    ev.row = ell;
                    emit_pair(s_prime[a], s_prime[b], ev);
                    finish(ev);
                } else {
                    TraceEvent ev = event(j, TraceKind::RowSingle);
                    ev.row = ell;
                    for (Index i : s_prime) drop_s(i, ev);
                    for (Index c : g_row) drop_g(c, ev);
                    finish(ev);
                }
            } else if (j >= sel.size() || !in_s_[j]) {
                finish(event(j, TraceKind::Idle));
            } else {
                std::vector<Index> partners;
                for (Index i = 0; i < sel.size(); ++i)
                    if (i != j && in_s_[i] && heavy_overlap(sel[i], sel[j])) partners.push_back(i);
                if (!partners.empty()) {
                    const Index pick = partners[rng_.below(partners.size())];
                    TraceEvent ev = event(j, TraceKind::ProbePair);
                    emit_pair(pick, j, ev);
                    finish(ev);
                } else {
                    TraceEvent ev = event(j, TraceKind::ProbeLone);
                    ev.second = sel[j];
                    drop_s(j, ev);
                    for (Index c : colliding_with(sel[j])) drop_g(c, ev);
                    finish(ev);
                }
            }
            ++k_;
        }
        return std::move(result_);
    }

private:
    bool has_heavy(Index c, Index row) const {
        return std::binary_search(heavy_[c].begin(), heavy_[c].end(), row);
    }

    bool heavy_overlap(Index a, Index b) const {
        auto ia = heavy_[a].begin();
        auto ib = heavy_[b].begin();
        while (ia != heavy_[a].end() && ib != heavy_[b].end()) {
            if (*ia < *ib) ++ia;
            else if (*ib < *ia) ++ib;
            else return true;
        }
        return false;
    }

    std::vector<Index> members(Index row) const {
        std::vector<Index> out;
        for (Index c : rows_[row])
            if (in_g_[c]) out.push_back(c);
        return out;
    }

    // Columns of G sharing a heavy row with c (c itself included), ascending.
    std::vector<Index> colliding_with(Index c) {
        ++cur_;
        std::vector<Index> out;
        for (Index l : heavy_[c])
            for (Index c2 : rows_[l])
                if (in_g_[c2] && stamp_[c2] != cur_) {
                    stamp_[c2] = cur_;
                    out.push_back(c2);
                }
        std::sort(out.begin(), out.end());
        return out;
    }

    // phi_c = |{c' in G : c' <-> c}| / |G| for every c in G, compared to the bound.
    bool all_phi_small() {
        if (g_size_ == 0) return true;
        const double limit = th_.phi_bound * static_cast<double>(g_size_);
        for (Index c : result_.initial_g) {
            if (!in_g_[c]) continue;
            ++cur_;
            Index count = 0;
            for (Index l : heavy_[c])
                for (Index c2 : rows_[l])
                    if (in_g_[c2] && stamp_[c2] != cur_) {
                        stamp_[c2] = cur_;
                        ++count;
                    }
            if (static_cast<double>(count) > limit) return false;
        }
        return true;
    }

    // argmax_l |G^l|, lowest row on ties.
    Index heaviest_row() const {
        Index best = 0;
        Index best_count = 0;
        for (Index l = 0; l < rows_.size(); ++l) {
            Index count = 0;
            for (Index c : rows_[l]) count += in_g_[c];
            if (count > best_count) {
                best_count = count;
                best = l;
            }
        }
        return best;
    }

    TraceEvent event(Index j, TraceKind kind) const {
        TraceEvent ev;
        ev.k = k_;
        ev.j = j;
        ev.kind = kind;
        return ev;
    }

    void drop_g(Index c, TraceEvent& ev) {
        if (!in_g_[c]) return;
        in_g_[c] = 0;
        --g_size_;
        ev.removed_g.push_back(c);
    }

    void drop_s(Index i, TraceEvent& ev) {
        if (!in_s_[i]) return;
        in_s_[i] = 0;
        --s_size_;
        ev.removed_s.push_back(i);
    }

    void emit_pair(Index pos_a, Index pos_b, TraceEvent& ev) {
        const auto& sel = result_.good_selectors;
        ev.first = sel[pos_a];
        ev.second = sel[pos_b];
        result_.pairs.push_back({sel[pos_a], sel[pos_b], pos_a, pos_b});
        drop_s(pos_a, ev);
        drop_s(pos_b, ev);
    }

    void finish(TraceEvent ev) {
        ev.g_size = g_size_;
        ev.s_size = s_size_;
        result_.trace.push_back(std::move(ev));
    }

    PairSearchThresholds th_;
    CounterRng rng_;
    std::vector<std::vector<Index>> heavy_;   // heavy rows per column, ascending
    std::vector<char> in_g_;
    std::vector<std::vector<Index>> rows_;    // initial G members per row
    std::vector<Index> stamp_;
    Index cur_ = 0;
    std::vector<char> in_s_;
    Index g_size_ = 0;
    Index s_size_ = 0;
    Index k_ = 1;
    PairSearchResult result_;
};

}  // namespace

PairSearchResult run_pair_search(const SketchMatrix& pi, const HardInstance& inst,
                                 const PairSearchThresholds& thresholds, Seed seed) {
    require(pi.cols() == inst.n(), ErrorKind::DimensionMismatch,
            fmt::format("pair search: sketch has {} columns but instance has n = {}", pi.cols(), inst.n()));
    require(thresholds.theta > 0.0, ErrorKind::Parameter, "pair search: theta must be positive");
    return PairSearch(pi, inst, thresholds, seed).run();
}

PairSearchResult find_colliding_pairs(const SketchMatrix& pi, const HardInstance& inst, double eps, double eta,
                                      Seed seed, std::optional<Index> budget_override) {
    PairSearchThresholds th = basic_thresholds(inst, eps, eta);
    if (budget_override) th.budget = *budget_override;
    return run_pair_search(pi, inst, th, seed);
}

PairSearchResult find_colliding_pairs_general(const SketchMatrix& pi, const HardInstance& inst, double eps,
                                              Index ell, Index ell_prime, double eta, Seed seed,
                                              std::optional<Index> budget_override) {
    PairSearchThresholds th = general_thresholds(inst, eps, ell, ell_prime, eta);
    if (budget_override) th.budget = *budget_override;
    return run_pair_search(pi, inst, th, seed);
}

void write_trace(std::ostream& out, const PairSearchResult& result) {
    auto opt = [](const std::optional<Index>& v) { return v ? std::to_string(*v) : std::string("-"); };
    auto list = [](const std::vector<Index>& v) {
        return v.empty() ? std::string("-") : fmt::format("{}", fmt::join(v, ","));
    };
    const auto& th = result.thresholds;
    out << "# theta=" << detail::format_real(th.theta) << " good_count=" << th.good_count
        << " phi_bound=" << detail::format_real(th.phi_bound) << " budget=" << th.budget
        << " considered=" << th.considered << " eps_pow_delta=" << detail::format_real(th.eps_pow_delta) << '\n';
    for (const TraceEvent& ev : result.trace) {
        out << "k=" << ev.k << " j=" << ev.j << " kind=" << to_string(ev.kind) << " row=" << opt(ev.row)
            << " first=" << opt(ev.first) << " second=" << opt(ev.second) << " removed_g=" << list(ev.removed_g)
            << " removed_s=" << list(ev.removed_s) << " g=" << ev.g_size << " s=" << ev.s_size << '\n';
    }
}

// ---------------------------------------------------------------------------
// Witnesses

const char* to_string(AnticoncMethod m) noexcept {
    switch (m) {
        case AnticoncMethod::None: return "none";
        case AnticoncMethod::Exhaustive: return "exhaustive";
        case AnticoncMethod::MonteCarlo: return "monte_carlo";
    }
    return "unknown";
}

CollisionCertificate build_witness(const SketchMatrix& pi, const HardInstance& inst, Index col_p, Index col_q,
                                   double theta) {
    require(pi.cols() == inst.n(), ErrorKind::DimensionMismatch, "build_witness: sketch/instance size mismatch");
    require(col_p != col_q, ErrorKind::Precondition, "build_witness: columns must be distinct");
    const auto jp = inst.selector_position(col_p);
    const auto jq = inst.selector_position(col_q);
    require(jp.has_value(), ErrorKind::Precondition, fmt::format("build_witness: column {} is not a selector", col_p));
    require(jq.has_value(), ErrorKind::Precondition, fmt::format("build_witness: column {} is not a selector", col_q));

    CollisionCertificate cert;
    cert.col_p = col_p;
    cert.col_q = col_q;
    cert.theta = theta;
    cert.shared_heavy_rows = shared_heavy_rows(pi, col_p, col_q, theta);
    cert.inner_product = column_inner_product(pi, col_p, col_q);
    cert.p_prime = inst.block_of(*jp);
    cert.q_prime = inst.block_of(*jq);
    cert.equal_blocks = cert.p_prime == cert.q_prime;
    if (cert.equal_blocks) {
        cert.witness = {{cert.p_prime, 1.0}};
    } else {
        const double h = 1.0 / std::sqrt(2.0);
        cert.witness = {{std::min(cert.p_prime, cert.q_prime), h}, {std::max(cert.p_prime, cert.q_prime), h}};
    }
    return cert;
}

double anticoncentration_prob(const SketchMatrix& pi, const HardInstance& inst, CollisionCertificate& cert,
                              double eps, std::uint64_t mc_budget, Seed seed) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::Parameter, "anticoncentration_prob: eps must lie in (0,1)");
    require(pi.cols() == inst.n(), ErrorKind::DimensionMismatch, "anticoncentration_prob: size mismatch");
    const Index r = inst.r();

    // Selectors of the touched blocks, each with weight u_block / sqrt(r).
    std::vector<Index> cols;
    std::vector<double> weights;
    for (const Entry& w : cert.witness) {
        require(w.row < inst.d(), ErrorKind::Precondition, "anticoncentration_prob: witness outside R^d");
        for (Index j = w.row * r; j < (w.row + 1) * r; ++j) {
            cols.push_back(inst.selectors()[j]);
            weights.push_back(w.value / std::sqrt(static_cast<double>(r)));
        }
    }
    const Index k = cols.size();

    // Compress the touched rows of Pi into a local dense workspace.
    std::unordered_map<Index, Index> local;
    std::vector<std::vector<std::pair<Index, double>>> terms(k);
    for (Index t = 0; t < k; ++t) {
        for (const Entry& e : pi.column(cols[t])) {
            auto [it, fresh] = local.try_emplace(e.row, local.size());
            terms[t].emplace_back(it->second, e.value * weights[t]);
        }
    }
    std::vector<double> y(local.size());
    const double lo = (1.0 - eps) * (1.0 - eps);
    const double hi = (1.0 + eps) * (1.0 + eps);
    auto outside = [&](auto&& sign_of) {
        std::fill(y.begin(), y.end(), 0.0);
        for (Index t = 0; t < k; ++t) {
            const double s = sign_of(t);
            for (const auto& [row, v] : terms[t]) y[row] += s * v;
        }
        double norm_sq = 0.0;
        for (double v : y) norm_sq += v * v;
        return norm_sq < lo || norm_sq > hi;
    };

    if (k <= kExhaustiveLimit) {
        // A global sign flip leaves the norm unchanged, so fix the first sign.
        const std::uint64_t patterns = k == 0 ? 1 : (std::uint64_t{1} << (k - 1));
        std::uint64_t hits = 0;
        for (std::uint64_t mask = 0; mask < patterns; ++mask)
            hits += outside([&](Index t) { return (t > 0 && ((mask >> (t - 1)) & 1)) ? -1.0 : 1.0; });
        cert.anticonc_prob = static_cast<double>(hits) / static_cast<double>(patterns);
        cert.anticonc_stderr = 0.0;
        cert.anticonc_method = AnticoncMethod::Exhaustive;
    } else {
        require(mc_budget >= 1, ErrorKind::Parameter, "anticoncentration_prob: Monte Carlo budget must be positive");
        CounterRng rng(seed);
        std::vector<double> signs(k);
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < mc_budget; ++t) {
            for (double& s : signs) s = rng.sign();
            hits += outside([&](Index i) { return signs[i]; });
        }
        const double p = static_cast<double>(hits) / static_cast<double>(mc_budget);
        cert.anticonc_prob = p;
        cert.anticonc_stderr = std::sqrt(p * (1.0 - p) / static_cast<double>(mc_budget));
        cert.anticonc_method = AnticoncMethod::MonteCarlo;
    }
    return cert.anticonc_prob;
}

void write_certificate(std::ostream& out, const CollisionCertificate& cert, std::size_t trace_length) {
    using detail::format_real;
    out << "col_p: " << cert.col_p << '\n';
    out << "col_q: " << cert.col_q << '\n';
    out << "theta: " << format_real(cert.theta) << '\n';
    out << "shared_heavy_rows:";
    for (Index r : cert.shared_heavy_rows) out << ' ' << r;
    out << '\n';
    out << "inner_product: " << format_real(cert.inner_product) << '\n';
    out << "p_prime: " << cert.p_prime << '\n';
    out << "q_prime: " << cert.q_prime << '\n';
    out << "equal_blocks: " << (cert.equal_blocks ? "true" : "false") << '\n';
    out << "witness:";
    for (const Entry& e : cert.witness) out << ' ' << e.row << ':' << format_real(e.value);
    out << '\n';
    out << "anticonc_prob: " << format_real(cert.anticonc_prob) << '\n';
    out << "anticonc_stderr: " << format_real(cert.anticonc_stderr) << '\n';
    out << "anticonc_method: " << to_string(cert.anticonc_method) << '\n';
    out << "trace_length: " << trace_length << '\n';
}

// ---------------------------------------------------------------------------
// Facts

double verify_small_inner_product(const std::vector<std::vector<double>>& vectors, double eps, double kappa) {
    require(eps > 0.0 && eps < 1.0 / 9.0, ErrorKind::Parameter, "verify_small_inner_product: eps must lie in (0, 1/9)");
    require(!vectors.empty(), ErrorKind::Precondition, "verify_small_inner_product: empty vector set");
    const Index dim = vectors.front().size();
    for (const auto& v : vectors) {
        require(v.size() == dim, ErrorKind::DimensionMismatch, "verify_small_inner_product: ragged vector set");
        double sq = 0.0;
        for (double x : v) sq += x * x;
        require(std::sqrt(sq) <= 1.0 + 1e-12, ErrorKind::Precondition,
                "verify_small_inner_product: vector outside the unit ball");
    }
    const double cutoff = -kappa * eps;
    std::uint64_t good = 0;
    for (const auto& u : vectors) {
        for (const auto& v : vectors) {
            double ip = 0.0;
            for (Index i = 0; i < dim; ++i) ip += u[i] * v[i];
            if (ip >= cutoff) ++good;
        }
    }
    const double total = static_cast<double>(vectors.size()) * static_cast<double>(vectors.size());
    return static_cast<double>(good) / total;
}

RademacherTail rademacher_fact_check(double x1, double x2, double x3, double a) {
    require(std::abs(x1) >= std::abs(x2) && std::abs(x2) >= std::abs(x3), ErrorKind::Precondition,
            "rademacher_fact_check: need |x1| >= |x2| >= |x3|");
    require(a >= 0.0 && std::abs(x1) >= a, ErrorKind::Precondition, "rademacher_fact_check: need |x1| >= a >= 0");
    int up = 0;
    int down = 0;
    for (int s1 : {1, -1}) {
        for (int s2 : {1, -1}) {
            const double v = s1 * x1 + s2 * x2 + s1 * s2 * x3;
            if (v >= a) ++up;
            if (v <= -a) ++down;
        }
    }
    return {up / 4.0, down / 4.0};
}

}  // namespace ose
