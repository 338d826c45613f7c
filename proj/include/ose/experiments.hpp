#pragma once

#include "ose/adversary.hpp"
#include "ose/constructions.hpp"
#include "ose/embedcheck.hpp"
#include "ose/hardinstances.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ose {

// ---------------------------------------------------------------------------
// Threshold sweeps

/// ceil(lo * factor^k) for k = 0, 1, ... while <= hi, duplicates dropped.
std::vector<Index> geometric_grid(Index lo, Index hi, double factor);

inline constexpr Index kDefaultNCap = 10'000'000;

struct SweepConfig {
    ConstructionKind kind = ConstructionKind::CountSketch;
    Index s = 1;
    std::vector<Index> d_list;
    std::vector<double> eps_list;     // distortion levels checked
    std::vector<double> delta_list;   // failure targets used for m_star
    std::vector<Index> m_grid;        // strictly increasing
    std::uint64_t trials_per_point = 1000;
    Family family = Family::DBeta;
    Index r = 1;                      // DBeta only
    Seed seed = 42;
    unsigned threads = 1;
    std::optional<Index> n_override;
    Index n_cap = kDefaultNCap;
    bool force_large_n = false;
};

/// Throws Error{Parameter} on an invalid config.
void validate(const SweepConfig& cfg);

/// n = ceil(8 d^2 max(1, 1/(eps^2 delta))), capped at n_cap, unless
/// overridden. Rejects n > 10^7 unless force_large_n.
Index sweep_n(const SweepConfig& cfg, Index d, double eps);

struct SweepRow {
    Index d = 0;
    double eps = 0.0;
    Index m = 0;
    Index n = 0;
    Seed seed = 0;   // base seed of the grid point
    FailureEstimate estimate;
};

struct ThresholdPoint {
    Index d = 0;
    double eps = 0.0;
    double delta = 0.0;
    std::optional<Index> m_star;   // empty: no grid m reached wilson_high <= delta
};

/// log m_star = c + a_d log d + a_eps log eps + a_delta log delta, fitted by
/// least squares over the axes that actually vary.
struct ScalingFit {
    std::optional<double> exponent_d;
    std::optional<double> exponent_eps;
    std::optional<double> exponent_delta;
    double intercept = 0.0;
    double r_squared = 0.0;
    Index points = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<ThresholdPoint> thresholds;
    std::optional<ScalingFit> fit;   // needs at least 3 attained thresholds
};

/// Every grid point draws a fresh Pi and a fresh instance per trial. The base
/// seed of point (d, m) is derive_seed(cfg.seed, {d, m}); rows for all
/// deltas are shared, since delta only enters through m_star and n.
SweepResult threshold_sweep(const SweepConfig& cfg);

/// Least-squares fit on attained thresholds; empty with fewer than 3 points
/// or no varying axis.
std::optional<ScalingFit> fit_scaling(const std::vector<ThresholdPoint>& points);

void write_sweep_csv(std::ostream& out, const SweepConfig& cfg, const SweepResult& result);
void write_sweep_json(std::ostream& out, const SweepConfig& cfg, const SweepResult& result);

// ---------------------------------------------------------------------------
// Hadamard-block tightness

struct HadamardDemo {
    Index m = 0;
    Index n = 0;
    FailureEstimate estimate;
    /// Exact chance that two of the d selectors hit identical columns of Pi.
    double duplicate_prob = 0.0;
    /// Largest eps_effective over trials without duplicate columns.
    double max_eps_effective_distinct = 0.0;
    std::uint64_t duplicate_trials = 0;
};

inline constexpr double kIsometryTolerance = 1e-9;

/// Hadamard-block Pi with m = c d^2 rows and n columns (default n = m),
/// checked at distortion 1e-9 over D_1 instances; trial t uses instance seed
/// derive_seed(seed, {t}).
HadamardDemo demo_hadamard_tightness(double eps, Index d, std::uint64_t trials, Seed seed, Index c = 4,
                                     std::optional<Index> n = std::nullopt);

/// 1 - e_d(class sizes) / C(n, d), where columns c and c' of the Hadamard
/// block matrix coincide iff c = c' mod m.
double hadamard_duplicate_prob(Index m, Index n, Index d);

// ---------------------------------------------------------------------------
// Heavy-entry audit

struct AuditRow {
    Index ell = 0;
    double theta = 0.0;      // sqrt(2^-ell)
    double average = 0.0;    // heavy entries per kept column
    double cap = 0.0;        // eps^delta' 2^ell
    bool within_cap = true;
};

struct AuditReport {
    double eps = 0.0;
    double eps_pow_delta = 0.0;
    Index columns_total = 0;
    Index columns_kept = 0;  // norm in [1-eps, 1+eps]
    bool empty = true;       // no column kept
    std::vector<AuditRow> rows;
    double mean_squared_norm = 0.0;
    /// Upper bound on the average squared mass of entries with value^2 >=
    /// 2^-L implied by the per-level averages.
    double dyadic_mass_bound = 0.0;
    /// 4 eps^delta' log2(1/eps) + s 8 eps.
    double norm_budget = 0.0;
};

/// Levels ell = 0..L with L = floor(log2(1/eps)) - 3. Requires eps < 1/16.
AuditReport heavy_entry_audit(const SketchMatrix& pi, double eps);

void write_audit(std::ostream& out, const AuditReport& report);

// ---------------------------------------------------------------------------
// Collision statistics of the pair search

struct PairStatsParams {
    Distribution dist;             // instances the search runs on
    double eta = 1.0;
    double kappa = 3.0;
    bool general = false;          // Algorithm 2 instead of Algorithm 1
    Index ell = 0;
    Index ell_prime = 0;
    std::optional<Index> budget_override;
};

struct CollisionSummary {
    std::vector<Index> pairs_per_run;
    double mean_pairs = 0.0;
    double target = 0.0;           // (8 - kappa) eps, or 2^-ell - kappa eps
    Index success_runs = 0;        // runs with a pair at inner product >= target
    double success_fraction = 0.0;
    /// Mean shared heavy rows over emitted pairs.
    std::optional<double> delta_hat;
    /// Mean shared heavy rows over ordered colliding pairs of initial good
    /// columns, (c, c) included.
    std::optional<double> delta_t1;
};

/// Run i samples its instance with seed inst_seeds[i] and drives the search
/// with derive_seed(inst_seeds[i], {1}).
CollisionSummary collision_pair_stats(const SketchMatrix& pi, const std::vector<Seed>& inst_seeds, double eps,
                                      const PairStatsParams& params);

}  // namespace ose
