#pragma once

#include "ose/hardinstances.hpp"
#include "ose/rng.hpp"
#include "ose/sparsemat.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ose {

// ---------------------------------------------------------------------------
// Heavy entries and good columns

/// An entry is theta-heavy when its magnitude is at least theta. A relative
/// slack of 1e-12 absorbs rounding: sqrt(2^-k) and 1/sqrt(2^k) differ by an
/// ulp for odd k, and entries built as 1/sqrt(s) must count as heavy at
/// theta = sqrt(1/s).
inline bool is_heavy(double value, double theta) noexcept {
    const double t = theta * (1.0 - 1e-12);
    return value >= t || value <= -t;
}

struct HeavyProfile {
    double theta = 0.0;
    std::vector<Index> per_column_counts;
    double average = 0.0;
    /// Columns with at least good_count_threshold heavy entries and norm in
    /// [1 - eps, 1 + eps], ascending.
    std::vector<Index> good_columns;
};

HeavyProfile heavy_profile(const SketchMatrix& pi, double theta, double eps, Index good_count_threshold);

/// Rows on which both columns carry theta-heavy entries, ascending.
std::vector<Index> shared_heavy_rows(const SketchMatrix& pi, Index a, Index b, double theta);

/// Columns collide when they share at least one theta-heavy row.
bool collide(const SketchMatrix& pi, Index a, Index b, double theta);

// ---------------------------------------------------------------------------
// Pair search (Algorithms 1 and 2)

/// Resolved thresholds for one pair-search run. Non-integer count thresholds
/// are rounded up, loop budgets rounded down.
struct PairSearchThresholds {
    double eps = 0.0;
    double theta = 0.0;            // heaviness threshold
    Index good_count = 1;          // heavy entries required of a good column
    double phi_bound = 0.0;        // while-loop exits once every phi <= phi_bound
    Index budget = 0;              // for-loop iterations
    Index considered = 0;          // leading selectors the search looks at
    double eps_pow_delta = 1.0;    // eps^delta' (1 for the s = 1/(9 eps) search)
};

/// Algorithm 1: theta = sqrt(8 eps), good count ceil(1/(16 eps)),
/// phi bound eta/d, budget floor(d/16), all selectors considered.
PairSearchThresholds basic_thresholds(const HardInstance& inst, double eps, double eta);

/// delta' = log2 log2(1/eps^72) / log2(1/eps).
double general_delta_prime(double eps);

/// Algorithm 2: theta = sqrt(2^-ell), good count ceil(eps^delta' 2^ell / 3),
/// phi bound eta / (eps^delta' d 2^ell'), budget floor(eps^delta' d 2^ell' / 16),
/// leading ceil(eps^delta' d 2^ell') selectors considered.
PairSearchThresholds general_thresholds(const HardInstance& inst, double eps, Index ell, Index ell_prime, double eta);

enum class TraceKind {
    RowPruned,     // (ell, bottom) inside the while-loop: G loses G^ell
    RowPair,       // (C_j', C_j'') from the heaviest row
    RowSingle,     // (ell, bottom) after the loop: a single selector on row ell
    Idle,          // (bottom, bottom): j no longer in S
    ProbePair,     // (C_j', C_j)
    ProbeLone,     // (bottom, C_j): G loses everything colliding with C_j
};

const char* to_string(TraceKind kind) noexcept;

struct TraceEvent {
    Index k = 0;                     // step counter of the algorithm
    Index j = 0;                     // for-loop iteration (0-based)
    TraceKind kind = TraceKind::Idle;
    std::optional<Index> row;        // ell, for row events
    std::optional<Index> first;      // column indices of Pi
    std::optional<Index> second;
    std::vector<Index> removed_g;    // columns leaving G
    std::vector<Index> removed_s;    // positions in [g] leaving S
    Index g_size = 0;                // |G| after the event
    Index s_size = 0;                // |S| after the event
};

struct ColumnPair {
    Index first = 0;   // column of Pi
    Index second = 0;
    Index first_pos = 0;   // positions in the good-selector list
    Index second_pos = 0;

    friend bool operator==(const ColumnPair&, const ColumnPair&) = default;
};

struct PairSearchResult {
    PairSearchThresholds thresholds;
    std::vector<Index> initial_g;        // good columns of Pi, ascending
    std::vector<Index> good_selectors;   // C_1..C_g in sampling order
    std::vector<ColumnPair> pairs;
    std::vector<TraceEvent> trace;
};

/// Shared engine behind both searches. `seed` drives the uniform choices of
/// j', j'' among tied candidates.
PairSearchResult run_pair_search(const SketchMatrix& pi, const HardInstance& inst,
                                 const PairSearchThresholds& thresholds, Seed seed);

PairSearchResult find_colliding_pairs(const SketchMatrix& pi, const HardInstance& inst, double eps, double eta,
                                      Seed seed, std::optional<Index> budget_override = std::nullopt);

PairSearchResult find_colliding_pairs_general(const SketchMatrix& pi, const HardInstance& inst, double eps,
                                              Index ell, Index ell_prime, double eta, Seed seed,
                                              std::optional<Index> budget_override = std::nullopt);

/// One line per event.
void write_trace(std::ostream& out, const PairSearchResult& result);

// ---------------------------------------------------------------------------
// Witnesses and anti-concentration

enum class AnticoncMethod { None, Exhaustive, MonteCarlo };

const char* to_string(AnticoncMethod m) noexcept;

struct CollisionCertificate {
    Index col_p = 0;
    Index col_q = 0;
    double theta = 0.0;
    std::vector<Index> shared_heavy_rows;
    double inner_product = 0.0;
    Index p_prime = 0;   // blocks of U owning the two selectors
    Index q_prime = 0;
    bool equal_blocks = false;
    SparseColumn witness;   // unit vector in R^d
    double anticonc_prob = 0.0;
    double anticonc_stderr = 0.0;
    AnticoncMethod anticonc_method = AnticoncMethod::None;
};

/// Witness u = (e_p' + e_q')/sqrt(2), or e_p' when both selectors share a
/// block, plus the collision data of columns col_p and col_q of pi.
CollisionCertificate build_witness(const SketchMatrix& pi, const HardInstance& inst, Index col_p, Index col_q,
                                   double theta);

/// Largest block set the exact enumeration handles (2^20 sign patterns).
inline constexpr Index kExhaustiveLimit = 20;

/// Probability over the signs of the touched blocks that ||Pi U u||^2 falls
/// outside [(1-eps)^2, (1+eps)^2]. Exact when at most kExhaustiveLimit
/// selectors are touched, Monte Carlo with mc_budget samples otherwise.
/// Records the value and method in cert.
double anticoncentration_prob(const SketchMatrix& pi, const HardInstance& inst, CollisionCertificate& cert,
                              double eps, std::uint64_t mc_budget, Seed seed);

void write_certificate(std::ostream& out, const CollisionCertificate& cert, std::size_t trace_length);

// ---------------------------------------------------------------------------
// Small-inner-product and Rademacher facts

/// Fraction of the |S|^2 ordered pairs (u, v), u = v included, with
/// <u, v> >= -kappa eps. Requires eps in (0, 1/9) and every norm <= 1.
double verify_small_inner_product(const std::vector<std::vector<double>>& vectors, double eps, double kappa = 3.0);

struct RademacherTail {
    double p_up = 0.0;
    double p_down = 0.0;
};

/// Exact probabilities over sigma1, sigma2 in {-1, +1} that
/// sigma1 x1 + sigma2 x2 + sigma1 sigma2 x3 is >= a and <= -a.
/// Requires |x1| >= |x2| >= |x3| and |x1| >= a >= 0.
RademacherTail rademacher_fact_check(double x1, double x2, double x3, double a);

}  // namespace ose
