#pragma once

#include "ose/constructions.hpp"
#include "ose/hardinstances.hpp"
#include "ose/sparsemat.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ose {

/// Extreme squared singular values of Pi U and the verdict at level eps.
struct DistortionReport {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    /// max(1 - sqrt(lambda_min), sqrt(lambda_max) - 1); negative when both
    /// bounds hold strictly.
    double eps_effective = 0.0;
    bool pass = false;
};

DistortionReport make_report(const EigenBounds& bounds, double eps);

/// Since U is an isometry, Pi embeds col(U) at level eps iff every
/// eigenvalue of (Pi U)^T (Pi U) lies in [(1-eps)^2, (1+eps)^2]; this is
/// checked exactly.
DistortionReport check_embedding(const SketchMatrix& pi, const HardInstance& inst, double eps);
DistortionReport check_embedding(const DenseMatrix& pi, const HardInstance& inst, double eps);

struct FailureEstimate {
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double p_hat = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
};

/// p_hat = failures / trials with the 95% Wilson score interval.
FailureEstimate wilson_estimate(std::uint64_t failures, std::uint64_t trials);

/// Failure probability of a fixed Pi over instances drawn from dist. Trial t
/// uses the instance seed derive_seed(seed, {t}).
FailureEstimate estimate_failure_prob(const SketchMatrix& pi, const Distribution& dist, double eps,
                                      std::uint64_t trials, Seed seed, unsigned threads = 1);

/// Failure probability of a random sketch: every trial draws a fresh Pi from
/// `construction` (its seed field is replaced by derive_seed(seed, {t, 0}))
/// and a fresh instance on n = construction.n columns (seed
/// derive_seed(seed, {t, 1})). Only the columns of Pi that U touches are
/// generated.
FailureEstimate estimate_random_sketch_failure(const ConstructionSpec& construction, const Distribution& dist,
                                               double eps, std::uint64_t trials, Seed seed, unsigned threads = 1);

/// Pi U for a single (construction, instance) pair, generating only the
/// selected columns of Pi.
DenseMatrix sketch_instance_product(const ConstructionSpec& construction, const HardInstance& inst);

/// Same verdict as check_embedding, computed from the sparse product and a
/// sparse Gram matrix; cost is independent of the number of rows of Pi.
/// The estimators use this path.
DistortionReport fast_check_embedding(const SketchMatrix& pi, const HardInstance& inst, double eps);
DistortionReport fast_check_embedding(const ConstructionSpec& construction, const HardInstance& inst, double eps);

/// Fraction of columns of pi whose l2 norm lies in [1-eps, 1+eps].
double column_norm_fraction(const SketchMatrix& pi, double eps);

struct BucketStats {
    std::vector<Index> counts;  // one per row of pi
    bool has_collision = false;
};

/// For a 1-sparse pi: per-row count of selectors that land in the row through
/// an entry of magnitude in [1-eps, 1+eps].
BucketStats bucket_collision_stats(const SketchMatrix& pi, const HardInstance& inst, double eps);

/// `m,n,d,r_or_family,eps,trials,failures,p_hat,wilson_low,wilson_high,seed`
std::string failure_csv_header();
std::string failure_csv_row(Index m, Index n, Index d, const std::string& r_or_family, double eps,
                            const FailureEstimate& est, Seed seed);

}  // namespace ose
