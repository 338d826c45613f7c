#include "ose/embedcheck.hpp"

#include "ose/error.hpp"
#include "ose/parallel.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ose {

DistortionReport make_report(const EigenBounds& bounds, double eps) {
    const double lo = std::sqrt(std::max(0.0, bounds.lambda_min));
    const double hi = std::sqrt(std::max(0.0, bounds.lambda_max));
    DistortionReport r;
    r.lambda_min = bounds.lambda_min;
    r.lambda_max = bounds.lambda_max;
    r.eps_effective = std::max(1.0 - lo, hi - 1.0);
    r.pass = lo >= 1.0 - eps && hi <= 1.0 + eps;
    return r;
}

namespace {

void check_eps(double eps) {
    require(eps >= 0.0 && eps < 1.0, ErrorKind::Parameter, "eps must lie in [0,1)");
}

}  // namespace

DistortionReport check_embedding(const SketchMatrix& pi, const HardInstance& inst, double eps) {
    check_eps(eps);
    require(pi.cols() == inst.n(), ErrorKind::DimensionMismatch,
            fmt::format("check_embedding: sketch has {} columns but instance has n = {}", pi.cols(), inst.n()));
    const auto u = materialize_u(inst);
    return make_report(gram_eigen_bounds(apply_sketch(pi, u)), eps);
}

DistortionReport check_embedding(const DenseMatrix& pi, const HardInstance& inst, double eps) {
    check_eps(eps);
    require(pi.cols() == inst.n(), ErrorKind::DimensionMismatch,
            fmt::format("check_embedding: sketch has {} columns but instance has n = {}", pi.cols(), inst.n()));
    const auto u = materialize_u(inst);
    return make_report(gram_eigen_bounds(apply_sketch(pi, u)), eps);
}

FailureEstimate wilson_estimate(std::uint64_t failures, std::uint64_t trials) {
    require(trials >= 1, ErrorKind::Parameter, "wilson_estimate: need at least one trial");
    require(failures <= trials, ErrorKind::Parameter, "wilson_estimate: failures exceed trials");
    constexpr double z = 1.959963984540054;  // 97.5% normal quantile
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(failures) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    FailureEstimate est;
    est.trials = trials;
    est.failures = failures;
    est.p_hat = p;
    est.wilson_low = std::clamp(center - half, 0.0, p);
    est.wilson_high = std::clamp(center + half, p, 1.0);
    return est;
}

FailureEstimate estimate_failure_prob(const SketchMatrix& pi, const Distribution& dist, double eps,
                                      std::uint64_t trials, Seed seed, unsigned threads) {
    require(trials >= 1, ErrorKind::Parameter, "estimate_failure_prob: trials must be at least 1");
    check_eps(eps);
    require(dist.d * dist.max_r() <= pi.cols(), ErrorKind::Infeasible,
            fmt::format("distribution needs d*r = {} distinct columns but the sketch has n = {}",
                        dist.d * dist.max_r(), pi.cols()));
    const auto failures = parallel_count(trials, threads, [&](std::uint64_t t) {
        const auto [inst, label] = sample(dist, pi.cols(), derive_seed(seed, {t}));
        return !fast_check_embedding(pi, inst, eps).pass;
    });
    return wilson_estimate(failures, trials);
}

namespace {

// Pi U in sparse form, generating only the selected columns of Pi.
std::vector<SparseColumn> local_product(const ConstructionSpec& construction, const HardInstance& inst) {
    require(construction.n == inst.n(), ErrorKind::DimensionMismatch,
            "sketch_instance_product: construction n differs from instance n");
    const SketchMatrix local = generate_columns(construction, inst.selectors());
    // Re-address U onto the local column order (selector j -> local column j).
    const double scale = 1.0 / std::sqrt(static_cast<double>(inst.r()));
    std::vector<SparseColumn> u(inst.d());
    for (Index i = 0; i < inst.d(); ++i)
        for (Index j = i * inst.r(); j < (i + 1) * inst.r(); ++j) u[i].push_back({j, inst.signs()[j] * scale});
    return apply_sketch_sparse(local, u);
}

}  // namespace

DenseMatrix sketch_instance_product(const ConstructionSpec& construction, const HardInstance& inst) {
    const auto cols = local_product(construction, inst);
    DenseMatrix out(construction.m, inst.d());
    for (Index j = 0; j < cols.size(); ++j)
        for (const Entry& e : cols[j]) out(e.row, j) = e.value;
    return out;
}

DistortionReport fast_check_embedding(const SketchMatrix& pi, const HardInstance& inst, double eps) {
    check_eps(eps);
    require(pi.cols() == inst.n(), ErrorKind::DimensionMismatch,
            fmt::format("check_embedding: sketch has {} columns but instance has n = {}", pi.cols(), inst.n()));
    const auto u = materialize_u(inst);
    return make_report(psd_eigen_bounds(sparse_gram(apply_sketch_sparse(pi, u))), eps);
}

DistortionReport fast_check_embedding(const ConstructionSpec& construction, const HardInstance& inst, double eps) {
    check_eps(eps);
    return make_report(psd_eigen_bounds(sparse_gram(local_product(construction, inst))), eps);
}

FailureEstimate estimate_random_sketch_failure(const ConstructionSpec& construction, const Distribution& dist,
                                               double eps, std::uint64_t trials, Seed seed, unsigned threads) {
    require(trials >= 1, ErrorKind::Parameter, "estimate_failure_prob: trials must be at least 1");
    check_eps(eps);
    validate(construction);
    require(dist.d * dist.max_r() <= construction.n, ErrorKind::Infeasible,
            fmt::format("distribution needs d*r = {} distinct columns but n = {}", dist.d * dist.max_r(),
                        construction.n));
    const auto failures = parallel_count(trials, threads, [&](std::uint64_t t) {
        ConstructionSpec spec = construction;
        spec.seed = derive_seed(seed, {t, 0});
        const auto [inst, label] = sample(dist, spec.n, derive_seed(seed, {t, 1}));
        return !fast_check_embedding(spec, inst, eps).pass;
    });
    return wilson_estimate(failures, trials);
}

double column_norm_fraction(const SketchMatrix& pi, double eps) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::Parameter, "column_norm_fraction: eps must lie in (0,1)");
    if (pi.cols() == 0) return 0.0;
    Index good = 0;
    for (Index j = 0; j < pi.cols(); ++j) {
        const double norm = pi.column_norm(j);
        if (norm >= 1.0 - eps && norm <= 1.0 + eps) ++good;
    }
    return static_cast<double>(good) / static_cast<double>(pi.cols());
}

BucketStats bucket_collision_stats(const SketchMatrix& pi, const HardInstance& inst, double eps) {
    require(pi.max_col_nnz() <= 1, ErrorKind::NotApplicable,
            "bucket_collision_stats: only defined for column sparsity s = 1");
    require(pi.cols() == inst.n(), ErrorKind::DimensionMismatch,
            "bucket_collision_stats: sketch columns differ from instance n");
    BucketStats stats;
    stats.counts.assign(pi.rows(), 0);
    for (Index c : inst.selectors()) {
        for (const Entry& e : pi.column(c)) {
            const double a = std::abs(e.value);
            if (a >= 1.0 - eps && a <= 1.0 + eps) ++stats.counts[e.row];
        }
    }
    stats.has_collision = std::any_of(stats.counts.begin(), stats.counts.end(), [](Index k) { return k > 1; });
    return stats;
}

std::string failure_csv_header() { return "m,n,d,r_or_family,eps,trials,failures,p_hat,wilson_low,wilson_high,seed"; }

std::string failure_csv_row(Index m, Index n, Index d, const std::string& r_or_family, double eps,
                            const FailureEstimate& est, Seed seed) {
    using detail::format_real;
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", m, n, d, r_or_family, format_real(eps), est.trials,
                       est.failures, format_real(est.p_hat), format_real(est.wilson_low),
                       format_real(est.wilson_high), seed);
}

}  // namespace ose
