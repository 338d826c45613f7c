#include "oracles.hpp"

#include "ose/adversary.hpp"
#include "ose/constructions.hpp"
#include "ose/error.hpp"
#include "ose/hardinstances.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

using namespace ose;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an ose::Error";
    return ErrorKind::Io;
}

// Unit column with `k` entries of magnitude 1/sqrt(k) on the given rows.
SparseColumn flat(std::vector<Index> rows, int sign = 1) {
    std::sort(rows.begin(), rows.end());
    SparseColumn c;
    for (Index r : rows) c.push_back({r, sign / std::sqrt(static_cast<double>(rows.size()))});
    return c;
}

// OSNAP-like sketch whose entries sit exactly at the heaviness threshold,
// with a few columns corrupted (scaled or thinned) so that G is a proper
// subset of the columns.
SketchMatrix corrupted_osnap(Index m, Index n, Index s, Seed seed) {
    const auto base = gen_osnap(m, n, s, seed);
    std::vector<SparseColumn> cols(n);
    CounterRng rng(derive_seed(seed, {99}));
    for (Index j = 0; j < n; ++j) {
        cols[j].assign(base.column(j).begin(), base.column(j).end());
        const auto roll = rng.below(10);
        if (roll == 0) {
            for (auto& e : cols[j]) e.value *= 1.5;  // norm out of range
        } else if (roll == 1) {
            cols[j].resize(1);  // too few heavy entries, norm too small
        }
    }
    return SketchMatrix(m, n, s, std::move(cols));
}

}  // namespace

// ---------------------------------------------------------------------------
// Heavy profile

TEST(HeavyProfile, HadamardBlock) {
    const auto pi = gen_hadamard_block(1.0 / 32.0, 8, 24);
    const auto prof = heavy_profile(pi, std::sqrt(8.0 / 32.0), 1.0 / 32.0, 2);
    EXPECT_EQ(prof.per_column_counts, std::vector<Index>(24, 4));
    EXPECT_EQ(prof.average, 4.0);
    std::vector<Index> all(24);
    std::iota(all.begin(), all.end(), Index{0});
    EXPECT_EQ(prof.good_columns, all);
}

TEST(HeavyProfile, CountSketchAndZeros) {
    const auto cs = heavy_profile(gen_countsketch(5, 30, 2), 0.5, 0.1, 1);
    EXPECT_EQ(cs.per_column_counts, std::vector<Index>(30, 1));
    EXPECT_EQ(cs.good_columns.size(), 30u);
    const auto z = heavy_profile(SketchMatrix::zeros(5, 30), 0.5, 0.1, 1);
    EXPECT_EQ(z.per_column_counts, std::vector<Index>(30, 0));
    EXPECT_EQ(z.average, 0.0);
    EXPECT_TRUE(z.good_columns.empty());
}

TEST(HeavyProfile, OddPowerThresholdCountsFlatEntries) {
    // 1/sqrt(8) and sqrt(1/8) differ in the last bit.
    const auto pi = gen_osnap(40, 10, 8, 3);
    const auto prof = heavy_profile(pi, std::sqrt(std::ldexp(1.0, -3)), 0.01, 8);
    EXPECT_EQ(prof.good_columns.size(), 10u);
}

TEST(HeavyProfile, MatchesDirectCount) {
    oracle::Gen g(2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto pi = g.sketch(10, 30, 4, 0.8);
        const double theta = g.uniform(0.1, 1.5);
        const auto prof = heavy_profile(pi, theta, 0.3, 2);
        const auto d = oracle::dense_of(pi);
        double total = 0;
        for (Index j = 0; j < 30; ++j) {
            Index cnt = 0;
            double sq = 0;
            for (Index i = 0; i < 10; ++i) {
                cnt += std::abs(d[i][j]) >= theta;
                sq += d[i][j] * d[i][j];
            }
            EXPECT_EQ(prof.per_column_counts[j], cnt);
            total += double(cnt);
            const bool good = cnt >= 2 && std::sqrt(sq) >= 0.7 && std::sqrt(sq) <= 1.3;
            EXPECT_EQ(std::binary_search(prof.good_columns.begin(), prof.good_columns.end(), j), good);
        }
        EXPECT_NEAR(prof.average, total / 30.0, 1e-15);
    }
}

TEST(Collide, SharedHeavyRows) {
    const SketchMatrix pi(4, 3, 2, {{{0, 0.8}, {1, 0.6}}, {{0, -0.6}, {1, 0.8}}, {{2, 1.0}}});
    EXPECT_EQ(shared_heavy_rows(pi, 0, 1, 0.6), (std::vector<Index>{0, 1}));
    EXPECT_EQ(shared_heavy_rows(pi, 0, 1, 0.7), (std::vector<Index>{}));
    EXPECT_TRUE(collide(pi, 0, 1, 0.5));
    EXPECT_FALSE(collide(pi, 0, 2, 0.5));
}

// ---------------------------------------------------------------------------
// Thresholds

TEST(Thresholds, Basic) {
    const auto inst = sample_d_beta(1000, 40, 1, 1);
    const auto th = basic_thresholds(inst, 1.0 / 32.0, 3.0);
    EXPECT_DOUBLE_EQ(th.theta, 0.5);
    EXPECT_EQ(th.good_count, 2u);
    EXPECT_DOUBLE_EQ(th.phi_bound, 3.0 / 40.0);
    EXPECT_EQ(th.budget, 2u);
    EXPECT_EQ(th.considered, 40u);
    EXPECT_EQ(basic_thresholds(inst, 0.05, 3.0).good_count, 2u);  // ceil(1.25)
    EXPECT_EQ(kind_of([&] { basic_thresholds(inst, 0.05, 0.0); }), ErrorKind::Parameter);
}

TEST(Thresholds, GeneralDeltaPrime) {
    // eps^delta' = 1 / (72 log2(1/eps)).
    for (double eps : {1.0 / 16.0, 1.0 / 64.0, 1e-3, 1e-6}) {
        const double dp = general_delta_prime(eps);
        EXPECT_NEAR(std::pow(eps, dp), 1.0 / (72.0 * std::log2(1.0 / eps)), 1e-12);
    }
}

TEST(Thresholds, GeneralDegeneratesToBasicTheta) {
    // ell = log2(1/(8 eps)), ell' = 0 recovers the heaviness threshold; the
    // counting thresholds differ only through the factor eps^delta'.
    const double eps = 1.0 / 32.0;
    const auto inst = sample_d_beta(100000, 20000, 1, 4);
    const auto b = basic_thresholds(inst, eps, 3.0);
    const auto g = general_thresholds(inst, eps, 2, 0, 3.0);
    EXPECT_DOUBLE_EQ(g.theta, b.theta);
    const double f = g.eps_pow_delta;
    EXPECT_NEAR(f, 1.0 / 360.0, 1e-12);
    EXPECT_NEAR(g.phi_bound * f, b.phi_bound, 1e-15);
    EXPECT_NEAR(double(g.budget), std::floor(f * double(b.budget) + 1e-9), 1.0);
    EXPECT_EQ(g.good_count, std::max<Index>(1, Index(std::ceil(f * 4 / 3.0))));
    EXPECT_EQ(g.considered, Index(std::ceil(f * 20000 - 1e-9)));
    EXPECT_EQ(kind_of([&] { general_thresholds(inst, eps, 2, 1, 3.0); }), ErrorKind::Parameter);
}

// ---------------------------------------------------------------------------
// Algorithm 1

TEST(PairSearch, ForcedCollision) {
    // Two good selector columns sharing heavy row 0.
    std::vector<SparseColumn> cols{flat({0, 1, 2, 3}), flat({0, 4, 5, 6}), flat({7, 8, 9, 10})};
    const SketchMatrix pi(11, 3, 4, cols);
    const HardInstance inst(3, 2, 1, {0, 1}, {1, 1});
    const auto res = find_colliding_pairs(pi, inst, 1.0 / 32.0, 3.0, 1, 1);
    ASSERT_EQ(res.pairs.size(), 1u);
    EXPECT_EQ(std::min(res.pairs[0].first, res.pairs[0].second), 0u);
    EXPECT_EQ(std::max(res.pairs[0].first, res.pairs[0].second), 1u);
    EXPECT_EQ(oracle::replay_trace(pi, res), "");
}

TEST(PairSearch, DisjointSupportsGiveNoPairs) {
    std::vector<SparseColumn> cols;
    for (Index j = 0; j < 40; ++j) cols.push_back(flat({4 * j, 4 * j + 1, 4 * j + 2, 4 * j + 3}));
    const SketchMatrix pi(160, 40, 4, cols);
    for (Seed s = 0; s < 10; ++s) {
        const auto inst = sample_d_beta(40, 32, 1, s);
        const auto res = find_colliding_pairs(pi, inst, 1.0 / 32.0, 3.0, s);
        EXPECT_TRUE(res.pairs.empty());
        EXPECT_EQ(res.initial_g.size(), 40u);
        EXPECT_EQ(oracle::replay_trace(pi, res), "");
    }
}

TEST(PairSearch, NoGoodColumns) {
    const auto pi = SketchMatrix::zeros(4, 50);
    const auto inst = sample_d_beta(50, 32, 1, 1);
    const auto res = find_colliding_pairs(pi, inst, 1.0 / 32.0, 3.0, 1);
    EXPECT_TRUE(res.pairs.empty());
    EXPECT_TRUE(res.initial_g.empty());
    EXPECT_EQ(res.trace.size(), 2u);  // budget floor(32/16), both idle
}

TEST(PairSearch, PathCollisionGraphNeverPairsEnds) {
    // a-b and b-c collide, a-c do not.
    const Index a = 0, b = 1, c = 2;
    std::vector<SparseColumn> cols{flat({0, 1, 2, 3}), flat({3, 4, 5, 6}), flat({6, 7, 8, 9})};
    const SketchMatrix pi(10, 3, 4, cols);
    const double theta = 0.5;
    ASSERT_TRUE(collide(pi, a, b, theta) && collide(pi, b, c, theta) && !collide(pi, a, c, theta));
    std::vector<Index> order{a, b, c};
    do {
        for (Seed s = 0; s < 20; ++s) {
            const HardInstance inst(3, 3, 1, order, {1, 1, 1});
            for (double eta : {3.0, 0.5}) {
                const auto res = find_colliding_pairs(pi, inst, 1.0 / 32.0, eta, s, 3);
                EXPECT_LE(res.pairs.size(), 1u);
                for (const auto& p : res.pairs) {
                    EXPECT_TRUE(collide(pi, p.first, p.second, theta));
                    EXPECT_FALSE(std::min(p.first, p.second) == a && std::max(p.first, p.second) == c);
                }
                EXPECT_EQ(oracle::replay_trace(pi, res), "");
            }
        }
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST(PairSearch, TraceInvariantsOnRandomSketches) {
    const double eps = 1.0 / 32.0;
    Index pruned = 0, pairs = 0, lone = 0;
    for (Seed seed = 0; seed < 150; ++seed) {
        const Index m = Index{24} << (seed % 6);
        const auto pi = corrupted_osnap(m, 600, 4, seed);
        const auto inst = sample_d_beta(600, 16 + seed % 40, 1, derive_seed(seed, {1}));
        const double eta = (seed % 3 == 0) ? 0.2 : 3.0;
        const auto res = find_colliding_pairs(pi, inst, eps, eta, derive_seed(seed, {2}), (seed % 2) ? std::nullopt
                                                                                                  : std::optional<Index>(5));
        ASSERT_EQ(oracle::replay_trace(pi, res), "") << "seed " << seed;
        // At most two selectors leave S per for-iteration.
        std::map<Index, Index> per_j;
        for (const auto& ev : res.trace) {
            per_j[ev.j] += ev.removed_s.size();
            pruned += ev.kind == TraceKind::RowPruned;
            lone += ev.kind == TraceKind::ProbeLone;
        }
        for (const auto& [j, k] : per_j) EXPECT_LE(k, 2u);
        EXPECT_EQ(per_j.size(), res.thresholds.budget);
        pairs += res.pairs.size();
        for (const auto& p : res.pairs) {
            EXPECT_NE(p.first, p.second);
            EXPECT_TRUE(std::binary_search(res.initial_g.begin(), res.initial_g.end(), p.first));
            EXPECT_TRUE(std::binary_search(res.initial_g.begin(), res.initial_g.end(), p.second));
            EXPECT_FALSE(shared_heavy_rows(pi, p.first, p.second, res.thresholds.theta).empty());
        }
    }
    // The property test must actually exercise every branch kind.
    EXPECT_GT(pruned, 0u);
    EXPECT_GT(pairs, 0u);
    EXPECT_GT(lone, 0u);
}

TEST(PairSearch, DeterministicGivenSeed) {
    const auto pi = corrupted_osnap(32, 400, 4, 5);
    const auto inst = sample_d_beta(400, 48, 1, 6);
    const auto a = find_colliding_pairs(pi, inst, 1.0 / 32.0, 3.0, 7);
    const auto b = find_colliding_pairs(pi, inst, 1.0 / 32.0, 3.0, 7);
    EXPECT_EQ(a.pairs, b.pairs);
    std::ostringstream sa, sb;
    write_trace(sa, a);
    write_trace(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_TRUE(sa.str().starts_with("# theta=0.5 good_count=2"));
}

TEST(PairSearch, DimensionMismatch) {
    const auto pi = gen_countsketch(4, 10, 1);
    const auto inst = sample_d_beta(11, 2, 1, 1);
    EXPECT_EQ(kind_of([&] { find_colliding_pairs(pi, inst, 0.05, 3.0, 1); }), ErrorKind::DimensionMismatch);
}

// ---------------------------------------------------------------------------
// Algorithm 2

TEST(GeneralSearch, HadamardBlocksCollideWithinBlocks) {
    const double eps = 1.0 / 32.0;
    const Index m = 16, b = 4;
    const auto pi = gen_hadamard_block(eps, m, 64);
    const double theta = std::sqrt(std::ldexp(1.0, -2));
    for (Index i = 0; i < 64; ++i)
        for (Index j = i + 1; j < 64; ++j)
            EXPECT_EQ(collide(pi, i, j, theta), (i % m) / b == (j % m) / b) << i << ' ' << j;

    for (Seed s = 0; s < 20; ++s) {
        const auto inst = sample_d_beta(64, 8, 2, s);
        const auto res = find_colliding_pairs_general(pi, inst, eps, 2, 1, 3.0, s, 4);
        EXPECT_EQ(res.initial_g.size(), 64u);
        EXPECT_EQ(oracle::replay_trace(pi, res), "");
        for (const auto& p : res.pairs) EXPECT_EQ((p.first % m) / b, (p.second % m) / b);
    }
}

TEST(GeneralSearch, ZeroMatrixIsEmpty) {
    const auto pi = SketchMatrix::zeros(8, 200);
    const auto inst = sample_d_beta(200, 16, 4, 1);
    const auto res = find_colliding_pairs_general(pi, inst, 1.0 / 64.0, 3, 2, 3.0, 1, 3);
    EXPECT_TRUE(res.pairs.empty());
    EXPECT_TRUE(res.good_selectors.empty());
}

TEST(GeneralSearch, ConsidersLeadingSelectorsOnly) {
    const auto pi = gen_osnap(64, 4000, 8, 3);
    const auto inst = sample_d_beta(4000, 1000, 2, 4);
    const auto res = find_colliding_pairs_general(pi, inst, 1.0 / 64.0, 3, 1, 3.0, 5);
    const Index k = res.thresholds.considered;
    ASSERT_LT(k, inst.selectors().size());
    std::vector<Index> lead(inst.selectors().begin(), inst.selectors().begin() + long(k));
    EXPECT_EQ(res.good_selectors, lead);  // every OSNAP column is good
    EXPECT_EQ(oracle::replay_trace(pi, res), "");
}

// ---------------------------------------------------------------------------
// Witnesses

TEST(Witness, DistinctBlocks) {
    const auto pi = gen_osnap(8, 30, 2, 1);
    const auto inst = sample_d_beta(30, 5, 1, 2);
    const auto cert = build_witness(pi, inst, inst.selectors()[3], inst.selectors()[1], 0.5);
    EXPECT_FALSE(cert.equal_blocks);
    EXPECT_EQ(cert.p_prime, 3u);
    EXPECT_EQ(cert.q_prime, 1u);
    ASSERT_EQ(cert.witness.size(), 2u);
    EXPECT_EQ(cert.witness[0].row, 1u);
    EXPECT_EQ(cert.witness[1].row, 3u);
    EXPECT_NEAR(squared_norm(cert.witness), 1.0, 1e-15);
    EXPECT_EQ(cert.inner_product, column_inner_product(pi, inst.selectors()[3], inst.selectors()[1]));
    EXPECT_EQ(cert.shared_heavy_rows, shared_heavy_rows(pi, inst.selectors()[3], inst.selectors()[1], 0.5));
}

TEST(Witness, SameBlock) {
    const auto pi = gen_osnap(8, 30, 2, 1);
    const auto inst = sample_d_beta(30, 3, 2, 2);
    const auto cert = build_witness(pi, inst, inst.selectors()[2], inst.selectors()[3], 0.5);
    EXPECT_TRUE(cert.equal_blocks);
    EXPECT_EQ(cert.witness, (SparseColumn{{1, 1.0}}));
}

TEST(Witness, Errors) {
    const auto pi = gen_osnap(8, 30, 2, 1);
    const auto inst = sample_d_beta(30, 3, 1, 2);
    Index outsider = 0;
    while (inst.selector_position(outsider)) ++outsider;
    EXPECT_EQ(kind_of([&] { build_witness(pi, inst, outsider, inst.selectors()[0], 0.5); }), ErrorKind::Precondition);
    EXPECT_EQ(kind_of([&] { build_witness(pi, inst, inst.selectors()[0], inst.selectors()[0], 0.5); }),
              ErrorKind::Precondition);
}

// ---------------------------------------------------------------------------
// Anti-concentration

namespace {

std::vector<double> dense_witness(const CollisionCertificate& c, Index d) {
    std::vector<double> u(d, 0.0);
    for (const auto& e : c.witness) u[e.row] = e.value;
    return u;
}

}  // namespace

TEST(Anticoncentration, ThreeEpsOverlap) {
    const double eps = 0.05;
    const double x = 3 * eps;
    const SketchMatrix pi(2, 4, 2, {{{0, 1.0}}, {{0, x}, {1, std::sqrt(1 - x * x)}}, {}, {}});
    const HardInstance inst(4, 2, 1, {0, 1}, {1, -1});
    auto cert = build_witness(pi, inst, 0, 1, 0.1);
    EXPECT_NEAR(cert.inner_product, x, 1e-15);
    const double p = anticoncentration_prob(pi, inst, cert, eps, 0, 1);
    EXPECT_GE(p, 0.5);
    EXPECT_EQ(p, oracle::anticoncentration_bruteforce(pi, inst, dense_witness(cert, 2), eps));
    EXPECT_EQ(cert.anticonc_method, AnticoncMethod::Exhaustive);
}

TEST(Anticoncentration, OrthogonalColumnsNeverFail) {
    const auto pi = SketchMatrix::identity(40);
    for (Seed s = 0; s < 10; ++s) {
        const auto inst = sample_d_beta(40, 4, 4, s);
        auto cert = build_witness(pi, inst, inst.selectors()[0], inst.selectors()[9], 0.5);
        EXPECT_EQ(anticoncentration_prob(pi, inst, cert, 0.01, 0, 1), 0.0);
    }
}

TEST(Anticoncentration, PlantedOverlapAtLeastQuarter) {
    // |<Pi_p, Pi_q>| = lambda eps r with lambda = 5 on an isometric remainder.
    oracle::Gen g(11);
    for (int trial = 0; trial < 60; ++trial) {
        const Index r = Index{1} << g.index(0, 2);
        const Index d = g.index(2, 4);
        const double eps = 0.02 + 0.02 * g.uniform(0, 1);
        const double ip = 5 * eps * double(r) * (g.sign());
        const Index n = 60;
        const auto inst = g.instance(n, d, r);
        // Pick selectors in different or equal blocks at random.
        const Index jp = g.index(0, d * r - 1);
        Index jq = g.index(0, d * r - 1);
        while (jq == jp) jq = g.index(0, d * r - 1);
        const Index p = inst.selectors()[jp], q = inst.selectors()[jq];
        std::vector<SparseColumn> cols(n);
        for (Index c = 0; c < n; ++c) cols[c] = {{c + 1, 1.0}};  // row 0 kept free for the overlap
        cols[p] = {{0, 1.0}};
        cols[q] = {{0, ip}, {q + 1, std::sqrt(1 - ip * ip)}};
        const SketchMatrix pi(n + 1, n, 2, cols);
        auto cert = build_witness(pi, inst, p, q, 0.1);
        const double prob = anticoncentration_prob(pi, inst, cert, eps, 0, 1);
        EXPECT_GE(prob, 0.25) << "trial " << trial;
        EXPECT_EQ(prob, oracle::anticoncentration_bruteforce(pi, inst, dense_witness(cert, d), eps));
    }
}

TEST(Anticoncentration, ExhaustiveMatchesBruteForce) {
    oracle::Gen g(12);
    for (int trial = 0; trial < 80; ++trial) {
        const Index r = Index{1} << g.index(0, 2);
        const Index d = g.index(2, 3);
        const auto pi = g.sketch(6, 40, 3).scaled(0.6);
        const auto inst = g.instance(40, d, r);
        const Index jp = g.index(0, d * r - 1);
        Index jq = g.index(0, d * r - 1);
        while (jq == jp) jq = g.index(0, d * r - 1);
        auto cert = build_witness(pi, inst, inst.selectors()[jp], inst.selectors()[jq], 0.3);
        const double eps = g.uniform(0.01, 0.5);
        const double a = anticoncentration_prob(pi, inst, cert, eps, 0, 1);
        const double b = anticoncentration_prob(pi, inst, cert, eps, 0, 999);
        EXPECT_EQ(a, b);
        EXPECT_EQ(a, oracle::anticoncentration_bruteforce(pi, inst, dense_witness(cert, d), eps));
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
    }
}

TEST(Anticoncentration, MonteCarloAboveLimit) {
    const auto pi = SketchMatrix::identity(100);
    const auto inst = sample_d_beta(100, 3, 16, 1);  // 32 touched selectors
    auto cert = build_witness(pi, inst, inst.selectors()[0], inst.selectors()[20], 0.5);
    EXPECT_EQ(anticoncentration_prob(pi, inst, cert, 0.1, 500, 3), 0.0);
    EXPECT_EQ(cert.anticonc_method, AnticoncMethod::MonteCarlo);

    // A scaled identity always fails; a half-scaled one fails by the same margin.
    const auto big = SketchMatrix::identity(100).scaled(2.0);
    auto c2 = build_witness(big, inst, inst.selectors()[0], inst.selectors()[20], 0.5);
    EXPECT_EQ(anticoncentration_prob(big, inst, c2, 0.1, 500, 3), 1.0);
    EXPECT_EQ(c2.anticonc_stderr, 0.0);
}

// ---------------------------------------------------------------------------
// Facts

TEST(SmallInnerProduct, Examples) {
    EXPECT_EQ(verify_small_inner_product({{1.0, 0.0}}, 0.1), 1.0);
    EXPECT_EQ(verify_small_inner_product({{1.0}, {-1.0}}, 0.1), 0.5);
    EXPECT_EQ(kind_of([] { verify_small_inner_product({{1.1}}, 0.1); }), ErrorKind::Precondition);
    EXPECT_EQ(kind_of([] { verify_small_inner_product({{1.0}}, 0.2); }), ErrorKind::Parameter);
}

TEST(SmallInnerProduct, RandomUnitSets) {
    oracle::Gen g(13);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::vector<double>> vs(100, std::vector<double>(5));
        for (auto& v : vs) {
            double sq = 0;
            for (double& x : v) sq += (x = g.normal()) * x;
            for (double& x : v) x /= std::sqrt(sq) * (1 + 1e-15);
        }
        EXPECT_GT(verify_small_inner_product(vs, 0.05), 0.1);
    }
}

TEST(Rademacher, Examples) {
    auto a = rademacher_fact_check(1, 0, 0, 1);
    EXPECT_EQ(a.p_up, 0.5);
    EXPECT_EQ(a.p_down, 0.5);
    auto b = rademacher_fact_check(1, 1, 1, 1);
    EXPECT_EQ(b.p_up, 0.25);
    EXPECT_EQ(b.p_down, 0.75);
    auto c = rademacher_fact_check(1, 1, -1, 1);
    EXPECT_EQ(c.p_up, 0.75);
    EXPECT_EQ(c.p_down, 0.25);
    EXPECT_EQ(kind_of([] { rademacher_fact_check(1, 2, 0, 0.5); }), ErrorKind::Precondition);
    EXPECT_EQ(kind_of([] { rademacher_fact_check(1, 0.5, 0, 1.5); }), ErrorKind::Precondition);
}

TEST(Rademacher, AlwaysAtLeastQuarter) {
    oracle::Gen g(14);
    for (int trial = 0; trial < 20000; ++trial) {
        std::vector<double> x{g.normal(), g.normal(), g.normal()};
        std::sort(x.begin(), x.end(), [](double u, double v) { return std::abs(u) > std::abs(v); });
        const double a = std::abs(x[0]) * g.uniform(0, 1);
        const auto t = rademacher_fact_check(x[0], x[1], x[2], a);
        EXPECT_GE(t.p_up, 0.25);
        EXPECT_GE(t.p_down, 0.25);
    }
}

TEST(Certificate, WriteFormat) {
    const auto pi = gen_osnap(8, 30, 2, 1);
    const auto inst = sample_d_beta(30, 3, 1, 2);
    auto cert = build_witness(pi, inst, inst.selectors()[0], inst.selectors()[1], 0.5);
    anticoncentration_prob(pi, inst, cert, 0.1, 0, 1);
    std::ostringstream out;
    write_certificate(out, cert, 7);
    const auto s = out.str();
    for (const char* key : {"col_p: ", "col_q: ", "shared_heavy_rows:", "inner_product: ", "witness: 0:",
                            "anticonc_method: exhaustive", "trace_length: 7"})
        EXPECT_NE(s.find(key), std::string::npos) << key;
}
