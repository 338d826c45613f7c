#include "oracles.hpp"

#include "ose/error.hpp"
#include "ose/hardinstances.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <set>
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

void expect_isometry(const HardInstance& inst) {
    const auto g = oracle::gram(oracle::u_dense(inst));
    for (Index i = 0; i < inst.d(); ++i)
        for (Index j = 0; j < inst.d(); ++j) EXPECT_NEAR(g[i][j], i == j ? 1.0 : 0.0, 1e-12);
}

std::size_t nnz(const std::vector<SparseColumn>& cols) {
    std::size_t k = 0;
    for (const auto& c : cols) k += c.size();
    return k;
}

}  // namespace

TEST(DBeta, ROneColumnsAreSignedBasisVectors) {
    const auto inst = sample_d_beta(50, 6, 1, 3);
    const auto u = materialize_u(inst);
    ASSERT_EQ(u.size(), 6u);
    for (Index i = 0; i < 6; ++i) {
        ASSERT_EQ(u[i].size(), 1u);
        EXPECT_EQ(u[i][0].row, inst.selectors()[i]);
        EXPECT_EQ(std::abs(u[i][0].value), 1.0);
    }
}

TEST(DBeta, RFourHasHalfEntries) {
    const auto inst = sample_d_beta(100, 2, 4, 8);
    const auto u = materialize_u(inst);
    EXPECT_EQ(nnz(u), 8u);
    for (const auto& col : u) {
        EXPECT_EQ(squared_norm(col), 1.0);
        for (const auto& e : col) EXPECT_EQ(std::abs(e.value), 0.5);
    }
}

TEST(DBeta, SamplesAreIsometries) {
    for (Seed s = 0; s < 30; ++s) {
        const Index r = Index{1} << (s % 4);
        const auto inst = sample_d_beta(64, 5, r, s);
        expect_isometry(inst);
        std::set<Index> distinct(inst.selectors().begin(), inst.selectors().end());
        EXPECT_EQ(distinct.size(), inst.selectors().size());
    }
    // d r = n forces every column to be selected.
    expect_isometry(sample_d_beta(16, 4, 4, 1));
}

TEST(DBeta, Deterministic) {
    EXPECT_EQ(sample_d_beta(1000, 7, 2, 5), sample_d_beta(1000, 7, 2, 5));
    EXPECT_NE(sample_d_beta(1000, 7, 2, 5), sample_d_beta(1000, 7, 2, 6));
}

TEST(DBeta, SelectorMarginalIsUniform) {
    std::vector<double> counts(10, 0.0);
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const auto inst = sample_d_beta(10, 3, 1, Seed(t));
        counts[inst.selectors()[1]] += 1;  // a later draw, after a rejection may have occurred
    }
    double x = 0.0;
    for (double c : counts) x += (c - trials / 10.0) * (c - trials / 10.0) / (trials / 10.0);
    const double crit = boost::math::quantile(boost::math::complement(boost::math::chi_squared(9), 0.001));
    EXPECT_LT(x, crit);
}

TEST(DBeta, SignsAreBalanced) {
    int plus = 0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) plus += sample_d_beta(20, 1, 1, Seed(t)).signs()[0] > 0;
    EXPECT_NEAR(plus, trials / 2.0, 5 * std::sqrt(trials / 4.0));
}

TEST(DBeta, Errors) {
    EXPECT_EQ(kind_of([] { sample_d_beta(7, 2, 4, 1); }), ErrorKind::Infeasible);
    EXPECT_EQ(kind_of([] { sample_d_beta(100, 2, 3, 1); }), ErrorKind::Parameter);
    EXPECT_EQ(kind_of([] { sample_d_beta(100, 0, 1, 1); }), ErrorKind::Parameter);
}

TEST(MixtureS1, BranchFrequencyIsHalf) {
    int big = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const auto [inst, label] = sample_mixture_s1(200, 3, 1.0 / 32.0, Seed(t));
        EXPECT_EQ(label.family, Family::MixS1);
        EXPECT_EQ(1.0 / label.beta, static_cast<double>(inst.r()));
        ASSERT_TRUE(label.ell);
        EXPECT_EQ(Index{1} << *label.ell, inst.r());
        big += inst.r() == 4;
    }
    EXPECT_NEAR(big / double(trials), 0.5, 0.02);
}

TEST(MixtureS1, BranchShapes) {
    bool seen_small = false, seen_big = false;
    for (Seed s = 0; s < 40; ++s) {
        const auto [inst, label] = sample_mixture_s1(100, 5, 1.0 / 32.0, s);
        const auto u = materialize_u(inst);
        if (inst.r() == 1) {
            seen_small = true;
            EXPECT_EQ(nnz(u), 5u);
        } else {
            seen_big = true;
            ASSERT_EQ(inst.r(), 4u);
            EXPECT_EQ(nnz(u), 20u);
            for (const auto& col : u)
                for (const auto& e : col) EXPECT_EQ(std::abs(e.value), 0.5);
        }
        expect_isometry(inst);
    }
    EXPECT_TRUE(seen_small && seen_big);
}

TEST(MixtureS1, Errors) {
    EXPECT_EQ(kind_of([] { sample_mixture_s1(100, 2, 0.05, 1); }), ErrorKind::Parameter);
    // Infeasible even when the drawn branch would have fit.
    EXPECT_EQ(kind_of([] { sample_mixture_s1(10, 3, 1.0 / 32.0, 1); }), ErrorKind::Infeasible);
}

TEST(MixtureGeneral, Levels) {
    EXPECT_EQ(general_mixture_levels(1.0 / 64.0), 3);
    EXPECT_EQ(general_mixture_levels(1.0 / 32.0), 2);
    EXPECT_EQ(general_mixture_levels(1.0 / 16.0), 1);
    EXPECT_EQ(general_mixture_levels(0.05), 1);
    EXPECT_EQ(kind_of([] { sample_mixture_general(100, 2, 0.1, 1); }), ErrorKind::Parameter);
}

TEST(MixtureGeneral, LevelFrequencies) {
    std::map<Index, int> freq;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        const auto [inst, label] = sample_mixture_general(100, 2, 1.0 / 64.0, Seed(t));
        ASSERT_TRUE(label.ell);
        EXPECT_EQ(Index{1} << *label.ell, inst.r());
        ++freq[*label.ell];
    }
    EXPECT_NEAR(freq[0] / double(trials), 0.5, 0.02);
    for (Index ell : {1, 2, 3}) EXPECT_NEAR(freq[ell] / double(trials), 1.0 / 6.0, 0.02);
    EXPECT_EQ(freq.size(), 4u);
}

TEST(MixtureGeneral, SamplesAreIsometries) {
    for (Seed s = 0; s < 40; ++s) {
        const auto [inst, label] = sample_mixture_general(64, 4, 1.0 / 64.0, s);
        EXPECT_LE(inst.d() * inst.r(), inst.n());
        expect_isometry(inst);
    }
}

TEST(Sample, DispatchesOnFamily) {
    const Distribution db{Family::DBeta, 3, 2, 0.1};
    EXPECT_EQ(sample(db, 50, 9).first, sample_d_beta(50, 3, 2, 9));
    const Distribution s1{Family::MixS1, 3, 1, 1.0 / 32.0};
    EXPECT_EQ(sample(s1, 50, 9), sample_mixture_s1(50, 3, 1.0 / 32.0, 9));
    EXPECT_EQ(s1.max_r(), 4u);
    EXPECT_EQ((Distribution{Family::MixGeneral, 3, 1, 1.0 / 64.0}.max_r()), 8u);
    EXPECT_EQ(db.csv_label(), "2");
    EXPECT_EQ(s1.csv_label(), "mix_s1");
    EXPECT_EQ(parse_family("d_beta"), Family::DBeta);
    EXPECT_EQ(kind_of([] { parse_family("gauss"); }), ErrorKind::Parameter);
}

TEST(Materialize, Examples) {
    const HardInstance a(10, 1, 1, {5}, {-1});
    const auto ua = materialize_u(a);
    ASSERT_EQ(ua.size(), 1u);
    EXPECT_EQ(ua[0], (SparseColumn{{5, -1.0}}));

    const HardInstance b(10, 1, 2, {9, 3}, {-1, +1});
    const auto ub = materialize_u(b);
    const double h = 1.0 / std::sqrt(2.0);
    EXPECT_EQ(ub[0], (SparseColumn{{3, h}, {9, -h}}));
}

TEST(Materialize, ColumnsHaveUnitNorm) {
    for (Seed s = 0; s < 20; ++s)
        for (const auto& col : materialize_u(sample_d_beta(500, 6, 8, s))) {
            EXPECT_NEAR(squared_norm(col), 1.0, 1e-15);
            for (std::size_t k = 1; k < col.size(); ++k) EXPECT_LT(col[k - 1].row, col[k].row);
        }
}

TEST(InstanceInvariants, Rejected) {
    EXPECT_EQ(kind_of([] { HardInstance(10, 2, 1, {1, 1}, {1, 1}); }), ErrorKind::Parameter);
    EXPECT_EQ(kind_of([] { HardInstance(10, 2, 1, {1, 2}, {1, 0}); }), ErrorKind::Parameter);
    EXPECT_EQ(kind_of([] { HardInstance(10, 2, 1, {1}, {1}); }), ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([] { HardInstance(10, 1, 1, {10}, {1}); }), ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([] { HardInstance(3, 2, 2, {0, 1, 2, 3}, {1, 1, 1, 1}); }), ErrorKind::Infeasible);
}

TEST(InstanceIo, RoundTrip) {
    const auto inst = sample_d_beta(1000, 4, 4, 17);
    std::stringstream ss;
    write_instance(ss, inst);
    EXPECT_EQ(ss.str().substr(0, 17), "OSEINST 1000 4 4\n");
    EXPECT_EQ(read_instance(ss), inst);
}

TEST(InstanceIo, ParseErrors) {
    for (const char* text : {"", "OSEINST 10 1\nC: 1\nS: 1\n", "OSEINST 10 1 1\nC: 1\n", "OSEINST 10 1 1\nC: x\nS: 1\n",
                             "OSEINST 10 1 1\nC: 1\nS: 1\nQ: 2\n", "OSEINST 10 2 1\nC: 1 1\nS: 1 1\n"}) {
        std::istringstream in(text);
        EXPECT_EQ(kind_of([&] { read_instance(in); }), ErrorKind::Parse) << text;
    }
}
