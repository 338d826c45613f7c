#include "ose/constructions.hpp"

#include "ose/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace ose {

std::string to_string(ConstructionKind kind) {
    switch (kind) {
        case ConstructionKind::CountSketch: return "countsketch";
        case ConstructionKind::Osnap: return "osnap";
        case ConstructionKind::Gaussian: return "gaussian";
        case ConstructionKind::HadamardBlock: return "hadamard_block";
    }
    return "unknown";
}

ConstructionKind parse_construction_kind(std::string_view name) {
    if (name == "countsketch") return ConstructionKind::CountSketch;
    if (name == "osnap") return ConstructionKind::Osnap;
    if (name == "gaussian") return ConstructionKind::Gaussian;
    if (name == "hadamard_block" || name == "hadamard") return ConstructionKind::HadamardBlock;
    fail(ErrorKind::Parameter, "unknown construction kind '" + std::string(name) + "'");
}

Index hadamard_block_order(double eps) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::Parameter, "hadamard_block: eps must lie in (0,1)");
    const double r = 1.0 / (8.0 * eps);
    const auto b = static_cast<Index>(std::llround(r));
    require(b >= 1 && std::abs(r - static_cast<double>(b)) <= 1e-9 * r && std::has_single_bit(b),
            ErrorKind::Parameter, "hadamard_block: 1/(8 eps) must be a power of two");
    return b;
}

DenseMatrix sylvester_hadamard(Index order) {
    require(order >= 1 && std::has_single_bit(order), ErrorKind::Parameter,
            "sylvester_hadamard: order must be a power of two");
    DenseMatrix h(order, order);
    for (Index i = 0; i < order; ++i)
        for (Index j = 0; j < order; ++j) h(i, j) = (std::popcount(i & j) % 2) ? -1.0 : 1.0;
    return h;
}

void validate(const ConstructionSpec& spec) {
    require(spec.m >= 1 && spec.n >= 1, ErrorKind::Parameter, "construction: m and n must be at least 1");
    switch (spec.kind) {
        case ConstructionKind::Osnap:
            require(spec.s >= 1 && spec.s <= spec.m, ErrorKind::Parameter,
                    "osnap: need 1 <= s <= m (s = " + std::to_string(spec.s) + ", m = " + std::to_string(spec.m) + ")");
            break;
        case ConstructionKind::HadamardBlock: {
            const Index b = hadamard_block_order(spec.eps);
            require(spec.m % b == 0, ErrorKind::Parameter,
                    "hadamard_block: block order " + std::to_string(b) + " does not divide m = " + std::to_string(spec.m));
            break;
        }
        case ConstructionKind::CountSketch:
        case ConstructionKind::Gaussian:
            break;
    }
}

Index column_sparsity(const ConstructionSpec& spec) {
    switch (spec.kind) {
        case ConstructionKind::CountSketch: return 1;
        case ConstructionKind::Osnap: return spec.s;
        case ConstructionKind::Gaussian: return spec.m;
        case ConstructionKind::HadamardBlock: return hadamard_block_order(spec.eps);
    }
    return spec.m;
}

namespace {

// s distinct rows of [0, m) by the first s steps of a Fisher-Yates shuffle,
// each paired with a Rademacher sign drawn right after its position.
SparseColumn osnap_column(CounterRng& rng, Index m, Index s) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(s));
    SparseColumn col;
    col.reserve(s);
    if (s * s > m) {
        std::vector<Index> perm(m);
        std::iota(perm.begin(), perm.end(), Index{0});
        for (Index t = 0; t < s; ++t) {
            const Index k = t + rng.below(m - t);
            std::swap(perm[t], perm[k]);
            col.push_back({perm[t], scale * rng.sign()});
        }
    } else {
        // Sparse view of the permutation: only displaced slots are stored.
        std::vector<std::pair<Index, Index>> moved;
        auto get = [&](Index i) {
            for (const auto& [k, v] : moved)
                if (k == i) return v;
            return i;
        };
        auto set = [&](Index i, Index v) {
            for (auto& [k, old] : moved)
                if (k == i) {
                    old = v;
                    return;
                }
            moved.emplace_back(i, v);
        };
        for (Index t = 0; t < s; ++t) {
            const Index k = t + rng.below(m - t);
            const Index at_t = get(t);
            const Index at_k = get(k);
            set(t, at_k);
            set(k, at_t);
            col.push_back({at_k, scale * rng.sign()});
        }
    }
    std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
    return col;
}

}  // namespace

SparseColumn generate_column(const ConstructionSpec& spec, Index c) {
    require(c < spec.n, ErrorKind::DimensionMismatch, "generate_column: column index out of range");
    switch (spec.kind) {
        case ConstructionKind::CountSketch: {
            CounterRng rng(derive_key(spec.seed, {c}));
            const Index row = rng.below(spec.m);
            return {{row, static_cast<double>(rng.sign())}};
        }
        case ConstructionKind::Osnap: {
            CounterRng rng(derive_key(spec.seed, {c}));
            return osnap_column(rng, spec.m, spec.s);
        }
        case ConstructionKind::Gaussian: {
            CounterRng rng(derive_key(spec.seed, {c}));
            const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
            SparseColumn col;
            col.reserve(spec.m);
            for (Index i = 0; i < spec.m; ++i) {
                const double v = scale * rng.normal();
                if (v != 0.0) col.push_back({i, v});
            }
            return col;
        }
        case ConstructionKind::HadamardBlock: {
            const Index b = hadamard_block_order(spec.eps);
            const double scale = 1.0 / std::sqrt(static_cast<double>(b));  // sqrt(8 eps)
            const Index k = c % spec.m;
            const Index base = (k / b) * b;
            const Index within = k % b;
            SparseColumn col;
            col.reserve(b);
            for (Index i = 0; i < b; ++i)
                col.push_back({base + i, (std::popcount(i & within) % 2) ? -scale : scale});
            return col;
        }
    }
    return {};
}

SketchMatrix generate_columns(const ConstructionSpec& spec, std::span<const Index> cols) {
    validate(spec);
    std::vector<SparseColumn> out;
    out.reserve(cols.size());
    for (Index c : cols) out.push_back(generate_column(spec, c));
    return SketchMatrix(spec.m, cols.size(), column_sparsity(spec), std::move(out));
}

SketchMatrix generate_sparse(const ConstructionSpec& spec) {
    require(spec.kind != ConstructionKind::Gaussian, ErrorKind::Parameter,
            "gaussian sketches are dense; use gen_gaussian");
    validate(spec);
    std::vector<SparseColumn> out;
    out.reserve(spec.n);
    for (Index c = 0; c < spec.n; ++c) out.push_back(generate_column(spec, c));
    return SketchMatrix(spec.m, spec.n, column_sparsity(spec), std::move(out));
}

SketchMatrix gen_countsketch(Index m, Index n, Seed seed) {
    return generate_sparse({ConstructionKind::CountSketch, m, n, 1, 0.125, seed});
}

SketchMatrix gen_osnap(Index m, Index n, Index s, Seed seed) {
    return generate_sparse({ConstructionKind::Osnap, m, n, s, 0.125, seed});
}

DenseMatrix gen_gaussian(Index m, Index n, Seed seed) {
    const ConstructionSpec spec{ConstructionKind::Gaussian, m, n, m, 0.125, seed};
    validate(spec);
    DenseMatrix a(m, n);
    for (Index c = 0; c < n; ++c)
        for (const Entry& e : generate_column(spec, c)) a(e.row, c) = e.value;
    return a;
}

SketchMatrix gen_hadamard_block(double eps, Index m, Index n) {
    return generate_sparse({ConstructionKind::HadamardBlock, m, n, 1, eps, 0});
}

}  // namespace ose
