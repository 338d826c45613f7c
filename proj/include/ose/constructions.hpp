#pragma once

#include "ose/rng.hpp"
#include "ose/sparsemat.hpp"

#include <span>
#include <string>
#include <string_view>

namespace ose {

enum class ConstructionKind { CountSketch, Osnap, Gaussian, HadamardBlock };

std::string to_string(ConstructionKind kind);
/// Accepts "countsketch", "osnap", "gaussian", "hadamard_block".
ConstructionKind parse_construction_kind(std::string_view name);

/// Full description of a sketch draw. `s` is ignored for gaussian and
/// hadamard_block; `eps` is only used by hadamard_block; hadamard_block
/// ignores the seed.
struct ConstructionSpec {
    ConstructionKind kind = ConstructionKind::CountSketch;
    Index m = 1;
    Index n = 1;
    Index s = 1;
    double eps = 0.125;
    Seed seed = 0;
};

/// Throws Error{Parameter} if the spec violates its invariants.
void validate(const ConstructionSpec& spec);

/// Maximum nonzeros per column a spec produces.
Index column_sparsity(const ConstructionSpec& spec);

/// Column c of the matrix described by spec. Each column is drawn from its
/// own stream keyed by (seed, c), so this agrees with the corresponding
/// column of the full generator regardless of generation order.
SparseColumn generate_column(const ConstructionSpec& spec, Index c);

/// The m x k matrix whose t-th column is column cols[t] of spec's matrix.
SketchMatrix generate_columns(const ConstructionSpec& spec, std::span<const Index> cols);

/// Full sparse matrix for countsketch / osnap / hadamard_block.
SketchMatrix generate_sparse(const ConstructionSpec& spec);

SketchMatrix gen_countsketch(Index m, Index n, Seed seed);
SketchMatrix gen_osnap(Index m, Index n, Index s, Seed seed);
DenseMatrix gen_gaussian(Index m, Index n, Seed seed);
SketchMatrix gen_hadamard_block(double eps, Index m, Index n);

/// Order b = 1/(8 eps) of the Hadamard blocks; throws unless b is an exact
/// power of two.
Index hadamard_block_order(double eps);

/// Sylvester Hadamard matrix of the given power-of-two order (+1/-1 entries).
DenseMatrix sylvester_hadamard(Index order);

}  // namespace ose
