#pragma once

#include "ose/rng.hpp"
#include "ose/sparsemat.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ose {

/// A draw U = V W from the hard distribution with parameter beta = 1/r.
///
/// Selector j (0-based) is the row of the single nonzero in column j of V;
/// block i of U owns selectors [i r, (i+1) r) and column i of U carries
/// sign_j / sqrt(r) at each of those rows. Selectors are pairwise distinct,
/// so U is an exact isometry.
class HardInstance {
public:
    HardInstance() = default;
    HardInstance(Index n, Index d, Index r, std::vector<Index> selectors, std::vector<int> signs);

    Index n() const noexcept { return n_; }
    Index d() const noexcept { return d_; }
    Index r() const noexcept { return r_; }
    const std::vector<Index>& selectors() const noexcept { return selectors_; }
    const std::vector<int>& signs() const noexcept { return signs_; }

    /// Block (column of U) that owns selector j.
    Index block_of(Index j) const noexcept { return j / r_; }

    /// Position j with selectors()[j] == col, if any.
    std::optional<Index> selector_position(Index col) const;

    friend bool operator==(const HardInstance&, const HardInstance&) = default;

private:
    Index n_ = 0;
    Index d_ = 0;
    Index r_ = 1;
    std::vector<Index> selectors_;
    std::vector<int> signs_;
};

enum class Family { DBeta, MixS1, MixGeneral };

std::string to_string(Family f);
/// Accepts "dbeta" / "d_beta", "mix_s1", "mix_general".
Family parse_family(std::string_view name);

/// Which branch a sample came from. ell is the exponent of the drawn r = 2^ell
/// for mixtures (0 for the D_1 branch).
struct MixtureLabel {
    Family family = Family::DBeta;
    double beta = 1.0;
    std::optional<Index> ell;

    friend bool operator==(const MixtureLabel&, const MixtureLabel&) = default;
};

/// A distribution over hard instances: D_beta with beta = 1/r, or one of the
/// two mixtures, which are parameterized by eps.
struct Distribution {
    Family family = Family::DBeta;
    Index d = 1;
    Index r = 1;        // DBeta only
    double eps = 0.1;   // mixtures only

    /// Largest r the distribution can draw; throws Error{Parameter} for
    /// invalid parameters.
    Index max_r() const;
    /// Column label for CSV output: the r value for D_beta, else the family.
    std::string csv_label() const;
};

/// Number of levels L = floor(log2(1/eps)) - 3 of the general mixture.
long long general_mixture_levels(double eps);

HardInstance sample_d_beta(Index n, Index d, Index r, Seed seed);
std::pair<HardInstance, MixtureLabel> sample_mixture_s1(Index n, Index d, double eps, Seed seed);
std::pair<HardInstance, MixtureLabel> sample_mixture_general(Index n, Index d, double eps, Seed seed);
std::pair<HardInstance, MixtureLabel> sample(const Distribution& dist, Index n, Seed seed);

/// The d sparse columns of U, rows sorted.
std::vector<SparseColumn> materialize_u(const HardInstance& inst);

/// OSEINST text format: `OSEINST <n> <d> <r>`, `C: <indices>`, `S: <signs>`.
void write_instance(std::ostream& out, const HardInstance& inst);
HardInstance read_instance(std::istream& in);

}  // namespace ose
