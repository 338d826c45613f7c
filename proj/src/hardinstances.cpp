#include "ose/hardinstances.hpp"

#include "ose/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace ose {

HardInstance::HardInstance(Index n, Index d, Index r, std::vector<Index> selectors, std::vector<int> signs)
    : n_(n), d_(d), r_(r), selectors_(std::move(selectors)), signs_(std::move(signs)) {
    require(d_ >= 1, ErrorKind::Parameter, "hard instance: d must be at least 1");
    require(r_ >= 1 && std::has_single_bit(r_), ErrorKind::Parameter, "hard instance: r must be a power of two");
    require(d_ * r_ <= n_, ErrorKind::Infeasible, "hard instance: d*r exceeds n");
    require(selectors_.size() == d_ * r_ && signs_.size() == d_ * r_, ErrorKind::DimensionMismatch,
            "hard instance: expected d*r selectors and signs");
    std::unordered_set<Index> seen;
    seen.reserve(selectors_.size() * 2);
    for (Index c : selectors_) {
        require(c < n_, ErrorKind::DimensionMismatch, "hard instance: selector out of range");
        require(seen.insert(c).second, ErrorKind::Parameter, "hard instance: selectors must be distinct");
    }
    for (int s : signs_) require(s == 1 || s == -1, ErrorKind::Parameter, "hard instance: signs must be +1 or -1");
}

std::optional<Index> HardInstance::selector_position(Index col) const {
    for (Index j = 0; j < selectors_.size(); ++j)
        if (selectors_[j] == col) return j;
    return std::nullopt;
}

std::string to_string(Family f) {
    switch (f) {
        case Family::DBeta: return "dbeta";
        case Family::MixS1: return "mix_s1";
        case Family::MixGeneral: return "mix_general";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    if (name == "dbeta" || name == "d_beta") return Family::DBeta;
    if (name == "mix_s1") return Family::MixS1;
    if (name == "mix_general") return Family::MixGeneral;
    fail(ErrorKind::Parameter, "unknown distribution family '" + std::string(name) + "'");
}

namespace {

// r = 1/(8 eps) when that is an exact power of two.
Index s1_branch_r(double eps) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::Parameter, "mix_s1: eps must lie in (0,1)");
    const double x = 1.0 / (8.0 * eps);
    const auto r = static_cast<Index>(std::llround(x));
    require(r >= 1 && std::abs(x - static_cast<double>(r)) <= 1e-9 * x && std::has_single_bit(r),
            ErrorKind::Parameter, "mix_s1: 1/(8 eps) must be a power of two");
    return r;
}

void require_feasible(Index n, Index d, Index r) {
    require(d * r <= n, ErrorKind::Infeasible,
            "infeasible instance: d*r = " + std::to_string(d * r) + " exceeds n = " + std::to_string(n));
}

}  // namespace

long long general_mixture_levels(double eps) {
    require(eps > 0.0 && eps < 1.0, ErrorKind::Parameter, "mix_general: eps must lie in (0,1)");
    return static_cast<long long>(std::floor(std::log2(1.0 / eps) + 1e-12)) - 3;
}

Index Distribution::max_r() const {
    switch (family) {
        case Family::DBeta:
            require(r >= 1 && std::has_single_bit(r), ErrorKind::Parameter, "dbeta: r must be a power of two");
            return r;
        case Family::MixS1: return std::max<Index>(1, s1_branch_r(eps));
        case Family::MixGeneral: {
            const long long levels = general_mixture_levels(eps);
            require(levels >= 1, ErrorKind::Parameter, "mix_general: need L = floor(log2(1/eps)) - 3 >= 1");
            return Index{1} << levels;
        }
    }
    return 1;
}

std::string Distribution::csv_label() const {
    if (family == Family::DBeta) return std::to_string(r);
    return to_string(family);
}

HardInstance sample_d_beta(Index n, Index d, Index r, Seed seed) {
    require(d >= 1, ErrorKind::Parameter, "dbeta: d must be at least 1");
    require(r >= 1 && std::has_single_bit(r), ErrorKind::Parameter, "dbeta: r must be a power of two");
    require_feasible(n, d, r);

    CounterRng rng(seed);
    const Index k = d * r;
    std::vector<Index> selectors;
    selectors.reserve(k);
    std::unordered_set<Index> taken;
    taken.reserve(2 * k);
    // Uniform draws conditioned on distinctness, kept in draw order.
    while (selectors.size() < k) {
        const Index c = rng.below(n);
        if (taken.insert(c).second) selectors.push_back(c);
    }
    std::vector<int> signs(k);
    for (int& s : signs) s = rng.sign();
    return HardInstance(n, d, r, std::move(selectors), std::move(signs));
}

std::pair<HardInstance, MixtureLabel> sample_mixture_s1(Index n, Index d, double eps, Seed seed) {
    const Index big_r = s1_branch_r(eps);
    require_feasible(n, d, big_r);
    CounterRng rng(seed);
    const bool second = rng.below(2) == 1;
    const Index r = second ? big_r : 1;
    MixtureLabel label{Family::MixS1, 1.0 / static_cast<double>(r), static_cast<Index>(std::countr_zero(r))};
    return {sample_d_beta(n, d, r, derive_seed(seed, {1})), label};
}

std::pair<HardInstance, MixtureLabel> sample_mixture_general(Index n, Index d, double eps, Seed seed) {
    const long long levels = general_mixture_levels(eps);
    require(levels >= 1, ErrorKind::Parameter, "mix_general: need L = floor(log2(1/eps)) - 3 >= 1");
    require_feasible(n, d, Index{1} << levels);
    CounterRng rng(seed);
    Index ell = 0;
    if (rng.below(2) == 1) ell = 1 + rng.below(static_cast<Index>(levels));
    const Index r = Index{1} << ell;
    MixtureLabel label{Family::MixGeneral, 1.0 / static_cast<double>(r), ell};
    return {sample_d_beta(n, d, r, derive_seed(seed, {1})), label};
}

std::pair<HardInstance, MixtureLabel> sample(const Distribution& dist, Index n, Seed seed) {
    switch (dist.family) {
        case Family::DBeta:
            return {sample_d_beta(n, dist.d, dist.r, seed),
                    MixtureLabel{Family::DBeta, 1.0 / static_cast<double>(dist.r), std::nullopt}};
        case Family::MixS1: return sample_mixture_s1(n, dist.d, dist.eps, seed);
        case Family::MixGeneral: return sample_mixture_general(n, dist.d, dist.eps, seed);
    }
    fail(ErrorKind::Parameter, "unknown family");
}

std::vector<SparseColumn> materialize_u(const HardInstance& inst) {
    const Index r = inst.r();
    const double scale = 1.0 / std::sqrt(static_cast<double>(r));
    std::vector<SparseColumn> cols(inst.d());
    for (Index i = 0; i < inst.d(); ++i) {
        SparseColumn& col = cols[i];
        col.reserve(r);
        for (Index j = i * r; j < (i + 1) * r; ++j)
            col.push_back({inst.selectors()[j], inst.signs()[j] * scale});
        std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
    }
    return cols;
}

void write_instance(std::ostream& out, const HardInstance& inst) {
    out << "OSEINST " << inst.n() << ' ' << inst.d() << ' ' << inst.r() << '\n';
    out << "C:";
    for (Index c : inst.selectors()) out << ' ' << c;
    out << "\nS:";
    for (int s : inst.signs()) out << ' ' << (s > 0 ? "+1" : "-1");
    out << '\n';
}

HardInstance read_instance(std::istream& in) {
    using detail::split_ws;
    std::string line;
    if (!detail::next_content_line(in, line)) fail(ErrorKind::Parse, "OSEINST: empty input");
    const auto head = split_ws(line);
    if (head.size() != 4 || head[0] != "OSEINST") fail(ErrorKind::Parse, "OSEINST: header must be 'OSEINST <n> <d> <r>'");
    const Index n = detail::parse_u64(head[1], "OSEINST n");
    const Index d = detail::parse_u64(head[2], "OSEINST d");
    const Index r = detail::parse_u64(head[3], "OSEINST r");

    std::vector<Index> selectors;
    std::vector<int> signs;
    bool have_c = false;
    bool have_s = false;
    while (detail::next_content_line(in, line)) {
        const auto toks = split_ws(line);
        if (toks.front() == "C:" && !have_c) {
            have_c = true;
            for (std::size_t i = 1; i < toks.size(); ++i) selectors.push_back(detail::parse_u64(toks[i], "OSEINST selector"));
        } else if (toks.front() == "S:" && !have_s) {
            have_s = true;
            for (std::size_t i = 1; i < toks.size(); ++i)
                signs.push_back(static_cast<int>(detail::parse_i64(toks[i], "OSEINST sign")));
        } else {
            fail(ErrorKind::Parse, "OSEINST: unexpected line '" + line + "'");
        }
    }
    if (!have_c || !have_s) fail(ErrorKind::Parse, "OSEINST: missing C: or S: line");
    try {
        return HardInstance(n, d, r, std::move(selectors), std::move(signs));
    } catch (const Error& e) {
        fail(ErrorKind::Parse, std::string("OSEINST: ") + e.what());
    }
}

}  // namespace ose
