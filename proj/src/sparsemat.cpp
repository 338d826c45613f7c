#include "ose/sparsemat.hpp"

#include "ose/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ose {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "dimension mismatch";
        case ErrorKind::NumericInput: return "numeric input";
        case ErrorKind::Parameter: return "parameter";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::NotApplicable: return "not applicable";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

double squared_norm(std::span<const Entry> col) noexcept {
    double acc = 0.0;
    for (const Entry& e : col) acc += e.value * e.value;
    return acc;
}

double sparse_dot(std::span<const Entry> a, std::span<const Entry> b) noexcept {
    double acc = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->row < ib->row) {
            ++ia;
        } else if (ib->row < ia->row) {
            ++ib;
        } else {
            acc += ia->value * ib->value;
            ++ia;
            ++ib;
        }
    }
    return acc;
}

// ---------------------------------------------------------------------------
// SketchMatrix

SketchMatrix::SketchMatrix(Index rows, Index cols, Index max_col_nnz,
                           std::vector<SparseColumn> columns)
    : rows_(rows), cols_(cols), max_col_nnz_(max_col_nnz), columns_(std::move(columns)) {
    require(columns_.size() == cols_, ErrorKind::DimensionMismatch,
            "sketch matrix: expected " + std::to_string(cols_) + " columns, got " +
                std::to_string(columns_.size()));
    for (Index j = 0; j < cols_; ++j) {
        const SparseColumn& col = columns_[j];
        require(col.size() <= max_col_nnz_, ErrorKind::Parameter,
                "sketch matrix: column " + std::to_string(j) + " has " +
                    std::to_string(col.size()) + " entries, more than s = " +
                    std::to_string(max_col_nnz_));
        for (Index k = 0; k < col.size(); ++k) {
            require(col[k].row < rows_, ErrorKind::DimensionMismatch,
                    "sketch matrix: row index out of range in column " + std::to_string(j));
            require(k == 0 || col[k - 1].row < col[k].row, ErrorKind::Parameter,
                    "sketch matrix: rows not strictly increasing in column " + std::to_string(j));
            require(std::isfinite(col[k].value), ErrorKind::NumericInput,
                    "sketch matrix: non-finite value in column " + std::to_string(j));
            require(col[k].value != 0.0, ErrorKind::Parameter,
                    "sketch matrix: explicit zero stored in column " + std::to_string(j));
        }
    }
}

SketchMatrix SketchMatrix::zeros(Index rows, Index cols, Index max_col_nnz) {
    return SketchMatrix(rows, cols, max_col_nnz, std::vector<SparseColumn>(cols));
}

SketchMatrix SketchMatrix::identity(Index n) {
    std::vector<SparseColumn> cols(n);
    for (Index j = 0; j < n; ++j) cols[j] = {{j, 1.0}};
    return SketchMatrix(n, n, 1, std::move(cols));
}

Index SketchMatrix::nnz() const noexcept {
    Index total = 0;
    for (const auto& c : columns_) total += c.size();
    return total;
}

std::span<const Entry> SketchMatrix::column(Index j) const {
    require(j < cols_, ErrorKind::DimensionMismatch,
            "column index " + std::to_string(j) + " out of range [0, " + std::to_string(cols_) + ")");
    return columns_[j];
}

double SketchMatrix::column_norm(Index j) const { return std::sqrt(squared_norm(column(j))); }

SketchMatrix SketchMatrix::scaled(double c) const {
    require(std::isfinite(c) && c != 0.0, ErrorKind::Parameter, "scale factor must be finite and nonzero");
    std::vector<SparseColumn> cols = columns_;
    for (auto& col : cols)
        for (auto& e : col) e.value *= c;
    return SketchMatrix(rows_, cols_, max_col_nnz_, std::move(cols));
}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(Index rows, Index cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    require(data_.size() == rows_ * cols_, ErrorKind::DimensionMismatch,
            "dense matrix: entries.length != rows * cols");
    for (double v : data_)
        require(std::isfinite(v), ErrorKind::NumericInput, "dense matrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(Index n) {
    DenseMatrix a(n, n);
    for (Index i = 0; i < n; ++i) a(i, i) = 1.0;
    return a;
}

DenseMatrix DenseMatrix::scaled(double c) const {
    DenseMatrix out = *this;
    for (double& v : out.data_) v *= c;
    return out;
}

// ---------------------------------------------------------------------------
// Products

namespace {

void check_u_columns(std::span<const SparseColumn> u_cols, Index n) {
    for (Index j = 0; j < u_cols.size(); ++j)
        for (const Entry& e : u_cols[j])
            require(e.row < n, ErrorKind::DimensionMismatch,
                    "apply_sketch: input column " + std::to_string(j) + " addresses row " +
                        std::to_string(e.row) + " but the sketch has " + std::to_string(n) + " columns");
}

}  // namespace

DenseMatrix apply_sketch(const SketchMatrix& pi, std::span<const SparseColumn> u_cols) {
    check_u_columns(u_cols, pi.cols());
    const Index d = u_cols.size();
    DenseMatrix out(pi.rows(), d);
    for (Index j = 0; j < d; ++j)
        for (const Entry& u : u_cols[j])
            for (const Entry& p : pi.column(u.row)) out(p.row, j) += p.value * u.value;
    return out;
}

DenseMatrix apply_sketch(const DenseMatrix& pi, std::span<const SparseColumn> u_cols) {
    check_u_columns(u_cols, pi.cols());
    const Index d = u_cols.size();
    DenseMatrix out(pi.rows(), d);
    for (Index j = 0; j < d; ++j)
        for (const Entry& u : u_cols[j])
            for (Index i = 0; i < pi.rows(); ++i) out(i, j) += pi(i, u.row) * u.value;
    return out;
}

std::vector<SparseColumn> apply_sketch_sparse(const SketchMatrix& pi, std::span<const SparseColumn> u_cols) {
    check_u_columns(u_cols, pi.cols());
    std::vector<SparseColumn> out(u_cols.size());
    for (Index j = 0; j < u_cols.size(); ++j) {
        SparseColumn acc;
        for (const Entry& u : u_cols[j])
            for (const Entry& p : pi.column(u.row)) acc.push_back({p.row, p.value * u.value});
        std::stable_sort(acc.begin(), acc.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
        SparseColumn& col = out[j];
        for (const Entry& e : acc) {
            if (!col.empty() && col.back().row == e.row) col.back().value += e.value;
            else col.push_back(e);
        }
        std::erase_if(col, [](const Entry& e) { return e.value == 0.0; });
    }
    return out;
}

DenseMatrix sparse_gram(std::span<const SparseColumn> cols) {
    const Index d = cols.size();
    DenseMatrix g(d, d);
    for (Index p = 0; p < d; ++p) {
        for (Index q = p; q < d; ++q) {
            const double v = sparse_dot(cols[p], cols[q]);
            g(p, q) = v;
            g(q, p) = v;
        }
    }
    return g;
}

DenseMatrix gram(const DenseMatrix& a) {
    const Index m = a.rows();
    const Index d = a.cols();
    DenseMatrix g(d, d);
    for (Index p = 0; p < d; ++p) {
        for (Index q = p; q < d; ++q) {
            double acc = 0.0;
            for (Index i = 0; i < m; ++i) acc += a(i, p) * a(i, q);
            g(p, q) = acc;
            g(q, p) = acc;
        }
    }
    return g;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& sym) {
    require(sym.rows() == sym.cols(), ErrorKind::DimensionMismatch, "symmetric_eigenvalues: matrix not square");
    const Index n = sym.rows();
    DenseMatrix a = sym;

    double total = 0.0;
    for (double v : a.data()) total += v * v;
    auto off_norm_sq = [&] {
        double acc = 0.0;
        for (Index p = 0; p < n; ++p)
            for (Index q = 0; q < n; ++q)
                if (p != q) acc += a(p, q) * a(p, q);
        return acc;
    };
    const double tol_sq = 1e-28 * total;  // (1e-14 * ||A||_F)^2

    for (int sweep = 0; sweep < 64 && total > 0.0 && off_norm_sq() > tol_sq; ++sweep) {
        for (Index p = 0; p + 1 < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
                const double c = 1.0 / std::hypot(t, 1.0);
                const double s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
        }
    }

    std::vector<double> eig(n);
    for (Index i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

EigenBounds gram_eigen_bounds(const DenseMatrix& a) {
    require(a.cols() >= 1 && a.cols() <= 512, ErrorKind::Parameter,
            "gram_eigen_bounds: need 1 <= cols <= 512, got " + std::to_string(a.cols()));
    for (double v : a.data())
        require(std::isfinite(v), ErrorKind::NumericInput, "gram_eigen_bounds: non-finite entry");

    return psd_eigen_bounds(gram(a));
}

EigenBounds psd_eigen_bounds(const DenseMatrix& gram_matrix) {
    require(gram_matrix.rows() >= 1, ErrorKind::Parameter, "psd_eigen_bounds: empty matrix");
    const std::vector<double> eig = symmetric_eigenvalues(gram_matrix);
    EigenBounds b{eig.front(), eig.back()};
    // Gram matrices are PSD; tiny negatives are roundoff.
    const double floor = -1e-10 * std::max(1.0, b.lambda_max);
    if (b.lambda_min < 0.0 && b.lambda_min >= floor) b.lambda_min = 0.0;
    if (b.lambda_max < 0.0 && b.lambda_max >= floor) b.lambda_max = 0.0;
    return b;
}

double column_inner_product(const SketchMatrix& pi, Index i, Index j) {
    return sparse_dot(pi.column(i), pi.column(j));
}

}  // namespace ose
