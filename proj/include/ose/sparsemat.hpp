#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace ose {

using Index = std::size_t;

struct Entry {
    Index row = 0;
    double value = 0.0;

    friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse column: entries sorted by strictly increasing row.
using SparseColumn = std::vector<Entry>;

double squared_norm(std::span<const Entry> col) noexcept;

/// Two-pointer merge of two sorted columns.
double sparse_dot(std::span<const Entry> a, std::span<const Entry> b) noexcept;

/// Column-sparse m x n matrix with a declared bound s on nonzeros per column.
///
/// Invariants (checked on construction): every column holds at most
/// max_col_nnz entries, rows within a column are strictly increasing and
/// below rows(), every stored value is finite and nonzero.
class SketchMatrix {
public:
    SketchMatrix() = default;
    SketchMatrix(Index rows, Index cols, Index max_col_nnz, std::vector<SparseColumn> columns);

    /// All-zero matrix.
    static SketchMatrix zeros(Index rows, Index cols, Index max_col_nnz = 1);
    /// n x n identity.
    static SketchMatrix identity(Index n);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Index max_col_nnz() const noexcept { return max_col_nnz_; }
    Index nnz() const noexcept;

    std::span<const Entry> column(Index j) const;
    double column_norm(Index j) const;

    /// Every value multiplied by c (c must be finite and nonzero).
    SketchMatrix scaled(double c) const;

    friend bool operator==(const SketchMatrix&, const SketchMatrix&) = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    Index max_col_nnz_ = 0;
    std::vector<SparseColumn> columns_;
};

/// Row-major dense matrix with finite entries.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(Index rows, Index cols);  // zero-filled
    DenseMatrix(Index rows, Index cols, std::vector<double> entries);

    static DenseMatrix identity(Index n);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }

    double& operator()(Index i, Index j) noexcept { return data_[i * cols_ + j]; }
    double operator()(Index i, Index j) const noexcept { return data_[i * cols_ + j]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    DenseMatrix scaled(double c) const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<double> data_;
};

/// Pi * U where U is given column by column in sparse form. Row indices of the
/// input columns address columns of pi.
DenseMatrix apply_sketch(const SketchMatrix& pi, std::span<const SparseColumn> u_cols);

/// Dense Pi * U for a dense sketch.
DenseMatrix apply_sketch(const DenseMatrix& pi, std::span<const SparseColumn> u_cols);

/// Pi * U kept sparse: one merged, row-sorted column per input column.
std::vector<SparseColumn> apply_sketch_sparse(const SketchMatrix& pi, std::span<const SparseColumn> u_cols);

/// A^T A.
DenseMatrix gram(const DenseMatrix& a);

/// A^T A for A given by sparse columns.
DenseMatrix sparse_gram(std::span<const SparseColumn> cols);

/// All eigenvalues of a symmetric matrix in ascending order, by cyclic
/// Jacobi rotations. Stops when the off-diagonal Frobenius norm falls below
/// 1e-14 of the total Frobenius norm, or after 64 sweeps.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& sym);

struct EigenBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// Extreme eigenvalues of A^T A. Requires 1 <= a.cols() <= 512. Roundoff
/// negatives down to -1e-10 (relative to lambda_max) are clamped to zero.
EigenBounds gram_eigen_bounds(const DenseMatrix& a);

/// Extreme eigenvalues of an already-formed Gram matrix, with the same
/// clamping as gram_eigen_bounds.
EigenBounds psd_eigen_bounds(const DenseMatrix& gram_matrix);

/// Exact sparse dot product of columns i and j of pi.
double column_inner_product(const SketchMatrix& pi, Index i, Index j);

// OSE1 / OSE1D text formats. Reals are written with 17 significant digits so
// that a write/read cycle reproduces every bit. Lines starting with '#' after
// the header line are comments.
void write_ose1(std::ostream& out, const SketchMatrix& pi);
SketchMatrix read_ose1(std::istream& in);
void write_ose1d(std::ostream& out, const DenseMatrix& a);
DenseMatrix read_ose1d(std::istream& in);

}  // namespace ose
