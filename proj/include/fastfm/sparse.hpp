// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fastfm {

/// Nonzeros of one row (or column) of a compressed sparse matrix.
struct SparseVectorView {
  std::span<const std::size_t> indices;
  std::span<const double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }
};

/**
 * Compressed row storage design matrix. One row per sample.
 *
 * Invariants are checked on construction and the object is immutable
 * afterwards:
 *  - offsets has n_rows + 1 entries, starts at 0, is non-decreasing and ends at nnz,
 *  - column indices are strictly increasing within a row and < n_cols,
 *  - all values are finite.
 */
class SparseRowMatrix {
 public:
  SparseRowMatrix() = default;
  SparseRowMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                  std::vector<std::size_t> col_indices, std::vector<double> values);

  /// Build from (row, col, value) triplets; triplets need not be sorted but
  /// must not repeat a (row, col) pair.
  static SparseRowMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                       std::span<const std::size_t> rows,
                                       std::span<const std::size_t> cols,
                                       std::span<const double> values);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  SparseVectorView row(std::size_t i) const;

  std::span<const std::size_t> row_offsets() const noexcept { return offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const SparseRowMatrix&) const = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

/// Compressed column storage; the transpose layout of SparseRowMatrix.
/// Solvers sweep parameters feature by feature and read columns from here.
class SparseColMatrix {
 public:
  SparseColMatrix() = default;
  SparseColMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> col_offsets,
                  std::vector<std::size_t> row_indices, std::vector<double> values);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  SparseVectorView col(std::size_t j) const;

  std::span<const std::size_t> col_offsets() const noexcept { return offsets_; }
  std::span<const std::size_t> row_indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const SparseColMatrix&) const = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

/// Design matrix with one target per row.
struct LabeledData {
  SparseRowMatrix X;
  std::vector<double> y;

  /// Throws ContractViolation unless y has one finite entry per row.
  void validate() const;
  /// Throws ContractViolation unless every label is -1 or +1.
  void validate_binary_labels() const;
};

SparseColMatrix to_column_major(const SparseRowMatrix& m);
SparseRowMatrix to_row_major(const SparseColMatrix& m);

/// Sum over the nonzeros of row `row` of value * dense[col].
double row_dot(const SparseRowMatrix& m, std::size_t row, std::span<const double> dense);

/// Row-major dense copy, n_rows * n_cols entries. Test and debugging helper.
std::vector<double> to_dense(const SparseRowMatrix& m);
std::vector<double> to_dense(const SparseColMatrix& m);

/// Copy of `m` with n_cols set to `n_cols`. Entries in columns >= n_cols are
/// dropped, so this both widens (train/test alignment) and clips.
SparseRowMatrix with_n_cols(const SparseRowMatrix& m, std::size_t n_cols);

/// Rows of `m` in the order given by `rows` (indices may repeat).
SparseRowMatrix select_rows(const SparseRowMatrix& m, std::span<const std::size_t> rows);

}  // namespace fastfm
