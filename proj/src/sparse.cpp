// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fastfm/error.hpp"

namespace fastfm {

namespace {

// Shared structural check for both compressed layouts. `outer` is the number of
// compressed slices (rows for CSR), `inner` the index bound within a slice.
void validate_compressed(std::size_t outer, std::size_t inner,
                         const std::vector<std::size_t>& offsets,
                         const std::vector<std::size_t>& indices,
                         const std::vector<double>& values, const char* what) {
  const std::string name(what);
  if (offsets.size() != outer + 1)
    throw ContractViolation(name + ": offsets must have " + std::to_string(outer + 1) + " entries");
  if (offsets.front() != 0) throw ContractViolation(name + ": offsets must start at 0");
  if (indices.size() != values.size())
    throw ContractViolation(name + ": index and value arrays differ in length");
  if (offsets.back() != values.size())
    throw ContractViolation(name + ": last offset must equal nnz");
  for (std::size_t s = 0; s < outer; ++s) {
    const std::size_t begin = offsets[s];
    const std::size_t end = offsets[s + 1];
    if (end < begin) throw ContractViolation(name + ": offsets must be non-decreasing");
    for (std::size_t p = begin; p < end; ++p) {
      if (indices[p] >= inner)
        throw ContractViolation(name + ": index " + std::to_string(indices[p]) +
                                " out of range in slice " + std::to_string(s));
      if (p > begin && indices[p] <= indices[p - 1])
        throw ContractViolation(name + ": indices not strictly increasing in slice " +
                                std::to_string(s));
      if (!std::isfinite(values[p]))
        throw ContractViolation(name + ": non-finite value in slice " + std::to_string(s));
    }
  }
}

// Counting-sort transpose shared by both conversions.
void transpose_compressed(std::size_t outer, std::size_t inner,
                          std::span<const std::size_t> offsets,
                          std::span<const std::size_t> indices, std::span<const double> values,
                          std::vector<std::size_t>& t_offsets, std::vector<std::size_t>& t_indices,
                          std::vector<double>& t_values) {
  t_offsets.assign(inner + 1, 0);
  for (std::size_t idx : indices) ++t_offsets[idx + 1];
  std::partial_sum(t_offsets.begin(), t_offsets.end(), t_offsets.begin());
  t_indices.resize(indices.size());
  t_values.resize(values.size());
  std::vector<std::size_t> cursor(t_offsets.begin(), t_offsets.end() - 1);
  // Visiting slices in ascending order keeps the transposed indices sorted.
  for (std::size_t s = 0; s < outer; ++s) {
    for (std::size_t p = offsets[s]; p < offsets[s + 1]; ++p) {
      const std::size_t dst = cursor[indices[p]]++;
      t_indices[dst] = s;
      t_values[dst] = values[p];
    }
  }
}

}  // namespace

SparseRowMatrix::SparseRowMatrix(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<std::size_t> row_offsets,
                                 std::vector<std::size_t> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      offsets_(std::move(row_offsets)),
      indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate_compressed(n_rows_, n_cols_, offsets_, indices_, values_, "SparseRowMatrix");
}

SparseRowMatrix SparseRowMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                               std::span<const std::size_t> rows,
                                               std::span<const std::size_t> cols,
                                               std::span<const double> values) {
  if (rows.size() != cols.size() || rows.size() != values.size())
    throw ContractViolation("from_triplets: triplet arrays differ in length");
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a] != rows[b] ? rows[a] < rows[b] : cols[a] < cols[b];
  });
  std::vector<std::size_t> offsets(n_rows + 1, 0);
  std::vector<std::size_t> indices;
  std::vector<double> vals;
  indices.reserve(order.size());
  vals.reserve(order.size());
  for (std::size_t t : order) {
    if (rows[t] >= n_rows) throw ContractViolation("from_triplets: row index out of range");
    ++offsets[rows[t] + 1];
    indices.push_back(cols[t]);
    vals.push_back(values[t]);
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseRowMatrix(n_rows, n_cols, std::move(offsets), std::move(indices), std::move(vals));
}

SparseVectorView SparseRowMatrix::row(std::size_t i) const {
  if (i >= n_rows_) throw ContractViolation("row index " + std::to_string(i) + " out of range");
  const std::size_t begin = offsets_[i];
  const std::size_t len = offsets_[i + 1] - begin;
  return {std::span(indices_).subspan(begin, len), std::span(values_).subspan(begin, len)};
}

SparseColMatrix::SparseColMatrix(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<std::size_t> col_offsets,
                                 std::vector<std::size_t> row_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      offsets_(std::move(col_offsets)),
      indices_(std::move(row_indices)),
      values_(std::move(values)) {
  validate_compressed(n_cols_, n_rows_, offsets_, indices_, values_, "SparseColMatrix");
}

SparseVectorView SparseColMatrix::col(std::size_t j) const {
  if (j >= n_cols_) throw ContractViolation("column index " + std::to_string(j) + " out of range");
  const std::size_t begin = offsets_[j];
  const std::size_t len = offsets_[j + 1] - begin;
  return {std::span(indices_).subspan(begin, len), std::span(values_).subspan(begin, len)};
}

void LabeledData::validate() const {
  if (y.size() != X.n_rows())
    throw ContractViolation("target length " + std::to_string(y.size()) + " != rows " +
                            std::to_string(X.n_rows()));
  for (double v : y)
    if (!std::isfinite(v)) throw ContractViolation("non-finite target");
}

void LabeledData::validate_binary_labels() const {
  validate();
  for (double v : y)
    if (v != 1.0 && v != -1.0) throw ContractViolation("classification labels must be -1 or +1");
}

SparseColMatrix to_column_major(const SparseRowMatrix& m) {
  std::vector<std::size_t> offsets, indices;
  std::vector<double> values;
  transpose_compressed(m.n_rows(), m.n_cols(), m.row_offsets(), m.col_indices(), m.values(),
                       offsets, indices, values);
  return SparseColMatrix(m.n_rows(), m.n_cols(), std::move(offsets), std::move(indices),
                         std::move(values));
}

SparseRowMatrix to_row_major(const SparseColMatrix& m) {
  std::vector<std::size_t> offsets, indices;
  std::vector<double> values;
  transpose_compressed(m.n_cols(), m.n_rows(), m.col_offsets(), m.row_indices(), m.values(),
                       offsets, indices, values);
  return SparseRowMatrix(m.n_rows(), m.n_cols(), std::move(offsets), std::move(indices),
                         std::move(values));
}

double row_dot(const SparseRowMatrix& m, std::size_t row, std::span<const double> dense) {
  if (dense.size() != m.n_cols())
    throw ContractViolation("row_dot: dense vector length " + std::to_string(dense.size()) +
                            " != n_cols " + std::to_string(m.n_cols()));
  const auto r = m.row(row);
  double acc = 0.0;
  for (std::size_t p = 0; p < r.nnz(); ++p) acc += r.values[p] * dense[r.indices[p]];
  return acc;
}

std::vector<double> to_dense(const SparseRowMatrix& m) {
  std::vector<double> out(m.n_rows() * m.n_cols(), 0.0);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t p = 0; p < r.nnz(); ++p) out[i * m.n_cols() + r.indices[p]] = r.values[p];
  }
  return out;
}

std::vector<double> to_dense(const SparseColMatrix& m) {
  std::vector<double> out(m.n_rows() * m.n_cols(), 0.0);
  for (std::size_t j = 0; j < m.n_cols(); ++j) {
    const auto c = m.col(j);
    for (std::size_t p = 0; p < c.nnz(); ++p) out[c.indices[p] * m.n_cols() + j] = c.values[p];
  }
  return out;
}

SparseRowMatrix with_n_cols(const SparseRowMatrix& m, std::size_t n_cols) {
  std::vector<std::size_t> offsets(m.n_rows() + 1, 0);
  std::vector<std::size_t> indices;
  std::vector<double> values;
  indices.reserve(m.nnz());
  values.reserve(m.nnz());
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t p = 0; p < r.nnz(); ++p) {
      if (r.indices[p] >= n_cols) break;
      indices.push_back(r.indices[p]);
      values.push_back(r.values[p]);
    }
    offsets[i + 1] = indices.size();
  }
  return SparseRowMatrix(m.n_rows(), n_cols, std::move(offsets), std::move(indices),
                         std::move(values));
}

SparseRowMatrix select_rows(const SparseRowMatrix& m, std::span<const std::size_t> rows) {
  std::vector<std::size_t> offsets(rows.size() + 1, 0);
  std::vector<std::size_t> indices;
  std::vector<double> values;
  for (std::size_t out = 0; out < rows.size(); ++out) {
    const auto r = m.row(rows[out]);
    indices.insert(indices.end(), r.indices.begin(), r.indices.end());
    values.insert(values.end(), r.values.begin(), r.values.end());
    offsets[out + 1] = indices.size();
  }
  return SparseRowMatrix(rows.size(), m.n_cols(), std::move(offsets), std::move(indices),
                         std::move(values));
}

}  // namespace fastfm
