// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/libsvm.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "fastfm/error.hpp"

namespace fastfm {

namespace {

using Kind = ParseError::Kind;

double parse_real(std::string_view tok, std::size_t line, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc::result_out_of_range)
    throw ParseError(std::string(what) + " out of range: '" + std::string(tok) + "'", line,
                     Kind::range);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(std::string("malformed ") + what + ": '" + std::string(tok) + "'", line);
  if (!std::isfinite(v))
    throw ParseError(std::string("non-finite ") + what + ": '" + std::string(tok) + "'", line,
                     Kind::range);
  return v;
}

std::size_t parse_index(std::string_view tok, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError("malformed feature index: '" + std::string(tok) + "'", line);
  return v;
}

// Splits on spaces and tabs.
template <class F>
void for_each_token(std::string_view s, F&& f) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos == s.size()) break;
    std::size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
    f(s.substr(pos, end - pos));
    pos = end;
  }
}

}  // namespace

LabeledData parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> indices;
  std::vector<double> values;
  std::vector<double> y;
  std::size_t max_col_plus_one = 0;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view s(text);
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos || s[first] == '#') continue;

    bool have_target = false;
    bool have_prev = false;
    std::size_t prev = 0;
    for_each_token(s, [&](std::string_view tok) {
      if (!have_target) {
        y.push_back(parse_real(tok, line, "target"));
        have_target = true;
        return;
      }
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError("expected idx:val, got '" + std::string(tok) + "'", line);
      std::size_t idx = parse_index(tok.substr(0, colon), line);
      const double val = parse_real(tok.substr(colon + 1), line, "feature value");
      if (options.one_based) {
        if (idx == 0) throw ParseError("index 0 in a one-based file", line, Kind::structure);
        --idx;
      }
      if (have_prev && idx == prev)
        throw ParseError("duplicate feature index " + std::to_string(idx), line, Kind::structure);
      if (have_prev && idx < prev)
        throw ParseError("feature indices not ascending at " + std::to_string(idx), line,
                         Kind::structure);
      have_prev = true;
      prev = idx;
      if (val == 0.0) return;
      indices.push_back(idx);
      values.push_back(val);
      max_col_plus_one = std::max(max_col_plus_one, idx + 1);
    });
    offsets.push_back(indices.size());
  }

  std::size_t n_cols = max_col_plus_one;
  if (options.n_cols) {
    if (*options.n_cols < max_col_plus_one)
      throw ParseError("feature index " + std::to_string(max_col_plus_one - 1) +
                           " exceeds forced column count " + std::to_string(*options.n_cols),
                       0, Kind::structure);
    n_cols = *options.n_cols;
  }
  const std::size_t n_rows = y.size();
  return LabeledData{
      SparseRowMatrix(n_rows, n_cols, std::move(offsets), std::move(indices), std::move(values)),
      std::move(y)};
}

LabeledData read_libsvm_file(const std::string& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_libsvm(in, options);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_libsvm(std::ostream& out, const LabeledData& data, bool one_based) {
  data.validate();
  const std::size_t shift = one_based ? 1 : 0;
  for (std::size_t i = 0; i < data.X.n_rows(); ++i) {
    out << format_double(data.y[i]);
    const auto r = data.X.row(i);
    for (std::size_t p = 0; p < r.nnz(); ++p)
      out << ' ' << (r.indices[p] + shift) << ':' << format_double(r.values[p]);
    out << '\n';
  }
}

}  // namespace fastfm
