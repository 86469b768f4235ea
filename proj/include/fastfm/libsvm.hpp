// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fastfm/sparse.hpp"

namespace fastfm {

struct LibsvmOptions {
  /// Indices in the file start at 1 and are shifted down on read / up on write.
  bool one_based = false;
  /// Force the column count (must cover every index seen).
  std::optional<std::size_t> n_cols;
};

/// Reads `<target> <idx>:<val> ...` lines. Blank lines and lines starting with
/// '#' are skipped, explicit zero values are dropped.
LabeledData parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
LabeledData read_libsvm_file(const std::string& path, const LibsvmOptions& options = {});

/// Writes shortest round-trip decimal values, so parse(write(d)) == d.
void write_libsvm(std::ostream& out, const LabeledData& data, bool one_based = false);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace fastfm
