// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "fastfm/model.hpp"

namespace fastfm {

/**
 * Line-oriented text model file:
 *
 *     fastfm-model v1
 *     p <n_features>
 *     k <rank>
 *     w0 <value>
 *     w <p values>
 *     V <p values>        (k lines, factor f on line f)
 *
 * Values use the shortest decimal form that parses back to the same double,
 * so save/load is bit-exact.
 */
void save_model(std::ostream& out, const FMParams& params);
std::string save_model(const FMParams& params);

/// Throws ModelFormatError naming the offending or missing section.
FMParams load_model(std::istream& in);
FMParams load_model(const std::string& text);

void save_model_file(const std::string& path, const FMParams& params);
FMParams load_model_file(const std::string& path);

}  // namespace fastfm
