// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "fastfm/error.hpp"
#include "fastfm/libsvm.hpp"

namespace fastfm {

namespace {

constexpr std::string_view kHeader = "fastfm-model v1";

void write_values(std::ostream& out, std::string_view tag, std::span<const double> values) {
  out << tag;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
    if (pos == s.size()) break;
    std::size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t' && s[end] != '\r') ++end;
    out.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

class SectionReader {
 public:
  explicit SectionReader(std::istream& in) : in_(in) {}

  // Returns the tokens after `tag` on the next line.
  std::vector<std::string_view> next(std::string_view tag, const std::string& section) {
    if (!std::getline(in_, line_))
      throw ModelFormatError("model file truncated: missing section '" + section + "'");
    tokens_ = split(line_);
    if (tokens_.empty() || tokens_[0] != tag)
      throw ModelFormatError("model file: expected section '" + section + "'");
    return {tokens_.begin() + 1, tokens_.end()};
  }

 private:
  std::istream& in_;
  std::string line_;
  std::vector<std::string_view> tokens_;
};

double to_real(std::string_view tok, const std::string& section) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ModelFormatError("model file: malformed number '" + std::string(tok) + "' in section '" +
                           section + "'");
  if (!std::isfinite(v))
    throw ModelFormatError("model file: non-finite entry in section '" + section + "'");
  return v;
}

std::size_t to_count(const std::vector<std::string_view>& toks, const std::string& section) {
  std::size_t v = 0;
  if (toks.size() != 1)
    throw ModelFormatError("model file: section '" + section + "' needs one value");
  const auto [ptr, ec] = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), v);
  if (ec != std::errc() || ptr != toks[0].data() + toks[0].size())
    throw ModelFormatError("model file: malformed count in section '" + section + "'");
  return v;
}

void read_values(const std::vector<std::string_view>& toks, std::span<double> dst,
                 const std::string& section) {
  if (toks.size() != dst.size())
    throw ModelFormatError("model file: section '" + section + "' has " +
                           std::to_string(toks.size()) + " values, expected " +
                           std::to_string(dst.size()));
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = to_real(toks[i], section);
}

}  // namespace

void save_model(std::ostream& out, const FMParams& params) {
  params.validate();
  out << kHeader << '\n';
  out << "p " << params.n_features() << '\n';
  out << "k " << params.rank() << '\n';
  out << "w0 " << format_double(params.w0) << '\n';
  write_values(out, "w", params.w);
  for (std::size_t f = 0; f < params.rank(); ++f) write_values(out, "V", params.factor(f));
}

std::string save_model(const FMParams& params) {
  std::ostringstream out;
  save_model(out, params);
  return out.str();
}

FMParams load_model(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ModelFormatError("model file is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kHeader) {
    if (header.rfind("fastfm-model", 0) == 0)
      throw ModelFormatError("unsupported model version '" + header + "'");
    throw ModelFormatError("not a fastfm model file");
  }
  SectionReader reader(in);
  const std::size_t p = to_count(reader.next("p", "p"), "p");
  const std::size_t k = to_count(reader.next("k", "k"), "k");
  FMParams params(p, k);
  const auto w0 = reader.next("w0", "w0");
  if (w0.size() != 1) throw ModelFormatError("model file: section 'w0' needs one value");
  params.w0 = to_real(w0[0], "w0");
  read_values(reader.next("w", "w"), params.w, "w");
  for (std::size_t f = 0; f < k; ++f) {
    const std::string section = "V[" + std::to_string(f) + "]";
    read_values(reader.next("V", section), params.factor(f), section);
  }
  return params;
}

FMParams load_model(const std::string& text) {
  std::istringstream in(text);
  return load_model(in);
}

void save_model_file(const std::string& path, const FMParams& params) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_model(out, params);
}

FMParams load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace fastfm
