#pragma once

// Per-operation ancilla requirements and delays for a QEC code.
//
// File format (line oriented, '#' comments):
//
//   code <name> length <L_code>
//   op <KIND> ancilla <int> delay_us <decimal> transversal <0|1>
//
// Tdg falls back to the T row when it has none of its own.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qkmap/circuit_ir.hpp"
#include "qkmap/errors.hpp"

namespace qkmap {

struct QecRow {
  std::uint32_t ancilla = 0;
  double delay_us = 0.0;
  bool transversal = true;

  bool operator==(const QecRow&) const = default;
};

class QecProfile {
 public:
  QecProfile() = default;
  QecProfile(std::string code_name, std::uint32_t code_length)
      : code_name_(std::move(code_name)), code_length_(code_length) {}

  const std::string& code_name() const { return code_name_; }
  std::uint32_t code_length() const { return code_length_; }

  void set_row(OpKind kind, QecRow row) { rows_[index(kind)] = row; }

  /// Row for `kind`, honoring the Tdg -> T fallback.
  std::optional<QecRow> find(OpKind kind) const {
    if (rows_[index(kind)]) return rows_[index(kind)];
    if (kind == OpKind::Tdg) return rows_[index(OpKind::T)];
    return std::nullopt;
  }

  QecRow row(OpKind kind) const {
    auto r = find(kind);
    if (!r) {
      throw ConfigError("QEC profile '" + code_name_ + "' has no row for operation " +
                        std::string(to_string(kind)));
    }
    return *r;
  }

  /// Rows explicitly present in the profile (no fallback).
  bool has_explicit_row(OpKind kind) const { return rows_[index(kind)].has_value(); }

  std::size_t row_count() const {
    return static_cast<std::size_t>(
        std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return r.has_value(); }));
  }

  /// Minimum ancilla requirement over the rows present.
  std::uint32_t a_min() const {
    std::uint32_t best = 0;
    for (const auto& r : rows_)
      if (r && (best == 0 || r->ancilla < best)) best = r->ancilla;
    return best;
  }

  std::uint32_t a_max() const {
    std::uint32_t best = 0;
    for (const auto& r : rows_)
      if (r) best = std::max(best, r->ancilla);
    return best;
  }

  bool has_non_transversal() const {
    return std::any_of(rows_.begin(), rows_.end(),
                       [](const auto& r) { return r && !r->transversal; });
  }

 private:
  static std::size_t index(OpKind kind) { return static_cast<std::size_t>(kind); }

  std::string code_name_;
  std::uint32_t code_length_ = 0;
  std::array<std::optional<QecRow>, kAllOpKinds.size()> rows_{};
};

inline QecProfile parse_qec_profile(std::string_view text,
                                    std::vector<std::string>* warnings = nullptr) {
  std::optional<QecProfile> profile;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  auto parse_uint = [](std::string_view s, std::int64_t& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  };

  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::vector<detail::Token> t = detail::split_ws(line);
    if (t.empty()) continue;

    auto fail = [&](std::size_t column, const std::string& msg) {
      return ParseError(line_no, column, msg);
    };

    if (t[0].text == "code") {
      if (profile) throw fail(t[0].column, "duplicate 'code' header");
      if (t.size() != 4 || t[2].text != "length")
        throw fail(t[0].column, "expected 'code <name> length <L_code>'");
      std::int64_t length = 0;
      if (!parse_uint(t[3].text, length)) throw fail(t[3].column, "invalid code length");
      if (length <= 0) throw fail(t[3].column, "code length must be positive");
      profile.emplace(std::string(t[1].text), static_cast<std::uint32_t>(length));
    } else if (t[0].text == "op") {
      if (!profile) throw fail(t[0].column, "'op' row before 'code' header");
      if (t.size() != 8 || t[2].text != "ancilla" || t[4].text != "delay_us" ||
          t[6].text != "transversal") {
        throw fail(t[0].column,
                   "expected 'op <KIND> ancilla <int> delay_us <decimal> transversal <0|1>'");
      }
      std::optional<OpKind> kind = parse_op_kind(t[1].text);
      if (!kind) throw fail(t[1].column, "unknown operation '" + std::string(t[1].text) + "'");
      if (profile->has_explicit_row(*kind))
        throw fail(t[1].column, "duplicate row for " + std::string(to_string(*kind)));
      std::int64_t ancilla = 0;
      if (!parse_uint(t[3].text, ancilla)) throw fail(t[3].column, "invalid ancilla count");
      if (ancilla <= 0) throw fail(t[3].column, "ancilla count must be positive");
      double delay = 0.0;
      {
        std::string s(t[5].text);
        std::size_t used = 0;
        try {
          delay = std::stod(s, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != s.size() || !std::isfinite(delay)) throw fail(t[5].column, "invalid delay");
      }
      if (delay <= 0.0) throw fail(t[5].column, "delay must be positive");
      if (t[7].text != "0" && t[7].text != "1")
        throw fail(t[7].column, "transversal flag must be 0 or 1");
      profile->set_row(*kind, {static_cast<std::uint32_t>(ancilla), delay, t[7].text == "1"});
    } else {
      throw fail(t[0].column, "unknown statement '" + std::string(t[0].text) + "'");
    }
  }
  if (!profile) throw ParseError(line_no == 0 ? 1 : line_no, 1, "missing 'code' header");
  if (profile->row_count() == 0)
    throw ParseError(line_no, 1, "profile '" + profile->code_name() + "' defines no operations");
  if (!profile->has_non_transversal() && warnings != nullptr) {
    warnings->push_back("profile '" + profile->code_name() +
                        "' has no non-transversal operation; a universal gate set needs one");
  }
  return *profile;
}

inline QecProfile load_qec_profile(const std::string& path,
                                   std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open QEC profile '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_qec_profile(buffer.str(), warnings);
}

// Bundled profiles. Ancilla counts are the published per-operation figures for
// each code; the delays are placeholders to be replaced with technology data.

inline constexpr std::string_view kSteaneProfileText = R"(# Steane [[7,1,3]]
code steane length 7
op X ancilla 28 delay_us 100 transversal 1
op Y ancilla 28 delay_us 100 transversal 1
op Z ancilla 28 delay_us 100 transversal 1
op H ancilla 28 delay_us 100 transversal 1
op S ancilla 28 delay_us 100 transversal 1
op CNOT ancilla 56 delay_us 200 transversal 1
op T ancilla 100 delay_us 1000 transversal 0
)";

inline constexpr std::string_view kBaconShorProfileText = R"(# Bacon-Shor [[9,1,3]]
code bacon-shor length 9
op X ancilla 18 delay_us 100 transversal 1
op Y ancilla 18 delay_us 100 transversal 1
op Z ancilla 18 delay_us 100 transversal 1
op H ancilla 18 delay_us 100 transversal 1
op CNOT ancilla 36 delay_us 200 transversal 1
op S ancilla 58 delay_us 500 transversal 0
op T ancilla 309 delay_us 1500 transversal 0
)";

/// "steane" or "bacon-shor"; nullopt otherwise.
inline std::optional<QecProfile> bundled_profile(std::string_view name) {
  if (name == "steane") return parse_qec_profile(kSteaneProfileText);
  if (name == "bacon-shor" || name == "bacon_shor") return parse_qec_profile(kBaconShorProfileText);
  return std::nullopt;
}

}  // namespace qkmap
