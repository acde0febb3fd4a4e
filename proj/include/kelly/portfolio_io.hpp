#pragma once

// Portfolio documents. One YAML file per portfolio:
//
//   companies:
//     - name: A
//       market_cap: 225B
//       currency: USD
//       scenarios:
//         - label: Total loss
//           intrinsic_value: 0
//           probability: 5%
//
// Amounts take an optional K/M/B/T magnitude suffix and probabilities an
// optional % suffix. Suffixes are folded into the decimal exponent before
// conversion, so "225B" and "225000000000" parse to the same double.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "kelly/error.hpp"
#include "kelly/portfolio_model.hpp"

namespace kelly::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out, std::chars_format::general);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

inline bool is_plain_decimal(std::string_view s) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  bool digits = false;
  bool dot = false;
  for (const char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

}  // namespace detail

/// Parses "225B", "1.5M", "35%", "0.05" or "2.5e-3". Returns false on
/// anything else. A suffix only combines with a plain decimal mantissa.
inline bool parse_number(std::string_view text, double& out, bool allow_percent = false) {
  text = detail::trim(text);
  if (text.empty()) return false;

  int exponent = 0;
  const char last = text.back();
  switch (last) {
    case 'K': case 'k': exponent = 3; break;
    case 'M': case 'm': exponent = 6; break;
    case 'B': case 'b': exponent = 9; break;
    case 'T': case 't': exponent = 12; break;
    case '%':
      if (!allow_percent) return false;
      exponent = -2;
      break;
    default:
      return detail::parse_double(text, out);
  }
  const std::string_view mantissa = detail::trim(text.substr(0, text.size() - 1));
  if (!detail::is_plain_decimal(mantissa)) return false;
  const std::string scientific = std::string(mantissa) + "e" + std::to_string(exponent);
  return detail::parse_double(scientific, out);
}

/// Shortest decimal that reads back to the same double.
inline std::string format_number(double value) {
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buffer.data(), ptr);
}

namespace detail {

inline int line_of(const YAML::Node& node) { return node.Mark().is_null() ? -1 : node.Mark().line + 1; }

inline const YAML::Node require(const YAML::Node& parent, const char* key, const std::string& where) {
  const YAML::Node child = parent[key];
  if (!child) throw ParseError(where + ": missing field '" + key + "'", line_of(parent));
  return child;
}

inline std::string read_text(const YAML::Node& parent, const char* key, const std::string& where) {
  const YAML::Node node = require(parent, key, where);
  if (!node.IsScalar()) throw ParseError(where + ": field '" + key + "' must be text", line_of(node));
  return node.Scalar();
}

inline double read_number(const YAML::Node& parent, const char* key, const std::string& where,
                          bool allow_percent) {
  const YAML::Node node = require(parent, key, where);
  double value = 0.0;
  if (!node.IsScalar() || !parse_number(node.Scalar(), value, allow_percent)) {
    throw ParseError(where + ": field '" + key + "' is not a number", line_of(node));
  }
  return value;
}

}  // namespace detail

/// Parses without checking domain invariants. Throws ParseError.
inline std::vector<Company> parse_portfolio_unchecked(const std::string& contents) {
  YAML::Node root;
  try {
    root = YAML::Load(contents);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.is_null() ? -1 : e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ParseError("empty portfolio document");
  if (!root.IsMap()) throw ParseError("top level must be a mapping", detail::line_of(root));

  const YAML::Node list = root["companies"];
  if (!list) throw ParseError("missing 'companies' list", detail::line_of(root));
  if (!list.IsSequence() || list.size() == 0) {
    throw ParseError("'companies' must be a non-empty list", detail::line_of(list));
  }

  std::vector<Company> companies;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const YAML::Node node = list[i];
    std::string where = "company #" + std::to_string(i + 1);
    if (!node.IsMap()) throw ParseError(where + " must be a mapping", detail::line_of(node));

    Company c;
    c.name = detail::read_text(node, "name", where);
    where = "company '" + c.name + "'";
    c.market_cap = detail::read_number(node, "market_cap", where, false);
    if (const YAML::Node currency = node["currency"]) {
      if (!currency.IsScalar()) throw ParseError(where + ": 'currency' must be text", detail::line_of(currency));
      c.currency = currency.Scalar();
    }

    const YAML::Node scenarios = detail::require(node, "scenarios", where);
    if (!scenarios.IsSequence() || scenarios.size() == 0) {
      throw ParseError(where + ": 'scenarios' must be a non-empty list", detail::line_of(scenarios));
    }
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
      const YAML::Node sn = scenarios[k];
      const std::string swhere = where + " scenario #" + std::to_string(k + 1);
      if (!sn.IsMap()) throw ParseError(swhere + " must be a mapping", detail::line_of(sn));
      Scenario s;
      s.label = sn["label"] ? detail::read_text(sn, "label", swhere) : std::string{};
      s.intrinsic_value = detail::read_number(sn, "intrinsic_value", swhere, false);
      s.probability = detail::read_number(sn, "probability", swhere, true);
      c.scenarios.push_back(std::move(s));
    }
    companies.push_back(std::move(c));
  }
  return companies;
}

/// Parses and validates every company. Throws ParseError or ValidationError.
inline std::vector<Company> parse_portfolio(const std::string& contents,
                                            const ValidationOptions& options = {}) {
  auto companies = parse_portfolio_unchecked(contents);
  for (const auto& c : companies) validate_company(c, options);
  return companies;
}

/// Inverse of parse_portfolio: plain decimal numbers at full precision.
inline std::string serialize_portfolio(const std::vector<Company>& companies) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "companies" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : companies) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
    out << YAML::Key << "market_cap" << YAML::Value << format_number(c.market_cap);
    out << YAML::Key << "currency" << YAML::Value << YAML::DoubleQuoted << c.currency;
    out << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : c.scenarios) {
      out << YAML::BeginMap;
      out << YAML::Key << "label" << YAML::Value << YAML::DoubleQuoted << s.label;
      out << YAML::Key << "intrinsic_value" << YAML::Value << format_number(s.intrinsic_value);
      out << YAML::Key << "probability" << YAML::Value << format_number(s.probability);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace kelly::io
