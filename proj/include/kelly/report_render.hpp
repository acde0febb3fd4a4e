#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "kelly/error.hpp"
#include "kelly/pipeline.hpp"
#include "kelly/portfolio_stats.hpp"

namespace kelly::render {

inline constexpr const char* kReportFormat = "kelly-allocation-report";
inline constexpr int kReportVersion = 1;

enum class Format { kText, kStructured };

namespace detail {

inline std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

inline std::string percent(double fraction, int decimals = 2) {
  return fixed(100.0 * fraction, decimals) + "%";
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace detail

inline std::string render_text(const PipelineResult& result) {
  const auto& r = result.report;
  const auto& m = result.metadata;
  std::string out;
  const auto line = [&out](const std::string& s) { out += s + "\n"; };

  std::size_t width = 0;
  for (const auto& name : m.company_names) width = std::max(width, name.size());

  line("Allocation");
  for (std::size_t j = 0; j < m.company_names.size(); ++j) {
    line("  " + detail::pad(m.company_names[j], width) + " " +
         detail::percent(r.fractions(static_cast<Eigen::Index>(j))));
  }
  line("");
  line("Invested total            " + detail::percent(r.invested_total));
  line("Expected arithmetic gain  " + detail::fixed(r.expected_arithmetic_gain, 4) +
       " per unit of capital");
  line("Expected log growth       " + detail::fixed(r.expected_log_growth, 6));
  line("Geometric gain            " + detail::fixed(r.geometric_gain, 4) + " per unit of capital");
  line("Probability of loss       " + detail::percent(r.probability_of_loss));
  line("Worst outcome             " + detail::percent(r.worst_outcome.portfolio_return) +
       " with probability " + detail::percent(r.worst_outcome.probability, 4));
  line("");
  line("Loss exceedance");
  if (r.loss_exceedance.empty()) line("  (none)");
  for (const auto& e : r.loss_exceedance) {
    line("  loss >= " + detail::pad(detail::percent(e.threshold, 0), 5) + " " +
         detail::percent(e.probability, 4));
  }
  line("");
  line("Solver");
  line("  outcomes " + std::to_string(m.num_outcomes) + ", constraints " +
       std::to_string(m.constraint_labels.size()));
  line("  systems " + std::to_string(m.systems_attempted) + " attempted, " +
       std::to_string(m.systems_converged) + " converged, " + std::to_string(m.viable_solutions) +
       " viable");
  line("  selected mask " + (m.selected_mask.size() ? m.selected_mask.to_string() : "(none)") +
       " (#" + std::to_string(m.selected_mask.bits()) + "), " +
       std::to_string(m.selected_iterations) + " iterations, KKT residual " +
       [&] {
         char buf[32];
         std::snprintf(buf, sizeof buf, "%.2e", m.kkt_residual);
         return std::string(buf);
       }());
  line("  wall time " + detail::fixed(m.wall_seconds, 3) + " s");
  return out;
}

using Json = nlohmann::ordered_json;

inline Json to_json(const PipelineResult& result) {
  const auto& r = result.report;
  const auto& m = result.metadata;
  Json doc;
  doc["format"] = kReportFormat;
  doc["version"] = kReportVersion;
  Json allocations = Json::array();
  for (std::size_t j = 0; j < m.company_names.size(); ++j) {
    allocations.push_back(
        {{"company", m.company_names[j]}, {"fraction", r.fractions(static_cast<Eigen::Index>(j))}});
  }
  doc["allocations"] = std::move(allocations);
  doc["invested_total"] = r.invested_total;
  doc["expected_arithmetic_gain"] = r.expected_arithmetic_gain;
  doc["expected_log_growth"] = r.expected_log_growth;
  doc["geometric_gain"] = r.geometric_gain;
  doc["probability_of_loss"] = r.probability_of_loss;
  Json exceedance = Json::array();
  for (const auto& e : r.loss_exceedance) {
    exceedance.push_back({{"threshold", e.threshold}, {"probability", e.probability}});
  }
  doc["loss_exceedance"] = std::move(exceedance);
  doc["worst_outcome"] = {{"portfolio_return", r.worst_outcome.portfolio_return},
                          {"probability", r.worst_outcome.probability}};
  doc["solver"] = {{"outcomes", m.num_outcomes},
                   {"constraints", m.constraint_labels},
                   {"systems_attempted", m.systems_attempted},
                   {"systems_converged", m.systems_converged},
                   {"viable_solutions", m.viable_solutions},
                   {"selected_mask", m.selected_mask.to_string()},
                   {"selected_mask_index", m.selected_mask.bits()},
                   {"iterations", m.selected_iterations},
                   {"kkt_residual", m.kkt_residual}};
  return doc;
}

/// Versioned JSON with full-precision numbers.
inline std::string render_structured(const PipelineResult& result) {
  return to_json(result).dump(2) + "\n";
}

inline std::string render(const PipelineResult& result, Format format) {
  return format == Format::kText ? render_text(result) : render_structured(result);
}

/// Reads a structured report back. Wall time is not carried and comes back 0.
inline PipelineResult parse_structured(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kReportFormat) {
      throw ParseError("not an allocation report");
    }
    if (doc.at("version").get<int>() != kReportVersion) {
      throw ParseError("unsupported report version " + doc.at("version").dump());
    }
    PipelineResult result;
    auto& r = result.report;
    auto& m = result.metadata;
    const auto& allocations = doc.at("allocations");
    r.fractions.resize(static_cast<Eigen::Index>(allocations.size()));
    for (std::size_t j = 0; j < allocations.size(); ++j) {
      m.company_names.push_back(allocations[j].at("company").get<std::string>());
      r.fractions(static_cast<Eigen::Index>(j)) = allocations[j].at("fraction").get<double>();
    }
    r.invested_total = doc.at("invested_total").get<double>();
    r.expected_arithmetic_gain = doc.at("expected_arithmetic_gain").get<double>();
    r.expected_log_growth = doc.at("expected_log_growth").get<double>();
    r.geometric_gain = doc.at("geometric_gain").get<double>();
    r.probability_of_loss = doc.at("probability_of_loss").get<double>();
    for (const auto& e : doc.at("loss_exceedance")) {
      r.loss_exceedance.push_back(
          {e.at("threshold").get<double>(), e.at("probability").get<double>()});
    }
    r.worst_outcome = {doc.at("worst_outcome").at("portfolio_return").get<double>(),
                       doc.at("worst_outcome").at("probability").get<double>()};
    const auto& s = doc.at("solver");
    m.num_outcomes = s.at("outcomes").get<std::size_t>();
    m.constraint_labels = s.at("constraints").get<std::vector<std::string>>();
    m.systems_attempted = s.at("systems_attempted").get<std::uint64_t>();
    m.systems_converged = s.at("systems_converged").get<std::uint64_t>();
    m.viable_solutions = s.at("viable_solutions").get<std::uint64_t>();
    m.selected_mask = StatusMask(s.at("selected_mask_index").get<std::uint64_t>(),
                                 s.at("selected_mask").get<std::string>().size());
    m.selected_iterations = s.at("iterations").get<std::size_t>();
    m.kkt_residual = s.at("kkt_residual").get<double>();
    return result;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace kelly::render
