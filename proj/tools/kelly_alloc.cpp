// kelly_alloc: constrained Kelly allocation for a portfolio document.
//
// Exit codes:
//   0 success
//   1 other error (unreadable input, I/O)
//   2 parse error in the portfolio document
//   3 validation error (probabilities, market cap, downside rule)
//   4 no viable solution
//   5 too many constraints to enumerate
//   6 outcome space too large
//   7 invalid constraint policy
// Command-line usage errors keep CLI11's own codes.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kelly/kelly.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kOtherError = 1,
  kParseError = 2,
  kValidationError = 3,
  kNoViableSolution = 4,
  kEnumerationCapExceeded = 5,
  kOutcomeExplosion = 6,
  kInvalidPolicy = 7,
};

int fail(int code, const std::string& kind, const std::exception& e) {
  std::cerr << "kelly_alloc: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained Kelly-criterion capital allocation"};

  kelly::RunConfig config;
  std::optional<double> max_leverage;
  std::optional<double> max_allocation;
  std::vector<double> max_loss;
  std::string format = "text";
  std::string out_path;
  std::vector<double> thresholds;

  app.add_option("input", config.input_path, "Portfolio document (YAML)")->required();
  app.add_option("--max-leverage", max_leverage, "Cap total allocation at 1 + L (L >= 0)");
  app.add_option("--max-allocation", max_allocation, "Cap each company's fraction at M in (0, 1]");
  app.add_option("--max-loss", max_loss,
                 "Limit the probability-weighted worst case to P * K, with P in (0, 1] and "
                 "K in (-1, 0)")
      ->expected(2);
  auto* unconstrained =
      app.add_flag("--unconstrained", config.unconstrained, "Drop every constraint, including long-only");
  app.add_flag("--allow-no-downside", config.validation.allow_no_downside,
               "Accept companies without a downside scenario");
  app.add_option("--tolerance", config.solver.tolerance, "Newton residual tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-iterations", config.solver.max_iterations, "Newton iteration limit")
      ->check(CLI::PositiveNumber);
  app.add_option("--workers", config.solver.worker_count, "Parallel solver workers")
      ->check(CLI::PositiveNumber);
  app.add_flag("--check-multiplier-signs", config.solver.check_multiplier_signs,
               "Also require nonnegative multipliers on active constraints");
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "structured"}));
  app.add_option("--exceedance-thresholds", thresholds,
                 "Loss thresholds for the exceedance table, as fractions")
      ->delimiter(',');
  app.add_option("--out", out_path, "Write the report to this file instead of standard output");

  for (auto* opt : {app.get_option("--max-leverage"), app.get_option("--max-allocation"),
                    app.get_option("--max-loss")}) {
    unconstrained->excludes(opt);
  }

  CLI11_PARSE(app, argc, argv);

  config.policy.max_leverage = max_leverage;
  config.policy.max_allocation = max_allocation;
  if (!max_loss.empty()) config.policy.max_loss = kelly::MaxLossLimit{max_loss[0], max_loss[1]};
  if (!thresholds.empty()) config.exceedance_thresholds = thresholds;
  const auto fmt = format == "text" ? kelly::render::Format::kText : kelly::render::Format::kStructured;

  try {
    const auto result = kelly::run_pipeline(config);
    const std::string report = kelly::render::render(result, fmt);
    if (out_path.empty()) {
      std::cout << report;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!(out << report)) {
        std::cerr << "kelly_alloc: cannot write '" << out_path << "'\n";
        return kOtherError;
      }
    }
    std::cerr << "kelly_alloc: " << result.metadata.systems_attempted << " systems, "
              << result.metadata.viable_solutions << " viable, "
              << result.metadata.wall_seconds << " s\n";
    return kOk;
  } catch (const kelly::ParseError& e) {
    return fail(kParseError, "parse error", e);
  } catch (const kelly::ValidationError& e) {
    return fail(kValidationError, "invalid input", e);
  } catch (const kelly::NoViableSolution& e) {
    return fail(kNoViableSolution, "no viable solution", e);
  } catch (const kelly::EnumerationCapExceeded& e) {
    return fail(kEnumerationCapExceeded, "too many constraints", e);
  } catch (const kelly::OutcomeExplosion& e) {
    return fail(kOutcomeExplosion, "too many outcomes", e);
  } catch (const kelly::InvalidPolicy& e) {
    return fail(kInvalidPolicy, "invalid policy", e);
  } catch (const std::exception& e) {
    return fail(kOtherError, "error", e);
  }
}
