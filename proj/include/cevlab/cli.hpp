#pragma once

// Experiment runner behind the cevlab binary. Each verb calls one library operation and
// renders its report; parsing and validation live here so tests can drive the CLI
// in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cevlab::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kVerificationFailed = 2 };

struct ExperimentConfig {
  std::string verb;                 ///< verify, spectral, coord-change, standardize, random-norming, list
  std::string model;                ///< random-norming falls back to --s when empty
  std::string s = "uniform";        ///< spectral measure spec
  std::string op = "hstar";         ///< spectral: hstar, rect, fubini, g, measure
  std::string h;                    ///< function spec for coord-change and standardize
  std::string registry;             ///< list: models, functions or spectral
  std::size_t n = 200000;
  std::uint64_t seed = 7;
  std::vector<double> probs{1e-1, 1e-2, 1e-3};
  std::vector<double> x;
  std::vector<double> y;
  std::optional<double> theta;      ///< appended to the model spec
  std::optional<double> p;          ///< appended to the model spec
  std::optional<double> gamma;      ///< standardize: extreme value index of F
  std::string out;                  ///< output path; stdout when empty
  int workers = 0;                  ///< 0 = available parallelism
  std::string format = "json";

  /// The model spec with --p and --theta folded in.
  std::string model_spec() const;

  /// Throws DomainError on an unknown verb, bad format, n < 1000 (verify) or an
  /// exceedance probability outside (20/n, 1).
  void validate() const;

  /// Keys mirror the long flag names; unknown keys are a DomainError.
  void merge_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Sorted registry listing, one name per line.
std::string list(const std::string& registry);

/// Runs one validated config. The primary document goes to `out` (or to config.out, in
/// which case verify also writes a CSV next to it) and run metadata such as wall time
/// and worker count goes to `meta`, so the primary output is byte-identical across runs
/// and worker counts.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& meta);

/// Parses argv (including an optional --config JSON file whose values are overridden by
/// explicit flags) and runs. Usage errors are reported on `err` with exit code 1.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cevlab::cli
