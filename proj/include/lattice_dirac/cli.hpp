#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lattice_dirac {

enum class OutputFormat { csv, json };

/// Everything a single invocation needs. Unset optionals fall back to the
/// per-experiment defaults of the lab.
struct RunConfig {
  std::string experiment;  // omega-scan, spectrum, project, ft, ift, resolve-free, resolve-potential, oracle-eigs
  std::optional<std::vector<double>> hs;
  std::optional<double> box_length;
  std::optional<int> dim;
  std::optional<std::string> function_id;
  std::optional<std::string> potential_id;
  std::optional<double> m;
  std::optional<std::complex<double>> z;
  std::optional<double> s;
  std::optional<int> refine;
  bool floor_probe = true;
  int norm_probes = 0;  // resolve-free
  double h = 1.0;  // spectrum, oracle-eigs
  int n = 16;      // oracle-eigs
  int grid = 256;  // omega-scan
  std::optional<std::string> output;
  OutputFormat format = OutputFormat::csv;
  std::uint64_t seed = 20240101;
  unsigned threads = 0;
  /// Zero the wall-ms column so outputs are bit-identical across runs.
  bool reproducible = false;
};

/// "a+bi", "bi", "a", "-i" and friends, independent of the locale.
std::complex<double> parse_complex(std::string_view text);

/// Parses command-line arguments (and an optional --config file). Throws
/// ConfigError on malformed input; returns nullopt after printing help.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Runs the experiment. Exit code 0 on pass, 2 on a failed built-in
/// assertion, 1 on error (reported on `err`).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with the same exit-code convention.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lattice_dirac
