#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lattice_dirac/grid.hpp"

namespace lattice_dirac {

/// A dyadic h-sweep over a fixed box.
struct Sweep {
  std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
  double box_length = 12.8;
  int dim = 2;
  /// Catalog id of the test function; "gaussian-spinor" for the resolvent experiments.
  std::string function_id = "gaussian";
  double m = 1.0;
  Complex z{0.0, 2.0};
  std::optional<std::string> potential_id;
  /// Weight exponent for the weighted Fourier error.
  double s = 1.0;
  /// Reference grid is `refine` times finer than the finest level.
  int refine = 8;
  /// Also run h_min / 2 to detect a truncation or roundoff floor.
  bool floor_probe = true;
  /// resolve-free only: with k > 0, adds a "probe-max" series, the largest
  /// relative error over k fixed Gaussian wave packets. Diagnostic, never gated.
  int norm_probes = 0;
  /// 0: as many as the machine (and LATTICE_DIRAC_THREADS) allow.
  unsigned threads = 0;

  /// Meshes of the sweep; throws InvalidArgument unless every h gives an even N.
  std::vector<Mesh> meshes() const;
  void validate() const;
};

/// Per-experiment defaults: z = 3i and the non-Hermitian potential for
/// "resolve-potential", a one-dimensional bump on L = 25.6 for "ift", and
/// the dyadic sweep on L = 12.8 with z = 2i otherwise.
Sweep default_sweep(const std::string& experiment);

struct RateFit {
  double slope;
  double intercept;
};

/// Ordinary least squares on (log h, log err); needs >= 3 points with err > 1e-14.
RateFit fit_rate(std::span<const double> hs, std::span<const double> errs);

struct SeriesPoint {
  double h;
  int n;
  double error;
  double wall_ms;
};

struct Series {
  std::string name;
  std::vector<SeriesPoint> points;
  bool strictly_decreasing = false;
  /// Fit over the entries >= 1e-12, when at least three remain.
  std::optional<RateFit> fit;

  std::vector<double> hs() const;
  std::vector<double> errors() const;
};

struct ConvergenceReport {
  std::string experiment;
  /// Parameters in a fixed order for output.
  std::vector<std::pair<std::string, std::string>> parameters;
  /// The first series is the one the assertions refer to.
  std::vector<Series> series;
  std::optional<double> probe_error;
  bool floor_reached = false;
  bool passed = false;
  std::vector<std::string> failures;
  double wall_ms = 0.0;

  const Series& primary() const { return series.front(); }
  const Series& find(const std::string& name) const;
};

/// Fills decrease flags and fits of every series.
void finalize(Series& s);

/// ||P_h phi - phi|| and ||phi_h - phi|| per h.
ConvergenceReport exp_projection(const Sweep& sweep);
/// Weighted Fourier error per h.
ConvergenceReport exp_ft(const Sweep& sweep);
/// Inverse Fourier error of the frequency bump per h.
ConvergenceReport exp_ift(const Sweep& sweep);
/// || (D_{m,h} - z)^{-1} P_h phi - (D_m - z)^{-1} phi || per h.
ConvergenceReport exp_resolvent_free(const Sweep& sweep);
/// Same with a potential, against a collocation reference solved the same way.
ConvergenceReport exp_resolvent_potential(const Sweep& sweep);

/// Thread cap from the sweep, LATTICE_DIRAC_THREADS and the hardware.
unsigned resolve_threads(unsigned requested, std::size_t jobs);

}  // namespace lattice_dirac
