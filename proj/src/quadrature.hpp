#pragma once

// Gauss-Legendre helpers shared by the translation units. Not installed.

#include <algorithm>
#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace lattice_dirac::detail {

template <std::size_t Points>
struct GaussRule {
  std::array<double, Points> nodes;    // on [-1, 1]
  std::array<double, Points> weights;  // sum to 2

  static const GaussRule& get() {
    static const GaussRule rule = [] {
      using G = boost::math::quadrature::gauss<double, Points>;
      GaussRule r{};
      const auto& x = G::abscissa();
      const auto& w = G::weights();
      std::size_t k = 0;
      // boost stores the non-negative half; odd rules include 0 once.
      for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) continue;
        r.nodes[k] = -x[i];
        r.weights[k++] = w[i];
      }
      for (std::size_t i = 0; i < x.size(); ++i) {
        r.nodes[k] = x[i];
        r.weights[k++] = w[i];
      }
      return r;
    }();
    return rule;
  }
};

/// Sub-intervals of [lo, hi) obtained by splitting at the sorted breakpoints
/// that fall strictly inside.
inline std::vector<std::pair<double, double>> split_interval(double lo, double hi,
                                                             const std::vector<double>& cuts) {
  std::vector<std::pair<double, double>> out;
  const double tol = 1e-13 * std::max(1.0, hi - lo);
  double a = lo;
  for (auto it = std::upper_bound(cuts.begin(), cuts.end(), lo + tol);
       it != cuts.end() && *it < hi - tol; ++it) {
    out.emplace_back(a, *it);
    a = *it;
  }
  out.emplace_back(a, hi);
  return out;
}

}  // namespace lattice_dirac::detail
