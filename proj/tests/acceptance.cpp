// One line per acceptance criterion; nonzero exit if any fails or overruns its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lattice_dirac/fourier.hpp"
#include "lattice_dirac/lab.hpp"
#include "lattice_dirac/operators.hpp"
#include "lattice_dirac/symbols.hpp"

using namespace lattice_dirac;

namespace {

struct Verdict {
  bool ok;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

LatticeField random_field(const Mesh& mesh, int channels, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  LatticeField f(mesh, channels);
  for (Eigen::Index i = 0; i < f.values().size(); ++i) f.values().data()[i] = Complex(g(rng), g(rng));
  return f;
}

Eigen::VectorXcd stacked(const LatticeField& f) {
  Eigen::VectorXcd v(2 * f.mesh().site_count());
  v << f.values().col(0), f.values().col(1);
  return v;
}

std::vector<double> symbol_spectrum(const Mesh& mesh, const DiracParams& p) {
  std::vector<double> out;
  const FrequencyGrid grid(mesh);
  for (Eigen::Index k = 0; k < mesh.site_count(); ++k) {
    const Point xi = grid.frequency(k);
    const double l = lambda_mh(Eigen::Vector2d(xi[0], xi[1]), p);
    out.push_back(l);
    out.push_back(-l);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Verdict oracle_eigenvalues() {
  const Mesh mesh(2, 0.5, 16);
  const DiracParams p(1.0, 0.5);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(dense_matrix(p, mesh), Eigen::EigenvaluesOnly).eigenvalues();
  const auto expect = symbol_spectrum(mesh, p);
  double dev = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) dev = std::max(dev, std::abs(ev[i] - expect[static_cast<std::size_t>(i)]));
  return {ev.size() == 512 && dev < 1e-10, fmt("512 eigenvalues, max deviation %.3g", dev)};
}

Verdict spectrum_endpoint() {
  const Mesh mesh(2, 1.0, 16);
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(dense_matrix(DiracParams(0.0, 1.0), mesh), Eigen::EigenvaluesOnly).eigenvalues();
  const double gap = std::abs(ev.maxCoeff() - (2 + std::sqrt(2.0)));
  return {gap < 1e-10, fmt("max eigenvalue %.17g, |max - (2+sqrt 2)| %.3g", ev.maxCoeff(), gap)};
}

Verdict omega_certificate() {
  const double pi = M_PI, top = 6 + 4 * std::sqrt(2.0);
  const double expect[6] = {0, 0, top, 6 - 4 * std::sqrt(2.0), 2, 2};
  const auto cps = critical_points();
  double value_gap = 0, grad = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    value_gap = std::max(value_gap, std::abs(cps[i].value - expect[i]));
    grad = std::max(grad, omega_gradient(cps[i].location).norm());
  }
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> wide(-8, 8), near(-pi / 4, pi / 4);
  const Eigen::Vector2d alpha(pi / 2, -pi / 2);
  const double lower = (2 - std::sqrt(2.0)) / 8;
  int violations = 0;
  for (int t = 0; t < 10000; ++t) {
    const Eigen::Vector2d xi(wide(rng), wide(rng)), s(near(rng), near(rng));
    const double w = omega(xi);
    violations += !(w >= -1e-15 && w <= top + 1e-12);
    violations += !(w <= 2 * xi.squaredNorm() + 1e-13);
    violations += !(omega(alpha + xi) <= 2 * xi.squaredNorm() + 1e-13);
    violations += !(omega(s) >= lower * s.squaredNorm() - 1e-15);
    violations += !(omega(alpha + s) >= lower * s.squaredNorm() - 1e-14);
  }
  return {value_gap < 1e-13 && grad < 1e-8 && violations == 0,
          fmt("value gap %.3g, max gradient %.3g, bound violations %.0f", value_gap, grad, violations)};
}

Verdict unitarity_and_projections() {
  double worst = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    const int d = 1 + seed % 2;
    const Mesh mesh(d, 0.2 + 0.01 * (seed % 30), 4 + 2 * (seed % 6));
    LatticeField f = random_field(mesh, 2, seed), g = random_field(mesh, 2, 1000 + seed);
    f = (1.0 / norm_l2(f)) * f;
    g = (1.0 / norm_l2(g)) * g;
    const SpectralField u = dft(f);
    worst = std::max(worst, std::abs(norm_l2(u) - 1.0));
    worst = std::max(worst, (idft(u).values() - f.values()).cwiseAbs().maxCoeff());
    SpectralField v(u.grid(), g.values() / std::pow(mesh.h(), d / 2.0));
    worst = std::max(worst, (dft(idft(v)).values() - v.values()).cwiseAbs().maxCoeff());
    for (int j = 0; j < d; ++j)
      worst = std::max(worst, std::abs(inner(diff_forward(f, j), g) - inner(f, diff_backward(g, j))));
  }
  return {worst < 1e-12, fmt("worst deviation %.3g over 100 fields", worst)};
}

Verdict sampling_rate() {
  std::string detail;
  bool ok = true;
  for (int d : {1, 2}) {
    Sweep s;
    s.dim = d;
    s.floor_probe = false;
    const ConvergenceReport r = exp_projection(s);
    const auto& fit = r.find("sampling").fit;
    const double slope = fit ? fit->slope : NAN;
    ok = ok && fit && slope >= 0.8 && slope <= 1.2;
    detail += fmt("d=%.0f slope %.4f; ", d, slope);
  }
  return {ok, detail};
}

Verdict step_transform() {
  using boost::math::quadrature::gauss_kronrod;
  auto gk = [](const std::function<double(double)>& f, double a, double b) {
    return gauss_kronrod<double, 61>::integrate(f, a, b, 6, 1e-13);
  };
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> freq(-12.0, 12.0);
  double quad_gap = 0, grid_gap = 0;
  for (int d : {1, 2}) {
    const Mesh mesh(d, 0.35, 8);
    const LatticeField f = random_field(mesh, 1, 40 + d);
    for (int t = 0; t < 5; ++t) {
      const Point xi = d == 1 ? make_point(freq(rng)) : make_point(freq(rng), freq(rng));
      Complex q = 0;
      for (Eigen::Index s = 0; s < mesh.site_count(); ++s) {
        Complex cell = 1;
        for (int j = 0; j < d; ++j) {
          const double lo = mesh.h() * mesh.site(s)[j], hi = lo + mesh.h(), w = xi[j];
          cell *= Complex(gk([w](double x) { return std::cos(w * x); }, lo, hi), -gk([w](double x) { return std::sin(w * x); }, lo, hi));
        }
        q += cell * f(s, 0);
      }
      q *= std::pow(2 * M_PI, -0.5 * d);
      quad_gap = std::max(quad_gap, std::abs(continuum_ft_of_step(f, xi)[0] - q));
    }
    const SpectralField u = dft(f);
    for (Eigen::Index k = 0; k < mesh.site_count(); ++k) {
      const Point xi = u.grid().frequency(k);
      Complex a = 1;
      for (int j = 0; j < d; ++j) a *= a_factor(mesh.h() * xi[j]);
      grid_gap = std::max(grid_gap, std::abs(continuum_ft_of_step(f, xi)[0] - a * u(k, 0)));
    }
  }
  return {quad_gap < 1e-8 && grid_gap < 1e-12, fmt("quadrature gap %.3g, on-grid gap %.3g", quad_gap, grid_gap)};
}

Verdict fw_certificate() {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-5, 5), mass(0, 5);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    const Complex zeta(u(rng), u(rng));
    const double m = mass(rng), mu = std::sqrt(std::norm(zeta) + m * m);
    const Mat2<double> U = fwt_unitary(zeta, m);
    Mat2<double> D = Mat2<double>::Zero();
    D(0, 0) = mu;
    D(1, 1) = -mu;
    worst = std::max(worst, (U.adjoint() * U - Mat2<double>::Identity()).norm());
    worst = std::max(worst, (U.adjoint() * hermitian_block(zeta, m) * U - D).norm() / std::max(1.0, mu));
  }
  return {worst < 1e-13, fmt("worst defect %.3g over 1000 draws", worst)};
}

Verdict free_resolvent() {
  Sweep s = default_sweep("resolve-free");
  s.floor_probe = false;
  const ConvergenceReport r = exp_resolvent_free(s);
  const Series& e = r.primary();
  const bool ok = e.strictly_decreasing && e.points.size() == 4 && e.points.back().error < e.points.front().error / 4;
  return {ok, fmt("error %.4g -> %.4g, slope %.4f", e.points.front().error, e.points.back().error, e.fit ? e.fit->slope : NAN)};
}

Verdict potential_dense() {
  const Mesh mesh(2, 0.5, 16);
  const LatticeField psi = random_field(mesh, 2, 9);
  double gap = 0;
  bool bound = true;
  for (const auto& [v, z] : {std::pair{PotentialSpec::hermitian(), Complex(0, 2)}, std::pair{PotentialSpec::non_hermitian(1.0), Complex(0, 3)}}) {
    ResolventQuery q;
    q.p = DiracParams(1.0, 0.5);
    q.z = z;
    const LatticeField u = resolvent_with_potential(psi, q, v);
    const Eigen::MatrixXcd A = dense_matrix(q.p, mesh, &v) - z * Eigen::MatrixXcd::Identity(2 * mesh.site_count(), 2 * mesh.site_count());
    gap = std::max(gap, (stacked(u) - A.partialPivLu().solve(stacked(psi))).cwiseAbs().maxCoeff());
    bound = bound && norm_l2(u) <= norm_l2(psi) / (std::abs(z.imag()) - v.skew_bound()) + 1e-12;
  }
  return {gap < 1e-8 && bound, fmt("max gap to dense LU %.3g, norm bound ", gap) + (bound ? "holds" : "violated")};
}

Verdict strip() {
  const StripReport r = spectra_strip_check(PotentialSpec::non_hermitian(1.0), DiracParams(1.0, 0.5), Mesh(2, 0.5, 16));
  const bool ok = r.max_abs_imag <= r.skew_bound + 1e-9;
  return {ok && r.passed, fmt("max |Im eig| %.6g, v_I %.6g", r.max_abs_imag, r.skew_bound)};
}

Verdict fourier_convergence() {
  Sweep s;
  s.floor_probe = false;
  const ConvergenceReport ft = exp_ft(s);
  Sweep is = default_sweep("ift");
  is.floor_probe = false;
  const ConvergenceReport ift = exp_ift(is);
  const auto& fit = ift.primary().fit;
  const double slope = fit ? fit->slope : NAN;
  const bool ok = ft.primary().strictly_decreasing && ift.primary().strictly_decreasing && fit && slope >= 0.8 && slope <= 1.2;
  return {ok, fmt("ft decreasing %.0f, ift decreasing %.0f, ift slope %.4f", ft.primary().strictly_decreasing,
                  ift.primary().strictly_decreasing, slope)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "oracle eigenvalue identity", 5, oracle_eigenvalues},
      {2, "spectrum endpoint", 5, spectrum_endpoint},
      {3, "omega certificate", 1, omega_certificate},
      {4, "unitarity, round trips, adjointness", 5, unitarity_and_projections},
      {5, "sampling rate", 10, sampling_rate},
      {6, "step-function transform", 10, step_transform},
      {7, "FW unitary certificate", 1, fw_certificate},
      {8, "free resolvent convergence", 60, free_resolvent},
      {9, "potential resolvent vs dense LU", 30, potential_dense},
      {10, "spectra strip", 10, strip},
      {11, "weighted FT and inverse FT convergence", 60, fourier_convergence},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = v.ok && in_time;
    failures += !pass;
    std::printf("[%s] %2d %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
