#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lattice_dirac/grid.hpp"

using namespace lattice_dirac;

namespace {

LatticeField random_field(const Mesh& mesh, int channels, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  LatticeField f(mesh, channels);
  for (Eigen::Index i = 0; i < f.values().size(); ++i) f.values().data()[i] = Complex(g(rng), g(rng));
  return f;
}

// (2 pi)^{-1/2} int e^{-i x xi} phi(x) dx by adaptive Gauss-Kronrod on [lo, hi].
Complex ft_1d(const ContinuumFunction& phi, double xi, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  auto part = [&](auto pick) {
    return gauss_kronrod<double, 61>::integrate(
        [&](double x) { return pick(phi(make_point(x)) * std::polar(1.0, -x * xi)); }, lo, hi, 6, 1e-13);
  };
  const double re = part([](Complex c) { return c.real(); });
  const double im = part([](Complex c) { return c.imag(); });
  return Complex(re, im) / std::sqrt(2 * M_PI);
}

}  // namespace

TEST_CASE("mesh rejects invalid geometry") {
  CHECK_THROWS_AS(Mesh(2, 0.5, 7), InvalidArgument);
  CHECK_THROWS_AS(Mesh(2, 0.5, 2), InvalidArgument);
  CHECK_THROWS_AS(Mesh(2, -0.5, 8), InvalidArgument);
  CHECK_THROWS_AS(Mesh(3, 0.5, 8), InvalidArgument);
  CHECK_THROWS_AS(Mesh::from_box(1, 10.0, 0.3), InvalidArgument);
  CHECK(Mesh::from_box(2, 12.8, 0.05).sites_per_axis() == 256);
}

TEST_CASE("cells tile the periodic box") {
  const Mesh mesh(2, 0.3, 10);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5 - 1e-12);
  for (int t = 0; t < 500; ++t) {
    const Point x = make_point(u(rng), u(rng));
    REQUIRE(mesh.contains(x));
    const Eigen::Array2i n = mesh.site(mesh.cell_of(x));
    for (int j = 0; j < 2; ++j) {
      CHECK(mesh.h() * n[j] <= x[j] + 1e-15);
      CHECK(x[j] < mesh.h() * (n[j] + 1));
    }
  }
  for (Eigen::Index i = 0; i < mesh.site_count(); ++i) CHECK(mesh.linear(mesh.site(i)) == i);
}

TEST_CASE("sampling evaluates at lattice sites") {
  const Mesh mesh(2, 0.5, 8);
  const LatticeField one = sample(ContinuumFunction::constant(2, 1.0), mesh);
  CHECK((one.values().array() - 1.0).abs().maxCoeff() == 0.0);
  const LatticeField g = sample(ContinuumFunction::gaussian(2, 1.0), mesh);
  CHECK(std::abs(g(mesh.linear({0, 0}), 0) - 1.0) < 1e-15);
  CHECK(std::abs(g(mesh.linear({1, 1}), 0) - std::exp(-0.5)) < 1e-15);
}

TEST_CASE("projection of a constant is the constant") {
  for (int d : {1, 2}) {
    const Mesh mesh(d, 0.4, 8);
    const LatticeField p = project(ContinuumFunction::constant(d, Complex(2.0, -1.0)), mesh);
    CHECK((p.values().array() - Complex(2.0, -1.0)).abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("hat function: projection values and orthogonal remainder") {
  const double h = 0.25;
  const Mesh mesh(1, h, 8);
  const ContinuumFunction hat = ContinuumFunction::hat(h);
  const LatticeField f = project(hat, mesh);
  // phi is linear on every cell here, so the cell average is the endpoint mean
  for (Eigen::Index i = 0; i < mesh.site_count(); ++i) {
    const double left = mesh.h() * mesh.site(i)[0];
    const double expected = 0.5 * (hat(make_point(left)).real() + hat(make_point(left + h)).real());
    CHECK(std::abs(f(i, 0) - expected) < 1e-14);
  }
  CHECK(std::abs(f(mesh.linear({-1, 0}), 0) - h) < 1e-14);
  CHECK(std::abs(f(mesh.linear({0, 0}), 0) - h) < 1e-14);
  CHECK(std::abs(f(mesh.linear({-2, 0}), 0) - h / 2) < 1e-14);
  CHECK(std::abs(f(mesh.linear({1, 0}), 0) - h / 2) < 1e-14);
  CHECK(std::abs(f(mesh.linear({2, 0}), 0)) < 1e-14);

  // g = phi - f_h is orthogonal to f_h: ||phi||^2 = ||f_h||^2 + ||g||^2
  const double phi_sq = 8.0 * h * h * h / 3.0;
  const double g = distance_l2(f, hat);
  CHECK(std::abs(phi_sq - norm_l2(f) * norm_l2(f) - g * g) < 1e-12);
  CHECK(std::abs(g - std::pow(h, 1.5) / std::sqrt(6.0)) < 1e-10);
}

TEST_CASE("projection recovers a step function") {
  const Mesh mesh(2, 0.5, 8);
  const LatticeField f = random_field(mesh, 1, 3);
  const LatticeField p = project(ContinuumFunction::step(f), mesh);
  CHECK((p.values() - f.values()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("norms: delta, isometry, inner product") {
  const Mesh mesh(2, 0.3, 8);
  LatticeField delta(mesh, 1);
  delta(mesh.linear({0, 0}), 0) = 1.0;
  CHECK(std::abs(norm_l2(delta) - 0.3) < 1e-15);
  for (int d : {1, 2}) {
    const Mesh m(d, 0.37, 12);
    const LatticeField f = random_field(m, 2, 11 + d);
    double l2 = 0;
    for (Eigen::Index i = 0; i < f.values().size(); ++i) l2 += std::norm(f.values().data()[i]);
    CHECK(std::abs(norm_l2(f) - std::pow(0.37, d / 2.0) * std::sqrt(l2)) < 1e-13);
    const Complex ff = inner(f, f);
    CHECK(std::abs(ff.imag()) < 1e-13);
    CHECK(std::abs(ff.real() - norm_l2(f) * norm_l2(f)) < 1e-12);
  }
  CHECK_THROWS_AS(inner(random_field(Mesh(2, 0.3, 8), 1, 1), random_field(Mesh(2, 0.3, 10), 1, 1)), MeshMismatch);
}

TEST_CASE("step evaluation uses half-open cells") {
  const double h = 0.5;
  const Mesh mesh(2, h, 8);
  LatticeField f(mesh, 1);
  f(mesh.linear({0, 0}), 0) = 5.0;
  f(mesh.linear({1, 0}), 0) = 7.0;
  CHECK(evaluate_step(f, make_point(h / 2, h / 2))[0] == Complex(5.0));
  CHECK(evaluate_step(f, make_point(h, 0.0))[0] == Complex(7.0));
  CHECK_THROWS_AS(evaluate_step(f, make_point(2.0, 0.0)), OutOfDomain);
  CHECK_THROWS_AS(evaluate_step(f, make_point(0.0, -2.1)), OutOfDomain);
  CHECK_NOTHROW(evaluate_step(f, make_point(-2.0, -2.0)));
}

TEST_CASE("closed-form transforms match a quadrature oracle") {
  const ContinuumFunction gauss = ContinuumFunction::gaussian(1, 0.7, make_point(0.3), Complex(1.0, 0.5));
  const ContinuumFunction wave = ContinuumFunction::gaussian_wave(1, 1.2, make_point(-0.4), make_point(1.5));
  const ContinuumFunction hat = ContinuumFunction::hat(0.8);
  for (double xi : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
    CHECK(std::abs(gauss.fourier(make_point(xi)) - ft_1d(gauss, xi, -12, 12)) < 1e-8);
    CHECK(std::abs(wave.fourier(make_point(xi)) - ft_1d(wave, xi, -12, 12)) < 1e-8);
    Complex h{};
    const double cuts[] = {-1.6, -0.8, 0.8, 1.6};
    for (int k = 0; k < 3; ++k) h += ft_1d(hat, xi, cuts[k], cuts[k + 1]);
    CHECK(std::abs(hat.fourier(make_point(xi)) - h) < 1e-8);
  }
  // two dimensions: the Gaussian transform factorizes over axes
  const ContinuumFunction g2 = ContinuumFunction::gaussian(2, 0.9, make_point(0.2, -0.5));
  const ContinuumFunction gx = ContinuumFunction::gaussian(1, 0.9, make_point(0.2));
  const ContinuumFunction gy = ContinuumFunction::gaussian(1, 0.9, make_point(-0.5));
  for (auto [a, b] : {std::pair{0.3, -1.1}, std::pair{2.0, 0.5}})
    CHECK(std::abs(g2.fourier(make_point(a, b)) - ft_1d(gx, a, -12, 12) * ft_1d(gy, b, -12, 12)) < 1e-8);
  CHECK_THROWS_AS(ContinuumFunction::constant(1, 1.0).fourier(make_point(0.0)), UnknownClosedForm);
}

TEST_CASE("weighted pointwise sampling error stays bounded under refinement") {
  const ContinuumFunction g = ContinuumFunction::gaussian(2, 1.0);
  std::vector<double> values;
  for (double h : {0.4, 0.2, 0.1, 0.05}) values.push_back(weighted_sampling_error(g, Mesh::from_box(2, 12.8, h), 2));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  CHECK(*hi / *lo < 2.0);
}

TEST_CASE("catalog ids") {
  CHECK_NOTHROW(ContinuumFunction::from_id("gaussian", 2));
  CHECK_NOTHROW(ContinuumFunction::from_id("bump", 1));
  CHECK_THROWS_AS(ContinuumFunction::from_id("hat", 2), InvalidArgument);
  CHECK_THROWS_AS(ContinuumFunction::from_id("nope", 1), InvalidArgument);
}
