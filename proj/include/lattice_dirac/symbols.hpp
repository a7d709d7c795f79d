#pragma once

// Closed-form 2x2 symbol algebra for the lattice Dirac operator in d = 2.
// Everything here is header-only and templated on the real scalar.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "lattice_dirac/errors.hpp"

namespace lattice_dirac {

template <class S>
using Mat2 = Eigen::Matrix<std::complex<S>, 2, 2>;

template <class S>
using Vec2 = Eigen::Matrix<S, 2, 1>;

template <class S>
struct BasicDiracParams {
  S m{1};
  S h{1};

  BasicDiracParams() = default;
  BasicDiracParams(S mass, S mesh) : m(mass), h(mesh) {
    if (!(m >= 0)) throw InvalidArgument("mass must be non-negative");
    if (!(h > 0)) throw InvalidArgument("mesh size must be positive");
  }
};

using DiracParams = BasicDiracParams<double>;

namespace pauli {

template <class S = double>
Mat2<S> identity() {
  return Mat2<S>::Identity();
}

template <class S = double>
Mat2<S> sigma1() {
  Mat2<S> s;
  s << 0, 1, 1, 0;
  return s;
}

template <class S = double>
Mat2<S> sigma2() {
  using C = std::complex<S>;
  Mat2<S> s;
  s << C(0), C(0, -1), C(0, 1), C(0);
  return s;
}

template <class S = double>
Mat2<S> sigma3() {
  Mat2<S> s;
  s << 1, 0, 0, -1;
  return s;
}

}  // namespace pauli

/// Operator 2-norm of a 2x2 matrix.
template <class S>
S norm2(const Mat2<S>& A) {
  using std::sqrt;
  const Mat2<S> B = A.adjoint() * A;
  const S half_tr = S(0.5) * (B(0, 0).real() + B(1, 1).real());
  const S det = (B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0)).real();
  return sqrt(half_tr + sqrt(std::max(S(0), half_tr * half_tr - det)));
}

// ---------------------------------------------------------------- omega

/// Lattice dispersion 2(1 - cos x1)(1 + sin x2) + 2(1 - cos x2)(1 - sin x1).
template <class Derived>
typename Derived::Scalar omega(const Eigen::MatrixBase<Derived>& xi) {
  using std::cos;
  using std::sin;
  const auto a = xi(0), b = xi(1);
  return 2 * (1 - cos(a)) * (1 + sin(b)) + 2 * (1 - cos(b)) * (1 - sin(a));
}

/// Expanded trigonometric form of omega.
template <class Derived>
typename Derived::Scalar omega_trig(const Eigen::MatrixBase<Derived>& xi) {
  using std::cos;
  using std::sin;
  const auto a = xi(0), b = xi(1);
  return 4 + 2 * sin(a - b) - 2 * (sin(a) + cos(a)) + 2 * (sin(b) - cos(b));
}

template <class Derived>
Vec2<typename Derived::Scalar> omega_gradient(const Eigen::MatrixBase<Derived>& xi) {
  using std::cos;
  using std::sin;
  const auto a = xi(0), b = xi(1);
  const auto c = 2 * cos(a - b);
  return {c - 2 * (cos(a) - sin(a)), -c + 2 * (cos(b) + sin(b))};
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 2> omega_hessian(const Eigen::MatrixBase<Derived>& xi) {
  using std::cos;
  using std::sin;
  const auto a = xi(0), b = xi(1);
  const auto s = 2 * sin(a - b);
  Eigen::Matrix<typename Derived::Scalar, 2, 2> H;
  H << -s + 2 * (sin(a) + cos(a)), s, s, -s + 2 * (cos(b) - sin(b));
  return H;
}

enum class CriticalKind { min, max, saddle };

inline const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::min: return "min";
    case CriticalKind::max: return "max";
    default: return "saddle";
  }
}

template <class S>
struct BasicCriticalPoint {
  Vec2<S> location;
  CriticalKind kind;
  S value;
};

using CriticalPoint = BasicCriticalPoint<double>;

/// Classification from the Hessian signature at a stationary point.
template <class S>
CriticalKind classify(const Vec2<S>& xi) {
  const auto H = omega_hessian(xi);
  const S det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0), tr = H.trace();
  if (det < 0) return CriticalKind::saddle;
  return tr > 0 ? CriticalKind::min : CriticalKind::max;
}

/// The six stationary points of omega on the unit torus.
template <class S = double>
std::array<BasicCriticalPoint<S>, 6> critical_points() {
  const S pi = std::numbers::pi_v<S>;
  const std::array<std::pair<Vec2<S>, CriticalKind>, 6> table{{
      {{0, 0}, CriticalKind::min},
      {{pi / 2, -pi / 2}, CriticalKind::min},
      {{-3 * pi / 4, 3 * pi / 4}, CriticalKind::max},
      {{pi / 4, -pi / 4}, CriticalKind::saddle},
      {{pi / 4, 3 * pi / 4}, CriticalKind::saddle},
      {{-3 * pi / 4, -pi / 4}, CriticalKind::saddle},
  }};
  std::array<BasicCriticalPoint<S>, 6> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& [x, kind] = table[i];
    // central differences, independent of omega_gradient
    const S d = S(1e-6);
    const Vec2<S> e0(d, 0), e1(0, d);
    const Vec2<S> g((omega(x + e0) - omega(x - e0)) / (2 * d), (omega(x + e1) - omega(x - e1)) / (2 * d));
    if (g.norm() > S(1e-8) || classify<S>(x) != kind)
      throw Error("critical point table failed its runtime check");
    out[i] = {x, kind, omega(x)};
  }
  return out;
}

// ---------------------------------------------------------------- symbols

/// lambda_{m,h}(xi) = sqrt(h^-2 omega(h xi) + m^2).
template <class Derived, class S = typename Derived::Scalar>
S lambda_mh(const Eigen::MatrixBase<Derived>& xi, const BasicDiracParams<S>& p) {
  using std::sqrt;
  const Vec2<S> hx = p.h * xi;
  return sqrt(omega(hx) / (p.h * p.h) + p.m * p.m);
}

/// Lower-left entry of the continuum symbol, xi1 + i xi2.
template <class Derived>
std::complex<typename Derived::Scalar> zeta_continuum(const Eigen::MatrixBase<Derived>& xi) {
  return {xi(0), xi(1)};
}

/// Lower-left entry of the lattice symbol, [-i(e^{ih xi1} - 1) + (e^{ih xi2} - 1)] / h.
template <class Derived, class S = typename Derived::Scalar>
std::complex<S> zeta_discrete(const Eigen::MatrixBase<Derived>& xi, S h) {
  using C = std::complex<S>;
  const C e1 = std::polar(S(1), h * xi(0)) - S(1);
  const C e2 = std::polar(S(1), h * xi(1)) - S(1);
  return (C(0, -1) * e1 + e2) / h;
}

/// [[m, conj zeta], [zeta, -m]]
template <class S>
Mat2<S> hermitian_block(std::complex<S> zeta, S m) {
  Mat2<S> M;
  M << m, std::conj(zeta), zeta, -m;
  return M;
}

template <class Derived, class S = typename Derived::Scalar>
Mat2<S> symbol_continuum(const Eigen::MatrixBase<Derived>& xi, S m) {
  return hermitian_block(zeta_continuum(xi), m);
}

template <class Derived, class S = typename Derived::Scalar>
Mat2<S> symbol_discrete(const Eigen::MatrixBase<Derived>& xi, const BasicDiracParams<S>& p) {
  return hermitian_block(zeta_discrete(xi, p.h), p.m);
}

/// Foldy-Wouthuysen unitary: U^* [[m, conj z], [z, -m]] U = diag(mu, -mu).
template <class S>
Mat2<S> fwt_unitary(std::complex<S> zeta, S m) {
  using std::sqrt;
  const S mu = sqrt(std::norm(zeta) + m * m);
  const S q = mu * mu + m * mu;
  if (!(q >= S(1e-300))) throw DegenerateInput("FW unitary undefined at m = 0, zeta = 0");
  Mat2<S> U;
  U << mu + m, -std::conj(zeta), zeta, mu + m;
  return U / (sqrt(S(2)) * sqrt(q));
}

/// (hermitian_block(zeta, m) - z)^{-1} through the FW diagonalization. At the
/// Dirac point (m = 0, zeta = 0) the block vanishes and the inverse is -1/z.
template <class S>
Mat2<S> block_resolvent(std::complex<S> zeta, S m, std::complex<S> z) {
  using std::sqrt;
  const S mu = sqrt(std::norm(zeta) + m * m);
  if (mu * mu + m * mu < S(1e-300)) return Mat2<S>::Identity() * (S(-1) / z);
  const Mat2<S> U = fwt_unitary(zeta, m);
  Eigen::Matrix<std::complex<S>, 2, 1> d(S(1) / (mu - z), S(1) / (-mu - z));
  return U * d.asDiagonal() * U.adjoint();
}

template <class S>
struct BasicBands {
  std::array<S, 2> lower;
  std::array<S, 2> upper;
};

using Bands = BasicBands<double>;

/// [-sqrt(h^-2 (6 + 4 sqrt 2) + m^2), -m] u [m, sqrt(h^-2 (6 + 4 sqrt 2) + m^2)]
template <class S>
BasicBands<S> spectrum_bounds(const BasicDiracParams<S>& p) {
  using std::sqrt;
  const S top = sqrt((6 + 4 * sqrt(S(2))) / (p.h * p.h) + p.m * p.m);
  return {{-top, -p.m}, {p.m, top}};
}

/// Bound on the norm of (symbol_discrete(xi) - z)^{-1}. With eps > 0 the
/// sharper 2h / sqrt(eps) is used where omega(h xi) >= eps and h < sqrt(eps) / (2 |Re z|).
template <class Derived, class S = typename Derived::Scalar>
S resolvent_norm_bound(std::complex<S> z, const Eigen::MatrixBase<Derived>& xi, const BasicDiracParams<S>& p,
                       S eps = 0) {
  using std::abs;
  using std::sqrt;
  if (z.imag() == 0) throw RealShift("resolvent bound requested at a real shift");
  const S base = 1 / abs(z.imag());
  if (eps == 0) return base;
  const S pi = std::numbers::pi_v<S>;
  if (!(eps > 0 && eps < pi * pi / 128)) throw InvalidArgument("eps must lie in (0, pi^2/128)");
  const Vec2<S> hx = p.h * xi;
  const bool in_region = omega(hx) >= eps && (z.real() == 0 || p.h < sqrt(eps) / (2 * abs(z.real())));
  return in_region ? std::min(base, 2 * p.h / sqrt(eps)) : base;
}

}  // namespace lattice_dirac
