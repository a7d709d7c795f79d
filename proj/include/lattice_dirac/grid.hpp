#pragma once

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lattice_dirac/errors.hpp"

namespace lattice_dirac {

using Complex = std::complex<double>;

/// A point of R^d (d <= 2) stored without heap allocation.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

Point make_point(double x);
Point make_point(double x0, double x1);

/// Periodic square lattice h Z^d truncated to N sites per axis.
///
/// Sites carry centered indices n in {-N/2, ..., N/2-1}^d; site n owns the
/// half-open cell prod_j [h n_j, h (n_j + 1)). The cells tile the box
/// [-L/2, L/2)^d with L = N h. Linear site indices run with axis 0 fastest.
class Mesh {
 public:
  Mesh(int dim, double h, int sites_per_axis);

  /// Mesh of side `box_length` with spacing `h`; L/h must be an even integer.
  static Mesh from_box(int dim, double box_length, double h);

  int dim() const { return dim_; }
  double h() const { return h_; }
  int sites_per_axis() const { return n_; }
  double period() const { return n_ * h_; }
  Eigen::Index site_count() const { return site_count_; }
  double cell_volume() const;

  /// Centered multi-index of a linear site index.
  Eigen::Array2i site(Eigen::Index linear) const;
  /// Linear index of a centered multi-index; wraps periodically.
  Eigen::Index linear(const Eigen::Array2i& n) const;
  /// Lattice point h n (the lower corner of the cell).
  Point position(Eigen::Index linear) const;

  bool contains(const Point& x) const;
  /// Linear index of the cell containing x; throws OutOfDomain outside the box.
  Eigen::Index cell_of(const Point& x) const;

  bool operator==(const Mesh& other) const;
  bool operator!=(const Mesh& other) const { return !(*this == other); }

 private:
  int dim_;
  double h_;
  int n_;
  Eigen::Index site_count_;
};

/// C^c-valued function on the sites of a mesh, read both as an element of
/// l^2(Z_h^d)^c and as the step function J_h f in L^2(R^d)^c.
class LatticeField {
 public:
  LatticeField(Mesh mesh, int channels);
  LatticeField(Mesh mesh, Eigen::MatrixXcd values);

  const Mesh& mesh() const { return mesh_; }
  int channels() const { return static_cast<int>(values_.cols()); }

  /// Sites x channels, column-major: channel blocks are contiguous.
  const Eigen::MatrixXcd& values() const { return values_; }
  Eigen::MatrixXcd& values() { return values_; }

  Complex operator()(Eigen::Index site, int channel) const { return values_(site, channel); }
  Complex& operator()(Eigen::Index site, int channel) { return values_(site, channel); }

 private:
  Mesh mesh_;
  Eigen::MatrixXcd values_;
};

LatticeField operator+(const LatticeField& a, const LatticeField& b);
LatticeField operator-(const LatticeField& a, const LatticeField& b);
LatticeField operator*(Complex s, const LatticeField& a);

namespace catalog {

struct Constant {
  Complex value;
};

/// amplitude * exp(-a |x - center|^2)
struct Gaussian {
  double a;
  Point center;
  Complex amplitude{1.0, 0.0};
};

/// amplitude * exp(-a |x - center|^2) * exp(i k.x)
struct GaussianWave {
  double a;
  Point center;
  Point wave_vector;
  Complex amplitude{1.0, 0.0};
};

/// Piecewise-linear trapezoid on R with plateau `width` on [-width, width]
/// and linear ramps to zero at +-2 width.
struct Hat {
  double width;
};

/// Smooth compactly supported bump prod_j b(xi_j) with
/// b(t) = exp(alpha - alpha / (1 - (t/radius)^2)) for |t| < radius.
/// Its inverse Fourier transform is tabulated by composite Gauss-Legendre.
struct FrequencyBump {
  double radius;
  double alpha;
  std::shared_ptr<const std::vector<std::array<double, 2>>> table;  // (node, weight * b(node))
};

struct Step {
  std::shared_ptr<const LatticeField> field;
  int channel;
};

}  // namespace catalog

/// Closed-form test function R^d -> C, optionally with a closed-form
/// Fourier transform (2 pi)^{-d/2} int e^{-i x.xi} phi(x) dx.
class ContinuumFunction {
 public:
  using Variant = std::variant<catalog::Constant, catalog::Gaussian, catalog::GaussianWave,
                               catalog::Hat, catalog::FrequencyBump, catalog::Step>;

  static ContinuumFunction constant(int dim, Complex value);
  static ContinuumFunction gaussian(int dim, double a, const Point& center, Complex amplitude = 1.0);
  static ContinuumFunction gaussian(int dim, double a) { return gaussian(dim, a, Point::Zero(dim)); }
  static ContinuumFunction gaussian_wave(int dim, double a, const Point& center,
                                         const Point& wave_vector, Complex amplitude = 1.0);
  static ContinuumFunction hat(double width);
  static ContinuumFunction frequency_bump(int dim, double radius, double alpha = 10.0);
  static ContinuumFunction step(const LatticeField& field, int channel = 0);

  /// Catalog lookup by id: constant, gaussian, gaussian-wave, hat, bump.
  static ContinuumFunction from_id(const std::string& id, int dim);

  int dim() const { return dim_; }
  const Variant& entry() const { return entry_; }

  Complex operator()(const Point& x) const;

  bool has_fourier() const;
  /// Closed-form Fourier transform; throws UnknownClosedForm when absent.
  Complex fourier(const Point& xi) const;

  bool has_inverse_fourier() const;
  /// (2 pi)^{-d/2} int e^{i x.xi} phi(xi) d xi; throws UnknownClosedForm when absent.
  Complex inverse_fourier(const Point& x) const;

  /// Sup-norm radius |xi|_inf of the support, for compactly supported entries.
  std::optional<double> support_radius() const;

  /// Sorted coordinates along `axis` where the function has kinks or jumps.
  std::vector<double> breakpoints(int axis) const;

  double sup_norm() const;

 private:
  ContinuumFunction(int dim, Variant entry) : dim_(dim), entry_(std::move(entry)) {}

  int dim_;
  Variant entry_;
};

using SpinorFunction = std::array<ContinuumFunction, 2>;

/// Gaussian spinor used by the resolvent experiments.
SpinorFunction gaussian_spinor();

/// phi_h: values phi(h n) at every site.
LatticeField sample(const ContinuumFunction& phi, const Mesh& mesh);
LatticeField sample(const SpinorFunction& phi, const Mesh& mesh);

/// P_h phi: cell averages by 8-point tensor Gauss-Legendre per cell, split at
/// the function's breakpoints. Throws QuadratureFailure when the difference
/// against a 6-point rule exceeds 1e-10 * max(1, sup|phi|).
LatticeField project(const ContinuumFunction& phi, const Mesh& mesh);
LatticeField project(const SpinorFunction& phi, const Mesh& mesh);

/// L^2(R^d) norm of the step function J_h f: (h^d sum |f|^2)^{1/2}.
double norm_l2(const LatticeField& f);
/// h^d sum_n f(hn) conj(g(hn)) summed over channels.
Complex inner(const LatticeField& f, const LatticeField& g);

/// Value of J_h f at x (half-open cells).
Eigen::VectorXcd evaluate_step(const LatticeField& f, const Point& x);

/// ||J_h f - phi||_{L^2(box)} by per-cell Gauss-Legendre.
double distance_l2(const LatticeField& f, const ContinuumFunction& phi);
double distance_l2(const LatticeField& f, const SpinorFunction& phi);

/// max over quadrature nodes of <x>^k |phi_h(x) - phi(x)| / h.
double weighted_sampling_error(const ContinuumFunction& phi, const Mesh& mesh, int k);

}  // namespace lattice_dirac
