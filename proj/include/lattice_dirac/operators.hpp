#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lattice_dirac/fourier.hpp"
#include "lattice_dirac/grid.hpp"
#include "lattice_dirac/symbols.hpp"

namespace lattice_dirac {

using Mat2d = Mat2<double>;

/// (f(h(n + e_j)) - f(hn)) / h with periodic wrap.
LatticeField diff_forward(const LatticeField& f, int axis);
/// Adjoint of diff_forward: (f(h(n - e_j)) - f(hn)) / h.
LatticeField diff_backward(const LatticeField& f, int axis);

/// Bounded, uniformly continuous 2x2 matrix field on R^2:
/// V(x) = base + exp(-width |x - center|^2) * envelope.
class PotentialSpec {
 public:
  static PotentialSpec zero();
  static PotentialSpec constant(const Mat2d& value);
  static PotentialSpec gaussian(const Mat2d& envelope, double width, const Point& center);
  /// Gaussian-enveloped Hermitian matrix.
  static PotentialSpec hermitian();
  /// Hermitian part as in hermitian() plus i skew * diag(1, -1) under the
  /// same envelope, so sup ||V_I|| = skew.
  static PotentialSpec non_hermitian(double skew = 1.0);
  /// Catalog ids: zero, constant, hermitian, non-hermitian.
  static PotentialSpec from_id(const std::string& id);

  Mat2d operator()(const Point& x) const;
  /// (V + V^*) / 2 and (V - V^*) / 2i at x.
  Mat2d hermitian_part(const Point& x) const;
  Mat2d skew_part(const Point& x) const;

  /// Declared bounds: sup ||V(x)|| and v_I = sup ||V_I(x)||.
  double sup_norm() const { return sup_norm_; }
  double skew_bound() const { return skew_bound_; }
  bool is_hermitian() const { return skew_bound_ == 0.0; }

 private:
  PotentialSpec(Mat2d base, Mat2d envelope, double width, Point center);

  Mat2d base_;
  Mat2d envelope_;
  double width_;
  Point center_;
  double sup_norm_;
  double skew_bound_;
};

/// V_h: the potential sampled at the lattice points hn, stored as four
/// site-indexed columns (00, 10, 01, 11).
class SampledPotential {
 public:
  SampledPotential(const PotentialSpec& v, const Mesh& mesh);

  const Mesh& mesh() const { return mesh_; }
  /// V_h psi, site by site.
  LatticeField apply(const LatticeField& psi) const;
  /// max over sites of ||V_h(hn)|| and ||V_{I,h}(hn)||.
  double sup_norm() const;
  double skew_sup() const;
  Mat2d at(Eigen::Index site) const;

 private:
  Mesh mesh_;
  Eigen::MatrixXcd entries_;
};

enum class ApplyPath { stencil, symbol };

/// D_{m,h} psi (+ V_h psi).
LatticeField apply_dirac(const LatticeField& psi, const DiracParams& p, const PotentialSpec* v = nullptr,
                         ApplyPath path = ApplyPath::stencil);

/// Pointwise 2x2 multiplier on a frequency grid; the building block of every
/// resolvent below.
class FourierMultiplier {
 public:
  /// (D_{m,h}(xi_k) - z)^{-1} on the grid of `mesh`.
  static FourierMultiplier discrete_resolvent(const Mesh& mesh, double m, Complex z);
  /// (D_m(xi_k) - z)^{-1} with the continuum symbol, a pseudo-spectral resolvent.
  static FourierMultiplier continuum_resolvent(const Mesh& mesh, double m, Complex z);
  static FourierMultiplier discrete_symbol(const Mesh& mesh, double m);

  const Mesh& mesh() const { return mesh_; }
  SpectralField apply(const SpectralField& u) const;
  LatticeField apply(const LatticeField& psi) const { return idft(apply(dft(psi))); }

 private:
  explicit FourierMultiplier(const Mesh& mesh);
  Mesh mesh_;
  Eigen::MatrixXcd entries_;  // sites x 4, column-major 2x2 blocks
};

enum class SolverPolicy { automatic, neumann, krylov, dense };

const char* to_string(SolverPolicy p);

struct ResolventQuery {
  Complex z{0.0, 2.0};
  DiracParams p{};
  SolverPolicy policy = SolverPolicy::automatic;
  double tolerance = 1e-10;
  int max_iterations = 2000;
  int restart = 50;
};

/// (D_{m,h} - z)^{-1} psi by closed-form inversion of the symbol.
LatticeField resolvent_free(const LatticeField& psi, const ResolventQuery& q);

/// (D_m - z)^{-1} psi pseudo-spectrally on the mesh of psi.
LatticeField resolvent_pseudospectral(const LatticeField& psi, Complex z, double m);

struct PotentialSolve {
  LatticeField u;
  int iterations = 0;
  double residual = 0.0;
  SolverPolicy used = SolverPolicy::automatic;
};

/// Solves (D_{m,h} + V_h - z) u = psi through u = R_z w, (I + V_h R_z) w = psi.
PotentialSolve resolvent_with_potential_detailed(const LatticeField& psi, const ResolventQuery& q,
                                                 const PotentialSpec& v);
LatticeField resolvent_with_potential(const LatticeField& psi, const ResolventQuery& q, const PotentialSpec& v);

/// Continuum solution represented by its spectrum on a fine reference grid.
struct ContinuumSolution {
  SpectralField spectrum;
  /// L^2 norm over the box.
  double norm;
  /// P_h u on a coarser mesh of the same period, exact in the spectral representation.
  LatticeField project_to(const Mesh& mesh) const;
};

/// (D_m - z)^{-1} phi on `reference`, using closed-form transforms of phi when available.
ContinuumSolution continuum_resolvent(const SpinorFunction& phi, Complex z, double m, const Mesh& reference);

/// (D_m + V - z)^{-1} phi by collocation on `reference` with V sampled there.
ContinuumSolution continuum_resolvent(const SpinorFunction& phi, Complex z, double m, const PotentialSpec& v,
                                      const Mesh& reference, double tolerance = 1e-10);

/// P_h (D_m - z)^{-1} phi on `mesh`, computed on a grid `refine` times finer.
LatticeField resolvent_continuum(const SpinorFunction& phi, Complex z, double m, const Mesh& mesh, int refine = 8);

/// Explicit (2 N^d) x (2 N^d) matrix of D_{m,h} + V_h; rows are channel-major
/// (index channel * N^d + site). Requires N <= 32.
Eigen::MatrixXcd dense_matrix(const DiracParams& p, const Mesh& mesh, const PotentialSpec* v = nullptr);

struct StripReport {
  Eigen::VectorXcd eigenvalues;
  double max_abs_imag = 0.0;
  double skew_bound = 0.0;
  bool passed = false;
};

/// All eigenvalues of dense_matrix(p, mesh, &v) and whether |Im| <= v_I + 1e-9.
StripReport spectra_strip_check(const PotentialSpec& v, const DiracParams& p, const Mesh& mesh);

}  // namespace lattice_dirac
