#pragma once

#include <complex>

#include <Eigen/Core>

#include "lattice_dirac/grid.hpp"

namespace lattice_dirac {

/// Dual grid of a Mesh: xi_k = 2 pi k / L per axis with centered k,
/// all inside [-pi/h, pi/h). Linear indices follow the Mesh convention.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(const Mesh& mesh) : mesh_(mesh) {}

  const Mesh& mesh() const { return mesh_; }
  /// 2 pi / L
  double spacing() const;
  /// (2 pi / L)^d
  double cell_volume() const;
  /// pi / h, the half-width of the frequency box.
  double half_width() const;
  Point frequency(Eigen::Index linear) const;

  bool operator==(const FrequencyGrid& other) const { return mesh_ == other.mesh_; }
  bool operator!=(const FrequencyGrid& other) const { return !(*this == other); }

 private:
  Mesh mesh_;
};

/// C^c-valued samples on a FrequencyGrid, standing for a function supported
/// in the frequency box.
class SpectralField {
 public:
  SpectralField(FrequencyGrid grid, int channels);
  SpectralField(FrequencyGrid grid, Eigen::MatrixXcd values);

  const FrequencyGrid& grid() const { return grid_; }
  int channels() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXcd& values() const { return values_; }
  Eigen::MatrixXcd& values() { return values_; }

  Complex operator()(Eigen::Index k, int channel) const { return values_(k, channel); }
  Complex& operator()(Eigen::Index k, int channel) { return values_(k, channel); }

 private:
  FrequencyGrid grid_;
  Eigen::MatrixXcd values_;
};

/// Riemann-sum L^2 norm with cell volume (2 pi / L)^d.
double norm_l2(const SpectralField& u);

/// (2 pi)^{-d/2} h^d sum_n f(hn) e^{-i h n . xi_k}, by FFT.
SpectralField dft(const LatticeField& f);

/// Exact inverse of dft on the truncation:
/// (2 pi)^{-d/2} (2 pi / L)^d sum_k u(xi_k) e^{i h n . xi_k}.
LatticeField idft(const SpectralField& u);

/// a(theta) = (1 - e^{-i theta}) / (i theta), with a Taylor branch near 0.
Complex a_factor(double theta);

/// Continuum Fourier transform of the step function J_h f at any xi.
Eigen::VectorXcd continuum_ft_of_step(const LatticeField& f, const Point& xi);

/// Spectrum of P_h u on `coarse`, for u given by its samples `fine` on a
/// finer grid of the same period: aliases fine modes onto coarse ones with
/// the cell-average weights conj(a(h xi_j)).
SpectralField fold_spectrum(const SpectralField& fine, const Mesh& coarse);

/// Frequency samples of a function with a closed-form Fourier transform.
SpectralField closed_form_spectrum(const ContinuumFunction& phi, const FrequencyGrid& grid);

/// || <xi>^{-s} (F_h phi - F phi) ||_{L^2} with F_h phi = dft(project(phi)):
/// a Riemann sum over the frequency box plus the tail of the closed form
/// outside it, integrated adaptively.
double weighted_ft_error(const ContinuumFunction& phi, const Mesh& mesh, double s);

/// Only the tail part of weighted_ft_error.
double weighted_tail(const ContinuumFunction& phi, double half_width, double s);

/// || idft(u|grid) - (inverse transform of u) ||_{L^2(box)} for a frequency
/// bump u supported inside the frequency box of `mesh`.
double inverse_ft_error(const ContinuumFunction& u, const Mesh& mesh);

}  // namespace lattice_dirac
