#include "lattice_dirac/fourier.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/FFT>

#include "fft.hpp"
#include "quadrature.hpp"

namespace lattice_dirac {

namespace {

constexpr double kPi = std::numbers::pi;

double weight(const Point& xi, double s) { return std::pow(1.0 + xi.squaredNorm(), -s); }

template <class F>
double integrate_gk(F&& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  return GK::integrate(f, a, b, 15, 1e-12);
}

}  // namespace

namespace detail {

void centered_fft(Eigen::Ref<Eigen::VectorXcd> data, int dim, int n, bool inverse) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> in(n), out(n);
  const double half_sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
  auto line = [&](Complex* base, Eigen::Index stride) {
    for (int j = 0; j < n; ++j) in[j] = (j & 1) ? -base[j * stride] : base[j * stride];
    if (inverse)
      fft.inv(out, in);
    else
      fft.fwd(out, in);
    for (int q = 0; q < n; ++q) base[q * stride] = ((q & 1) ? -half_sign : half_sign) * out[q];
  };
  if (dim == 1) {
    line(data.data(), 1);
    return;
  }
  for (int r = 0; r < n; ++r) line(data.data() + static_cast<Eigen::Index>(r) * n, 1);
  for (int c = 0; c < n; ++c) line(data.data() + c, n);
}

}  // namespace detail

// ---------------------------------------------------------------- grids

double FrequencyGrid::spacing() const { return 2.0 * kPi / mesh_.period(); }

double FrequencyGrid::cell_volume() const { return std::pow(spacing(), mesh_.dim()); }

double FrequencyGrid::half_width() const { return kPi / mesh_.h(); }

Point FrequencyGrid::frequency(Eigen::Index linear) const { return mesh_.position(linear) * (spacing() / mesh_.h()); }

SpectralField::SpectralField(FrequencyGrid grid, int channels)
    : grid_(grid), values_(Eigen::MatrixXcd::Zero(grid.mesh().site_count(), channels)) {
  if (channels < 1) throw InvalidArgument("a field needs at least one channel");
}

SpectralField::SpectralField(FrequencyGrid grid, Eigen::MatrixXcd values) : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.mesh().site_count() || values_.cols() < 1)
    throw InvalidArgument("value array does not match the frequency grid");
}

double norm_l2(const SpectralField& u) { return std::sqrt(u.grid().cell_volume() * u.values().squaredNorm()); }

// ---------------------------------------------------------------- transforms

SpectralField dft(const LatticeField& f) {
  const Mesh& mesh = f.mesh();
  const double scale = std::pow(2.0 * kPi, -0.5 * mesh.dim()) * mesh.cell_volume();
  Eigen::MatrixXcd out = f.values();
  for (int c = 0; c < out.cols(); ++c) detail::centered_fft(out.col(c), mesh.dim(), mesh.sites_per_axis(), false);
  out *= scale;
  return SpectralField(FrequencyGrid(mesh), std::move(out));
}

LatticeField idft(const SpectralField& u) {
  const Mesh& mesh = u.grid().mesh();
  const double scale = std::pow(2.0 * kPi, -0.5 * mesh.dim()) * u.grid().cell_volume();
  Eigen::MatrixXcd out = u.values();
  for (int c = 0; c < out.cols(); ++c) detail::centered_fft(out.col(c), mesh.dim(), mesh.sites_per_axis(), true);
  out *= scale;
  return LatticeField(mesh, std::move(out));
}

Complex a_factor(double theta) {
  if (std::abs(theta) >= 1e-4) return (1.0 - std::polar(1.0, -theta)) / Complex(0.0, theta);
  // sum_{j=0}^{6} (-i theta)^j / (j+1)!
  const Complex x(0.0, -theta);
  Complex term = 1.0, sum = 1.0;
  for (int j = 1; j <= 6; ++j) {
    term *= x / static_cast<double>(j + 1);
    sum += term;
  }
  return sum;
}

Eigen::VectorXcd continuum_ft_of_step(const LatticeField& f, const Point& xi) {
  const Mesh& mesh = f.mesh();
  if (xi.size() != mesh.dim()) throw InvalidArgument("frequency dimension does not match the mesh");
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(f.channels());
  for (Eigen::Index s = 0; s < mesh.site_count(); ++s)
    acc += std::polar(1.0, -mesh.position(s).dot(xi)) * f.values().row(s).transpose();
  Complex factor = std::pow(2.0 * kPi, -0.5 * mesh.dim()) * mesh.cell_volume();
  for (int j = 0; j < mesh.dim(); ++j) factor *= a_factor(mesh.h() * xi[j]);
  return factor * acc;
}

SpectralField fold_spectrum(const SpectralField& fine, const Mesh& coarse) {
  const Mesh& fm = fine.grid().mesh();
  if (fm.dim() != coarse.dim() || fm.sites_per_axis() % coarse.sites_per_axis() != 0 ||
      std::abs(fm.period() - coarse.period()) > 1e-12 * coarse.period())
    throw MeshMismatch("fine grid is not a refinement of the coarse mesh over the same period");
  const FrequencyGrid cg(coarse);
  const int n = coarse.sites_per_axis(), half = n / 2;
  const double h = coarse.h();
  auto fold = [&](int k) { return ((k + half) % n + n) % n - half; };
  SpectralField out(cg, fine.channels());
  for (Eigen::Index k = 0; k < fm.site_count(); ++k) {
    const Eigen::Array2i kk = fm.site(k);
    const Point xi = fine.grid().frequency(k);
    Complex w = 1.0;
    for (int j = 0; j < coarse.dim(); ++j) w *= std::conj(a_factor(h * xi[j]));
    const Eigen::Index q = coarse.linear(Eigen::Array2i(fold(kk[0]), fold(kk[1])));
    out.values().row(q) += w * fine.values().row(k);
  }
  return out;
}

SpectralField closed_form_spectrum(const ContinuumFunction& phi, const FrequencyGrid& grid) {
  if (phi.dim() != grid.mesh().dim()) throw MeshMismatch("function and grid dimensions differ");
  SpectralField u(grid, 1);
  for (Eigen::Index k = 0; k < grid.mesh().site_count(); ++k) u(k, 0) = phi.fourier(grid.frequency(k));
  return u;
}

// ---------------------------------------------------------------- error functionals

double weighted_tail(const ContinuumFunction& phi, double c, double s) {
  const double inf = std::numeric_limits<double>::infinity();
  if (phi.dim() == 1) {
    auto g = [&](double t) {
      const Point xi = make_point(t);
      return weight(xi, s) * std::norm(phi.fourier(xi));
    };
    return integrate_gk(g, -inf, -c) + integrate_gk(g, c, inf);
  }
  auto g = [&](double a, double b) {
    const Point xi = make_point(a, b);
    return weight(xi, s) * std::norm(phi.fourier(xi));
  };
  auto full_line = [&](double a) { return integrate_gk([&](double b) { return g(a, b); }, -inf, inf); };
  auto outside = [&](double a) {
    auto gb = [&](double b) { return g(a, b); };
    return integrate_gk(gb, -inf, -c) + integrate_gk(gb, c, inf);
  };
  return integrate_gk(full_line, -inf, -c) + integrate_gk(full_line, c, inf) + integrate_gk(outside, -c, c);
}

double weighted_ft_error(const ContinuumFunction& phi, const Mesh& mesh, double s) {
  if (!phi.has_fourier()) throw UnknownClosedForm("weighted FT error needs a closed-form transform");
  if (!(s >= 0)) throw InvalidArgument("weight exponent s must be non-negative");
  const SpectralField discrete = dft(project(phi, mesh));
  const FrequencyGrid& grid = discrete.grid();
  double box = 0.0;
  for (Eigen::Index k = 0; k < mesh.site_count(); ++k) {
    const Point xi = grid.frequency(k);
    box += weight(xi, s) * std::norm(discrete(k, 0) - phi.fourier(xi));
  }
  box *= grid.cell_volume();
  return std::sqrt(box + weighted_tail(phi, grid.half_width(), s));
}

double inverse_ft_error(const ContinuumFunction& u, const Mesh& mesh) {
  const auto* bump = std::get_if<catalog::FrequencyBump>(&u.entry());
  if (bump == nullptr) throw UnknownClosedForm("inverse FT error needs a frequency bump");
  if (u.dim() != mesh.dim()) throw MeshMismatch("function and mesh dimensions differ");
  const FrequencyGrid grid(mesh);
  if (bump->radius > grid.half_width())
    throw SupportViolation("bump support exceeds the frequency box [-pi/h, pi/h]");

  SpectralField samples(grid, 1);
  for (Eigen::Index k = 0; k < mesh.site_count(); ++k) samples(k, 0) = u(grid.frequency(k));
  const LatticeField g = idft(samples);

  // The inverse transform is a product of one-dimensional factors, so it is
  // tabulated per axis at the Gauss nodes of every cell.
  const auto& rule = detail::GaussRule<8>::get();
  const ContinuumFunction axis_bump = ContinuumFunction::frequency_bump(1, bump->radius, bump->alpha);
  const int n = mesh.sites_per_axis();
  const double h = mesh.h();
  Eigen::MatrixXd table(8, n);
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < 8; ++q)
      table(q, i) = axis_bump.inverse_fourier(make_point(h * (i - n / 2) + 0.5 * h * (1.0 + rule.nodes[q]))).real();

  double total = 0.0;
  for (Eigen::Index s = 0; s < mesh.site_count(); ++s) {
    const Eigen::Array2i idx = mesh.site(s) + n / 2;
    const Complex v = g(s, 0);
    if (mesh.dim() == 1) {
      for (int q = 0; q < 8; ++q) total += 0.5 * h * rule.weights[q] * std::norm(v - table(q, idx[0]));
      continue;
    }
    for (int q = 0; q < 8; ++q)
      for (int r = 0; r < 8; ++r)
        total += 0.25 * h * h * rule.weights[q] * rule.weights[r] * std::norm(v - table(q, idx[0]) * table(r, idx[1]));
  }
  return std::sqrt(total);
}

}  // namespace lattice_dirac
