#include "lattice_dirac/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "quadrature.hpp"

namespace lattice_dirac {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(const Point& x, int dim) {
  if (x.size() != dim) {
    std::ostringstream os;
    os << "point has " << x.size() << " coordinates, expected " << dim;
    throw InvalidArgument(os.str());
  }
}

void require_same(const LatticeField& a, const LatticeField& b) {
  if (a.mesh() != b.mesh() || a.channels() != b.channels())
    throw MeshMismatch("fields live on different meshes or channel counts");
}

// Cell index along one axis for the half-open convention, robust to the
// rounding in x / h.
long axis_cell(double x, double h) {
  auto n = static_cast<long>(std::floor(x / h));
  if (h * static_cast<double>(n + 1) <= x) ++n;
  if (h * static_cast<double>(n) > x) --n;
  return n;
}

double wrap_periodic(double x, double period) {
  double r = std::fmod(x + 0.5 * period, period);
  if (r < 0) r += period;
  return r - 0.5 * period;
}

double bump_profile(double t, double radius, double alpha) {
  const double s = t / radius;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(alpha - alpha / (1.0 - s * s));
}

// Integrates g over cell `site` of `mesh` with a tensor Gauss rule, splitting
// each axis at `cuts[axis]`.
template <std::size_t P, class G>
auto integrate_cell(const Mesh& mesh, Eigen::Index site, const std::array<std::vector<double>, 2>& cuts,
                    G&& g) {
  const auto& rule = detail::GaussRule<P>::get();
  const double h = mesh.h();
  const Eigen::Array2i n = mesh.site(site);
  using R = decltype(g(Point()));
  R acc{};
  if (mesh.dim() == 1) {
    const double lo = h * n[0];
    for (auto [a, b] : detail::split_interval(lo, lo + h, cuts[0])) {
      const double c = 0.5 * (a + b), r = 0.5 * (b - a);
      for (std::size_t i = 0; i < P; ++i) acc += (r * rule.weights[i]) * g(make_point(c + r * rule.nodes[i]));
    }
    return acc;
  }
  const double lo0 = h * n[0], lo1 = h * n[1];
  const auto s0 = detail::split_interval(lo0, lo0 + h, cuts[0]);
  const auto s1 = detail::split_interval(lo1, lo1 + h, cuts[1]);
  for (auto [a0, b0] : s0) {
    const double c0 = 0.5 * (a0 + b0), r0 = 0.5 * (b0 - a0);
    for (auto [a1, b1] : s1) {
      const double c1 = 0.5 * (a1 + b1), r1 = 0.5 * (b1 - a1);
      for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = 0; j < P; ++j)
          acc += (r0 * r1 * rule.weights[i] * rule.weights[j]) *
                 g(make_point(c0 + r0 * rule.nodes[i], c1 + r1 * rule.nodes[j]));
    }
  }
  return acc;
}

std::array<std::vector<double>, 2> all_breakpoints(const ContinuumFunction& phi) {
  std::array<std::vector<double>, 2> cuts;
  for (int a = 0; a < phi.dim(); ++a) cuts[a] = phi.breakpoints(a);
  return cuts;
}

void require_mesh_dim(const ContinuumFunction& phi, const Mesh& mesh) {
  if (phi.dim() != mesh.dim()) throw MeshMismatch("function and mesh dimensions differ");
}

}  // namespace

Point make_point(double x) {
  Point p(1);
  p << x;
  return p;
}

Point make_point(double x0, double x1) {
  Point p(2);
  p << x0, x1;
  return p;
}

// ---------------------------------------------------------------- Mesh

Mesh::Mesh(int dim, double h, int sites_per_axis) : dim_(dim), h_(h), n_(sites_per_axis) {
  if (dim != 1 && dim != 2) throw InvalidArgument("mesh dimension must be 1 or 2");
  if (!(h > 0) || !std::isfinite(h)) throw InvalidArgument("mesh size h must be positive");
  if (sites_per_axis < 4 || sites_per_axis % 2 != 0)
    throw InvalidArgument("sites per axis must be even and at least 4");
  site_count_ = dim == 1 ? n_ : static_cast<Eigen::Index>(n_) * n_;
}

Mesh Mesh::from_box(int dim, double box_length, double h) {
  if (!(h > 0) || !(box_length > 0)) throw InvalidArgument("box length and h must be positive");
  const double ratio = box_length / h;
  const long n = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio || n % 2 != 0) {
    std::ostringstream os;
    os << "box length " << box_length << " is not an even multiple of h = " << h;
    throw InvalidArgument(os.str());
  }
  return Mesh(dim, h, static_cast<int>(n));
}

double Mesh::cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }

Eigen::Array2i Mesh::site(Eigen::Index linear) const {
  const int half = n_ / 2;
  if (dim_ == 1) return {static_cast<int>(linear) - half, 0};
  return {static_cast<int>(linear % n_) - half, static_cast<int>(linear / n_) - half};
}

Eigen::Index Mesh::linear(const Eigen::Array2i& n) const {
  const int half = n_ / 2;
  auto wrap = [&](int k) { return ((k + half) % n_ + n_) % n_; };
  if (dim_ == 1) return wrap(n[0]);
  return wrap(n[0]) + static_cast<Eigen::Index>(n_) * wrap(n[1]);
}

Point Mesh::position(Eigen::Index linear) const {
  const Eigen::Array2i n = site(linear);
  return dim_ == 1 ? make_point(h_ * n[0]) : make_point(h_ * n[0], h_ * n[1]);
}

bool Mesh::contains(const Point& x) const {
  if (x.size() != dim_) return false;
  const long half = n_ / 2;
  for (int j = 0; j < dim_; ++j) {
    if (!std::isfinite(x[j])) return false;
    const long k = axis_cell(x[j], h_);
    if (k < -half || k >= half) return false;
  }
  return true;
}

Eigen::Index Mesh::cell_of(const Point& x) const {
  require_dim(x, dim_);
  if (!contains(x)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") lies outside the box [-" << period() / 2 << ", "
       << period() / 2 << ")^" << dim_;
    throw OutOfDomain(os.str());
  }
  Eigen::Array2i n(0, 0);
  for (int j = 0; j < dim_; ++j) n[j] = static_cast<int>(axis_cell(x[j], h_));
  return linear(n);
}

bool Mesh::operator==(const Mesh& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && std::abs(h_ - other.h_) <= 1e-14 * h_;
}

// ---------------------------------------------------------------- LatticeField

LatticeField::LatticeField(Mesh mesh, int channels)
    : mesh_(mesh), values_(Eigen::MatrixXcd::Zero(mesh.site_count(), channels)) {
  if (channels < 1) throw InvalidArgument("a field needs at least one channel");
}

LatticeField::LatticeField(Mesh mesh, Eigen::MatrixXcd values) : mesh_(mesh), values_(std::move(values)) {
  if (values_.rows() != mesh_.site_count() || values_.cols() < 1)
    throw InvalidArgument("value array does not match the mesh");
  if (!values_.allFinite()) throw InvalidArgument("field values must be finite");
}

LatticeField operator+(const LatticeField& a, const LatticeField& b) {
  require_same(a, b);
  return LatticeField(a.mesh(), a.values() + b.values());
}

LatticeField operator-(const LatticeField& a, const LatticeField& b) {
  require_same(a, b);
  return LatticeField(a.mesh(), a.values() - b.values());
}

LatticeField operator*(Complex s, const LatticeField& a) { return LatticeField(a.mesh(), s * a.values()); }

// ---------------------------------------------------------------- ContinuumFunction

ContinuumFunction ContinuumFunction::constant(int dim, Complex value) {
  if (dim != 1 && dim != 2) throw InvalidArgument("dimension must be 1 or 2");
  return {dim, catalog::Constant{value}};
}

ContinuumFunction ContinuumFunction::gaussian(int dim, double a, const Point& center, Complex amplitude) {
  if (dim != 1 && dim != 2) throw InvalidArgument("dimension must be 1 or 2");
  if (!(a > 0)) throw InvalidArgument("gaussian width parameter must be positive");
  require_dim(center, dim);
  return {dim, catalog::Gaussian{a, center, amplitude}};
}

ContinuumFunction ContinuumFunction::gaussian_wave(int dim, double a, const Point& center,
                                                   const Point& wave_vector, Complex amplitude) {
  if (dim != 1 && dim != 2) throw InvalidArgument("dimension must be 1 or 2");
  if (!(a > 0)) throw InvalidArgument("gaussian width parameter must be positive");
  require_dim(center, dim);
  require_dim(wave_vector, dim);
  return {dim, catalog::GaussianWave{a, center, wave_vector, amplitude}};
}

ContinuumFunction ContinuumFunction::hat(double width) {
  if (!(width > 0)) throw InvalidArgument("hat width must be positive");
  return {1, catalog::Hat{width}};
}

ContinuumFunction ContinuumFunction::frequency_bump(int dim, double radius, double alpha) {
  if (dim != 1 && dim != 2) throw InvalidArgument("dimension must be 1 or 2");
  if (!(radius > 0) || !(alpha > 0)) throw InvalidArgument("bump radius and alpha must be positive");
  // Composite Gauss-Legendre on [0, radius]; the profile is even so the
  // inverse transform reduces to a cosine integral over the half line.
  constexpr int panels = 64;
  const auto& rule = detail::GaussRule<8>::get();
  auto table = std::make_shared<std::vector<std::array<double, 2>>>();
  table->reserve(panels * 8);
  const double width = radius / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = (p + 0.5) * width, r = 0.5 * width;
    for (std::size_t i = 0; i < 8; ++i) {
      const double t = c + r * rule.nodes[i];
      table->push_back({t, r * rule.weights[i] * bump_profile(t, radius, alpha)});
    }
  }
  return {dim, catalog::FrequencyBump{radius, alpha, std::move(table)}};
}

ContinuumFunction ContinuumFunction::step(const LatticeField& field, int channel) {
  if (channel < 0 || channel >= field.channels()) throw InvalidArgument("channel out of range");
  return {field.mesh().dim(), catalog::Step{std::make_shared<const LatticeField>(field), channel}};
}

ContinuumFunction ContinuumFunction::from_id(const std::string& id, int dim) {
  if (id == "constant") return constant(dim, 1.0);
  if (id == "gaussian") return gaussian(dim, 1.0);
  if (id == "gaussian-wave") {
    const Point k = dim == 1 ? make_point(1.0) : make_point(1.0, -0.5);
    return gaussian_wave(dim, 1.0, Point::Zero(dim), k);
  }
  if (id == "hat") {
    if (dim != 1) throw InvalidArgument("the hat function is one-dimensional");
    return hat(1.0);
  }
  if (id == "bump") return frequency_bump(dim, 4.0, 10.0);
  throw InvalidArgument("unknown test function id '" + id + "'");
}

Complex ContinuumFunction::operator()(const Point& x) const {
  require_dim(x, dim_);
  return std::visit(
      [&](const auto& e) -> Complex {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, catalog::Constant>) {
          return e.value;
        } else if constexpr (std::is_same_v<T, catalog::Gaussian>) {
          return e.amplitude * std::exp(-e.a * (x - e.center).squaredNorm());
        } else if constexpr (std::is_same_v<T, catalog::GaussianWave>) {
          return e.amplitude * std::exp(-e.a * (x - e.center).squaredNorm()) *
                 std::polar(1.0, e.wave_vector.dot(x));
        } else if constexpr (std::is_same_v<T, catalog::Hat>) {
          const double t = std::abs(x[0]);
          if (t <= e.width) return e.width;
          if (t < 2 * e.width) return 2 * e.width - t;
          return 0.0;
        } else if constexpr (std::is_same_v<T, catalog::FrequencyBump>) {
          double v = 1.0;
          for (int j = 0; j < dim_; ++j) v *= bump_profile(x[j], e.radius, e.alpha);
          return v;
        } else {
          const double period = e.field->mesh().period();
          Point y = x;
          for (int j = 0; j < dim_; ++j) y[j] = wrap_periodic(x[j], period);
          return evaluate_step(*e.field, y)[e.channel];
        }
      },
      entry_);
}

bool ContinuumFunction::has_fourier() const {
  return std::holds_alternative<catalog::Gaussian>(entry_) ||
         std::holds_alternative<catalog::GaussianWave>(entry_) || std::holds_alternative<catalog::Hat>(entry_);
}

Complex ContinuumFunction::fourier(const Point& xi) const {
  require_dim(xi, dim_);
  const double norm = std::pow(2.0 * kPi, -0.5 * dim_);
  if (const auto* g = std::get_if<catalog::Gaussian>(&entry_)) {
    return g->amplitude * std::pow(2.0 * g->a, -0.5 * dim_) * std::exp(-xi.squaredNorm() / (4.0 * g->a)) *
           std::polar(1.0, -g->center.dot(xi));
  }
  if (const auto* g = std::get_if<catalog::GaussianWave>(&entry_)) {
    const Point eta = xi - g->wave_vector;
    return g->amplitude * std::pow(2.0 * g->a, -0.5 * dim_) * std::exp(-eta.squaredNorm() / (4.0 * g->a)) *
           std::polar(1.0, -g->center.dot(eta));
  }
  if (const auto* hat = std::get_if<catalog::Hat>(&entry_)) {
    // Trapezoid = (box of half-width 3w/2) * (box of half-width w/2).
    const double a = 1.5 * hat->width, b = 0.5 * hat->width, t = xi[0];
    if (std::abs(t) * hat->width < 1e-4) return norm * 4.0 * a * b * (1.0 - (a * a + b * b) * t * t / 6.0);
    return norm * 4.0 * std::sin(a * t) * std::sin(b * t) / (t * t);
  }
  throw UnknownClosedForm("no closed-form Fourier transform for this catalog entry");
}

bool ContinuumFunction::has_inverse_fourier() const {
  return std::holds_alternative<catalog::FrequencyBump>(entry_);
}

Complex ContinuumFunction::inverse_fourier(const Point& x) const {
  require_dim(x, dim_);
  const auto* b = std::get_if<catalog::FrequencyBump>(&entry_);
  if (b == nullptr) throw UnknownClosedForm("no inverse Fourier transform for this catalog entry");
  double v = 1.0;
  for (int j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (const auto& [t, w] : *b->table) s += w * std::cos(x[j] * t);
    v *= 2.0 * s / std::sqrt(2.0 * kPi);
  }
  return v;
}

std::optional<double> ContinuumFunction::support_radius() const {
  if (const auto* b = std::get_if<catalog::FrequencyBump>(&entry_)) return b->radius;
  if (const auto* h = std::get_if<catalog::Hat>(&entry_)) return 2.0 * h->width;
  return std::nullopt;
}

std::vector<double> ContinuumFunction::breakpoints(int axis) const {
  if (axis < 0 || axis >= dim_) throw AxisOutOfRange("axis out of range");
  if (const auto* h = std::get_if<catalog::Hat>(&entry_)) {
    const double w = h->width;
    return {-2 * w, -w, w, 2 * w};
  }
  if (const auto* s = std::get_if<catalog::Step>(&entry_)) {
    const Mesh& m = s->field->mesh();
    std::vector<double> cuts(m.sites_per_axis() + 1);
    for (int i = 0; i <= m.sites_per_axis(); ++i) cuts[i] = m.h() * (i - m.sites_per_axis() / 2);
    return cuts;
  }
  if (const auto* b = std::get_if<catalog::FrequencyBump>(&entry_)) return {-b->radius, b->radius};
  return {};
}

double ContinuumFunction::sup_norm() const {
  return std::visit(
      [](const auto& e) -> double {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, catalog::Constant>) return std::abs(e.value);
        else if constexpr (std::is_same_v<T, catalog::Gaussian> || std::is_same_v<T, catalog::GaussianWave>)
          return std::abs(e.amplitude);
        else if constexpr (std::is_same_v<T, catalog::Hat>) return e.width;
        else if constexpr (std::is_same_v<T, catalog::FrequencyBump>) return 1.0;
        else return e.field->values().col(e.channel).cwiseAbs().maxCoeff();
      },
      entry_);
}

SpinorFunction gaussian_spinor() {
  return {ContinuumFunction::gaussian(2, 1.0),
          ContinuumFunction::gaussian_wave(2, 1.0, make_point(0.3, -0.2), make_point(1.0, -1.0), 0.5)};
}

// ---------------------------------------------------------------- grid operations

LatticeField sample(const ContinuumFunction& phi, const Mesh& mesh) {
  require_mesh_dim(phi, mesh);
  LatticeField f(mesh, 1);
  for (Eigen::Index s = 0; s < mesh.site_count(); ++s) f(s, 0) = phi(mesh.position(s));
  return f;
}

LatticeField sample(const SpinorFunction& phi, const Mesh& mesh) {
  LatticeField f(mesh, 2);
  for (int c = 0; c < 2; ++c) f.values().col(c) = sample(phi[c], mesh).values().col(0);
  return f;
}

LatticeField project(const ContinuumFunction& phi, const Mesh& mesh) {
  require_mesh_dim(phi, mesh);
  const auto cuts = all_breakpoints(phi);
  const double inv_vol = 1.0 / mesh.cell_volume();
  const double threshold = 1e-10 * std::max(1.0, phi.sup_norm());
  LatticeField f(mesh, 1);
  for (Eigen::Index s = 0; s < mesh.site_count(); ++s) {
    const Complex fine = integrate_cell<8>(mesh, s, cuts, phi) * inv_vol;
    const Complex coarse = integrate_cell<6>(mesh, s, cuts, phi) * inv_vol;
    const double estimate = std::abs(fine - coarse);
    if (estimate > threshold) {
      std::ostringstream os;
      os << "cell average at site " << mesh.site(s).transpose() << " did not converge (estimate "
         << estimate << ", threshold " << threshold << ")";
      throw QuadratureFailure(os.str(), estimate, threshold);
    }
    f(s, 0) = fine;
  }
  return f;
}

LatticeField project(const SpinorFunction& phi, const Mesh& mesh) {
  LatticeField f(mesh, 2);
  for (int c = 0; c < 2; ++c) f.values().col(c) = project(phi[c], mesh).values().col(0);
  return f;
}

double norm_l2(const LatticeField& f) {
  return std::sqrt(f.mesh().cell_volume() * f.values().squaredNorm());
}

Complex inner(const LatticeField& f, const LatticeField& g) {
  require_same(f, g);
  return f.mesh().cell_volume() * (f.values().array() * g.values().array().conjugate()).sum();
}

Eigen::VectorXcd evaluate_step(const LatticeField& f, const Point& x) {
  return f.values().row(f.mesh().cell_of(x)).transpose();
}

double distance_l2(const LatticeField& f, const ContinuumFunction& phi) {
  require_mesh_dim(phi, f.mesh());
  if (f.channels() != 1) throw MeshMismatch("scalar function against a multi-channel field");
  const auto cuts = all_breakpoints(phi);
  double total = 0.0;
  for (Eigen::Index s = 0; s < f.mesh().site_count(); ++s) {
    const Complex c = f(s, 0);
    total += integrate_cell<8>(f.mesh(), s, cuts, [&](const Point& x) { return std::norm(c - phi(x)); });
  }
  return std::sqrt(total);
}

double distance_l2(const LatticeField& f, const SpinorFunction& phi) {
  if (f.channels() != 2) throw MeshMismatch("spinor function against a field without two channels");
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double d = distance_l2(LatticeField(f.mesh(), f.values().col(c)), phi[c]);
    total += d * d;
  }
  return std::sqrt(total);
}

double weighted_sampling_error(const ContinuumFunction& phi, const Mesh& mesh, int k) {
  require_mesh_dim(phi, mesh);
  const auto& rule = detail::GaussRule<8>::get();
  const double h = mesh.h();
  double worst = 0.0;
  for (Eigen::Index s = 0; s < mesh.site_count(); ++s) {
    const Point corner = mesh.position(s);
    const Complex at_site = phi(corner);
    auto probe = [&](const Point& x) {
      const double weight = std::pow(1.0 + x.squaredNorm(), 0.5 * k);
      worst = std::max(worst, weight * std::abs(at_site - phi(x)));
    };
    for (std::size_t i = 0; i < 8; ++i) {
      const double x0 = corner[0] + 0.5 * h * (1.0 + rule.nodes[i]);
      if (mesh.dim() == 1) {
        probe(make_point(x0));
        continue;
      }
      for (std::size_t j = 0; j < 8; ++j) probe(make_point(x0, corner[1] + 0.5 * h * (1.0 + rule.nodes[j])));
    }
  }
  return worst / h;
}

}  // namespace lattice_dirac
