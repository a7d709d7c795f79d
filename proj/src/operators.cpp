#include "lattice_dirac/operators.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/LU>
#include <unsupported/Eigen/IterativeSolvers>

namespace lattice_dirac {
namespace detail {
class FixedPointOperator;
}
}  // namespace lattice_dirac

// Matrix-free wrapper so Eigen's GMRES can drive w -> w + V_h R_z w.
namespace Eigen::internal {
template <>
struct traits<lattice_dirac::detail::FixedPointOperator>
    : public Eigen::internal::traits<Eigen::SparseMatrix<std::complex<double>>> {};
}  // namespace Eigen::internal

namespace lattice_dirac::detail {

class FixedPointOperator : public Eigen::EigenBase<FixedPointOperator> {
 public:
  using Scalar = std::complex<double>;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  FixedPointOperator(const FourierMultiplier& r, const SampledPotential& v) : r_(&r), v_(&v) {}

  Eigen::Index rows() const { return 2 * r_->mesh().site_count(); }
  Eigen::Index cols() const { return rows(); }

  template <class Rhs>
  Eigen::Product<FixedPointOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<FixedPointOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    const Eigen::Index n = r_->mesh().site_count();
    LatticeField w(r_->mesh(), Eigen::Map<const Eigen::MatrixXcd>(x.data(), n, 2));
    LatticeField out = w + v_->apply(r_->apply(w));
    return Eigen::Map<const Eigen::VectorXcd>(out.values().data(), 2 * n);
  }

 private:
  const FourierMultiplier* r_;
  const SampledPotential* v_;
};

}  // namespace lattice_dirac::detail

namespace Eigen::internal {
template <class Rhs>
struct generic_product_impl<lattice_dirac::detail::FixedPointOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<lattice_dirac::detail::FixedPointOperator, Rhs,
                                generic_product_impl<lattice_dirac::detail::FixedPointOperator, Rhs>> {
  using Scalar = typename Product<lattice_dirac::detail::FixedPointOperator, Rhs>::Scalar;

  template <class Dest>
  static void scaleAndAddTo(Dest& dst, const lattice_dirac::detail::FixedPointOperator& lhs, const Rhs& rhs,
                            const Scalar& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace lattice_dirac {

namespace {

void require_axis(const LatticeField& f, int axis) {
  if (axis < 0 || axis >= f.mesh().dim()) {
    std::ostringstream os;
    os << "axis " << axis << " out of range for a " << f.mesh().dim() << "-dimensional mesh";
    throw AxisOutOfRange(os.str());
  }
}

void require_spinor(const LatticeField& psi) {
  if (psi.channels() != 2) throw MeshMismatch("expected a two-channel spinor field");
  if (psi.mesh().dim() != 2) throw MeshMismatch("the Dirac operator lives on a two-dimensional mesh");
}

void require_params(const LatticeField& psi, const DiracParams& p) {
  require_spinor(psi);
  if (std::abs(psi.mesh().h() - p.h) > 1e-14 * p.h) throw MeshMismatch("DiracParams.h differs from the mesh size");
}

void require_nonreal(Complex z) {
  if (z.imag() == 0.0) throw RealShift("resolvent requested at a real spectral parameter");
}

void require_region(Complex z, const PotentialSpec& v) {
  const double vi = v.skew_bound();
  if (!(std::abs(z.imag()) > vi + 1e-12)) {
    std::ostringstream os;
    os << "|Im z| = " << std::abs(z.imag()) << " does not exceed the skew bound " << vi;
    throw NotInResolventRegion(os.str(), std::abs(z.imag()), vi);
  }
}

LatticeField shift_difference(const LatticeField& f, int axis, int step) {
  const Mesh& mesh = f.mesh();
  Eigen::Array2i e(0, 0);
  e[axis] = step;
  LatticeField out(mesh, f.channels());
  const double inv_h = 1.0 / mesh.h();
  for (Eigen::Index s = 0; s < mesh.site_count(); ++s) {
    const Eigen::Index t = mesh.linear(mesh.site(s) + e);
    out.values().row(s) = (f.values().row(t) - f.values().row(s)) * inv_h;
  }
  return out;
}

Mat2d hermitian_of(const Mat2d& a) { return 0.5 * (a + a.adjoint()); }
Mat2d skew_of(const Mat2d& a) { return (a - a.adjoint()) / Complex(0.0, 2.0); }

struct FactorizedResult {
  LatticeField u;
  int iterations;
  double residual;
  SolverPolicy used;
};

// u = R w with (I + V R) w = psi.
FactorizedResult solve_factorized(const LatticeField& psi, const FourierMultiplier& r, const SampledPotential& vh,
                                  Complex z, double sup_norm, SolverPolicy policy, double tol, int max_iterations,
                                  int restart) {
  if (policy == SolverPolicy::automatic)
    policy = sup_norm / std::abs(z.imag()) <= 0.9 ? SolverPolicy::neumann : SolverPolicy::krylov;
  const double psi_norm = psi.values().norm();
  if (psi_norm == 0.0) return {LatticeField(psi.mesh(), 2), 0, 0.0, policy};

  if (policy == SolverPolicy::neumann) {
    LatticeField w = psi;
    double rel = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
      LatticeField rw = r.apply(w);
      LatticeField next = psi - vh.apply(rw);
      rel = (w.values() - next.values()).norm() / psi_norm;  // residual of the current w
      if (rel <= tol) return {std::move(rw), it, rel, policy};
      if (!std::isfinite(rel) || rel > 1e12) break;
      w = std::move(next);
    }
    throw NoConvergence("Neumann iteration did not reach the tolerance", max_iterations, rel);
  }

  const Eigen::Index n = 2 * psi.mesh().site_count();
  const double bytes = 16.0 * static_cast<double>(n) * (restart + 3);
  if (bytes > 2.0e9) {
    std::ostringstream os;
    os << "Krylov workspace of " << bytes / 1e9 << " GB exceeds the 2 GB limit";
    throw TooLarge(os.str());
  }
  detail::FixedPointOperator op(r, vh);
  Eigen::GMRES<detail::FixedPointOperator, Eigen::IdentityPreconditioner> gmres;
  gmres.compute(op);
  gmres.set_restart(restart);
  gmres.setMaxIterations(max_iterations);
  gmres.setTolerance(tol);
  const Eigen::Map<const Eigen::VectorXcd> b(psi.values().data(), n);
  const Eigen::VectorXcd bv = b;
  const Eigen::VectorXcd w = gmres.solveWithGuess(bv, bv);
  const double rel = (op.apply(w) - bv).norm() / bv.norm();
  if (gmres.info() != Eigen::Success && rel > tol)
    throw NoConvergence("GMRES did not reach the tolerance", static_cast<int>(gmres.iterations()), rel);
  LatticeField wf(psi.mesh(), Eigen::Map<const Eigen::MatrixXcd>(w.data(), n / 2, 2));
  return {r.apply(wf), static_cast<int>(gmres.iterations()), rel, SolverPolicy::krylov};
}

SpectralField spinor_spectrum(const SpinorFunction& phi, const Mesh& mesh) {
  const FrequencyGrid grid(mesh);
  SpectralField out(grid, 2);
  for (int c = 0; c < 2; ++c) {
    if (phi[c].dim() != 2) throw MeshMismatch("spinor components must be functions on R^2");
    out.values().col(c) = phi[c].has_fourier() ? closed_form_spectrum(phi[c], grid).values().col(0)
                                               : dft(sample(phi[c], mesh)).values().col(0);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- differences

LatticeField diff_forward(const LatticeField& f, int axis) {
  require_axis(f, axis);
  return shift_difference(f, axis, +1);
}

LatticeField diff_backward(const LatticeField& f, int axis) {
  require_axis(f, axis);
  return shift_difference(f, axis, -1);
}

// ---------------------------------------------------------------- potentials

PotentialSpec::PotentialSpec(Mat2d base, Mat2d envelope, double width, Point center)
    : base_(base), envelope_(envelope), width_(width), center_(std::move(center)) {
  if (!base_.allFinite() || !envelope_.allFinite()) throw InvalidArgument("potential entries must be finite");
  if (width_ < 0) throw InvalidArgument("envelope width must be non-negative");
  if (center_.size() != 2) throw InvalidArgument("potential center must be a point of R^2");
  sup_norm_ = norm2(base_) + norm2(envelope_);
  skew_bound_ = norm2(skew_of(base_)) + norm2(skew_of(envelope_));
}

PotentialSpec PotentialSpec::zero() { return constant(Mat2d::Zero()); }

PotentialSpec PotentialSpec::constant(const Mat2d& value) {
  return PotentialSpec(value, Mat2d::Zero(), 0.0, Point::Zero(2));
}

PotentialSpec PotentialSpec::gaussian(const Mat2d& envelope, double width, const Point& center) {
  if (!(width > 0)) throw InvalidArgument("envelope width must be positive");
  return PotentialSpec(Mat2d::Zero(), envelope, width, center);
}

PotentialSpec PotentialSpec::hermitian() {
  Mat2d e;
  e << 1.0, Complex(0.5, -0.5), Complex(0.5, 0.5), -0.5;
  return gaussian(e, 0.5, Point::Zero(2));
}

PotentialSpec PotentialSpec::non_hermitian(double skew) {
  if (!(skew >= 0)) throw InvalidArgument("skew bound must be non-negative");
  Mat2d e;
  e << Complex(1.0, skew), Complex(0.5, -0.5), Complex(0.5, 0.5), Complex(-0.5, -skew);
  return gaussian(e, 0.5, Point::Zero(2));
}

PotentialSpec PotentialSpec::from_id(const std::string& id) {
  if (id == "zero") return zero();
  if (id == "constant") return constant(0.5 * Mat2d::Identity());
  if (id == "hermitian") return hermitian();
  if (id == "non-hermitian") return non_hermitian(1.0);
  throw InvalidArgument("unknown potential id '" + id + "'");
}

Mat2d PotentialSpec::operator()(const Point& x) const {
  if (x.size() != 2) throw InvalidArgument("potentials are evaluated on R^2");
  if (width_ == 0.0) return base_ + envelope_;
  return base_ + std::exp(-width_ * (x - center_).squaredNorm()) * envelope_;
}

Mat2d PotentialSpec::hermitian_part(const Point& x) const { return hermitian_of((*this)(x)); }

Mat2d PotentialSpec::skew_part(const Point& x) const { return skew_of((*this)(x)); }

SampledPotential::SampledPotential(const PotentialSpec& v, const Mesh& mesh)
    : mesh_(mesh), entries_(mesh.site_count(), 4) {
  if (mesh.dim() != 2) throw MeshMismatch("potentials are sampled on two-dimensional meshes");
  for (Eigen::Index s = 0; s < mesh.site_count(); ++s) {
    const Mat2d a = v(mesh.position(s));
    entries_.row(s) = Eigen::Map<const Eigen::RowVector4cd>(a.data());
  }
}

Mat2d SampledPotential::at(Eigen::Index site) const {
  Mat2d a;
  Eigen::Map<Eigen::RowVector4cd>(a.data()) = entries_.row(site);
  return a;
}

LatticeField SampledPotential::apply(const LatticeField& psi) const {
  if (psi.mesh() != mesh_ || psi.channels() != 2) throw MeshMismatch("potential and field live on different meshes");
  const auto& e = entries_;
  const auto& x = psi.values();
  Eigen::MatrixXcd out(x.rows(), 2);
  out.col(0) = e.col(0).cwiseProduct(x.col(0)) + e.col(2).cwiseProduct(x.col(1));
  out.col(1) = e.col(1).cwiseProduct(x.col(0)) + e.col(3).cwiseProduct(x.col(1));
  return LatticeField(mesh_, std::move(out));
}

double SampledPotential::sup_norm() const {
  double best = 0.0;
  for (Eigen::Index s = 0; s < entries_.rows(); ++s) best = std::max(best, norm2(at(s)));
  return best;
}

double SampledPotential::skew_sup() const {
  double best = 0.0;
  for (Eigen::Index s = 0; s < entries_.rows(); ++s) best = std::max(best, norm2(skew_of(at(s))));
  return best;
}

// ---------------------------------------------------------------- multipliers

FourierMultiplier::FourierMultiplier(const Mesh& mesh) : mesh_(mesh), entries_(mesh.site_count(), 4) {
  if (mesh.dim() != 2) throw MeshMismatch("symbols are defined on two-dimensional meshes");
}

FourierMultiplier FourierMultiplier::discrete_resolvent(const Mesh& mesh, double m, Complex z) {
  require_nonreal(z);
  FourierMultiplier r(mesh);
  const FrequencyGrid grid(mesh);
  for (Eigen::Index k = 0; k < mesh.site_count(); ++k) {
    const Mat2d a = block_resolvent(zeta_discrete(grid.frequency(k), mesh.h()), m, z);
    r.entries_.row(k) = Eigen::Map<const Eigen::RowVector4cd>(a.data());
  }
  return r;
}

FourierMultiplier FourierMultiplier::continuum_resolvent(const Mesh& mesh, double m, Complex z) {
  require_nonreal(z);
  FourierMultiplier r(mesh);
  const FrequencyGrid grid(mesh);
  for (Eigen::Index k = 0; k < mesh.site_count(); ++k) {
    const Mat2d a = block_resolvent(zeta_continuum(grid.frequency(k)), m, z);
    r.entries_.row(k) = Eigen::Map<const Eigen::RowVector4cd>(a.data());
  }
  return r;
}

FourierMultiplier FourierMultiplier::discrete_symbol(const Mesh& mesh, double m) {
  FourierMultiplier r(mesh);
  const FrequencyGrid grid(mesh);
  for (Eigen::Index k = 0; k < mesh.site_count(); ++k) {
    const Mat2d a = hermitian_block(zeta_discrete(grid.frequency(k), mesh.h()), m);
    r.entries_.row(k) = Eigen::Map<const Eigen::RowVector4cd>(a.data());
  }
  return r;
}

SpectralField FourierMultiplier::apply(const SpectralField& u) const {
  if (u.grid().mesh() != mesh_ || u.channels() != 2) throw MeshMismatch("multiplier and field grids differ");
  const auto& e = entries_;
  const auto& x = u.values();
  Eigen::MatrixXcd out(x.rows(), 2);
  out.col(0) = e.col(0).cwiseProduct(x.col(0)) + e.col(2).cwiseProduct(x.col(1));
  out.col(1) = e.col(1).cwiseProduct(x.col(0)) + e.col(3).cwiseProduct(x.col(1));
  return SpectralField(u.grid(), std::move(out));
}

// ---------------------------------------------------------------- Dirac operator

LatticeField apply_dirac(const LatticeField& psi, const DiracParams& p, const PotentialSpec* v, ApplyPath path) {
  require_params(psi, p);
  LatticeField out(psi.mesh(), 2);
  if (path == ApplyPath::symbol) {
    out = FourierMultiplier::discrete_symbol(psi.mesh(), p.m).apply(psi);
  } else {
    const LatticeField up = LatticeField(psi.mesh(), psi.values().col(0));
    const LatticeField dn = LatticeField(psi.mesh(), psi.values().col(1));
    const Complex i(0.0, 1.0);
    out.values().col(0) = p.m * up.values().col(0) + i * diff_backward(dn, 0).values().col(0) +
                          diff_backward(dn, 1).values().col(0);
    out.values().col(1) = -i * diff_forward(up, 0).values().col(0) + diff_forward(up, 1).values().col(0) -
                          p.m * dn.values().col(0);
  }
  if (v != nullptr) out = out + SampledPotential(*v, psi.mesh()).apply(psi);
  return out;
}

const char* to_string(SolverPolicy p) {
  switch (p) {
    case SolverPolicy::neumann: return "neumann";
    case SolverPolicy::krylov: return "krylov";
    case SolverPolicy::dense: return "dense";
    default: return "automatic";
  }
}

// ---------------------------------------------------------------- resolvents

LatticeField resolvent_free(const LatticeField& psi, const ResolventQuery& q) {
  require_nonreal(q.z);
  require_params(psi, q.p);
  return FourierMultiplier::discrete_resolvent(psi.mesh(), q.p.m, q.z).apply(psi);
}

LatticeField resolvent_pseudospectral(const LatticeField& psi, Complex z, double m) {
  require_nonreal(z);
  require_spinor(psi);
  return FourierMultiplier::continuum_resolvent(psi.mesh(), m, z).apply(psi);
}

PotentialSolve resolvent_with_potential_detailed(const LatticeField& psi, const ResolventQuery& q,
                                                 const PotentialSpec& v) {
  require_params(psi, q.p);
  require_region(q.z, v);
  if (!(q.tolerance > 0) || q.max_iterations < 1 || q.restart < 1)
    throw InvalidArgument("solver tolerance, iteration cap and restart must be positive");

  PotentialSolve result{LatticeField(psi.mesh(), 2), 0, 0.0, q.policy};
  if (q.policy == SolverPolicy::dense) {
    Eigen::MatrixXcd a = dense_matrix(q.p, psi.mesh(), &v);
    a.diagonal().array() -= q.z;
    const Eigen::Index n = a.rows();
    const Eigen::Map<const Eigen::VectorXcd> b(psi.values().data(), n);
    const Eigen::VectorXcd x = a.partialPivLu().solve(Eigen::VectorXcd(b));
    result.u = LatticeField(psi.mesh(), Eigen::Map<const Eigen::MatrixXcd>(x.data(), n / 2, 2));
    result.residual = b.norm() > 0 ? (a * x - b).norm() / b.norm() : 0.0;
    return result;
  }

  const FourierMultiplier r = FourierMultiplier::discrete_resolvent(psi.mesh(), q.p.m, q.z);
  const SampledPotential vh(v, psi.mesh());
  FactorizedResult f =
      solve_factorized(psi, r, vh, q.z, v.sup_norm(), q.policy, q.tolerance, q.max_iterations, q.restart);

  // residual of the original equation, independent of the factorization
  const double psi_norm = psi.values().norm();
  LatticeField res = apply_dirac(f.u, q.p, &v) - (q.z * f.u) - psi;
  result.residual = psi_norm > 0 ? res.values().norm() / psi_norm : 0.0;
  result.u = std::move(f.u);
  result.iterations = f.iterations;
  result.used = f.used;
  if (result.residual > 10.0 * q.tolerance + 1e-12)
    throw NoConvergence("solution misses the requested residual", result.iterations, result.residual);
  return result;
}

LatticeField resolvent_with_potential(const LatticeField& psi, const ResolventQuery& q, const PotentialSpec& v) {
  return resolvent_with_potential_detailed(psi, q, v).u;
}

LatticeField ContinuumSolution::project_to(const Mesh& mesh) const { return idft(fold_spectrum(spectrum, mesh)); }

ContinuumSolution continuum_resolvent(const SpinorFunction& phi, Complex z, double m, const Mesh& reference) {
  require_nonreal(z);
  const SpectralField u = FourierMultiplier::continuum_resolvent(reference, m, z).apply(spinor_spectrum(phi, reference));
  const double norm = norm_l2(u);
  return {u, norm};
}

ContinuumSolution continuum_resolvent(const SpinorFunction& phi, Complex z, double m, const PotentialSpec& v,
                                      const Mesh& reference, double tolerance) {
  require_nonreal(z);
  require_region(z, v);
  const LatticeField rhs = sample(phi, reference);
  const FourierMultiplier r = FourierMultiplier::continuum_resolvent(reference, m, z);
  const SampledPotential vh(v, reference);
  FactorizedResult f = solve_factorized(rhs, r, vh, z, v.sup_norm(), SolverPolicy::automatic, tolerance, 2000, 50);
  SpectralField u = dft(f.u);
  const double norm = norm_l2(u);
  return {std::move(u), norm};
}

LatticeField resolvent_continuum(const SpinorFunction& phi, Complex z, double m, const Mesh& mesh, int refine) {
  if (refine < 1) throw InvalidArgument("refinement factor must be at least 1");
  const Mesh reference(mesh.dim(), mesh.h() / refine, mesh.sites_per_axis() * refine);
  return continuum_resolvent(phi, z, m, reference).project_to(mesh);
}

// ---------------------------------------------------------------- dense oracle

Eigen::MatrixXcd dense_matrix(const DiracParams& p, const Mesh& mesh, const PotentialSpec* v) {
  if (mesh.dim() != 2) throw MeshMismatch("the Dirac operator lives on a two-dimensional mesh");
  if (mesh.sites_per_axis() > 32) throw TooLarge("dense matrix limited to N <= 32");
  if (std::abs(mesh.h() - p.h) > 1e-14 * p.h) throw MeshMismatch("DiracParams.h differs from the mesh size");
  const Eigen::Index n = mesh.site_count();
  const Complex i(0.0, 1.0);
  const double inv_h = 1.0 / p.h;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Array2i site = mesh.site(s);
    const Eigen::Index xp = mesh.linear(site + Eigen::Array2i(1, 0)), xm = mesh.linear(site - Eigen::Array2i(1, 0));
    const Eigen::Index yp = mesh.linear(site + Eigen::Array2i(0, 1)), ym = mesh.linear(site - Eigen::Array2i(0, 1));
    // upper row: m psi_1 + (i d1* + d2*) psi_2
    a(s, s) += p.m;
    a(s, n + xm) += i * inv_h;
    a(s, n + s) -= i * inv_h;
    a(s, n + ym) += inv_h;
    a(s, n + s) -= inv_h;
    // lower row: (-i d1 + d2) psi_1 - m psi_2
    a(n + s, xp) -= i * inv_h;
    a(n + s, s) += i * inv_h;
    a(n + s, yp) += inv_h;
    a(n + s, s) -= inv_h;
    a(n + s, n + s) -= p.m;
  }
  if (v != nullptr) {
    for (Eigen::Index s = 0; s < n; ++s) {
      const Mat2d vs = (*v)(mesh.position(s));
      a(s, s) += vs(0, 0);
      a(s, n + s) += vs(0, 1);
      a(n + s, s) += vs(1, 0);
      a(n + s, n + s) += vs(1, 1);
    }
  }
  return a;
}

StripReport spectra_strip_check(const PotentialSpec& v, const DiracParams& p, const Mesh& mesh) {
  const Eigen::MatrixXcd a = dense_matrix(p, mesh, &v);
  StripReport report;
  report.eigenvalues = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(a, false).eigenvalues();
  report.max_abs_imag = report.eigenvalues.imag().cwiseAbs().maxCoeff();
  report.skew_bound = v.skew_bound();
  report.passed = report.max_abs_imag <= report.skew_bound + 1e-9;
  return report;
}

}  // namespace lattice_dirac
