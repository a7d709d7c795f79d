#include "lattice_dirac/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <numbers>
#include <numeric>
#include <thread>

#include "lattice_dirac/fourier.hpp"
#include "lattice_dirac/operators.hpp"

namespace lattice_dirac {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(Complex z) { return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i"; }

// Runs job(i) for i < count on up to `threads` workers; results land by index
// so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct LevelResult {
  std::vector<double> errors;
  double wall_ms = 0.0;
};

// Evaluates `measure` on every sweep level plus the optional probe level and
// assembles the named series.
ConvergenceReport run_levels(const std::string& experiment, const Sweep& sweep, const std::vector<std::string>& names,
                             bool probe, const std::function<std::vector<double>(const Mesh&)>& measure) {
  const auto t0 = Clock::now();
  std::vector<Mesh> meshes = sweep.meshes();
  const std::size_t main_levels = meshes.size();
  if (probe) {
    const Mesh& finest = *std::min_element(meshes.begin(), meshes.end(),
                                           [](const Mesh& a, const Mesh& b) { return a.h() < b.h(); });
    meshes.emplace_back(finest.dim(), finest.h() / 2, finest.sites_per_axis() * 2);
  }
  std::vector<LevelResult> results(meshes.size());
  parallel_for(meshes.size(), resolve_threads(sweep.threads, meshes.size()), [&](std::size_t i) {
    const auto start = Clock::now();
    results[i].errors = measure(meshes[i]);
    results[i].wall_ms = ms_since(start);
  });

  ConvergenceReport report;
  report.experiment = experiment;
  for (std::size_t k = 0; k < names.size(); ++k) {
    Series s;
    s.name = names[k];
    for (std::size_t i = 0; i < main_levels; ++i)
      s.points.push_back({meshes[i].h(), meshes[i].sites_per_axis(), results[i].errors[k], results[i].wall_ms});
    finalize(s);
    report.series.push_back(std::move(s));
  }
  if (probe) {
    report.probe_error = results.back().errors.front();
    const Series& p = report.series.front();
    const auto finest = std::min_element(p.points.begin(), p.points.end(),
                                         [](const SeriesPoint& a, const SeriesPoint& b) { return a.h < b.h; });
    report.floor_reached = *report.probe_error > 1.01 * finest->error;
  }
  report.parameters = {{"dim", std::to_string(sweep.dim)},
                       {"box_length", fmt(sweep.box_length)},
                       {"function", sweep.function_id}};
  report.wall_ms = ms_since(t0);
  return report;
}

bool decreasing_or_exact(const Series& s) {
  if (s.strictly_decreasing) return true;
  return std::all_of(s.points.begin(), s.points.end(), [](const SeriesPoint& p) { return p.error < 1e-12; });
}

void require_decrease(ConvergenceReport& r, const Series& s) {
  if (!decreasing_or_exact(s)) r.failures.push_back(s.name + " series is not strictly decreasing");
}

SpinorFunction spinor_from_id(const std::string& id) {
  if (id == "gaussian-spinor") return gaussian_spinor();
  throw InvalidArgument("unknown spinor test function '" + id + "'");
}

double resolvent_error(const LatticeField& uh, const ContinuumSolution& ref) {
  const LatticeField pu = ref.project_to(uh.mesh());
  const double d = norm_l2(uh - pu);
  const double pn = norm_l2(pu);
  return std::sqrt(d * d + std::max(0.0, ref.norm * ref.norm - pn * pn));
}

// Packets on a ring with distinct wave vectors; each occupies one channel.
SpinorFunction probe_spinor(int k) {
  const double t = 2 * std::numbers::pi * k / 16;
  const Point c = make_point(std::cos(t), std::sin(t));
  const auto packet = ContinuumFunction::gaussian_wave(2, 1.0, c, make_point(k % 4 - 1.5, (k / 4) % 4 - 1.5));
  const auto none = ContinuumFunction::gaussian(2, 1.0, c, 0.0);
  return k % 2 == 0 ? SpinorFunction{packet, none} : SpinorFunction{none, packet};
}

Mesh reference_mesh(const Sweep& sweep) {
  const auto meshes = sweep.meshes();
  const Mesh& finest = *std::min_element(meshes.begin(), meshes.end(),
                                         [](const Mesh& a, const Mesh& b) { return a.h() < b.h(); });
  return Mesh(finest.dim(), finest.h() / sweep.refine, finest.sites_per_axis() * sweep.refine);
}

}  // namespace

// ---------------------------------------------------------------- sweep

std::vector<Mesh> Sweep::meshes() const {
  validate();
  std::vector<Mesh> out;
  for (double h : hs) out.push_back(Mesh::from_box(dim, box_length, h));
  return out;
}

void Sweep::validate() const {
  if (hs.empty()) throw InvalidArgument("sweep needs at least one mesh size");
  if (dim != 1 && dim != 2) throw InvalidArgument("sweep dimension must be 1 or 2");
  if (!(box_length > 0)) throw InvalidArgument("box length must be positive");
  if (refine < 1) throw InvalidArgument("refinement factor must be at least 1");
  if (!(m >= 0)) throw InvalidArgument("mass must be non-negative");
  for (double h : hs)
    if (!(h > 0)) throw InvalidArgument("mesh sizes must be positive");
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = i + 1; j < hs.size(); ++j)
      if (hs[i] == hs[j]) throw InvalidArgument("mesh sizes in a sweep must be distinct");
}

Sweep default_sweep(const std::string& experiment) {
  Sweep s;
  if (experiment == "ift") {
    s.dim = 1;
    s.box_length = 25.6;
    s.function_id = "bump";
  } else if (experiment == "resolve-free") {
    s.function_id = "gaussian-spinor";
  } else if (experiment == "resolve-potential") {
    s.function_id = "gaussian-spinor";
    s.z = Complex(0.0, 3.0);
    s.potential_id = "non-hermitian";
  }
  return s;
}

unsigned resolve_threads(unsigned requested, std::size_t jobs) {
  unsigned cap = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LATTICE_DIRAC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = std::min(cap, static_cast<unsigned>(v));
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(cap, jobs)));
}

// ---------------------------------------------------------------- fitting

RateFit fit_rate(std::span<const double> hs, std::span<const double> errs) {
  if (hs.size() != errs.size()) throw InvalidArgument("h and error lists differ in length");
  if (hs.size() < 3) throw DegenerateFit("a rate fit needs at least three points");
  const auto n = static_cast<double>(hs.size());
  std::vector<double> x(hs.size()), y(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(errs[i] > 1e-14)) throw DegenerateFit("errors must exceed 1e-14 for a log-log fit");
    if (!(hs[i] > 0)) throw DegenerateFit("mesh sizes must be positive");
    x[i] = std::log(hs[i]);
    y[i] = std::log(errs[i]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-24)) throw DegenerateFit("all mesh sizes coincide");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

std::vector<double> Series::hs() const {
  std::vector<double> out;
  for (const auto& p : points) out.push_back(p.h);
  return out;
}

std::vector<double> Series::errors() const {
  std::vector<double> out;
  for (const auto& p : points) out.push_back(p.error);
  return out;
}

void finalize(Series& s) {
  std::sort(s.points.begin(), s.points.end(), [](const SeriesPoint& a, const SeriesPoint& b) { return a.h > b.h; });
  s.strictly_decreasing = s.points.size() >= 2;
  for (std::size_t i = 1; i < s.points.size(); ++i)
    if (!(s.points[i].error < s.points[i - 1].error)) s.strictly_decreasing = false;
  std::vector<double> h, e;
  for (const auto& p : s.points)
    if (p.error >= 1e-12) {
      h.push_back(p.h);
      e.push_back(p.error);
    }
  s.fit.reset();
  if (h.size() >= 3) s.fit = fit_rate(h, e);
}

const Series& ConvergenceReport::find(const std::string& name) const {
  for (const auto& s : series)
    if (s.name == name) return s;
  throw InvalidArgument("report has no series named '" + name + "'");
}

// ---------------------------------------------------------------- experiments

ConvergenceReport exp_projection(const Sweep& sweep) {
  const ContinuumFunction phi = ContinuumFunction::from_id(sweep.function_id, sweep.dim);
  auto report = run_levels("project", sweep, {"projection", "sampling"}, sweep.floor_probe, [&](const Mesh& mesh) {
    return std::vector<double>{distance_l2(project(phi, mesh), phi), distance_l2(sample(phi, mesh), phi)};
  });
  for (const auto& s : report.series) require_decrease(report, s);
  report.passed = report.failures.empty();
  return report;
}

ConvergenceReport exp_ft(const Sweep& sweep) {
  if (!(sweep.s > 0)) throw InvalidArgument("the weight exponent s must be positive");
  const ContinuumFunction phi = ContinuumFunction::from_id(sweep.function_id, sweep.dim);
  if (!phi.has_fourier()) throw UnknownClosedForm("test function '" + sweep.function_id + "' has no closed-form transform");
  auto report = run_levels("ft", sweep, {"weighted-ft"}, sweep.floor_probe, [&](const Mesh& mesh) {
    return std::vector<double>{weighted_ft_error(phi, mesh, sweep.s)};
  });
  report.parameters.emplace_back("s", fmt(sweep.s));
  require_decrease(report, report.primary());
  report.passed = report.failures.empty();
  return report;
}

ConvergenceReport exp_ift(const Sweep& sweep) {
  const ContinuumFunction u = ContinuumFunction::from_id(sweep.function_id, sweep.dim);
  const double coarsest = *std::max_element(sweep.hs.begin(), sweep.hs.end());
  const auto radius = u.support_radius();
  if (!u.has_inverse_fourier() || !radius) throw UnknownClosedForm("inverse FT experiment needs the frequency bump");
  if (*radius > std::numbers::pi / coarsest)
    throw SupportViolation("bump support exceeds the frequency box of the coarsest level");
  auto report = run_levels("ift", sweep, {"inverse-ft"}, sweep.floor_probe, [&](const Mesh& mesh) {
    return std::vector<double>{inverse_ft_error(u, mesh)};
  });
  const Series& s = report.primary();
  require_decrease(report, s);
  if (!s.fit || s.fit->slope < 0.8 || s.fit->slope > 1.2) report.failures.push_back("inverse-ft slope outside [0.8, 1.2]");
  report.passed = report.failures.empty();
  return report;
}

ConvergenceReport exp_resolvent_free(const Sweep& sweep) {
  if (sweep.z.imag() == 0.0) throw RealShift("resolvent experiment at a real spectral parameter");
  if (sweep.dim != 2) throw InvalidArgument("resolvent experiments run in two dimensions");
  const SpinorFunction phi = spinor_from_id(sweep.function_id);
  const Mesh ref = reference_mesh(sweep);
  const ContinuumSolution u = continuum_resolvent(phi, sweep.z, sweep.m, ref);
  const bool probe = sweep.floor_probe && sweep.refine % 2 == 0;
  if (sweep.norm_probes < 0) throw InvalidArgument("norm_probes must be non-negative");
  std::vector<SpinorFunction> probes;
  std::vector<ContinuumSolution> probe_refs;
  for (int k = 0; k < sweep.norm_probes; ++k) {
    probes.push_back(probe_spinor(k));
    probe_refs.push_back(continuum_resolvent(probes.back(), sweep.z, sweep.m, ref));
  }
  std::vector<std::string> names{"resolvent-free"};
  if (!probes.empty()) names.emplace_back("probe-max");
  auto report = run_levels("resolve-free", sweep, names, probe, [&](const Mesh& mesh) {
    ResolventQuery q;
    q.z = sweep.z;
    q.p = DiracParams(sweep.m, mesh.h());
    std::vector<double> out{resolvent_error(resolvent_free(project(phi, mesh), q), u)};
    if (!probes.empty()) {
      double worst = 0;
      for (std::size_t k = 0; k < probes.size(); ++k) {
        const LatticeField pk = project(probes[k], mesh);
        worst = std::max(worst, resolvent_error(resolvent_free(pk, q), probe_refs[k]) / norm_l2(pk));
      }
      out.push_back(worst);
    }
    return out;
  });
  if (!probes.empty()) report.parameters.emplace_back("norm_probes", std::to_string(sweep.norm_probes));
  report.parameters.emplace_back("m", fmt(sweep.m));
  report.parameters.emplace_back("z", fmt(sweep.z));
  report.parameters.emplace_back("refine", std::to_string(sweep.refine));
  require_decrease(report, report.primary());
  report.passed = report.failures.empty();
  return report;
}

ConvergenceReport exp_resolvent_potential(const Sweep& sweep) {
  if (sweep.dim != 2) throw InvalidArgument("resolvent experiments run in two dimensions");
  const PotentialSpec v = PotentialSpec::from_id(sweep.potential_id.value_or("non-hermitian"));
  if (!(std::abs(sweep.z.imag()) > v.skew_bound() + 1e-12))
    throw NotInResolventRegion("|Im z| must exceed the skew bound of the potential", std::abs(sweep.z.imag()),
                               v.skew_bound());
  const SpinorFunction phi = spinor_from_id(sweep.function_id);
  const Mesh ref = reference_mesh(sweep);
  const ContinuumSolution u = continuum_resolvent(phi, sweep.z, sweep.m, v, ref);
  const bool probe = sweep.floor_probe && sweep.refine % 2 == 0;
  auto report = run_levels("resolve-potential", sweep, {"resolvent-potential"}, probe, [&](const Mesh& mesh) {
    ResolventQuery q;
    q.z = sweep.z;
    q.p = DiracParams(sweep.m, mesh.h());
    return std::vector<double>{resolvent_error(resolvent_with_potential(project(phi, mesh), q, v), u)};
  });
  report.parameters.emplace_back("m", fmt(sweep.m));
  report.parameters.emplace_back("z", fmt(sweep.z));
  report.parameters.emplace_back("potential", sweep.potential_id.value_or("non-hermitian"));
  report.parameters.emplace_back("refine", std::to_string(sweep.refine));
  require_decrease(report, report.primary());
  report.passed = report.failures.empty();
  return report;
}

}  // namespace lattice_dirac
