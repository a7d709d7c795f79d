#include "lattice_dirac/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "lattice_dirac/errors.hpp"
#include "lattice_dirac/lab.hpp"
#include "lattice_dirac/operators.hpp"
#include "lattice_dirac/symbols.hpp"

namespace lattice_dirac {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kExperiments{"omega-scan", "spectrum",     "project",           "ft",
                                            "ift",        "resolve-free", "resolve-potential", "oracle-eigs"};

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Fixed 8 decimals with trailing zeros removed.
std::string trimmed8(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8f", x);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string complex_text(Complex z) { return g17(z.real()) + (z.imag() < 0 ? "-" : "+") + g17(std::abs(z.imag())) + "i"; }

bool parse_double(std::string_view text, double& value) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = first + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

std::vector<double> parse_sweep(const std::string& text) {
  if (text == "dyadic") return {0.4, 0.2, 0.1, 0.05};
  std::vector<double> hs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double h = 0;
    if (!parse_double(item, h) || !(h > 0)) throw ConfigError("bad mesh size '" + item + "' in --sweep");
    hs.push_back(h);
  }
  if (hs.empty()) throw ConfigError("--sweep needs 'dyadic' or a comma-separated list of mesh sizes");
  return hs;
}

// Where the data table goes: the --output file, or `fallback`.
class Sink {
 public:
  Sink(const std::optional<std::string>& path, std::ostream& fallback) : stream_(&fallback) {
    if (path) {
      file_.open(*path);
      if (!file_) throw Error("cannot open output file '" + *path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }
  bool to_file() const { return file_.is_open(); }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json base_json(const std::string& experiment) {
  json j;
  j["schema_version"] = "1";
  j["experiment"] = experiment;
  return j;
}

// ---------------------------------------------------------------- omega-scan

int run_omega_scan(const RunConfig& c, std::ostream& out) {
  if (c.grid < 2) throw ConfigError("--grid must be at least 2");
  const double pi = std::numbers::pi;
  const double top = 6.0 + 4.0 * std::sqrt(2.0);
  double lo = INFINITY, hi = -INFINITY, form_gap = 0.0;
  Sink sink(c.output, out);
  json samples = json::array();
  if (c.format == OutputFormat::csv) *sink << "kind,xi1,xi2,omega\n";
  for (int j = 0; j < c.grid; ++j)
    for (int i = 0; i < c.grid; ++i) {
      const Eigen::Vector2d xi(-pi + 2 * pi * i / c.grid, -pi + 2 * pi * j / c.grid);
      const double w = omega(xi);
      lo = std::min(lo, w);
      hi = std::max(hi, w);
      form_gap = std::max(form_gap, std::abs(w - omega_trig(xi)));
      if (c.format == OutputFormat::csv)
        *sink << "grid," << g17(xi[0]) << ',' << g17(xi[1]) << ',' << g17(w) << '\n';
      else
        samples.push_back({xi[0], xi[1], w});
    }
  const auto crit = critical_points();
  double worst_gradient = 0.0;
  json points = json::array();
  for (const auto& p : crit) {
    worst_gradient = std::max(worst_gradient, omega_gradient(p.location).norm());
    if (c.format == OutputFormat::csv)
      *sink << to_string(p.kind) << ',' << g17(p.location[0]) << ',' << g17(p.location[1]) << ',' << g17(p.value)
            << '\n';
    else
      points.push_back({{"kind", to_string(p.kind)}, {"xi1", p.location[0]}, {"xi2", p.location[1]}, {"omega", p.value}});
  }
  const bool pass = lo >= -1e-12 && hi <= top + 1e-12 && form_gap < 1e-13 && worst_gradient < 1e-8;
  if (c.format == OutputFormat::json) {
    json j = base_json("omega-scan");
    j["grid"] = c.grid;
    j["samples"] = std::move(samples);
    j["critical_points"] = std::move(points);
    j["passed"] = pass;
    *sink << j.dump(2) << '\n';
  }
  out << "omega-scan: grid " << c.grid << ", min " << g17(lo) << ", max " << g17(hi) << " (bound " << g17(top)
      << "), " << crit.size() << " critical points, " << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : 2;
}

// ---------------------------------------------------------------- spectrum

int run_spectrum(const RunConfig& c, std::ostream& out) {
  const double m = c.m.value_or(1.0);
  if (!(m >= 0) || !(c.h > 0)) throw ConfigError("spectrum needs --m >= 0 and --h > 0");
  const Bands b = spectrum_bounds(DiracParams(m, c.h));
  if (c.output) {
    Sink sink(c.output, out);
    if (c.format == OutputFormat::csv) {
      *sink << "band,lower,upper\n"
            << "negative," << g17(b.lower[0]) << ',' << g17(b.lower[1]) << '\n'
            << "positive," << g17(b.upper[0]) << ',' << g17(b.upper[1]) << '\n';
    } else {
      json j = base_json("spectrum");
      j["m"] = m;
      j["h"] = c.h;
      j["bands"] = {{b.lower[0], b.lower[1]}, {b.upper[0], b.upper[1]}};
      *sink << j.dump(2) << '\n';
    }
  }
  out << '[' << trimmed8(b.lower[0]) << ", " << trimmed8(b.lower[1]) << "] ∪ [" << trimmed8(b.upper[0]) << ", "
      << trimmed8(b.upper[1]) << "]\n";
  return 0;
}

// ---------------------------------------------------------------- sweeps

Sweep make_sweep(const RunConfig& c) {
  Sweep s = default_sweep(c.experiment);
  if (c.hs) s.hs = *c.hs;
  if (c.box_length) s.box_length = *c.box_length;
  if (c.dim) s.dim = *c.dim;
  if (c.function_id) s.function_id = *c.function_id;
  if (c.potential_id) s.potential_id = *c.potential_id;
  if (c.m) s.m = *c.m;
  if (c.z) s.z = *c.z;
  if (c.s) s.s = *c.s;
  if (c.refine) s.refine = *c.refine;
  s.floor_probe = c.floor_probe;
  s.norm_probes = c.norm_probes;
  s.threads = c.threads;
  try {
    s.meshes();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

std::optional<double> slope_so_far(const Series& s, std::size_t upto) {
  std::vector<double> h, e;
  for (std::size_t i = 0; i <= upto; ++i)
    if (s.points[i].error >= 1e-12) {
      h.push_back(s.points[i].h);
      e.push_back(s.points[i].error);
    }
  if (h.size() < 3) return std::nullopt;
  return fit_rate(h, e).slope;
}

void write_report(const ConvergenceReport& r, const RunConfig& c, std::ostream& os) {
  auto wall = [&](double ms) { return c.reproducible ? 0.0 : ms; };
  if (c.format == OutputFormat::csv) {
    os << "experiment,h,N,error,slope-so-far,wall-ms\n";
    for (const auto& s : r.series)
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        const auto& p = s.points[i];
        const auto slope = slope_so_far(s, i);
        os << r.experiment << '/' << s.name << ',' << g17(p.h) << ',' << p.n << ',' << g17(p.error) << ','
           << (slope ? g17(*slope) : "") << ',' << g17(wall(p.wall_ms)) << '\n';
      }
    return;
  }
  json j = base_json(r.experiment);
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  j["parameters"] = std::move(params);
  json series = json::array();
  for (const auto& s : r.series) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto& p = s.points[i];
      const auto slope = slope_so_far(s, i);
      rows.push_back({{"h", p.h},
                      {"N", p.n},
                      {"error", p.error},
                      {"slope-so-far", slope ? json(*slope) : json(nullptr)},
                      {"wall-ms", wall(p.wall_ms)}});
    }
    json entry{{"name", s.name}, {"rows", std::move(rows)}, {"strictly_decreasing", s.strictly_decreasing}};
    entry["slope"] = s.fit ? json(s.fit->slope) : json(nullptr);
    entry["intercept"] = s.fit ? json(s.fit->intercept) : json(nullptr);
    series.push_back(std::move(entry));
  }
  j["series"] = std::move(series);
  j["probe_error"] = r.probe_error ? json(*r.probe_error) : json(nullptr);
  j["floor_reached"] = r.floor_reached;
  j["passed"] = r.passed;
  j["failures"] = r.failures;
  os << j.dump(2) << '\n';
}

int run_sweep(const RunConfig& c, std::ostream& out) {
  const Sweep sweep = make_sweep(c);
  ConvergenceReport r;
  if (c.experiment == "project") r = exp_projection(sweep);
  else if (c.experiment == "ft") r = exp_ft(sweep);
  else if (c.experiment == "ift") r = exp_ift(sweep);
  else if (c.experiment == "resolve-free") r = exp_resolvent_free(sweep);
  else r = exp_resolvent_potential(sweep);
  {
    Sink sink(c.output, out);
    write_report(r, c, *sink);
  }
  const Series& p = r.primary();
  out << r.experiment << ": " << p.name << " error " << g17(p.points.front().error) << " -> "
      << g17(p.points.back().error) << " over " << p.points.size() << " levels";
  if (p.fit) out << ", slope " << trimmed8(p.fit->slope);
  if (r.floor_reached) out << ", floor reached";
  out << ", " << (r.passed ? "PASS" : "FAIL");
  for (const auto& f : r.failures) out << "; " << f;
  out << '\n';
  return r.passed ? 0 : 2;
}

// ---------------------------------------------------------------- oracle-eigs

int run_oracle(const RunConfig& c, std::ostream& out) {
  if (c.n < 4 || c.n % 2 != 0 || c.n > 32) throw ConfigError("--n must be even and within [4, 32]");
  const double m = c.m.value_or(1.0);
  if (!(m >= 0) || !(c.h > 0)) throw ConfigError("oracle-eigs needs --m >= 0 and --h > 0");
  const Mesh mesh(2, c.h, c.n);
  const DiracParams p(m, c.h);
  Sink sink(c.output, out);
  auto write_eigs = [&](const Eigen::VectorXcd& ev) {
    if (c.format == OutputFormat::csv) {
      *sink << "index,re,im\n";
      for (Eigen::Index i = 0; i < ev.size(); ++i) *sink << i << ',' << g17(ev[i].real()) << ',' << g17(ev[i].imag()) << '\n';
      return;
    }
    json j = base_json("oracle-eigs");
    json arr = json::array();
    for (Eigen::Index i = 0; i < ev.size(); ++i) arr.push_back({ev[i].real(), ev[i].imag()});
    j["eigenvalues"] = std::move(arr);
    *sink << j.dump(2) << '\n';
  };

  if (!c.potential_id) {
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(dense_matrix(p, mesh), Eigen::EigenvaluesOnly)
                                   .eigenvalues();
    const FrequencyGrid grid(mesh);
    std::vector<double> expected;
    for (Eigen::Index k = 0; k < mesh.site_count(); ++k) {
      const double l = lambda_mh(grid.frequency(k), p);
      expected.push_back(l);
      expected.push_back(-l);
    }
    std::sort(expected.begin(), expected.end());
    double dev = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) dev = std::max(dev, std::abs(ev[i] - expected[i]));
    write_eigs(ev.cast<Complex>());
    const bool pass = dev < 1e-10;
    out << "oracle-eigs: " << ev.size() << " eigenvalues, max |eig - (+-lambda)| " << g17(dev) << ", max eig "
        << g17(ev.maxCoeff()) << ", " << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? 0 : 2;
  }

  PotentialSpec v = PotentialSpec::from_id(*c.potential_id);
  const StripReport strip = spectra_strip_check(v, p, mesh);
  write_eigs(strip.eigenvalues);

  // seeded cross-check of the iterative solve against dense LU
  ResolventQuery q;
  q.p = p;
  q.z = c.z.value_or(v.is_hermitian() ? Complex(0, 2) : Complex(0, 3));
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  LatticeField psi(mesh, 2);
  for (Eigen::Index i = 0; i < psi.values().size(); ++i) psi.values().data()[i] = Complex(unit(rng), unit(rng));
  const LatticeField iterative = resolvent_with_potential(psi, q, v);
  q.policy = SolverPolicy::dense;
  const LatticeField dense = resolvent_with_potential(psi, q, v);
  const double gap = (iterative.values() - dense.values()).cwiseAbs().maxCoeff();
  const double bound = norm_l2(psi) / (std::abs(q.z.imag()) - v.skew_bound());
  const bool pass = strip.passed && gap < 1e-8 && norm_l2(iterative) <= bound;
  out << "oracle-eigs: potential " << *c.potential_id << ", max |Im eig| " << g17(strip.max_abs_imag) << " (v_I "
      << g17(strip.skew_bound) << "), iterative vs dense " << g17(gap) << " at z = " << complex_text(q.z) << ", "
      << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : 2;
}

}  // namespace

std::complex<double> parse_complex(std::string_view text) {
  auto fail = [&]() -> ConfigError { return ConfigError("cannot parse complex number '" + std::string(text) + "'"); };
  std::string t;
  for (char ch : text)
    if (ch != ' ') t.push_back(ch);
  if (t.empty()) throw fail();
  if (t.back() != 'i' && t.back() != 'j') {
    double re = 0;
    if (!parse_double(t, re)) throw fail();
    return {re, 0.0};
  }
  t.pop_back();
  // split at the last sign that does not belong to an exponent
  std::size_t split = std::string::npos;
  for (std::size_t i = t.size(); i-- > 1;)
    if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
      split = i;
      break;
    }
  auto coefficient = [&](std::string_view s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    double v = 0;
    if (!parse_double(s, v)) throw fail();
    return v;
  };
  if (split == std::string::npos) return {0.0, coefficient(t)};
  double re = 0;
  if (!parse_double(std::string_view(t).substr(0, split), re)) throw fail();
  return {re, coefficient(std::string_view(t).substr(split))};
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Lattice Dirac operators: symbols, transforms and continuum-limit experiments", "lattice-dirac"};
  app.set_config("--config", "", "TOML/INI file with the same option names; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);
  app.fallthrough();

  RunConfig c;
  std::string format = "csv", output, sweep, z, function_id, potential_id;
  double box = 0, m = 0, s = 0;
  int dim = 0, refine = 0;
  bool no_probe = false;

  app.add_option("-o,--output", output, "Write the data table to this file");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", c.seed, "Seed of the randomized cross-checks");
  app.add_option("--threads", c.threads, "Cap on worker threads (0: automatic)");
  app.add_flag("--reproducible", c.reproducible, "Report wall-ms as 0");

  std::vector<CLI::Option*> tracked;
  auto track = [&](CLI::Option* o) {
    tracked.push_back(o);
    return o;
  };
  CLI::Option *o_sweep = nullptr, *o_box = nullptr, *o_dim = nullptr, *o_fn = nullptr, *o_pot = nullptr,
              *o_m = nullptr, *o_z = nullptr, *o_s = nullptr, *o_refine = nullptr;

  auto* omega_scan = app.add_subcommand("omega-scan", "Tabulate omega over the unit torus with its critical points");
  omega_scan->add_option("--grid", c.grid, "Samples per axis");

  auto* spectrum = app.add_subcommand("spectrum", "Spectral bands of D_{m,h}");
  auto* project = app.add_subcommand("project", "Projection and sampling errors over an h-sweep");
  auto* ft = app.add_subcommand("ft", "Weighted Fourier-transform error over an h-sweep");
  auto* ift = app.add_subcommand("ift", "Inverse Fourier-transform error over an h-sweep");
  auto* free_res = app.add_subcommand("resolve-free", "Free resolvent against the continuum reference");
  auto* pot_res = app.add_subcommand("resolve-potential", "Resolvent with a potential against the continuum reference");
  auto* oracle = app.add_subcommand("oracle-eigs", "Dense eigenvalues against the symbol picture");

  // --h is the mesh size, so subcommands answer only to --help
  for (auto* sub : {omega_scan, spectrum, project, ft, ift, free_res, pot_res, oracle})
    sub->set_help_flag("--help", "Print this help message and exit");
  for (auto* sub : {project, ft, ift, free_res, pot_res}) {
    o_sweep = track(sub->add_option("--sweep", sweep, "'dyadic' or comma-separated mesh sizes"));
    o_box = track(sub->add_option("--box", box, "Box side L"));
    o_dim = track(sub->add_option("--dim", dim, "Dimension (1 or 2)"));
    o_fn = track(sub->add_option("--function", function_id, "Test function id"));
    sub->add_flag("--no-probe", no_probe, "Skip the extra h_min/2 floor probe");
  }
  for (auto* sub : {free_res, pot_res}) {
    o_refine = track(sub->add_option("--refine", refine, "Reference grid refinement factor"));
  }
  for (auto* sub : {spectrum, free_res, pot_res, oracle}) o_m = track(sub->add_option("--m", m, "Mass m >= 0"));
  for (auto* sub : {free_res, pot_res, oracle}) o_z = track(sub->add_option("--z", z, "Spectral parameter, e.g. 2i or 0.5+3i"));
  for (auto* sub : {pot_res, oracle}) o_pot = track(sub->add_option("--potential", potential_id, "Potential id"));
  for (auto* sub : {spectrum, oracle}) sub->add_option("--h", c.h, "Mesh size");
  free_res->add_option("--norm-probes", c.norm_probes, "Also report the worst relative error over this many wave packets")
      ->check(CLI::Range(0, 64));
  oracle->add_option("--n", c.n, "Sites per axis (even, <= 32)");
  o_s = track(ft->add_option("--s", s, "Weight exponent"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  c.experiment = app.get_subcommands().front()->get_name();
  auto given = [&](const std::string& name) {
    return std::any_of(tracked.begin(), tracked.end(),
                       [&](CLI::Option* o) { return o->get_name() == name && o->count() > 0; });
  };
  (void)o_sweep, (void)o_box, (void)o_dim, (void)o_fn, (void)o_pot, (void)o_m, (void)o_z, (void)o_s, (void)o_refine;
  if (given("--sweep")) c.hs = parse_sweep(sweep);
  if (given("--box")) c.box_length = box;
  if (given("--dim")) c.dim = dim;
  if (given("--function")) c.function_id = function_id;
  if (given("--potential")) c.potential_id = potential_id;
  if (given("--m")) c.m = m;
  if (given("--z")) c.z = parse_complex(z);
  if (given("--s")) c.s = s;
  if (given("--refine")) c.refine = refine;
  c.floor_probe = !no_probe;
  if (!output.empty()) c.output = output;
  c.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
  return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (std::find(kExperiments.begin(), kExperiments.end(), config.experiment) == kExperiments.end())
      throw ConfigError("unknown experiment '" + config.experiment + "'");
    if (config.experiment == "omega-scan") return run_omega_scan(config, out);
    if (config.experiment == "spectrum") return run_spectrum(config, out);
    if (config.experiment == "oracle-eigs") return run_oracle(config, out);
    return run_sweep(config, out);
  } catch (const std::exception& e) {
    err << "lattice-dirac " << config.experiment << ": error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> config;
  try {
    config = parse_args(argc, argv, out);
  } catch (const std::exception& e) {
    err << "lattice-dirac: " << e.what() << '\n';
    return 1;
  }
  if (!config) return 0;
  return run(*config, out, err);
}

}  // namespace lattice_dirac
