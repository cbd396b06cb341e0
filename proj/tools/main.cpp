// command-line driver: green-verify / eigen / approximate, CSV + manifest out
#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fracap/approximator.hpp"
#include "fracap/config.hpp"
#include "fracap/csv.hpp"
#include "fracap/green.hpp"

namespace fs = std::filesystem;
using namespace fracap;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  QuadratureConfig quad;

  fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }
  void load() {
    if (!config_path.empty()) {
      ConfigMap m = parse_config_file(config_path);
      apply_config(m, quad);
    }
    fs::create_directories(out_dir);
  }
};

std::string params_digest_hex(const std::map<std::string, std::string>& params) {
  std::string blob;
  for (const auto& [k, v] : params) blob += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(blob)));
  return buf;
}

void stamp(CsvTable& t, const std::string& command,
           const std::map<std::string, std::string>& params) {
  t.comments.push_back("command: " + command);
  t.comments.push_back("manifest_digest=" + params_digest_hex(params));
}

void finish_manifest(RunManifest& man, const CsvTable& primary,
                     std::chrono::steady_clock::time_point t0) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(csv_digest(primary)));
  man.csv_digest_hex = buf;
  man.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
}

std::vector<double> geometric(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 1)
    throw CLI::ValidationError("--eps-min/--eps-max/--eps-count must give a positive range");
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(count == 1 ? lo : hi * std::pow(lo / hi, double(i) / (count - 1)));
  return out;
}

// ---- green-verify ---------------------------------------------------------

struct GreenArgs {
  int n = 1;
  double s = 0.5;
  double eps_min = 1e-4, eps_max = 1e-2;
  int eps_count = 3;
  int pairs = 100;
  double tol_ratio = 0.02, tol_footnote = 1e-8;
  unsigned seed = 9001;
};

int run_green_verify(const Common& cm, const GreenArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, std::string> params = {
      {"n", std::to_string(a.n)},          {"s", format_g17(a.s)},
      {"eps_min", format_g17(a.eps_min)},  {"eps_max", format_g17(a.eps_max)},
      {"eps_count", std::to_string(a.eps_count)},
      {"pairs", std::to_string(a.pairs)},  {"seed", std::to_string(a.seed)},
      {"tol_ratio", format_g17(a.tol_ratio)},
      {"tol_footnote", format_g17(a.tol_footnote)}};

  GreenKernel kern{a.n, a.s, cm.quad};
  ScalarField datum = make_bump_field(a.n, std::vector<double>(a.n, 0.0), 0.5);
  std::vector<double> e(a.n, 0.0), omega(a.n, 0.0);
  e[0] = 1.0;
  omega[0] = -1.0;
  auto eps = geometric(a.eps_min, a.eps_max, a.eps_count);
  std::sort(eps.rbegin(), eps.rend());
  GoaTable table = verify_goa_limit(kern, datum, e, omega, eps);

  CsvTable goa;
  stamp(goa, "green-verify", params);
  goa.header = {"eps", "lhs", "rhs", "ratio"};
  for (const auto& r : table.rows) goa.rows.push_back({r.eps, r.lhs, r.rhs, r.ratio});
  csv_write(goa, cm.out("goa.csv").string());

  bool ok = !table.degenerate;
  if (ok && !table.rows.empty())
    ok = std::abs(table.rows.back().ratio - 1.0) <= a.tol_ratio;

  // closed-form cross-check of the kernel itself (1-D, s = 1/2 only)
  double worst_rel = 0.0;
  if (a.n == 1 && std::abs(a.s - 0.5) < 1e-12) {
    CsvTable foot;
    stamp(foot, "green-verify", params);
    foot.header = {"x", "z", "quadrature", "closed_form", "rel_err"};
    std::mt19937 rng(a.seed);
    std::uniform_real_distribution<double> U(-0.999, 0.999);
    for (int i = 0; i < a.pairs; ++i) {
      double x = U(rng), z = U(rng);
      while (std::abs(x - z) < 1e-6) z = U(rng);
      const double g = green_value(kern, std::span(&x, 1), std::span(&z, 1));
      const double closed =
          2.0 * std::log((1.0 - x * z + std::sqrt((1 - x * x) * (1 - z * z))) / std::abs(z - x));
      const double rel = std::abs(g - closed) / std::abs(closed);
      worst_rel = std::max(worst_rel, rel);
      foot.rows.push_back({x, z, g, closed, rel});
    }
    csv_write(foot, cm.out("footnote.csv").string());
    ok = ok && worst_rel <= a.tol_footnote;
    params["footnote_max_rel"] = format_g17(worst_rel);
  }

  RunManifest man;
  man.command = "green-verify";
  man.params = params;
  finish_manifest(man, goa, t0);
  man.write(cm.out("green-verify.manifest.json").string());

  std::printf("goa ratio(last)=%s footnote_max_rel=%s -> %s\n",
              table.rows.empty() ? "n/a" : format_g17(table.rows.back().ratio).c_str(),
              format_g17(worst_rel).c_str(), ok ? "ok" : "FAIL");
  return ok ? 0 : 1;
}

// ---- eigen ----------------------------------------------------------------

struct EigenArgs {
  int n = 1;
  double s = 0.5;
  bool refine = false;
  bool check_distributional = false;
  int alpha = 0;
  double boundary_eps = 1e-3;
  double tol_boundary = 0.03, tol_refine = 1e-4, tol_distributional = 0.05;
};

int run_eigen(const Common& cm, const EigenArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, std::string> params = {
      {"n", std::to_string(a.n)},
      {"s", format_g17(a.s)},
      {"refine", a.refine ? "1" : "0"},
      {"check_distributional", a.check_distributional ? "1" : "0"},
      {"alpha", std::to_string(a.alpha)},
      {"boundary_eps", format_g17(a.boundary_eps)}};

  EigenConfig ec;
  ec.quad = cm.quad;
  RadialEigenpair pair = solve_eigenpair(a.n, a.s, ec);
  bool ok = pair.lambda > 0.0 && pair.kappa_star > 0.0;
  params["lambda"] = format_g17(pair.lambda);
  params["kappa_star"] = format_g17(pair.kappa_star);

  CsvTable prof;
  stamp(prof, "eigen", params);
  prof.header = {"r", "w", "phi"};
  for (size_t i = 0; i < pair.grid.size(); ++i) {
    const double r = pair.grid[i];
    prof.rows.push_back({r, pair.w[i], r < 1.0 ? pair.phi(r) : 0.0});
  }
  csv_write(prof, cm.out("eigen_profile.csv").string());

  CsvTable law;
  stamp(law, "eigen", params);
  law.header = {"eps", "value", "predicted", "ratio"};
  std::vector<double> Xin(a.n, 0.0);
  Xin[0] = -1.0;  // straight inward
  double last_ratio = 0.0;
  for (double ev : {1e-2, 3e-3, a.boundary_eps}) {
    BoundaryLawRow row = boundary_law_probe(pair, ev, Xin);
    law.rows.push_back({ev, row.value, row.predicted, row.ratio});
    last_ratio = row.ratio;
  }
  csv_write(law, cm.out("eigen_boundary.csv").string());
  ok = ok && std::abs(last_ratio - 1.0) <= a.tol_boundary;

  if (a.refine) {
    EigenConfig ec2 = ec;
    ec2.grid_nodes = 2 * (static_cast<int>(pair.grid.size()) - 1);
    RadialEigenpair fine = solve_eigenpair(a.n, a.s, ec2);
    const double shift = std::abs(fine.lambda - pair.lambda) / pair.lambda;
    params["refine_shift"] = format_g17(shift);
    ok = ok && shift < a.tol_refine;
  }

  if (a.check_distributional) {
    CsvTable dist;
    stamp(dist, "eigen", params);
    dist.header = {"eps", "lhs", "rhs", "rel_err"};
    std::vector<int> alpha(a.n, 0);
    alpha[0] = a.alpha;
    std::vector<double> center(a.n, 0.0);
    center[0] = -0.4;
    double last_rel = 0.0;
    for (double ev : {4e-2, 2e-2, 1e-2}) {
      DistributionalCheck chk = verify_distributional(pair, alpha, ev, center, 0.3, cm.quad);
      dist.rows.push_back({ev, chk.lhs, chk.rhs, chk.rel_err});
      last_rel = chk.rel_err;
    }
    csv_write(dist, cm.out("eigen_distributional.csv").string());
    ok = ok && last_rel <= a.tol_distributional;
  }

  RunManifest man;
  man.command = "eigen";
  man.params = params;
  finish_manifest(man, prof, t0);
  man.write(cm.out("eigen.manifest.json").string());

  std::printf("lambda=%s kappa=%s boundary_ratio=%s -> %s\n", format_g17(pair.lambda).c_str(),
              format_g17(pair.kappa_star).c_str(), format_g17(last_ratio).c_str(),
              ok ? "ok" : "FAIL");
  return ok ? 0 : 1;
}

// ---- approximate ----------------------------------------------------------

struct ApproxArgs {
  bool caloric = false;
  bool d0 = false;
  bool logistic = false;
  int n_space = 1;
  double s = 0.5;
  std::string target;
  int k = 0;
  double eps = 0.05;
  double residual_tol = 1e-3;
  double box = 0.7;
  int grid = 17;
  int samples = 8;
  unsigned seed = 12345;
};

// polynomial terms over named axes; supports "0", "x^2", "t", "1+0.25*x^2",
// "2*x*t^2", leading sign, whitespace
std::vector<Monomial> parse_target(const std::string& text,
                                   const std::map<char, int>& axis_of, int nu) {
  std::vector<Monomial> out;
  std::string src;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) src += c;
  if (src.empty()) throw CLI::ValidationError("--target is empty");
  size_t pos = 0;
  while (pos < src.size()) {
    double sign = 1.0;
    while (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) {
      if (src[pos] == '-') sign = -sign;
      ++pos;
    }
    if (pos >= src.size()) throw CLI::ValidationError("--target: dangling sign");
    Monomial m;
    m.coef = sign;
    m.iota.assign(nu, 0);
    bool saw_factor = false;
    bool want_factor = true;
    while (pos < src.size() && want_factor) {
      if (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.') {
        size_t used = 0;
        m.coef *= std::stod(src.substr(pos), &used);
        pos += used;
        saw_factor = true;
      } else if (axis_of.count(src[pos])) {
        const int ax = axis_of.at(src[pos]);
        ++pos;
        int p = 1;
        if (pos < src.size() && src[pos] == '^') {
          ++pos;
          size_t used = 0;
          p = std::stoi(src.substr(pos), &used);
          if (p < 0) throw CLI::ValidationError("--target: negative power");
          pos += used;
        }
        m.iota[ax] += p;
        saw_factor = true;
      } else {
        throw CLI::ValidationError(std::string("--target: unexpected character '") + src[pos] +
                                   "'");
      }
      want_factor = pos < src.size() && src[pos] == '*';
      if (want_factor) ++pos;
    }
    if (!saw_factor) throw CLI::ValidationError("--target: empty term");
    out.push_back(std::move(m));
  }
  return out;
}

int run_approximate(const Common& cm, const ApproxArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.caloric == a.d0)
    throw CLI::ValidationError("choose exactly one of --caloric / --d0");
  if (a.logistic && !a.caloric)
    throw CLI::ValidationError("--logistic requires --caloric");

  OperatorSpec spec;
  std::map<char, int> axis_of;
  if (a.caloric) {
    spec = caloric_spec(a.s, a.n_space);
    axis_of['t'] = 0;
    axis_of['x'] = 1;  // first spatial axis
  } else {
    spec.nonlocal_terms = {{1.0, a.s, a.n_space}};
    spec.validate();
    axis_of['x'] = 0;
  }
  const int nu = spec.total_dim();
  const auto monomials = parse_target(a.target, axis_of, nu);

  std::map<std::string, std::string> params = {
      {"mode", a.logistic ? "logistic" : (a.caloric ? "caloric" : "d0")},
      {"n_space", std::to_string(a.n_space)},
      {"s", format_g17(a.s)},
      {"target", a.target},
      {"k", std::to_string(a.k)},
      {"eps", format_g17(a.eps)},
      {"residual_tol", format_g17(a.residual_tol)},
      {"box", format_g17(a.box)},
      {"grid", std::to_string(a.grid)},
      {"samples", std::to_string(a.samples)},
      {"seed", std::to_string(a.seed)}};

  EigenConfig ec;
  ec.quad = cm.quad;
  std::vector<std::shared_ptr<const RadialEigenpair>> bases;
  for (const auto& nt : spec.nonlocal_terms)
    bases.push_back(std::make_shared<RadialEigenpair>(solve_eigenpair(nt.n, nt.s, ec)));

  ApproximatorConfig cfg;
  cfg.box_half_width = a.box;
  cfg.grid_per_axis = a.grid;
  cfg.residual_samples = a.samples;
  cfg.seed = a.seed;
  cfg.quad = cm.quad;

  ApproximationResult result;
  double logistic_residual = -1.0;
  if (a.logistic) {
    auto sigma_eval = [&monomials](std::span<const double> x) {
      double acc = 0.0;
      for (const auto& m : monomials) {
        double v = m.coef;
        for (size_t i = 0; i < x.size(); ++i)
          for (int p = 0; p < m.iota[i]; ++p) v *= x[i];
        acc += v;
      }
      return acc;
    };
    ScalarField sigma;
    sigma.dim = nu;
    sigma.eval = sigma_eval;
    sigma.support_radius = 10.0 * a.box;
    LogisticReport rep = logistic_resource(sigma, a.s, a.k, a.eps, bases, cfg);
    result = rep.u_eps;
    logistic_residual = rep.logistic_residual;
    params["positive"] = rep.positive ? "1" : "0";
    params["min_value"] = format_g17(rep.min_value);
    params["logistic_residual"] = format_g17(rep.logistic_residual);
  } else {
    result = approximate_polynomial(spec, monomials, a.k, a.eps, bases, cfg);
  }

  // result file + error map + residual samples
  {
    std::ofstream f(cm.out("result.json"));
    f << result_to_json(result) << "\n";
  }
  const auto f_eval = [&monomials](std::span<const double> x) {
    double acc = 0.0;
    for (const auto& m : monomials) {
      double v = m.coef;
      for (size_t i = 0; i < x.size(); ++i)
        for (int p = 0; p < m.iota[i]; ++p) v *= x[i];
      acc += v;
    }
    return acc;
  };

  CsvTable grid;
  stamp(grid, "approximate", params);
  grid.header = nu == 2 ? std::vector<std::string>{"t", "x"} : std::vector<std::string>{"x"};
  grid.header.insert(grid.header.end(), {"u", "f", "abs_err"});
  {
    std::vector<int> odo(nu, 0);
    std::vector<double> pt(nu);
    for (;;) {
      for (int i = 0; i < nu; ++i)
        pt[i] = a.grid == 1 ? 0.0 : -a.box + 2.0 * a.box * odo[i] / (a.grid - 1);
      const double uv = result.stages.empty() ? 0.0 : result.value(pt);
      const double fv = f_eval(pt);
      std::vector<double> row(pt.begin(), pt.end());
      row.insert(row.end(), {uv, fv, std::abs(uv - fv)});
      grid.rows.push_back(std::move(row));
      int i = 0;
      while (i < nu && ++odo[i] >= a.grid) odo[i++] = 0;
      if (i == nu) break;
    }
  }
  csv_write(grid, cm.out("error_grid.csv").string());

  CsvTable resid;
  stamp(resid, "approximate", params);
  resid.header = grid.header;
  resid.header.resize(nu);
  resid.header.push_back("lambda_residual");
  if (!result.stages.empty()) {
    const ScalarField uf = result.as_field();
    const double radius =
        std::min(result.region_radius, a.box * std::sqrt(static_cast<double>(nu)));
    std::mt19937 rng(a.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> y(nu);
    for (int p = 0; p < a.samples; ++p) {
      for (;;) {
        double r2 = 0.0;
        for (double& v : y) {
          v = U(rng);
          r2 += v * v;
        }
        if (r2 <= 1.0) break;
      }
      for (double& v : y) v *= radius;
      const double rv = lambda_residual_at(spec, uf, y, cm.quad).value;
      std::vector<double> row(y.begin(), y.end());
      row.push_back(rv);
      resid.rows.push_back(std::move(row));
    }
  }
  csv_write(resid, cm.out("residual.csv").string());

  params["achieved_ck_error"] = format_g17(result.achieved_ck_error);
  params["lambda_residual"] = format_g17(result.lambda_residual);
  params["region_radius"] = format_g17(result.region_radius);
  params["met"] = result.met ? "1" : "0";

  RunManifest man;
  man.command = "approximate";
  man.params = params;
  finish_manifest(man, grid, t0);
  man.write(cm.out("approximate.manifest.json").string());

  const bool ok = result.met && result.lambda_residual <= a.residual_tol;
  const std::string extra =
      logistic_residual >= 0.0 ? " logistic=" + format_g17(logistic_residual) : std::string();
  std::printf("err=%s residual=%s%s -> %s\n", format_g17(result.achieved_ck_error).c_str(),
              format_g17(result.lambda_residual).c_str(), extra.c_str(),
              ok ? "ok" : "FAIL (best achieved reported)");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional approximation toolbox"};
  app.require_subcommand(1);
  app.fallthrough();

  Common cm;
  app.add_option("--config", cm.config_path, "key=value config file (quad.* keys)");
  app.add_option("--out", cm.out_dir, "output directory")->capture_default_str();

  GreenArgs ga;
  auto* green = app.add_subcommand("green-verify", "kernel limit and closed-form checks");
  green->add_option("--n", ga.n, "dimension")->check(CLI::IsMember({1, 2}));
  green->add_option("--s", ga.s, "fractional order in (0,1)")
      ->required()
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  green->add_option("--eps-min", ga.eps_min, "smallest boundary distance");
  green->add_option("--eps-max", ga.eps_max, "largest boundary distance");
  green->add_option("--eps-count", ga.eps_count, "geometric sequence length")
      ->check(CLI::PositiveNumber);
  green->add_option("--pairs", ga.pairs, "closed-form sample pairs");
  green->add_option("--seed", ga.seed, "sampling seed");

  EigenArgs ea;
  auto* eig = app.add_subcommand("eigen", "principal eigenpair tables");
  eig->add_option("--n", ea.n, "dimension")->check(CLI::IsMember({1, 2}));
  eig->add_option("--s", ea.s, "fractional order in (0,1)")
      ->required()
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  eig->add_flag("--refine", ea.refine, "re-solve on a doubled grid and compare");
  eig->add_flag("--check-distributional", ea.check_distributional,
                "emit the distributional boundary-limit table");
  eig->add_option("--alpha", ea.alpha, "derivative order along the boundary axis")
      ->check(CLI::Range(0, 1));
  eig->add_option("--boundary-eps", ea.boundary_eps, "smallest boundary-law probe distance");

  ApproxArgs aa;
  auto* ap = app.add_subcommand("approximate", "build an operator-annihilated approximant");
  ap->add_flag("--caloric", aa.caloric, "time + fractional diffusion operator");
  ap->add_flag("--d0", aa.d0, "purely fractional operator (no local axis)");
  ap->add_flag("--logistic", aa.logistic, "treat target as a resource; report positivity");
  ap->add_option("--n", aa.n_space, "spatial dimension")->check(CLI::IsMember({1}));
  ap->add_option("--s", aa.s, "fractional order in (0,1)")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  ap->add_option("--target", aa.target, "polynomial in x (and t when --caloric)")->required();
  ap->add_option("--k", aa.k, "number of matched derivatives")->check(CLI::Range(0, 2));
  ap->add_option("--eps", aa.eps, "target accuracy")->check(CLI::PositiveNumber);
  ap->add_option("--residual-tol", aa.residual_tol, "operator residual tolerance");
  ap->add_option("--box", aa.box, "evaluation box half-width");
  ap->add_option("--grid", aa.grid, "grid points per axis")->check(CLI::Range(2, 65));
  ap->add_option("--samples", aa.samples, "residual sample count");
  ap->add_option("--seed", aa.seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cm.load();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  try {
    if (green->parsed()) return run_green_verify(cm, ga);
    if (eig->parsed()) return run_eigen(cm, ea);
    if (ap->parsed()) return run_approximate(cm, aa);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "argument error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return 1;
  }
  return 2;
}
