#include "cdch/capacity.hpp"
#include "cdch/errors.hpp"
#include "cdch/experiments.hpp"
#include "cdch/io.hpp"
#include "cdch/manifest.hpp"
#include "cdch/parallel.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace cdch::cli {

namespace {

json to_json(const Eigen::Matrix2d& m) { return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}; }
json to_json(const Point& p) { return {p.x(), p.y()}; }

json pairs(const std::vector<std::pair<double, double>>& v) {
  json out = json::array();
  for (const auto& [a, b] : v) out.push_back({a, b});
  return out;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Artifacts are rendered into memory first so a run either writes all of
// them or none.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, const std::function<void(std::ostream&)>& write) {
    std::ostringstream s;
    write(s);
    files.emplace_back(name, s.str());
  }
};

struct Context {
  const json& manifest;
  const json numerics;
  const RunOptions& options;
  SolverSettings solver;
  Artifacts artifacts;

  Context(const json& m, const RunOptions& o)
      : manifest(m), numerics(m.value("numerics", json::object())), options(o) {
    solver = parse_solver(numerics);
  }

  DomainSpec domain() const {
    return manifest.contains("domain") ? parse_domain(manifest.at("domain")) : DomainSpec{};
  }
  MeasureSpec measure() const {
    // f = 1 unless the manifest says otherwise
    return manifest.contains("measure") ? parse_measure(manifest.at("measure"))
                                        : MeasureSpec::density(Density::constant(1.0));
  }
  int resolution() const { return numerics.at("resolution").get<int>(); }
  double alpha() const { return numerics.at("alpha").get<double>(); }
  std::optional<PeriodicSpec> periodic() const {
    if (!manifest.contains("coefficient") || !manifest.at("coefficient").contains("periodic")) {
      return std::nullopt;
    }
    return parse_periodic(manifest.at("coefficient").at("periodic"));
  }
  CoefficientField coefficient(const DomainGrid& grid) const {
    if (manifest.contains("coefficient")) {
      const json& c = manifest.at("coefficient");
      if (c.contains("matrix")) {
        const json& a = c.at("matrix");
        Eigen::Matrix2d m;
        m << a[0][0].get<double>(), a[0][1].get<double>(), a[1][0].get<double>(),
            a[1][1].get<double>();
        return CoefficientField::constant(grid.nx, grid.ny, m);
      }
      if (const auto p = periodic()) {
        return oscillating_coefficient(make_periodic(*p), numerics.value("epsilon", 1.0), grid);
      }
    }
    return CoefficientField::identity(grid.nx, grid.ny);
  }
  std::vector<double> list(const char* key) const {
    if (!numerics.contains(key)) return {};
    const json& v = numerics.at(key);
    if (v.is_number()) return {v.get<double>()};
    return v.get<std::vector<double>>();
  }
};

json grid_json(const DomainGrid& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"h", g.h}, {"origin", to_json(g.origin)}};
}

json solution_json(const FieldSolution& u) {
  return {{"max_u", u.values.maxCoeff()},
          {"min_u", u.values.minCoeff()},
          {"energy", u.energy},
          {"residual_norm", u.residual_norm},
          {"iterations", u.iterations}};
}

void export_field(Context& ctx, const DomainGrid& g, const Eigen::VectorXd& u,
                  const std::string& stem, const std::string& title) {
  ctx.artifacts.add(stem + ".csv", [&](std::ostream& o) { write_field_csv(o, g, u); });
  ctx.artifacts.add(stem + ".svg", [&](std::ostream& o) { write_heatmap_svg(o, g, u, title); });
}

json run_solve(Context& ctx) {
  const DomainGrid g = build_grid(ctx.domain(), ctx.resolution());
  const CoefficientField a = ctx.coefficient(g);
  const FieldSolution u = solve_dirichlet(g, a, ctx.measure(), ctx.solver);
  export_field(ctx, g, u.values, "solution", "u");
  json r = solution_json(u);
  r["grid"] = grid_json(g);
  r["lambda"] = a.lambda;
  r["L"] = a.L;
  return r;
}

json run_morrey(Context& ctx) {
  const DomainGrid g = build_grid(ctx.domain(), ctx.resolution());
  const MeasureSpec mu = ctx.measure();
  const MorreyReport rep = morrey_norm(mu, g, ctx.alpha());
  json r = {{"alpha", rep.alpha},
            {"norm", rep.divergent ? json(nullptr) : json(rep.norm)},
            {"divergent", rep.divergent},
            {"argmax_center", to_json(rep.argmax_center)},
            {"argmax_radius", rep.argmax_radius},
            {"grid", grid_json(g)}};
  std::vector<std::vector<double>> rows;
  for (std::size_t b = 0; b < rep.band_radius.size(); ++b) {
    rows.push_back({rep.band_radius[b], rep.band_sup[b]});
  }
  r["bands"] = rows;
  ctx.artifacts.add("morrey.csv", [&](std::ostream& o) { write_csv(o, {"radius", "sup"}, rows); });
  if (ctx.numerics.contains("q")) {
    if (mu.terms.size() != 1 || mu.terms.front().kind != TermKind::grid_density) {
      throw InvalidParams("numerics.q needs a measure with a single density term");
    }
    const double q = ctx.numerics.at("q").get<double>();
    const MorreyReport dens = morrey_from_density(mu.terms.front().density, g, q, ctx.alpha());
    r["q"] = q;
    r["density_bound"] = dens.divergent ? json(nullptr) : json(dens.norm);
  }
  return r;
}

json run_capacity(Context& ctx) {
  const DomainSpec d = ctx.domain();
  CondenserSpec c = CondenserSpec::disks(d.center, d.inner_radius, d.radius);
  c.k_center = d.inner_center;
  const double cap = variational_capacity(c, ctx.resolution(), ctx.solver);
  json r = {{"capacity", cap}, {"resolution", ctx.resolution()}};
  if ((d.inner_center - d.center).norm() == 0.0) {
    r["annulus_reference"] = 2.0 * std::numbers::pi / std::log(d.radius / d.inner_radius);
  }
  return r;
}

ScanOptions scan_options(const Context& ctx) {
  ScanOptions s;
  s.samples = ctx.numerics.value("samples", s.samples);
  s.scales = ctx.numerics.value("scales", s.scales);
  s.radii = ctx.list("radii");
  s.seed = ctx.options.seed;
  s.solver = ctx.solver;
  return s;
}

json run_scan(Context& ctx, bool capacity) {
  const DomainGrid g = build_grid(ctx.domain(), ctx.resolution());
  const ScanOptions s = scan_options(ctx);
  const CdcReport rep = capacity ? cdc_scan(g, s) : vdc_scan(g, s);
  std::vector<std::vector<double>> rows;
  for (const auto& x : rep.samples) rows.push_back({x.xi.x(), x.xi.y(), x.R, x.ratio});
  ctx.artifacts.add("scan.csv", [&](std::ostream& o) { write_csv(o, {"x", "y", "R", "ratio"}, rows); });
  std::vector<double> radii, minima;
  for (const auto& [R, m] : rep.minima_by_radius) {
    radii.push_back(R);
    minima.push_back(m);
  }
  ctx.artifacts.add("scan.svg", [&](std::ostream& o) {
    write_loglog_svg(o, radii, minima, 0.0, 0.0, "R", "min ratio",
                     capacity ? "capacity density by scale" : "volume density by scale");
  });
  return {{"gamma_min", rep.gamma_min},
          {"scale_variation", rep.scale_variation},
          {"minimum_spread", rep.minimum_spread},
          {"minima_by_radius", pairs(rep.minima_by_radius)},
          {"samples", rep.samples.size()},
          {"seed", s.seed},
          {"grid", grid_json(g)}};
}

json run_hardy(Context& ctx) {
  HardyOptions opt;
  opt.solver.tol = std::min(opt.solver.tol, ctx.solver.tol);
  opt.solver.precond = ctx.solver.precond;
  opt.solver.max_iter = ctx.solver.max_iter;
  std::vector<int> resolutions;
  if (ctx.numerics.contains("resolutions")) {
    resolutions = ctx.numerics.at("resolutions").get<std::vector<int>>();
  } else {
    resolutions = {ctx.resolution()};
  }
  const DomainSpec d = ctx.domain();
  const HardyReport rep = hardy_refinement(d, resolutions, opt);
  std::vector<std::vector<double>> rows;
  for (const auto& [res, c] : rep.trace) rows.push_back({static_cast<double>(res), c});
  ctx.artifacts.add("hardy.csv", [&](std::ostream& o) { write_csv(o, {"resolution", "estimate"}, rows); });
  const DomainGrid g = build_grid(d, resolutions.back());
  if (rep.eigenfield.size() == g.node_count()) {
    ctx.artifacts.add("eigenfield.svg", [&](std::ostream& o) {
      write_heatmap_svg(o, g, rep.eigenfield, "Hardy eigenfield");
    });
  }
  json trace = json::array();
  for (const auto& [res, c] : rep.trace) trace.push_back({{"resolution", res}, {"estimate", c}});
  return {{"estimate", rep.estimate},
          {"iterations", rep.iterations},
          {"converged", rep.converged},
          {"trace", trace}};
}

json run_barrier(Context& ctx) {
  const DomainGrid g = build_grid(ctx.domain(), ctx.resolution());
  const std::string kind = ctx.numerics.value("barrier", std::string("distance"));
  const Eigen::VectorXd U =
      kind == "torsion" ? torsion_power(g, ctx.alpha(), ctx.solver) : distance_power(g, ctx.alpha());
  const BarrierReport rep = verify_strong_barrier(g, U, ctx.alpha());
  export_field(ctx, g, U, "barrier", kind + " barrier");
  return {{"barrier", kind},         {"c", rep.c},
          {"C", rep.C},              {"supersolution", rep.supersolution},
          {"worst", to_json(rep.worst)}, {"checked", rep.checked}};
}

json run_cell(Context& ctx) {
  const PeriodicSpec spec = *ctx.periodic();
  const PeriodicCoefficient a = make_periodic(spec);
  const bool with_potentials = ctx.numerics.value("potentials", true);
  const CellSolution cell = solve_cell(a, ctx.solver, with_potentials);
  const int n = cell.n;
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < n * n; ++k) {
    std::vector<double> row = {static_cast<double>(k % n) / n, static_cast<double>(k / n) / n,
                               cell.chi[0][k], cell.chi[1][k]};
    if (with_potentials) {
      row.push_back(cell.potentials[0].v[k]);
      row.push_back(cell.potentials[1].v[k]);
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> header = {"y1", "y2", "chi1", "chi2"};
  if (with_potentials) header.insert(header.end(), {"V112", "V212"});
  ctx.artifacts.add("cell.csv", [&](std::ostream& o) { write_csv(o, header, rows); });
  ctx.artifacts.add("chi1.svg", [&](std::ostream& o) { write_torus_heatmap_svg(o, cell.chi[0], n, "chi_1"); });
  json r = {{"kind", to_string(spec.kind)},
            {"n", n},
            {"A0", to_json(cell.A0)},
            {"residuals", cell.residuals},
            {"iterations", cell.iterations},
            {"dual_A0_prediction", to_json(Eigen::Matrix2d(cell.A0.transpose() / cell.A0.determinant()))}};
  if (with_potentials) {
    ctx.artifacts.add("flux_potential.svg", [&](std::ostream& o) {
      write_torus_heatmap_svg(o, cell.potentials[0].v, n, "V_112");
    });
    json pots = json::array();
    for (int i = 0; i < 2; ++i) {
      pots.push_back({{"sup", cell.potentials[i].sup},
                      {"divergence_error", cell.potentials[i].divergence_error},
                      {"iterations", cell.potentials[i].iterations}});
    }
    r["potentials"] = pots;
  }
  return r;
}

json run_rate(Context& ctx) {
  const PeriodicCoefficient a = make_periodic(*ctx.periodic());
  ConvergenceOptions opt;
  opt.cells_per_period = ctx.numerics.value("cells_per_period", opt.cells_per_period);
  opt.solver = ctx.solver;
  const RateReport rep = convergence_study(ctx.domain(), a, ctx.measure(), ctx.list("eps_list"), opt);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
    rows.push_back({rep.epsilons[k], rep.sup_errors[k], rep.inner_errors[k], rep.outer_errors[k],
                    static_cast<double>(rep.resolutions[k])});
  }
  ctx.artifacts.add("rate.csv", [&](std::ostream& o) {
    write_csv(o, {"epsilon", "sup_error", "inner_error", "outer_error", "resolution"}, rows);
  });
  ctx.artifacts.add("rate.svg", [&](std::ostream& o) {
    write_loglog_svg(o, rep.epsilons, rep.sup_errors, rep.fitted_rate, rep.constant, "epsilon",
                     "sup error", "homogenization error");
  });
  return {{"epsilons", rep.epsilons},
          {"sup_errors", rep.sup_errors},
          {"inner_errors", rep.inner_errors},
          {"outer_errors", rep.outer_errors},
          {"resolutions", rep.resolutions},
          {"fitted_rate", rep.fitted_rate},
          {"constant", rep.constant},
          {"dropped_first", rep.dropped_first},
          {"discretization_floor", rep.discretization_floor},
          {"monotone", rep.monotone},
          {"strictly_decreasing", rep.strictly_decreasing},
          {"A0", to_json(rep.A0)},
          {"comparison_resolution", rep.comparison_resolution},
          {"reference_resolution", rep.reference_resolution}};
}

json run_hoelder(Context& ctx) {
  const DomainGrid g = build_grid(ctx.domain(), ctx.resolution());
  const HoelderStudy st = hoelder_estimate_study(g, ctx.coefficient(g), ctx.measure(), ctx.alpha(),
                                                 ctx.list("alpha0"), ctx.solver);
  export_field(ctx, g, st.solution.values, "solution", "u");
  std::vector<std::vector<double>> rows;
  json ladder = json::array();
  for (std::size_t k = 0; k < st.ladder.size(); ++k) {
    const auto& h = st.ladder[k];
    rows.push_back({h.alpha, h.seminorm, h.fitted_alpha, st.ratios[k]});
    ladder.push_back({{"alpha0", h.alpha},
                      {"seminorm", h.seminorm},
                      {"fitted_alpha", h.fitted_alpha},
                      {"ratio", st.ratios[k]},
                      {"witness", {to_json(h.witness_x), to_json(h.witness_y)}}});
  }
  ctx.artifacts.add("hoelder.csv", [&](std::ostream& o) {
    write_csv(o, {"alpha0", "seminorm", "fitted_alpha", "ratio"}, rows);
  });
  if (!st.ladder.empty()) {
    const auto& h = st.ladder.front();
    std::vector<double> s, m;
    for (const auto& [sep, osc] : h.modulus) {
      s.push_back(sep);
      m.push_back(osc);
    }
    ctx.artifacts.add("modulus.svg", [&](std::ostream& o) {
      write_loglog_svg(o, s, m, h.fitted_alpha, h.fit_constant, "separation", "oscillation",
                       "modulus of continuity");
    });
  }
  json r = solution_json(st.solution);
  r["morrey_norm"] = st.morrey.norm;
  r["lambda"] = st.lambda;
  r["ladder"] = ladder;
  r["grid"] = grid_json(g);
  return r;
}

json run_radial(Context& ctx) {
  const RadialReport rep =
      radial_example(ctx.numerics.at("n").get<int>(), ctx.alpha(), ctx.numerics.at("R").get<double>(),
                     ctx.numerics.value("profile_samples", 2048));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < rep.r.size(); ++k) rows.push_back({rep.r[k], rep.u[k]});
  ctx.artifacts.add("radial.csv", [&](std::ostream& o) { write_csv(o, {"r", "u"}, rows); });
  return {{"n", rep.n},
          {"alpha", rep.alpha},
          {"R", rep.R},
          {"energy", rep.energy},
          {"energy_quadrature", rep.energy_quadrature},
          {"dirichlet_energy", rep.dirichlet_energy},
          {"c_alpha_norm", rep.c_alpha_norm},
          {"seminorm", rep.seminorm},
          {"full_norm", rep.full_norm}};
}

json dispatch(Context& ctx, const std::string& command) {
  if (command == "solve") return run_solve(ctx);
  if (command == "morrey") return run_morrey(ctx);
  if (command == "capacity") return run_capacity(ctx);
  if (command == "cdc-scan") return run_scan(ctx, true);
  if (command == "vdc-scan") return run_scan(ctx, false);
  if (command == "hardy") return run_hardy(ctx);
  if (command == "barrier") return run_barrier(ctx);
  if (command == "cell") return run_cell(ctx);
  if (command == "rate") return run_rate(ctx);
  if (command == "hoelder") return run_hoelder(ctx);
  if (command == "radial") return run_radial(ctx);
  throw InvalidSpec("unknown command '" + command + "'");
}

// Restores the worker count on every exit path.
struct ThreadScope {
  int saved;
  explicit ThreadScope(int n) : saved(thread_count()) { set_thread_count(std::max(1, n)); }
  ~ThreadScope() { set_thread_count(saved); }
};

}  // namespace

RunResult run(const json& manifest, const RunOptions& options) {
  RunResult result;
  json& report = result.report;
  report["command"] = manifest.is_object() && manifest.contains("command") ? manifest["command"] : json(nullptr);
  report["inputs"] = manifest;
  report["results"] = json::object();
  report["errors"] = json::array();
  report["provenance"] = {
      {"manifest_hash", "fnv1a64:" + hex64(fnv1a(manifest.dump()))},
      {"versions",
       {{"cdch", std::string(kVersion)},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
      {"seed", options.seed},
      {"threads", std::max(1, options.threads)},
      {"timestamp", timestamp()}};

  if (options.out) {
    result.out_dir = *options.out;
  } else if (manifest.is_object() && manifest.contains("output") && manifest["output"].is_string()) {
    result.out_dir = manifest["output"].get<std::string>();
  } else {
    result.out_dir = "cdch_out";
  }

  Artifacts artifacts;
  const auto problems = validate(manifest);
  if (!problems.empty()) {
    for (const auto& p : problems) report["errors"].push_back({{"code", "ValidationError"}, {"message", p}});
    result.status = 2;
  } else {
    ThreadScope threads(options.threads);
    try {
      Context ctx(manifest, options);
      report["results"] = dispatch(ctx, manifest["command"].get<std::string>());
      artifacts = std::move(ctx.artifacts);
    } catch (const Error& e) {
      report["errors"].push_back({{"code", e.code()}, {"message", e.what()}});
      result.status = e.numerical() ? 3 : 2;
    } catch (const json::exception& e) {
      report["errors"].push_back({{"code", "InvalidSpec"}, {"message", e.what()}});
      result.status = 2;
    }
  }

  if (options.write_files) {
    std::error_code ec;
    std::filesystem::create_directories(result.out_dir, ec);
    auto write = [&](const std::string& name, const std::string& body) {
      std::ofstream f(result.out_dir / name, std::ios::binary);
      f << body;
      return static_cast<bool>(f);
    };
    for (const auto& [name, body] : artifacts.files) {
      if (write(name, body)) result.artifacts.push_back(name);
    }
    if (!write("report.json", report.dump(2) + "\n") && result.status == 0) result.status = 2;
  } else {
    for (const auto& [name, body] : artifacts.files) result.artifacts.push_back(name);
  }
  return result;
}

}  // namespace cdch::cli
