#include "commands.hpp"

#include "scenario.hpp"

#include "polarset/io.hpp"
#include "polarset/parallel.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace polarset::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

json point_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(num(p[i]));
  return a;
}

struct Output {
  json summary = json::object();
  std::vector<Check> checks;
  std::map<std::string, std::string> files;  // artifact name -> contents

  void add(const std::vector<Check>& more) { checks.insert(checks.end(), more.begin(), more.end()); }
  void add(Check c) { checks.push_back(std::move(c)); }
};

std::string measure_csv(const DiscreteMeasure& mu) {
  std::ostringstream os;
  write_measure_csv(os, mu);
  return os.str();
}

std::string field_csv(std::span<const Point> points, std::span<const double> values) {
  std::ostringstream os;
  write_field_csv(os, points, values);
  return os.str();
}

std::vector<Point> build_cloud(const Scenario& sc, std::uint64_t seed) {
  if (!sc.cloud.given) throw InputError("scenario: missing field 'cloud'");
  if (sc.cloud_random == 0) return sc.probes(sc.cloud);
  std::mt19937_64 rng(seed);
  const auto& [lo, hi] = *sc.cloud.grid;
  std::vector<Point> out;
  for (std::size_t n = 0; n < sc.cloud_random; ++n) {
    Point x(lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit_uniform(rng);
    out.push_back(x);
  }
  return out;
}

PointCloud checked_cloud(const Scenario& sc, std::uint64_t seed) {
  PointCloud cloud{build_cloud(sc, seed)};
  cloud.validate();
  if (cloud.size() < 3) throw InputError("scenario: the cloud needs at least 3 points");
  return cloud;
}

json triangle_json(const TriangleReport& t, const PointCloud& cloud) {
  json w = json::array();
  for (auto i : t.worst_triple) w.push_back(point_json(cloud.points[i]));
  return {{"constant_C", num(t.constant_C)}, {"gamma_min", num(t.gamma_min)}, {"worst_triple", w}};
}

Output cmd_check_triangle(const Scenario& sc, std::uint64_t seed) {
  Output out;
  const auto cloud = checked_cloud(sc, seed);
  const auto t = triangle_constant(sc.kernel, cloud);
  out.summary = triangle_json(t, cloud);
  out.summary["points"] = cloud.size();
  out.add(check_ge("triangle constant >= 1", t.constant_C, 1.0));
  out.add(check_lt("triangle constant finite", t.constant_C, kInfinity));
  return out;
}

Output cmd_metric(const Scenario& sc, std::uint64_t seed) {
  Output out;
  const auto cloud = checked_cloud(sc, seed);
  const auto t = triangle_constant(sc.kernel, cloud);
  const double gamma = sc.metric_gamma > 0.0 ? sc.metric_gamma : std::max(t.gamma_min, sc.kernel.gamma);
  const auto table = chain_metric(sc.kernel, cloud, gamma);
  const double violation = max_triangle_violation(table.d);
  const double comparability = comparability_check(sc.kernel, cloud, table.d, gamma);

  std::ostringstream csv;
  csv << "i,j,rho,d,G\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(j);
      csv << i << ',' << j << ',' << format_double(table.rho(a, b)) << ',' << format_double(table.d(a, b)) << ','
          << format_double(eval_kernel(sc.kernel, cloud.points[i], cloud.points[j])) << '\n';
    }
  }
  out.files["metric.csv"] = csv.str();
  out.summary = triangle_json(t, cloud);
  out.summary["gamma"] = num(gamma);
  out.summary["below_gamma_min"] = table.below_gamma_min;
  out.summary["triangle_violation"] = num(violation);
  out.summary["comparability"] = num(comparability);
  out.add(check_le("chain metric triangle violation", violation, 1e-12));
  out.add(check_lt("comparability constant finite", comparability, kInfinity));
  return out;
}

Output cmd_capacity(const Scenario& sc) {
  Output out;
  const auto targets = sc.probes(sc.capacity_targets);
  if (targets.empty()) throw InputError("scenario: field 'capacity.targets' yields no points");
  const auto est = capacity_lp(sc.kernel, targets, targets);
  const auto field = potential_field(sc.kernel, est.optimal_measure, targets, true);
  out.files["capacity_measure.csv"] = measure_csv(est.optimal_measure);
  out.files["capacity_probes.csv"] = field_csv(targets, field.values);
  out.summary = {{"capacity", num(est.value)},          {"dual_value", num(est.dual_value)},
                 {"constraint_gap", num(est.constraint_gap)}, {"iterations", est.iterations},
                 {"targets", targets.size()},           {"atoms", est.optimal_measure.size()}};
  out.add(check_ge("witness potential on targets", field.min(), 1.0 - 1e-9));
  out.add(check_close("primal equals dual", est.value, est.dual_value, 1e-9));
  return out;
}

// |x - x_n| < c |x - y| with c = 1 + (M+2)/M (8/3 < 3 for M = 3).
double core_constant(double shell_base) { return shell_base == 3.0 ? 3.0 : 1.0 + (shell_base + 2.0) / shell_base; }

Output cmd_sweep(const Scenario& sc, std::uint64_t seed) {
  Output out;
  if (sc.sweep_set.empty()) throw InputError("scenario: missing field 'sweep'");
  const auto& A = sc.set(sc.sweep_set);
  const auto mu = sc.measure(sc.sweep_measure, seed);
  auto probes = sc.probes(sc.sweep_probes);
  std::erase_if(probes, [&](const Point& x) { return !contains(A, x); });
  if (probes.empty()) throw InputError("scenario: no sweep probe lies in the set");
  const auto res = sweep_off_set(sc.kernel, A, std::nullopt, mu, sc.shell_base);
  const double factor = res.guaranteed_factor;
  const auto gmu = potential_field(sc.kernel, mu, probes);
  const auto gnu = potential_field(sc.kernel, res.measure, probes);

  std::ostringstream csv;
  csv << "probe,G_mu,G_nu,ratio,bound\n";
  double worst = kInfinity;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double ratio = gnu.values[i] / gmu.values[i];
    worst = std::min(worst, gnu.values[i] - factor * gmu.values[i]);
    csv << i << ',' << format_double(gmu.values[i]) << ',' << format_double(gnu.values[i]) << ','
        << format_double(ratio) << ',' << format_double(factor) << '\n';
  }
  double core = 0.0;
  for (const auto& a : res.assignments) {
    for (const auto& x : probes) core = std::max(core, distance(x, a.center) / distance(x, a.atom));
  }
  out.files["sweep_measure.csv"] = measure_csv(res.measure);
  out.files["sweep_probes.csv"] = csv.str();
  out.summary = {{"atoms_in", mu.size()},         {"atoms_out", res.measure.size()},
                 {"mass_in", num(mu.mass())},     {"mass_out", num(res.measure.mass())},
                 {"factor", num(factor)},         {"probes", probes.size()},
                 {"core_ratio_max", num(core)}};
  out.add(check_close("mass preserved", res.measure.mass(), mu.mass(), 1e-12));
  out.add(check_ge("G nu - factor G mu on probes", worst, 0.0));
  out.add(check_lt("geometric core ratio", core, core_constant(sc.shell_base)));
  return out;
}

json evans_summary(const EvansResult& r) {
  json pieces = json::array();
  for (const auto& p : r.pieces) {
    pieces.push_back({{"m", p.m},
                      {"probes", p.probes},
                      {"capacity", num(p.capacity)},
                      {"weight", num(p.weight)},
                      {"witness_mass", num(p.witness_mass)},
                      {"witness_level", num(p.witness_level)},
                      {"bound", num(p.bound)},
                      {"probe_min", num(p.probe_min)},
                      {"refinement_n", p.refinement_n}});
  }
  return {{"pieces", pieces}, {"probe_min", num(r.probe_min)}, {"mass", num(r.measure.mass())},
          {"atoms", r.measure.size()}};
}

EvansResult run_evans(const Scenario& sc) {
  if (!sc.fsigma) throw InputError("scenario: missing field 'evans'");
  if (sc.evans_p0.given) return evans_on_countable(sc.kernel, *sc.fsigma, sc.probes(sc.evans_p0), sc.evans);
  return evans_measure(sc.kernel, *sc.fsigma, sc.evans);
}

Output cmd_evans(const Scenario& sc) {
  Output out;
  const auto r = run_evans(sc);
  const auto field = potential_field(sc.kernel, r.measure, r.probes, true);
  out.files["evans_measure.csv"] = measure_csv(r.measure);
  out.files["evans_probes.csv"] = field_csv(r.probes, field.values);
  out.summary = evans_summary(r);
  out.summary["depth"] = sc.evans.depth;
  out.add(r.checks);
  return out;
}

struct ChoquetInputs {
  std::vector<Point> p_probes;
  std::vector<Point> p0;
  std::vector<Point> exterior;
};

ChoquetInputs choquet_inputs(const Scenario& sc) {
  if (!sc.gdelta) throw InputError("scenario: missing field 'choquet'");
  ChoquetInputs in{sc.probes(sc.p_probes), sc.probes(sc.p0), sc.probes(sc.exterior)};
  if (in.p_probes.empty()) throw InputError("scenario: field 'choquet.p_probes' yields no points");
  return in;
}

json trace_json(const ThinningTrace& t) {
  json levels = json::array();
  for (const auto& l : t.levels) {
    levels.push_back({{"n", l.n},
                      {"m", l.m},
                      {"separation", num(l.delta)},
                      {"threshold", num(l.threshold)},
                      {"removed_mass", num(l.removed_mass)},
                      {"removed_atoms", l.removed.size()},
                      {"next_minimum", num(l.next_minimum)}});
  }
  return {{"M", num(t.M)}, {"initial_mass", num(t.initial.mass())}, {"final_mass", num(t.final_measure.mass())},
          {"levels", levels}};
}

Output cmd_choquet(const Scenario& sc) {
  Output out;
  const auto in = choquet_inputs(sc);
  const auto r = choquet_measure(sc.kernel, *sc.gdelta, sc.choquet_depth, in.p_probes, in.p0, in.exterior, sc.choquet);
  const auto interior = potential_field(sc.kernel, r.measure, in.p_probes);
  const auto exterior = potential_field(sc.kernel, r.measure, in.exterior);
  out.files["choquet_measure.csv"] = measure_csv(r.measure);
  out.files["choquet_interior.csv"] = field_csv(in.p_probes, interior.values);
  out.files["choquet_exterior.csv"] = field_csv(in.exterior, exterior.values);

  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"m", l.m}, {"eps", num(l.eps)}, {"mass", num(l.mass)}, {"p_min", num(l.p_min)},
                      {"atoms", l.atoms}});
  }
  json bounds = json::array();
  for (const auto& e : r.exterior) {
    bounds.push_back({{"x", point_json(e.x)}, {"m_x", e.m_x}, {"value", num(e.value)}, {"bound", num(e.bound)}});
  }
  json traces = json::array();
  for (const auto& t : r.traces) traces.push_back(trace_json(t));
  const json trace = {{"levels", levels}, {"exterior", bounds}, {"thinning", traces}};
  out.files["choquet_trace.json"] = trace.dump(2) + "\n";

  out.summary = {{"depth", sc.choquet_depth},         {"levels", levels},
                 {"p_min", num(r.p_min)},             {"exterior_max", num(r.exterior_max)},
                 {"mass", num(r.measure.mass())},     {"atoms", r.measure.size()},
                 {"thinning_traces", r.traces.size()}};
  out.add(r.checks);
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    for (auto c : audit_thinning(sc.kernel, r.traces[i], in.exterior)) {
      c.name = "trace " + std::to_string(i + 1) + ": " + c.name;
      out.add(std::move(c));
    }
  }
  return out;
}

Output cmd_glue(const Scenario& sc) {
  Output out;
  if (sc.glue_domain.empty()) throw InputError("scenario: missing field 'glue'");
  const auto charts = local_cover(sc.set(sc.glue_domain), sc.kernel, sc.chart_radius, sc.cover);
  std::ostringstream csv;
  const auto dim = charts.front().center.size();
  csv << "n,";
  for (Eigen::Index i = 0; i < dim; ++i) csv << "center" << (i + 1) << ',';
  csv << "radius,I_n\n";
  std::size_t max_i = 0;
  for (const auto& c : charts) {
    csv << c.n << ',';
    for (Eigen::Index i = 0; i < dim; ++i) csv << format_double(c.center[i]) << ',';
    csv << format_double(c.radius) << ',';
    for (std::size_t j = 0; j < c.neighbors.size(); ++j) csv << (j ? " " : "") << c.neighbors[j] + 1;
    csv << '\n';
    max_i = std::max(max_i, c.neighbors.size());
  }
  out.files["charts.csv"] = csv.str();
  json triangle = json::array();
  for (const auto& c : charts) triangle.push_back(num(c.triangle.constant_C));
  out.summary = {{"charts", charts.size()}, {"max_neighbors", max_i}, {"mode", sc.glue_mode},
                 {"triangle_constants", triangle}};

  if (sc.glue_mode == "evans") {
    if (!sc.fsigma) throw InputError("scenario: missing field 'evans'");
    const auto r = glue_evans(sc.kernel, *sc.fsigma, charts, sc.evans);
    out.files["glue_measure.csv"] = measure_csv(r.measure);
    out.summary["probe_min"] = num(r.probe_min);
    out.summary["mass"] = num(r.measure.mass());
    out.summary["atoms"] = r.measure.size();
    out.add(r.checks);
  } else {
    const auto in = choquet_inputs(sc);
    const auto r = glue_choquet(sc.kernel, *sc.gdelta, sc.choquet_depth, in.p_probes, in.p0, in.exterior, charts,
                                sc.choquet);
    out.files["glue_measure.csv"] = measure_csv(r.measure);
    out.summary["p_min"] = num(r.p_min);
    out.summary["exterior_max"] = num(r.exterior_max);
    out.summary["mass"] = num(r.measure.mass());
    out.summary["atoms"] = r.measure.size();
    out.add(r.checks);
  }
  return out;
}

bool on_points(const DiscreteMeasure& nu, std::span<const Point> points) {
  for (const auto& a : nu.atoms()) {
    if (std::none_of(points.begin(), points.end(), [&](const Point& x) { return same_point(x, a.point); })) {
      return false;
    }
  }
  return true;
}

Output cmd_audit(const Scenario& sc, const RunOptions& opts, const std::string& scenario_dir, std::uint64_t seed) {
  Output out;
  const std::string kind = opts.kind.empty() ? sc.audit_kind : opts.kind;
  std::string path = opts.measure;
  if (path.empty()) {
    if (sc.audit_measure.empty()) throw InputError("audit: no measure file (use --measure or audit.measure)");
    path = fs::path(sc.audit_measure).is_absolute() ? sc.audit_measure
                                                     : (fs::path(scenario_dir) / sc.audit_measure).string();
  }
  std::istringstream in(read_file(path));
  const auto nu = read_measure_csv(in);
  const auto& k = sc.kernel;
  out.summary = {{"kind", kind}, {"atoms", nu.size()}, {"mass", num(nu.mass())}};

  if (kind == "sweep") {
    const auto& A = sc.set(sc.sweep_set);
    const auto mu = sc.measure(sc.sweep_measure, seed);
    auto probes = sc.probes(sc.sweep_probes);
    std::erase_if(probes, [&](const Point& x) { return !contains(A, x); });
    const double factor = sweep_factor(k.gamma, sc.shell_base);
    double worst = kInfinity;
    for (const auto& x : probes) worst = std::min(worst, potential(k, nu, x) - factor * potential(k, mu, x));
    bool on_a = true;
    for (const auto& a : nu.atoms()) on_a = on_a && contains(A, a.point);
    out.add(check_close("mass preserved", nu.mass(), mu.mass(), 1e-12));
    out.add(check_ge("G nu - factor G mu on probes", worst, 0.0));
    out.add(check_true("support in A", on_a));
  } else if (kind == "capacity") {
    const auto targets = sc.probes(sc.capacity_targets);
    out.add(check_ge("witness potential on targets", potential_field(k, nu, targets, true).min(), 1.0 - 1e-9));
  } else if (kind == "evans") {
    if (!sc.fsigma) throw InputError("scenario: missing field 'evans'");
    const int M = sc.evans.depth;
    std::vector<Point> probes;
    bool supported = true;
    for (int m = 1; m <= M; ++m) {
      const auto s = sample_set(sc.fsigma->piece(m), sc.evans.resolution);
      probes.insert(probes.end(), s.begin(), s.end());
    }
    for (const auto& a : nu.atoms()) {
      bool hit = false;
      for (int m = 1; m <= M && !hit; ++m) hit = contains(sc.fsigma->piece(m), a.point);
      supported = supported && hit;
    }
    const double pmin = potential_field(k, nu, probes, true).min();
    out.summary["probe_min"] = num(pmin);
    out.add(check_le("total mass", nu.mass(), 1.0));
    out.add(check_true("support in P", supported));
    if (sc.evans_p0.given) {
      out.add(check_true("support in P0", on_points(nu, sc.probes(sc.evans_p0))));
      out.add(check_gt("probe minimum", pmin, 1.0));
    } else {
      const double bound = std::ldexp(1.0, -M) * sweep_factor(k.gamma, sc.evans.shell_base) * M;
      out.add(check_ge("probe minimum", pmin, bound * (1.0 - 1e-9)));
    }
  } else if (kind == "choquet") {
    const auto in = choquet_inputs(sc);
    const int M = sc.choquet_depth;
    const auto interior = potential_field(k, nu, in.p_probes);
    double ext = 0.0;
    for (const auto& x : in.exterior) {
      if (distance_to_support(nu, x) >= sc.choquet.separation) ext = std::max(ext, potential(k, nu, x));
    }
    out.summary["p_min"] = num(interior.min());
    out.summary["exterior_max"] = num(ext);
    out.add(check_le("total mass", nu.mass(), 1.0 - std::ldexp(1.0, -M)));
    out.add(check_ge("divergence on P-probes", interior.min(), M * (1.0 - 1e-9)));
    out.add(check_lt("finite at exterior probes", ext, kInfinity));
    out.add(check_true("support in P0", on_points(nu, in.p0)));
  } else {
    throw InputError("audit: unknown kind '" + kind + "' (sweep, capacity, evans, choquet)");
  }
  return out;
}

json checks_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks) {
    a.push_back({{"name", c.name},
                 {"relation", c.relation},
                 {"value", num(c.value)},
                 {"bound", num(c.bound)},
                 {"margin", num(check_margin(c))},
                 {"pass", c.pass}});
  }
  return a;
}

}  // namespace

int run(const RunOptions& options, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  set_thread_count(std::max(1u, options.threads));
  json report = {{"command", options.command}};
  int code = kPass;
  Output out;
  try {
    auto sc = parse_scenario(read_file(options.scenario));
    if (options.depth) {
      if (*options.depth < 1) throw InputError("--depth must be >= 1");
      sc.evans.depth = *options.depth;
      sc.choquet_depth = *options.depth;
    }
    const std::uint64_t seed = options.seed.value_or(sc.seed);
    report["scenario_hash"] = hex64(sc.hash);
    report["seed"] = seed;
    report["kernel"] = sc.kernel.name();
    const auto dir = fs::path(options.scenario).parent_path().string();
    const auto& c = options.command;
    if (c == "check-triangle") {
      out = cmd_check_triangle(sc, seed);
    } else if (c == "metric") {
      out = cmd_metric(sc, seed);
    } else if (c == "capacity") {
      out = cmd_capacity(sc);
    } else if (c == "sweep") {
      out = cmd_sweep(sc, seed);
    } else if (c == "evans") {
      out = cmd_evans(sc);
    } else if (c == "choquet") {
      out = cmd_choquet(sc);
    } else if (c == "glue") {
      out = cmd_glue(sc);
    } else if (c == "audit") {
      out = cmd_audit(sc, options, dir, seed);
    } else {
      throw InputError("unknown command '" + c + "'");
    }
    report["summary"] = out.summary;
    report["checks"] = checks_json(out.checks);
    report["pass"] = all_pass(out.checks);
    code = all_pass(out.checks) ? kPass : kCheckFailed;
  } catch (const BudgetError& e) {
    report["error"] = {{"kind", "budget"}, {"message", e.what()}};
    report["pass"] = false;
    code = kBudgetError;
  } catch (const InputError& e) {
    report["error"] = {{"kind", "input"}, {"message", e.what()}};
    report["pass"] = false;
    code = kInputError;
  }

  try {
    fs::create_directories(options.out);
    const fs::path dir(options.out);
    for (const auto& [name, contents] : out.files) write_file((dir / name).string(), contents);
    write_file((dir / "report.json").string(), report.dump(2) + "\n");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json timing = {{"command", options.command}, {"wall_seconds", seconds}, {"threads", thread_count()}};
    write_file((dir / "timing.json").string(), timing.dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kInputError;
  }

  if (report.contains("error")) {
    log << options.command << ": " << report["error"]["kind"].get<std::string>()
        << " error: " << report["error"]["message"].get<std::string>() << '\n';
  } else {
    std::size_t failed = 0;
    for (const auto& c : out.checks) {
      if (c.pass) continue;
      ++failed;
      log << "FAIL " << c.name << ": " << format_double(c.value) << ' ' << c.relation << ' ' << format_double(c.bound)
          << '\n';
    }
    log << options.command << ": " << (failed ? "fail" : "pass") << " (" << out.checks.size() - failed << '/'
        << out.checks.size() << " checks)\n";
  }
  return code;
}

}  // namespace polarset::cli
