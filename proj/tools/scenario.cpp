#include "scenario.hpp"

#include "polarset/io.hpp"

#include <set>

namespace polarset::cli {

using nlohmann::json;

namespace {

class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) throw InputError("scenario: missing field '" + join(key) + "'");
    return Node(j_->at(key), join(key));
  }

  std::optional<Node> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  double number() const {
    if (j_->is_number()) return j_->get<double>();
    if (j_->is_string()) {
      try {
        return parse_double(j_->get<std::string>());
      } catch (const InputError&) {
      }
    }
    fail("expected a number");
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }

  long integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<long>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  Node operator[](std::size_t i) const { return Node(j_->at(i), path_ + "[" + std::to_string(i) + "]"); }

  Point point(int dim) const {
    if (size() != static_cast<std::size_t>(dim)) fail("expected " + std::to_string(dim) + " coordinates");
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = (*this)[static_cast<std::size_t>(i)].number();
    if (!p.allFinite()) fail("non-finite coordinate");
    return p;
  }

  std::vector<Point> points(int dim) const {
    std::vector<Point> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].point(dim));
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("scenario: field '" + path_ + "' " + what);
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* j_;
  std::string path_;
};

double number_or(const Node& n, const std::string& key, double fallback) {
  const auto f = n.opt(key);
  return f ? f->number() : fallback;
}

double positive_or(const Node& n, const std::string& key, double fallback) {
  const auto f = n.opt(key);
  return f ? f->positive() : fallback;
}

int integer_or(const Node& n, const std::string& key, int fallback, int min_value) {
  const auto f = n.opt(key);
  if (!f) return fallback;
  const long v = f->integer();
  if (v < min_value) f->fail("must be >= " + std::to_string(min_value));
  return static_cast<int>(v);
}

KernelSpec parse_kernel(const Node& n, int dim) {
  const auto family = n.at("family").string();
  const double cap = positive_or(n, "cap", 1e6);
  KernelSpec k;
  if (family == "metric_power") {
    k = KernelSpec::metric_power(n.at("gamma").positive(), cap);
  } else if (family == "riesz") {
    const double alpha = n.at("alpha").positive();
    if (!(alpha < dim)) n.at("alpha").fail("must be below the dimension");
    k = KernelSpec::riesz(alpha, dim, cap);
  } else if (family == "log2d") {
    k = KernelSpec::log2d(positive_or(n, "gamma", 1.0), cap);
  } else {
    n.at("family").fail("unknown kernel family '" + family + "'");
  }
  return k;
}

class SetTable {
 public:
  SetTable(const Node& sets, int dim) : sets_(sets), dim_(dim) {}

  SetPtr get(const std::string& name) {
    if (auto it = done_.find(name); it != done_.end()) return it->second;
    if (!sets_.has(name)) throw InputError("scenario: unknown set '" + name + "'");
    if (!busy_.insert(name).second) throw InputError("scenario: set '" + name + "' refers to itself");
    auto s = build(sets_.at(name));
    busy_.erase(name);
    done_[name] = s;
    return s;
  }

  std::map<std::string, SetPtr> all() {
    if (sets_.raw().is_object()) {
      for (const auto& [name, value] : sets_.raw().items()) get(name);
    }
    return done_;
  }

 private:
  std::vector<SetPtr> members(const Node& n) {
    std::vector<SetPtr> out;
    const auto list = n.at("members");
    for (std::size_t i = 0; i < list.size(); ++i) out.push_back(get(list[i].string()));
    if (out.empty()) list.fail("must not be empty");
    return out;
  }

  bool closed_flag(const Node& n) { return n.has("closed") ? n.at("closed").boolean() : true; }

  SetPtr build(const Node& n) {
    const auto type = n.at("type").string();
    if (type == "points") return make_set(FinitePoints{n.at("points").points(dim_)});
    if (type == "ball") return make_set(Ball{n.at("center").point(dim_), n.at("radius").positive(), closed_flag(n)});
    if (type == "box") {
      Box b{n.at("lo").point(dim_), n.at("hi").point(dim_), closed_flag(n)};
      if (!(b.lo.array() <= b.hi.array()).all()) n.at("hi").fail("must dominate lo");
      return make_set(b);
    }
    if (type == "segment") return make_set(Segment{n.at("a").point(dim_), n.at("b").point(dim_)});
    if (type == "cantor") {
      if (dim_ != 1) n.at("type").fail("cantor sets need dimension 1");
      return make_set(Cantor{integer_or(n, "level", 0, 0), number_or(n, "lo", 0.0), number_or(n, "hi", 1.0)});
    }
    if (type == "union") return make_set(Union{members(n)});
    if (type == "intersection") return make_set(Intersection{members(n)});
    if (type == "neighborhood") return make_set(Neighborhood{get(n.at("core").string()), n.at("radius").positive()});
    n.at("type").fail("unknown set type '" + type + "'");
  }

  Node sets_;
  int dim_;
  std::map<std::string, SetPtr> done_;
  std::set<std::string> busy_;
};

ProbeSpec parse_probes(const Node& n, int dim) {
  ProbeSpec p;
  p.given = true;
  if (n.raw().is_array()) {
    p.points = n.points(dim);
    return p;
  }
  if (auto f = n.opt("points")) p.points = f->points(dim);
  if (auto f = n.opt("set")) {
    p.set = f->string();
    p.resolution = n.at("resolution").positive();
  }
  if (auto g = n.opt("grid")) {
    p.grid = std::make_pair(g->at("lo").point(dim), g->at("hi").point(dim));
    p.grid_step = g->at("step").positive();
  }
  if (auto f = n.opt("away_from")) {
    p.away_from = f->string();
    p.min_distance = n.at("min_distance").positive();
  }
  return p;
}

FSigmaSpec parse_fsigma(const Node& n, SetTable& table) {
  if (auto c = n.opt("cantor")) {
    return FSigmaSpec::cantor(integer_or(*c, "max_level", 6, 0), c->has("growing") && c->at("growing").boolean());
  }
  const auto list = n.at("pieces");
  std::vector<SetSpec> pieces;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto s = table.get(list[i].string());
    if (!s->is_closed()) list[i].fail("pieces must be closed sets");
    pieces.push_back(*s);
  }
  if (pieces.empty()) list.fail("must not be empty");
  return FSigmaSpec::from_pieces(std::move(pieces));
}

GDeltaSpec parse_gdelta(const Node& n, SetTable& table, double eps_default) {
  double eps = eps_default;
  if (auto f = n.opt("eps_base")) {
    eps = f->number();
    if (!(eps > 0.0 && eps < 1.0)) f->fail("must lie in (0, 1)");
  }
  if (n.has("cantor")) return GDeltaSpec::cantor(eps);
  return GDeltaSpec::around(*table.get(n.at("core").string()), eps);
}

}  // namespace

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

const SetSpec& Scenario::set(const std::string& name) const {
  const auto it = sets.find(name);
  if (it == sets.end()) throw InputError("scenario: unknown set '" + name + "'");
  return *it->second;
}

std::vector<Point> Scenario::probes(const ProbeSpec& p) const {
  std::vector<Point> out = p.points;
  if (!p.set.empty()) {
    const auto s = sample_set(set(p.set), p.resolution);
    out.insert(out.end(), s.begin(), s.end());
  }
  if (p.grid) {
    const auto g = grid_points(p.grid->first, p.grid->second, p.grid_step);
    out.insert(out.end(), g.begin(), g.end());
  }
  if (!p.away_from.empty()) {
    const auto& a = set(p.away_from);
    std::erase_if(out, [&](const Point& x) { return !(distance_to_set(a, x) >= p.min_distance); });
  }
  return out;
}

DiscreteMeasure Scenario::measure(const MeasureSpec& m, std::uint64_t s) const {
  DiscreteMeasure mu;
  for (const auto& a : m.atoms) mu.add_atom(a.point, a.weight);
  if (m.random_count == 0) return mu;
  std::mt19937_64 rng(s);
  const auto& A = set(sweep_set);
  std::size_t made = 0;
  for (std::size_t attempt = 0; made < m.random_count; ++attempt) {
    if (attempt > 1000 * m.random_count) throw InputError("scenario: cannot place random atoms off the sweep set");
    Point x(m.lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = m.lo[i] + (m.hi[i] - m.lo[i]) * unit_uniform(rng);
    const double w = 0.05 + unit_uniform(rng);
    if (!(distance_to_set(A, x) >= m.min_distance) || contains(A, x)) continue;
    mu.add_atom(x, w);
    ++made;
  }
  return mu;
}

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  sc.hash = fnv1a64(text);
  try {
    sc.raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scenario: ") + e.what());
  }
  const Node root(sc.raw, "");
  if (!sc.raw.is_object()) root.fail("expected an object at the top level");
  const long version = root.at("version").integer();
  if (version != 1) root.at("version").fail("unsupported version " + std::to_string(version));
  sc.version = static_cast<int>(version);
  sc.dimension = integer_or(root, "dimension", 1, 1);
  if (auto f = root.opt("seed")) {
    const long s = f->integer();
    if (s < 0) f->fail("must be >= 0");
    sc.seed = static_cast<std::uint64_t>(s);
  }
  const int dim = sc.dimension;
  sc.kernel = parse_kernel(root.at("kernel"), dim);

  static const json empty = json::object();
  SetTable table(root.opt("sets") ? root.at("sets") : Node(empty, "sets"), dim);
  sc.sets = table.all();

  int depth = 3;
  double eps = 0.5;
  double resolution = 0.05;
  int n_max = 1 << 20;
  if (auto b = root.opt("budgets")) {
    depth = integer_or(*b, "depth", depth, 1);
    resolution = positive_or(*b, "resolution", resolution);
    n_max = integer_or(*b, "n_max", n_max, 1);
    if (auto f = b->opt("eps")) {
      eps = f->number();
      if (!(eps > 0.0 && eps < 1.0)) f->fail("must lie in (0, 1)");
    }
  }

  if (auto c = root.opt("cloud")) {
    if (auto r = c->opt("random")) {
      sc.cloud_random = static_cast<std::size_t>(integer_or(*r, "count", 0, 3));
      sc.cloud.grid = std::make_pair(r->at("lo").point(dim), r->at("hi").point(dim));
      sc.cloud.given = true;
    } else {
      sc.cloud = parse_probes(*c, dim);
    }
    sc.metric_gamma = number_or(*c, "gamma", 0.0);
  }
  if (auto c = root.opt("capacity")) sc.capacity_targets = parse_probes(c->at("targets"), dim);
  if (auto s = root.opt("sweep")) {
    sc.sweep_set = s->at("set").string();
    table.get(sc.sweep_set);
    sc.shell_base = positive_or(*s, "shell_base", 3.0);
    const auto m = s->at("measure");
    if (auto atoms = m.opt("atoms")) {
      for (std::size_t i = 0; i < atoms->size(); ++i) {
        const auto row = (*atoms)[i];
        if (row.size() != static_cast<std::size_t>(dim) + 1) row.fail("expected coordinates then a weight");
        Point p(dim);
        for (int d = 0; d < dim; ++d) p[d] = row[static_cast<std::size_t>(d)].number();
        const double w = row[static_cast<std::size_t>(dim)].number();
        if (!(w >= 0.0)) row[static_cast<std::size_t>(dim)].fail("weight must be >= 0");
        sc.sweep_measure.atoms.push_back({p, w});
      }
    }
    if (auto r = m.opt("random")) {
      sc.sweep_measure.random_count = static_cast<std::size_t>(integer_or(*r, "count", 1, 1));
      sc.sweep_measure.lo = r->at("lo").point(dim);
      sc.sweep_measure.hi = r->at("hi").point(dim);
      sc.sweep_measure.min_distance = positive_or(*r, "min_distance", 1e-6);
    }
    sc.sweep_probes = parse_probes(s->at("probes"), dim);
  }
  if (auto e = root.opt("evans")) {
    sc.fsigma = parse_fsigma(e->at("fsigma"), table);
    sc.evans.depth = integer_or(*e, "depth", depth, 1);
    sc.evans.resolution = positive_or(*e, "resolution", resolution);
    sc.evans.shell_base = positive_or(*e, "shell_base", 3.0);
    sc.evans.margin = positive_or(*e, "margin", sc.evans.margin);
    sc.evans.n_max = integer_or(*e, "n_max", n_max, 1);
    if (auto p = e->opt("P0")) sc.evans_p0 = parse_probes(*p, dim);
  }
  if (auto c = root.opt("choquet")) {
    sc.gdelta = parse_gdelta(c->at("gdelta"), table, eps);
    sc.choquet_depth = integer_or(*c, "depth", depth, 1);
    sc.choquet.n_max = integer_or(*c, "n_max", n_max, 1);
    sc.choquet.threshold_base = positive_or(*c, "threshold_base", sc.choquet.threshold_base);
    sc.choquet.boundary_tolerance = positive_or(*c, "boundary_tolerance", sc.choquet.boundary_tolerance);
    sc.choquet.separation = positive_or(*c, "separation", sc.choquet.separation);
    sc.p_probes = parse_probes(c->at("p_probes"), dim);
    sc.p0 = c->has("P0") ? parse_probes(c->at("P0"), dim) : sc.p_probes;
    sc.exterior = parse_probes(c->at("exterior"), dim);
  }
  if (auto g = root.opt("glue")) {
    sc.glue_domain = g->at("domain").string();
    table.get(sc.glue_domain);
    sc.glue_mode = g->has("mode") ? g->at("mode").string() : "evans";
    if (sc.glue_mode != "evans" && sc.glue_mode != "choquet") g->at("mode").fail("must be 'evans' or 'choquet'");
    if (sc.glue_mode == "evans" && !sc.fsigma) g->at("mode").fail("needs an 'evans' section");
    if (sc.glue_mode == "choquet" && !sc.gdelta) g->at("mode").fail("needs a 'choquet' section");
    sc.chart_radius = g->at("chart_radius").positive();
    sc.cover.spacing = number_or(*g, "spacing", 0.0);
    sc.cover.resolution = number_or(*g, "resolution", 0.0);
    sc.cover.max_constant = positive_or(*g, "max_constant", sc.cover.max_constant);
  }
  if (auto a = root.opt("audit")) {
    sc.audit_kind = a->at("kind").string();
    if (auto m = a->opt("measure")) sc.audit_measure = m->string();
  }
  return sc;
}

}  // namespace polarset::cli
