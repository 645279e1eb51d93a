#include "polarset/evans.hpp"

#include "polarset/parallel.hpp"

namespace polarset {

namespace {

struct PieceOutput {
  EvansPiece info;
  SetSpec set;
  std::vector<Point> probes;
  DiscreteMeasure nu;
};

void validate(const EvansOptions& opts) {
  if (opts.depth < 1) throw InputError("evans: depth must be >= 1");
  if (!(opts.resolution > 0.0)) throw InputError("evans: resolution must be positive");
  if (!(opts.margin > 0.0)) throw InputError("evans: margin must be positive");
}

template <class F>
std::vector<PieceOutput> run_pieces(int depth, F&& build) {
  return parallel_map<PieceOutput>(static_cast<std::size_t>(depth), [&](std::size_t i) {
    const int m = static_cast<int>(i) + 1;
    try {
      return build(m);
    } catch (const BudgetError& e) {
      throw BudgetError("piece " + std::to_string(m) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("piece " + std::to_string(m) + ": " + e.what());
    }
  });
}

EvansResult assemble(const KernelSpec& k, std::vector<PieceOutput> pieces) {
  EvansResult out;
  for (const auto& p : pieces) out.measure = add(out.measure, scale(p.nu, p.info.weight));
  out.probe_min = kInfinity;
  for (auto& p : pieces) {
    p.info.probe_min = potential_field(k, out.measure, p.probes, true).min();
    out.probe_min = std::min(out.probe_min, p.info.probe_min);
    out.checks.push_back(check_ge("piece " + std::to_string(p.info.m) + " probe minimum", p.info.probe_min,
                                  p.info.bound * (1.0 - 1e-12)));
    out.probes.insert(out.probes.end(), p.probes.begin(), p.probes.end());
    out.pieces.push_back(p.info);
  }
  out.checks.push_back(check_le("total mass", out.measure.mass(), 1.0));
  return out;
}

}  // namespace

EvansResult evans_measure(const KernelSpec& k, const FSigmaSpec& P, const EvansOptions& opts) {
  validate(opts);
  const int M = opts.depth;
  auto pieces = run_pieces(M, [&](int m) {
    PieceOutput p;
    p.set = P.piece(m);
    p.probes = sample_set(p.set, opts.resolution);
    const auto series = null_capacity_series(k, p.probes, p.probes, M, opts.lp);
    p.nu = sweep_to_closed(k, p.set, series.measure, std::nullopt, opts.shell_base).measure;
    p.info.m = m;
    p.info.probes = p.probes.size();
    p.info.capacity = series.capacity;
    p.info.weight = std::ldexp(1.0, -m);
    p.info.witness_mass = p.nu.mass();
    p.info.witness_level = series.target_min;
    p.info.bound = p.info.weight * sweep_factor(k.gamma, opts.shell_base) * series.target_min;
    return p;
  });

  std::vector<Check> extra;
  for (const auto& p : pieces) {
    const auto tag = "piece " + std::to_string(p.info.m);
    extra.push_back(check_ge(tag + " divergence level", p.info.witness_level, M * (1.0 - 1e-9)));
    extra.push_back(check_le(tag + " witness mass", p.info.witness_mass, 1.0));
    bool supported = true;
    for (const auto& a : p.nu.atoms()) supported = supported && contains(p.set, a.point);
    extra.push_back(check_true(tag + " support in piece", supported));
  }
  auto out = assemble(k, std::move(pieces));
  out.checks.insert(out.checks.begin(), extra.begin(), extra.end());
  return out;
}

EvansResult evans_on_countable(const KernelSpec& k, const FSigmaSpec& P, std::span<const Point> P0,
                               const EvansOptions& opts) {
  validate(opts);
  if (P0.empty()) throw InputError("evans_on_countable: P0 is empty");
  const int M = opts.depth;
  auto pieces = run_pieces(M, [&](int m) {
    PieceOutput p;
    p.set = P.piece(m);
    p.probes = sample_set(p.set, opts.resolution);

    std::vector<Point> dense;
    for (const auto& x : P0) {
      if (contains(p.set, x)) dense.push_back(x);
    }
    for (const auto& x : p.probes) {
      double nearest = kInfinity;
      for (const auto& y : dense) nearest = std::min(nearest, distance(x, y));
      if (!(nearest <= opts.resolution)) {
        throw InputError("P0 is not dense in the piece at resolution " + std::to_string(opts.resolution));
      }
    }

    const auto est = capacity_lp(k, p.probes, p.probes, opts.lp);
    const double level = std::ldexp(1.0, m);
    const double T = level * (1.0 + opts.margin);
    if (!(T * est.value <= 1.0)) {
      throw BudgetError("witness for level 2^" + std::to_string(m) + " needs mass " + std::to_string(T * est.value) +
                        " > 1");
    }
    const auto swept = sweep_to_closed(k, p.set, witness_from_capacity(est, T), std::nullopt, opts.shell_base);
    const std::vector<double> phi(p.probes.size(), level);
    RefineOptions ro;
    ro.n_start = opts.n_start;
    ro.n_max = opts.n_max;
    ro.truncated = true;
    auto refined = refine_until(k, swept.measure, p.probes, phi, dense, ro);
    p.nu = std::move(refined.measure);

    p.info.m = m;
    p.info.probes = p.probes.size();
    p.info.capacity = est.value;
    p.info.weight = std::ldexp(1.0, -m);
    p.info.witness_mass = p.nu.mass();
    p.info.witness_level = potential_field(k, p.nu, p.probes, true).min();
    p.info.bound = 1.0;  // 2^-m * (G nu_m > 2^m)
    p.info.refinement_n = refined.n;
    return p;
  });

  std::vector<Check> extra;
  for (const auto& p : pieces) {
    const auto tag = "piece " + std::to_string(p.info.m);
    extra.push_back(check_gt(tag + " level", p.info.witness_level, std::ldexp(1.0, p.info.m)));
    extra.push_back(check_le(tag + " witness mass", p.info.witness_mass, 1.0));
  }
  auto out = assemble(k, std::move(pieces));
  bool on_p0 = true;
  for (const auto& a : out.measure.atoms()) {
    bool hit = false;
    for (const auto& x : P0) hit = hit || same_point(x, a.point);
    on_p0 = on_p0 && hit;
  }
  out.checks.insert(out.checks.begin(), extra.begin(), extra.end());
  out.checks.push_back(check_true("support in P0", on_p0));
  out.checks.push_back(check_gt("probe minimum", out.probe_min, 1.0));
  return out;
}

}  // namespace polarset
