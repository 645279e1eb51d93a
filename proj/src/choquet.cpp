#include "polarset/choquet.hpp"

#include "polarset/parallel.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace polarset {

namespace {

std::vector<Point> select(std::span<const Point> points, const std::function<bool(const Point&)>& pred) {
  std::vector<Point> out;
  for (const auto& p : points) {
    if (pred(p)) out.push_back(p);
  }
  return out;
}

std::vector<Point> concat(std::initializer_list<std::span<const Point>> parts) {
  std::vector<Point> out;
  for (const auto& part : parts) {
    for (const auto& p : part) {
      if (std::none_of(out.begin(), out.end(), [&](const Point& q) { return same_point(p, q); })) out.push_back(p);
    }
  }
  return out;
}

double min_potential(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes) {
  return potential_field(k, mu, probes).min();
}

double max_potential(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes) {
  return probes.empty() ? 0.0 : potential_field(k, mu, probes).max();
}

// min(1, d^gamma, 1/g(d)): a mass below c * factor(d) has potential below c at distance >= d.
double distance_factor(const KernelSpec& k, double d) {
  if (d == kInfinity) return 1.0;
  double f = std::min(1.0, std::pow(d, k.gamma));
  try {
    const double g = k.profile(d);
    if (g > 0.0) f = std::min(f, 1.0 / g);
  } catch (const InputError&) {
  }
  return f;
}

std::string tag(const std::string& stage, const std::exception& e) { return stage + ": " + e.what(); }

template <class F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const BudgetError& e) {
    throw BudgetError(tag(stage, e));
  } catch (const InputError& e) {
    throw InputError(tag(stage, e));
  }
}

}  // namespace

SuperLevelSet super_level_set(const KernelSpec& k, const DiscreteMeasure& nu, double t,
                              std::span<const Point> candidates, const SetSpec& container) {
  const auto unique = concat({candidates});
  const auto radii = parallel_map<double>(unique.size(), [&](std::size_t i) -> double {
    const Point& c = unique[i];
    if (!contains(container, c)) return 0.0;
    const double r_max = std::min(interior_depth(container, c), 1.0);
    if (!(r_max > 0.0) || !(potential(k, nu, c) > t)) return 0.0;
    auto lower = [&](double r) {
      double sum = 0.0;
      for (const auto& a : nu.atoms()) {
        const double g = k.profile(distance(c, a.point) + r);
        if (g == kInfinity) return kInfinity;
        sum += a.weight * g;
      }
      return sum;
    };
    if (lower(r_max) > t) return r_max;
    double lo = 0.0;
    double hi = r_max;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * r_max; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (lower(mid) > t) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo;
  });

  SuperLevelSet s;
  std::vector<SetPtr> open;
  std::vector<SetPtr> closed;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (!(radii[i] > 0.0)) continue;
    s.centers.push_back(unique[i]);
    s.radii.push_back(radii[i]);
    open.push_back(make_set(Ball{unique[i], radii[i], false}));
    closed.push_back(make_set(Ball{unique[i], radii[i], true}));
  }
  s.set = make_set(Union{open});
  s.closure = make_set(Union{closed});
  return s;
}

ThinResult thin_to_finite(const KernelSpec& k, const SetPtr& V, const DiscreteMeasure& nu0, double M,
                          std::span<const Point> probes, const ChoquetOptions& opts, SetPtr W) {
  if (!V || !V->is_open()) throw InputError("thin_to_finite: V must be open");
  if (!(M > 0.0)) throw InputError("thin_to_finite: M must be positive");
  for (const auto& a : nu0.atoms()) {
    if (!contains(*V, a.point)) throw InputError("thin_to_finite: the measure is not carried by V");
  }

  ThinResult out;
  out.trace.M = M;
  out.trace.initial = nu0;
  const auto atoms = nu0.support();
  const auto points = concat({probes, atoms});
  if (!W) {
    const auto candidates = select(points, [&](const Point& x) { return contains(*V, x); });
    W = super_level_set(k, nu0, M + 1.0, candidates, *V).set;
  }
  const auto w_probes = select(points, [&](const Point& x) { return contains(*W, x); });
  const auto off_v = select(probes, [&](const Point& x) { return !contains(*V, x); });

  DiscreteMeasure current = nu0;
  if (!nu0.empty()) {
    const auto vex = geometric_exhaustion(V, points, opts.exhaustion_depth);
    out.trace.v_exhaustion = vex;
    int N = 0;
    for (const auto& a : atoms) {
      const int level = vex.first_level(a);
      if (level == 0) throw BudgetError("thin_to_finite: atom deeper than the exhaustion depth");
      N = std::max(N, level);
    }
    if (!w_probes.empty()) {
      const auto wex = geometric_exhaustion(W, w_probes, opts.exhaustion_depth);
      for (int n = 1; n <= N; ++n) {
        ThinningLevel lv;
        lv.n = n;
        lv.delta = std::min(vex.separation(n), wex.separation(n));
        lv.threshold = std::ldexp(distance_factor(k, lv.delta), -n);
        const auto check_probes = select(w_probes, [&](const Point& x) { return wex.closure_contains(n + 1, x); });
        const double floor = M + std::ldexp(1.0, -n);
        bool found = false;
        for (int m = n + 1; m <= N + 1 && !found; ++m) {
          DiscreteMeasure removed;
          DiscreteMeasure next;
          double removed_nu0 = 0.0;
          for (const auto& a : current.atoms()) {
            if (wex.contains(n, a.point) && !vex.contains(m, a.point)) {
              removed.add_atom(a.point, a.weight);
              removed_nu0 += nu0.weight_at(a.point);
            } else {
              next.add_atom(a.point, a.weight);
            }
          }
          if (!(removed_nu0 < lv.threshold)) continue;
          const double next_min = min_potential(k, next, check_probes);
          if (!(next_min > floor)) continue;
          lv.m = m;
          lv.removed_mass = removed_nu0;
          lv.next_minimum = next_min;
          lv.removed = std::move(removed);
          current = std::move(next);
          found = true;
        }
        if (!found) {
          std::ostringstream os;
          os << "thin_to_finite: no admissible m at level " << n << " (threshold " << lv.threshold << ", separation " << lv.delta << ")";
          throw BudgetError(os.str());
        }
        out.trace.levels.push_back(std::move(lv));
      }
    }
  }
  out.measure = current;
  out.trace.final_measure = current;

  out.checks.push_back(check_true("thinned measure <= initial", dominated_by(current, nu0)));
  out.checks.push_back(check_gt("G nu on W probes", min_potential(k, current, w_probes), M));
  out.checks.push_back(check_lt("G nu off V", max_potential(k, current, off_v), kInfinity));
  for (auto& c : audit_thinning(k, out.trace, points)) out.checks.push_back(std::move(c));
  return out;
}

std::vector<Check> audit_thinning(const KernelSpec& k, const ThinningTrace& trace, std::span<const Point> probes) {
  std::vector<Check> checks;
  const auto& levels = trace.levels;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const int n = levels[i].n;
    const auto in_vn = select(probes, [&](const Point& x) { return trace.v_exhaustion.contains(n, x); });
    double step = 0.0;
    double tail = 0.0;
    for (const auto& x : in_vn) {
      step = std::max(step, potential(k, levels[i].removed, x));
      double sum = 0.0;
      for (std::size_t j = i + 1; j < levels.size(); ++j) sum += potential(k, levels[j].removed, x);
      tail = std::max(tail, sum);
    }
    const double bound = std::ldexp(1.0, -n);
    checks.push_back(check_lt("thinning step " + std::to_string(n), step, bound));
    checks.push_back(check_lt("thinning tail " + std::to_string(n), tail, bound));
    checks.push_back(check_lt("removed mass " + std::to_string(n), levels[i].removed_mass, levels[i].threshold));
  }
  return checks;
}

LocalizeResult localize(const KernelSpec& k, const SetPtr& U, std::span<const Point> p_probes,
                        const DiscreteMeasure& witness, double eps, std::span<const Point> audit_probes,
                        const ChoquetOptions& opts) {
  if (!U || !U->is_open()) throw InputError("localize: U must be open");
  const double M_thin = std::pow(opts.threshold_base, k.gamma + 1.0);
  const double T0 = M_thin + 1.0;

  LocalizeResult out;
  const auto nu0 = restrict(witness, *U);
  if (!(nu0.mass() <= eps)) throw InputError("localize: witness mass exceeds the budget");
  const auto p_in_u = select(p_probes, [&](const Point& x) { return contains(*U, x); });
  if (p_in_u.empty()) throw InputError("localize: no P-probe lies in U");
  for (const auto& p : p_in_u) {
    const double g = potential(k, nu0, p);
    if (!(g > T0)) {
      std::ostringstream os;
      os << "localize: witness too weak, potential " << g << " <= " << T0 << " at a P-probe";
      throw InputError(os.str());
    }
  }

  out.V = super_level_set(k, nu0, T0, concat({p_in_u, nu0.support()}), *U);
  const auto& V = out.V;
  const auto all_probes = concat({p_in_u, audit_probes, V.centers});

  auto thin1 = staged("localize/thin", [&] { return thin_to_finite(k, U, nu0, M_thin, all_probes, opts, V.set); });
  out.traces.push_back(thin1.trace);
  const auto& nu = thin1.measure;

  DiscreteMeasure nu1;
  DiscreteMeasure nu2;
  DiscreteMeasure sigma;
  for (const auto& a : nu.atoms()) {
    if (contains(*V.set, a.point)) {
      nu1.add_atom(a.point, a.weight);
    } else if (distance_to_set(*V.closure, a.point) <= opts.boundary_tolerance) {
      sigma.add_atom(a.point, a.weight);
    } else {
      nu2.add_atom(a.point, a.weight);
    }
  }

  // Index of the ball of V nearest to x.
  auto owner = [&](const Point& x) {
    std::size_t best = 0;
    double best_d = kInfinity;
    for (std::size_t i = 0; i < V.centers.size(); ++i) {
      const double d = distance(x, V.centers[i]) - V.radii[i];
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  // x moved by `step` toward the center of its ball.
  auto inward = [&](const Point& x, double step) -> Point {
    const std::size_t i = owner(x);
    const Point dir = V.centers[i] - x;
    const double len = dir.norm();
    if (len == 0.0) return x;
    return x + dir * (std::min(step, 0.5 * len) / len);
  };

  DiscreteMeasure nu2_tilde;
  if (!nu2.empty()) {
    std::vector<Point> centers;
    for (const auto& a : nu2.atoms()) {
      const Point p = nearest_point(*V.closure, a.point);
      centers.push_back(inward(p, 1e-6 * V.radii[owner(p)]));
    }
    nu2_tilde = staged("localize/sweep-in", [&] { return sweep_off_set(k, *V.closure, centers, nu2).measure; });
  }
  out.swept_mass = nu2.mass();

  const auto v_probes = concat({select(p_in_u, [&](const Point& x) { return contains(*V.set, x); }), V.centers});
  DiscreteMeasure sigma_tilde;
  int index = 0;
  for (const auto& s : sigma.atoms()) {
    ++index;
    const auto single = DiscreteMeasure::dirac(s.point, s.weight);
    std::vector<double> phi;
    for (const auto& x : v_probes) phi.push_back(potential(k, single, x) - std::ldexp(1.0, -index));
    RefineOptions ro;
    ro.n_start = opts.n_start;
    ro.n_max = opts.n_max;
    const auto moved = staged("localize/boundary", [&] {
      return refine_until(
          k, single, v_probes, phi,
          [&](const DiscreteMeasure& m, int n) {
            const Point p = inward(m.atoms().front().point, 0.5 / n);
            if (!contains(*V.set, p)) throw InputError("relocated atom still outside V");
            return DiscreteMeasure::dirac(p, m.atoms().front().weight);
          },
          ro);
    });
    sigma_tilde = add(sigma_tilde, moved.measure);
  }
  out.boundary_mass = sigma.mass();

  const auto nu_tilde = add(add(nu1, nu2_tilde), sigma_tilde);
  const double tilde_floor = std::pow(3.0, k.gamma + 1.0);
  out.checks.push_back(check_gt("G nu~ on V probes", min_potential(k, nu_tilde, v_probes), tilde_floor));

  const auto p_in_v = select(p_in_u, [&](const Point& x) { return contains(*V.set, x); });
  const SetSpec carrier(FinitePoints{p_in_v});
  const auto mu0 = staged("localize/sweep-to-P", [&] { return sweep_to_closed(k, carrier, nu_tilde, p_in_v).measure; });
  out.checks.push_back(check_gt("G mu0 on P-probes", min_potential(k, mu0, p_in_v), 3.0));

  auto thin2 = staged("localize/thin-final", [&] { return thin_to_finite(k, V.set, mu0, 2.0, all_probes, opts); });
  out.traces.push_back(thin2.trace);
  out.measure = thin2.measure;

  for (auto& c : thin1.checks) out.checks.push_back(c);
  for (auto& c : thin2.checks) out.checks.push_back(c);
  const auto off_v = select(audit_probes, [&](const Point& x) { return !contains(*V.set, x); });
  out.checks.push_back(check_le("localized mass", out.measure.mass(), eps));
  out.checks.push_back(check_le("mass non-increase", out.measure.mass(), witness.mass() * (1.0 + 1e-12)));
  out.checks.push_back(check_gt("G mu on P-probes", min_potential(k, out.measure, p_in_v), 2.0));
  out.checks.push_back(check_lt("G mu off V", max_potential(k, out.measure, off_v), kInfinity));
  return out;
}

ScatterResult scatter(const KernelSpec& k, const SetPtr& U, std::span<const Point> p_probes, double eps,
                      std::span<const Point> audit_probes, const ChoquetOptions& opts) {
  if (!(eps > 0.0 && eps <= 1.0)) throw InputError("scatter: eps must lie in (0, 1]");
  if (p_probes.empty()) throw InputError("scatter: no P-probes");
  for (const auto& p : p_probes) {
    if (!contains(*U, p)) throw InputError("scatter: a P-probe lies outside U");
  }

  ScatterResult out;
  out.exhaustion = geometric_exhaustion(U, p_probes, opts.exhaustion_depth);
  const auto& W = out.exhaustion;

  std::map<int, std::vector<Point>> groups;
  for (const auto& p : p_probes) {
    const int f = W.first_level(p);
    groups[std::max(1, f - 1)].push_back(p);
  }
  std::vector<int> order;
  for (const auto& [n, pts] : groups) order.push_back(n);

  const auto all_probes = concat({p_probes, audit_probes});
  struct Piece {
    ScatterAnnulus info;
    LocalizeResult loc;
  };
  auto pieces = parallel_map<Piece>(order.size(), [&](std::size_t i) {
    const int n = order[i];
    const auto& Pn = groups.at(n);
    Piece piece;
    piece.info.n = n;
    piece.info.probes = Pn.size();
    piece.info.separation = std::min(W.separation(n - 2), W.separation(n + 1));
    piece.info.budget = std::ldexp(eps, -n) * distance_factor(k, piece.info.separation);
    const auto Un = std::make_shared<const SetSpec>(W.band(n + 1, n - 1));
    piece.loc = staged("annulus " + std::to_string(n), [&] {
      const auto est = capacity_lp(k, Pn, Pn, opts.lp);
      const auto witness = scale(est.optimal_measure, (1.0 - 1e-9) * piece.info.budget / est.value);
      return localize(k, Un, Pn, witness, piece.info.budget, all_probes, opts);
    });
    piece.info.mass = piece.loc.measure.mass();
    return piece;
  });

  std::vector<SetPtr> members;
  for (auto& piece : pieces) {
    const int n = piece.info.n;
    const auto far = select(all_probes, [&](const Point& x) { return W.contains(n - 2, x) || !W.contains(n + 2, x); });
    out.checks.push_back(check_le("annulus " + std::to_string(n) + " far field", max_potential(k, piece.loc.measure, far),
                                  std::ldexp(eps, -n)));
    for (auto& c : piece.loc.checks) {
      c.name = "annulus " + std::to_string(n) + ": " + c.name;
      out.checks.push_back(c);
    }
    out.measure = add(out.measure, piece.loc.measure);
    out.parts.push_back(piece.loc.measure);
    members.push_back(piece.loc.V.set);
    out.pieces.push_back(piece.loc.V);
    for (auto& t : piece.loc.traces) out.traces.push_back(std::move(t));
    out.annuli.push_back(piece.info);
  }
  out.V = make_set(Union{members});

  const auto outside_u = select(audit_probes, [&](const Point& x) { return !contains(*U, x); });
  const auto outside_v = select(audit_probes, [&](const Point& x) { return !contains(*out.V, x); });
  out.checks.push_back(check_le("scatter mass", out.measure.mass(), eps));
  out.checks.push_back(check_gt("G mu on P-probes", min_potential(k, out.measure, p_probes), 2.0));
  out.checks.push_back(check_lt("G mu outside U", max_potential(k, out.measure, outside_u), eps));
  out.checks.push_back(check_lt("G mu off V", max_potential(k, out.measure, outside_v), kInfinity));
  return out;
}

CarrierResult dense_carrier(const KernelSpec& k, std::span<const Point> p_probes, std::span<const Point> P0,
                            const SetPtr& U, double eps, std::span<const Point> audit_probes,
                            const ChoquetOptions& opts) {
  if (!(eps > 0.0)) throw InputError("dense_carrier: eps must be positive");
  if (P0.empty()) throw InputError("dense_carrier: P0 is empty");
  CarrierResult out;
  out.delta = std::min(1.0, eps / 2.0);
  const double delta = out.delta;
  out.scatter = staged("scatter", [&] { return scatter(k, U, p_probes, delta, audit_probes, opts); });
  const auto& mu = out.scatter.measure;
  const SetPtr& V = out.scatter.V;

  const auto p0_in_v = select(P0, [&](const Point& x) { return contains(*V, x); });
  if (p0_in_v.empty()) throw InputError("dense_carrier: no P0 point lies in V");
  const auto p_in_v = select(p_probes, [&](const Point& x) { return contains(*V, x); });
  const auto vex = geometric_exhaustion(V, concat({p0_in_v, mu.support(), p_in_v}), opts.exhaustion_depth);

  std::map<int, std::vector<Point>> carriers;  // P_k
  for (const auto& x : p0_in_v) {
    const int level = vex.first_level(x);
    if (level > 0) carriers[level].push_back(x);
  }
  // Block of a point of V: its own level when it is a P0 point, else the level
  // of the nearest P0 point among levels level-1 and level.
  auto block_of = [&](const Point& x) {
    const int level = vex.first_level(x);
    if (level == 0) throw BudgetError("dense_carrier: point deeper than the exhaustion depth");
    int best_level = 0;
    double best_d = kInfinity;
    for (int l : {level, level - 1}) {
      const auto it = carriers.find(l);
      if (it == carriers.end()) continue;
      for (const auto& c : it->second) {
        const double d = distance(c, x);
        if (d < best_d) {
          best_d = d;
          best_level = l;
        }
        if (d <= kMergeTolerance) return l;
      }
    }
    if (best_level == 0) throw InputError("dense_carrier: no P0 point near a carried atom");
    return best_level;
  };

  std::map<int, DiscreteMeasure> blocks;
  for (const auto& a : mu.atoms()) blocks[block_of(a.point)].add_atom(a.point, a.weight);
  std::map<int, std::vector<Point>> block_probes;
  for (const auto& x : p_in_v) block_probes[block_of(x)].push_back(x);

  std::vector<int> keys;
  for (const auto& [kk, b] : blocks) keys.push_back(kk);
  for (const auto& [kk, b] : block_probes) {
    if (!blocks.count(kk)) keys.push_back(kk);
  }
  std::sort(keys.begin(), keys.end());

  auto approx = [&](int kk, int n) {
    const auto it = blocks.find(kk);
    if (it == blocks.end()) return DiscreteMeasure{};
    return discrete_approximation(it->second, carriers.at(kk), n);
  };
  std::vector<int> schedule;
  for (long n = opts.n_start; n <= opts.n_max; n *= 2) schedule.push_back(static_cast<int>(n));

  const auto all_probes = concat({p_probes, audit_probes});
  std::map<int, CarrierBlock> info;
  for (int kk : keys) {
    CarrierBlock b;
    b.k = kk;
    b.atoms = blocks.count(kk) ? blocks.at(kk).size() : 0;
    b.carrier_points = carriers.count(kk) ? carriers.at(kk).size() : 0;
    b.mass = blocks.count(kk) ? blocks.at(kk).mass() : 0.0;
    const SetSpec wk = vex.band(kk + 1, kk - 2);
    const auto far = select(all_probes, [&](const Point& x) { return !contains(wk, x); });
    const double tol = std::ldexp(delta, -kk);
    const DiscreteMeasure exact = blocks.count(kk) ? blocks.at(kk) : DiscreteMeasure{};
    b.l = 0;
    for (int n : schedule) {
      DiscreteMeasure a;
      try {
        a = approx(kk, n);
      } catch (const InputError&) {
        continue;
      }
      bool ok = true;
      for (const auto& x : far) {
        const double diff = std::abs(potential(k, a, x) - potential(k, exact, x));
        if (!(diff < tol)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        b.l = n;
        break;
      }
    }
    if (b.l == 0) throw BudgetError("dense_carrier: block " + std::to_string(kk) + " far-field estimate not reached");
    info[kk] = b;
  }
  for (int kk : keys) {
    auto& b = info[kk];
    DiscreteMeasure tau;
    for (const auto& [j, m] : blocks) {
      if (std::abs(j - kk) > 1) tau = add(tau, m);
    }
    const auto& L = block_probes[kk];
    b.m = 0;
    for (int n : schedule) {
      if (n < b.l) continue;
      DiscreteMeasure near;
      try {
        for (int j : {kk - 1, kk, kk + 1}) {
          if (j >= 1) near = add(near, approx(j, n));
        }
      } catch (const InputError&) {
        continue;
      }
      bool ok = true;
      for (const auto& x : L) {
        if (!(potential(k, near, x) > 2.0 - potential(k, tau, x))) {
          ok = false;
          break;
        }
      }
      if (ok) {
        b.m = n;
        break;
      }
    }
    if (b.m == 0) throw BudgetError("dense_carrier: block " + std::to_string(kk) + " lower bound not reached");
  }
  for (int kk : keys) {
    int n = info[kk].m;
    for (int j : {kk - 1, kk + 1}) {
      if (info.count(j)) n = std::max(n, info[j].m);
    }
    info[kk].n = n;
  }

  const auto outside_u = select(audit_probes, [&](const Point& x) { return !contains(*U, x); });
  DiscreteMeasure nu;
  int bump = 0;
  for (;; ++bump) {
    nu = DiscreteMeasure{};
    for (int kk : keys) nu = add(nu, approx(kk, std::min(info[kk].n << bump, opts.n_max)));
    const bool inside_ok = min_potential(k, nu, p_probes) > 1.0;
    const bool outside_ok = max_potential(k, nu, outside_u) < 2.0 * delta;
    if (inside_ok && outside_ok) break;
    if ((static_cast<long>(opts.n_start) << (bump + 1)) > opts.n_max) {
      throw BudgetError("dense_carrier: post-verification failed at every refinement");
    }
  }
  for (int kk : keys) {
    info[kk].n = std::min(info[kk].n << bump, opts.n_max);
    out.blocks.push_back(info[kk]);
  }
  out.measure = nu;

  out.checks = out.scatter.checks;
  bool on_p0 = true;
  for (const auto& a : nu.atoms()) {
    on_p0 = on_p0 && std::any_of(P0.begin(), P0.end(), [&](const Point& x) { return same_point(x, a.point); });
  }
  const auto off_p0 = select(all_probes, [&](const Point& x) { return distance_to_support(nu, x) >= opts.separation; });
  out.checks.push_back(check_true("carrier support in P0", on_p0));
  out.checks.push_back(check_le("carrier mass", nu.mass(), delta * (1.0 + 1e-12)));
  out.checks.push_back(check_gt("G nu on P-probes", min_potential(k, nu, p_probes), 1.0));
  out.checks.push_back(check_lt("G nu outside U", max_potential(k, nu, outside_u), std::min(2.0 * delta, eps)));
  out.checks.push_back(check_lt("G nu off the carrier", max_potential(k, nu, off_p0), kInfinity));
  return out;
}

ChoquetResult choquet_measure(const KernelSpec& k, const GDeltaSpec& P, int depth, std::span<const Point> p_probes,
                              std::span<const Point> P0, std::span<const Point> exterior_probes,
                              const ChoquetOptions& opts) {
  if (depth < 1) throw InputError("choquet: depth must be >= 1");
  if (p_probes.empty()) throw InputError("choquet: no P-probes");

  auto build = [&](int m) {
    return staged("level " + std::to_string(m), [&] {
      const auto U = std::make_shared<const SetSpec>(P.neighborhood(m));
      return dense_carrier(k, p_probes, P0, U, std::ldexp(1.0, -m), exterior_probes, opts);
    });
  };

  // First m with x outside U_m.
  std::vector<int> exit_level(exterior_probes.size(), 0);
  int needed = depth;
  for (std::size_t i = 0; i < exterior_probes.size(); ++i) {
    int m = 1;
    while (contains(P.neighborhood(m), exterior_probes[i])) {
      if (++m > depth + opts.max_extra_levels) {
        throw BudgetError("choquet: an exterior probe stays inside U_m beyond the extra-level limit");
      }
    }
    exit_level[i] = m;
    needed = std::max(needed, m - 1);
  }

  auto carriers = parallel_map<CarrierResult>(static_cast<std::size_t>(needed),
                                              [&](std::size_t i) { return build(static_cast<int>(i) + 1); });

  ChoquetResult out;
  for (int m = 1; m <= needed; ++m) {
    auto& c = carriers[static_cast<std::size_t>(m - 1)];
    out.level_measures.push_back(c.measure);
    if (m > depth) continue;
    ChoquetLevel lv;
    lv.m = m;
    lv.eps = std::ldexp(1.0, -m);
    lv.mass = c.measure.mass();
    lv.p_min = min_potential(k, c.measure, p_probes);
    lv.atoms = c.measure.size();
    out.levels.push_back(lv);
    out.measure = add(out.measure, c.measure);
    for (auto& t : c.scatter.traces) out.traces.push_back(t);
    for (auto& chk : c.checks) {
      chk.name = "level " + std::to_string(m) + ": " + chk.name;
      out.checks.push_back(std::move(chk));
    }
    out.checks.push_back(check_le("level " + std::to_string(m) + ": mass", lv.mass, lv.eps));
  }

  out.p_min = min_potential(k, out.measure, p_probes);
  out.checks.push_back(check_ge("divergence on P-probes", out.p_min, depth * (1.0 - 1e-9)));
  out.checks.push_back(check_le("total mass", out.measure.mass(), 1.0 - std::ldexp(1.0, -depth)));

  out.exterior_max = 0.0;
  double worst_margin = kInfinity;
  for (std::size_t i = 0; i < exterior_probes.size(); ++i) {
    ExteriorBound e;
    e.x = exterior_probes[i];
    e.m_x = exit_level[i];
    e.value = potential(k, out.measure, e.x);
    e.bound = std::ldexp(1.0, 1 - e.m_x);
    for (int m = 1; m < e.m_x; ++m) e.bound += potential(k, out.level_measures[static_cast<std::size_t>(m - 1)], e.x);
    out.exterior_max = std::max(out.exterior_max, e.value);
    worst_margin = std::min(worst_margin, e.bound - e.value);
    out.exterior.push_back(std::move(e));
  }
  if (!exterior_probes.empty()) out.checks.push_back(check_gt("exterior bound margin", worst_margin, 0.0));
  return out;
}

}  // namespace polarset
