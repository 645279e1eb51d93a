#pragma once

#include "polarset/choquet.hpp"
#include "polarset/evans.hpp"
#include "polarset/glue.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <random>

namespace polarset::cli {

/// Where a probe list comes from: explicit points, a set sampled at a
/// resolution, or a grid; optionally only points at least `min_distance` from
/// the set `away_from`.
struct ProbeSpec {
  std::vector<Point> points;
  std::string set;
  double resolution = 0.0;
  std::optional<std::pair<Point, Point>> grid;
  double grid_step = 0.0;
  std::string away_from;
  double min_distance = 0.0;
  bool given = false;
};

struct MeasureSpec {
  std::vector<Atom> atoms;
  std::size_t random_count = 0;  // random atoms in [lo, hi] off the sweep set
  Point lo;
  Point hi;
  double min_distance = 0.0;
};

struct Scenario {
  int version = 1;
  int dimension = 1;
  std::uint64_t seed = 0;
  std::uint64_t hash = 0;  // FNV-1a of the file bytes
  KernelSpec kernel;
  std::map<std::string, SetPtr> sets;
  nlohmann::json raw;

  // check-triangle / metric
  ProbeSpec cloud;
  std::size_t cloud_random = 0;
  double metric_gamma = 0.0;  // 0 means max(2 log2 C, kernel gamma)

  // capacity
  ProbeSpec capacity_targets;

  // sweep
  std::string sweep_set;
  MeasureSpec sweep_measure;
  ProbeSpec sweep_probes;
  double shell_base = 3.0;

  // evans
  std::optional<FSigmaSpec> fsigma;
  EvansOptions evans;
  ProbeSpec evans_p0;

  // choquet
  std::optional<GDeltaSpec> gdelta;
  int choquet_depth = 3;
  ChoquetOptions choquet;
  ProbeSpec p_probes;
  ProbeSpec p0;
  ProbeSpec exterior;

  // glue
  std::string glue_domain;
  std::string glue_mode = "evans";
  double chart_radius = 0.0;
  CoverOptions cover;

  // audit
  std::string audit_kind;
  std::string audit_measure;

  const SetSpec& set(const std::string& name) const;
  std::vector<Point> probes(const ProbeSpec& p) const;
  DiscreteMeasure measure(const MeasureSpec& m, std::uint64_t seed) const;
};

/// Parses a JSON scenario. Throws InputError naming the offending field.
Scenario parse_scenario(const std::string& text);

/// Uniform double in [0, 1) from 53 random bits.
double unit_uniform(std::mt19937_64& rng);

}  // namespace polarset::cli
