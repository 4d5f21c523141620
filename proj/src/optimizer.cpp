#include "clab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "clab/monitor.hpp"

namespace clab {

using json = nlohmann::json;

Objective parse_objective(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t colon = text.find(':', start);
    parts.emplace_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() < 3 || parts.size() > 4)
    raise(Errc::invalid_argument,
          "objective must be metric:aggregator:direction[:weight], got '" +
              std::string(text) + "'");

  Objective obj;
  obj.metric = parts[0];
  if (!is_registered_metric(obj.metric))
    raise(Errc::invalid_argument, "unknown metric '" + obj.metric + "'");

  const std::string& agg = parts[1];
  if (agg == "mean") obj.aggregator = Aggregator::mean;
  else if (agg == "p50") obj.aggregator = Aggregator::p50;
  else if (agg == "p95") obj.aggregator = Aggregator::p95;
  else if (agg == "p99") obj.aggregator = Aggregator::p99;
  else if (agg == "max") obj.aggregator = Aggregator::max;
  else raise(Errc::invalid_argument, "unknown aggregator '" + agg + "'");

  const std::string& dir = parts[2];
  if (dir == "minimize" || dir == "min") obj.direction = Direction::minimize;
  else if (dir == "maximize" || dir == "max") obj.direction = Direction::maximize;
  else raise(Errc::invalid_argument, "unknown direction '" + dir + "'");

  if (parts.size() == 4) obj.weight = std::stod(parts[3]);
  return obj;
}

const char* direction_name(Direction d) {
  return d == Direction::minimize ? "minimize" : "maximize";
}

const char* aggregator_name(Aggregator a) {
  switch (a) {
    case Aggregator::mean: return "mean";
    case Aggregator::p50: return "p50";
    case Aggregator::p95: return "p95";
    case Aggregator::p99: return "p99";
    case Aggregator::max: return "max";
  }
  return "?";
}

Strategy parse_optimizer_strategy(std::string_view name) {
  if (name == "grid") return Strategy::grid;
  if (name == "random") return Strategy::random;
  if (name == "surrogate") return Strategy::surrogate;
  raise(Errc::invalid_argument, "unknown strategy '" + std::string(name) + "'");
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::grid: return "grid";
    case Strategy::random: return "random";
    case Strategy::surrogate: return "surrogate";
  }
  return "?";
}

namespace {

std::vector<ParamValue> domain_values(const ParamDomain& dom) {
  if (dom.kind == ParamDomain::Kind::discrete) return dom.values;
  std::vector<ParamValue> out;
  for (std::int64_t v = dom.lo; v <= dom.hi; v += dom.step) out.push_back(v);
  return out;
}

std::string point_key(const Point& point) {
  std::string key;
  for (const ParamValue& v : point) {
    key += param_value_str(v);
    key += '\x1f';
  }
  return key;
}

/// Distinct discrete points, or nullopt when any dimension is continuous.
std::optional<unsigned long long> space_cardinality(const ParameterSpace& space) {
  unsigned long long total = 1;
  for (const auto& [name, dom] : space.dimensions) {
    unsigned long long n = 0;
    switch (dom.kind) {
      case ParamDomain::Kind::continuous:
        return std::nullopt;
      case ParamDomain::Kind::discrete:
        n = dom.values.size();
        break;
      case ParamDomain::Kind::range:
        n = static_cast<unsigned long long>((dom.hi - dom.lo) / dom.step + 1);
        break;
    }
    if (n == 0) return 0;
    if (total > (1ULL << 62) / n) return 1ULL << 62;  // saturate
    total *= n;
  }
  return total;
}

double numeric_value(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  raise(Errc::non_numeric_parameter, "value '" + std::get<std::string>(v) + "'");
}

struct DimensionScale {
  bool categorical = false;
  double lo = 0, span = 0;
};

std::vector<DimensionScale> dimension_scales(const ParameterSpace& space) {
  std::vector<DimensionScale> scales;
  for (const auto& [name, dom] : space.dimensions) {
    DimensionScale s;
    switch (dom.kind) {
      case ParamDomain::Kind::range:
        s.lo = static_cast<double>(dom.lo);
        s.span = static_cast<double>(dom.hi - dom.lo);
        break;
      case ParamDomain::Kind::continuous:
        s.lo = dom.continuous_lo;
        s.span = dom.continuous_hi - dom.continuous_lo;
        break;
      case ParamDomain::Kind::discrete: {
        bool numeric = std::all_of(dom.values.begin(), dom.values.end(),
                                   [](const ParamValue& v) {
                                     return !std::holds_alternative<std::string>(v);
                                   });
        if (!numeric) {
          s.categorical = true;
          break;
        }
        double lo = numeric_value(dom.values.front());
        double hi = lo;
        for (const ParamValue& v : dom.values) {
          lo = std::min(lo, numeric_value(v));
          hi = std::max(hi, numeric_value(v));
        }
        s.lo = lo;
        s.span = hi - lo;
        break;
      }
    }
    scales.push_back(s);
  }
  return scales;
}

/// Squared distance over min-max-normalized dims; categorical dims add 0/1.
double distance_sq(const Point& a, const Point& b,
                   const std::vector<DimensionScale>& scales) {
  double d2 = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const DimensionScale& s = scales[i];
    if (s.categorical) {
      d2 += a[i] == b[i] ? 0.0 : 1.0;
      continue;
    }
    if (s.span == 0) continue;  // degenerate dimension: no contribution
    double diff = (numeric_value(a[i]) - numeric_value(b[i])) / s.span;
    d2 += diff * diff;
  }
  return d2;
}

double scalarize(const Evaluation& e, const std::vector<Objective>& objectives) {
  double sum = 0;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    double v = e.objectives[i].to_double();
    sum += objectives[i].weight * (objectives[i].direction == Direction::minimize ? v : -v);
  }
  return sum;
}

/// Minimized key vector (maximize objectives negated) for dominance checks.
std::vector<Rational> minimized_key(const Evaluation& e,
                                    const std::vector<Objective>& objectives) {
  std::vector<Rational> key;
  key.reserve(objectives.size());
  for (std::size_t i = 0; i < objectives.size(); ++i)
    key.push_back(objectives[i].direction == Direction::minimize ? e.objectives[i]
                                                                 : -e.objectives[i]);
  return key;
}

bool dominates(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

}  // namespace

std::vector<Point> enumerate_grid(const ParameterSpace& space) {
  for (const auto& [name, dom] : space.dimensions)
    if (dom.kind == ParamDomain::Kind::continuous)
      raise(Errc::continuous_dimension,
            "dimension '" + name + "' is continuous; grid needs discrete domains");

  std::vector<std::vector<ParamValue>> axes;
  for (const auto& [name, dom] : space.dimensions) axes.push_back(domain_values(dom));

  std::vector<Point> points;
  if (axes.empty()) return points;
  for (const auto& axis : axes)
    if (axis.empty()) return points;

  Point current(axes.size());
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < axes.size(); ++i) current[i] = axes[i][idx[i]];
    points.push_back(current);
    // odometer: last dimension cycles fastest
    std::size_t i = axes.size();
    while (i > 0) {
      --i;
      if (++idx[i] < axes[i].size()) break;
      idx[i] = 0;
      if (i == 0) return points;
    }
  }
}

std::vector<Point> sample_random(const ParameterSpace& space, std::size_t n,
                                 SplitMix64& rng) {
  std::vector<Point> points;
  points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Point p;
    p.reserve(space.dimensions.size());
    for (const auto& [name, dom] : space.dimensions) {
      switch (dom.kind) {
        case ParamDomain::Kind::discrete:
          p.push_back(dom.values[rng.next_below(dom.values.size())]);
          break;
        case ParamDomain::Kind::range: {
          std::uint64_t steps =
              static_cast<std::uint64_t>((dom.hi - dom.lo) / dom.step) + 1;
          p.push_back(dom.lo +
                      static_cast<std::int64_t>(rng.next_below(steps)) * dom.step);
          break;
        }
        case ParamDomain::Kind::continuous:
          p.push_back(dom.continuous_lo +
                      (dom.continuous_hi - dom.continuous_lo) * rng.next_unit());
          break;
      }
    }
    points.push_back(std::move(p));
  }
  return points;
}

Point surrogate_suggest(const ParameterSpace& space, const std::vector<Evaluation>& history,
                        const std::vector<Objective>& objectives, SplitMix64& rng,
                        const SurrogateOptions& options) {
  std::set<std::string> evaluated;
  for (const Evaluation& e : history) evaluated.insert(point_key(e.point));

  if (auto total = space_cardinality(space);
      total && evaluated.size() >= *total)
    raise(Errc::exhausted_space, "all discrete points already evaluated");

  auto draw_unevaluated = [&]() {
    while (true) {
      Point p = std::move(sample_random(space, 1, rng).front());
      if (!evaluated.count(point_key(p))) return p;
    }
  };

  if (history.size() < 2) return draw_unevaluated();

  std::vector<DimensionScale> scales = dimension_scales(space);
  std::vector<double> y;
  y.reserve(history.size());
  for (const Evaluation& e : history) y.push_back(scalarize(e, objectives));

  constexpr double kEpsilon = 1e-9;
  Point best;
  double best_acquisition = 0;
  bool have_best = false;
  for (std::size_t c = 0; c < options.pool_size; ++c) {
    Point candidate = draw_unevaluated();
    double weight_sum = 0, weighted_y = 0, min_d2 = 0;
    for (std::size_t i = 0; i < history.size(); ++i) {
      double d2 = distance_sq(candidate, history[i].point, scales);
      double w = 1.0 / (d2 + kEpsilon);
      weight_sum += w;
      weighted_y += w * y[i];
      if (i == 0 || d2 < min_d2) min_d2 = d2;
    }
    double acquisition = weighted_y / weight_sum - options.lambda * std::sqrt(min_d2);
    if (!have_best || acquisition < best_acquisition) {
      have_best = true;
      best_acquisition = acquisition;
      best = std::move(candidate);
    }
  }
  return best;
}

std::vector<std::size_t> pareto_front(const std::vector<Evaluation>& evaluations,
                                      const std::vector<Objective>& objectives) {
  std::vector<std::vector<Rational>> keys;
  keys.reserve(evaluations.size());
  for (const Evaluation& e : evaluations) keys.push_back(minimized_key(e, objectives));

  std::vector<std::size_t> order(evaluations.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    return a < b;
  });

  // lexicographic order puts every dominator before its victims, so one
  // pass against the running front suffices
  std::vector<std::size_t> front;
  for (std::size_t i : order) {
    bool dominated = std::any_of(front.begin(), front.end(), [&](std::size_t f) {
      return dominates(keys[f], keys[i]);
    });
    if (!dominated) front.push_back(i);
  }
  std::sort(front.begin(), front.end());
  return front;
}

std::optional<double> correlate(const std::vector<Evaluation>& evaluations,
                                const ParameterSpace& space, std::string_view parameter,
                                std::string_view metric,
                                const std::vector<Objective>& objectives) {
  std::size_t dim = space.dimensions.size();
  for (std::size_t i = 0; i < space.dimensions.size(); ++i)
    if (space.dimensions[i].first == parameter) {
      dim = i;
      break;
    }
  if (dim == space.dimensions.size())
    raise(Errc::invalid_argument, "unknown parameter '" + std::string(parameter) + "'");

  std::size_t obj = objectives.size();
  for (std::size_t i = 0; i < objectives.size(); ++i)
    if (objectives[i].metric == metric) {
      obj = i;
      break;
    }
  if (obj == objectives.size())
    raise(Errc::invalid_argument, "no objective for metric '" + std::string(metric) + "'");

  if (evaluations.size() < 2) return std::nullopt;

  std::vector<double> xs, ys;
  xs.reserve(evaluations.size());
  ys.reserve(evaluations.size());
  for (const Evaluation& e : evaluations) {
    if (std::holds_alternative<std::string>(e.point[dim]))
      raise(Errc::non_numeric_parameter,
            "parameter '" + std::string(parameter) + "' is not numeric");
    xs.push_back(numeric_value(e.point[dim]));
    ys.push_back(e.objectives[obj].to_double());
  }

  auto kahan_sum = [](const std::vector<double>& values, auto&& term) {
    long double sum = 0, comp = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      long double t = term(i) - comp;
      long double next = sum + t;
      comp = (next - sum) - t;
      sum = next;
    }
    return sum;
  };

  std::size_t n = xs.size();
  long double mean_x = kahan_sum(xs, [&](std::size_t i) { return (long double)xs[i]; }) / n;
  long double mean_y = kahan_sum(ys, [&](std::size_t i) { return (long double)ys[i]; }) / n;
  long double sxy = kahan_sum(xs, [&](std::size_t i) {
    return (xs[i] - mean_x) * (ys[i] - mean_y);
  });
  long double sxx = kahan_sum(xs, [&](std::size_t i) {
    return (xs[i] - mean_x) * (xs[i] - mean_x);
  });
  long double syy = kahan_sum(ys, [&](std::size_t i) {
    return (ys[i] - mean_y) * (ys[i] - mean_y);
  });

  if (sxx <= 0 || syy <= 0) return std::nullopt;
  double r = static_cast<double>(sxy / std::sqrt(sxx * syy));
  return std::clamp(r, -1.0, 1.0);
}

ExperimentSpec materialize_point(const ExperimentSpec& spec, const ParameterSpace& space,
                                 const Point& point) {
  ExperimentSpec derived = spec;
  for (std::size_t i = 0; i < space.dimensions.size(); ++i) {
    const std::string& name = space.dimensions[i].first;
    std::string rendered = param_value_str(point[i]);
    bool bound = false;
    for (Layer& layer : derived.layers)
      for (ServiceDef& svc : layer.services)
        if (auto it = svc.params.find(name); it != svc.params.end()) {
          it->second = rendered;
          bound = true;
        }
    if (!bound)
      raise(Errc::invalid_argument,
            "parameter '" + name + "' does not bind to any service param");
  }
  return derived;
}

namespace {

Rational aggregate_objective(const RunOutcome& run, const Objective& obj) {
  std::vector<MetricSample> pooled;
  for (const auto& rep_samples : run.samples)
    for (const MetricSample& s : rep_samples)
      if (s.metric == obj.metric) pooled.push_back(s);
  MetricSummary summary = summarize(pooled, obj.metric);
  switch (obj.aggregator) {
    case Aggregator::mean: return summary.mean;
    case Aggregator::p50: return summary.p50;
    case Aggregator::p95: return summary.p95;
    case Aggregator::p99: return summary.p99;
    case Aggregator::max: return summary.max;
  }
  return summary.mean;
}

}  // namespace

OptimizationResult optimize_loop(const ExperimentSpec& spec, const HostPool& pool,
                                 const ParameterSpace& space,
                                 const std::vector<Objective>& objectives,
                                 const OptimizeOptions& options,
                                 std::uint64_t master_seed) {
  if (objectives.empty()) raise(Errc::invalid_argument, "no objectives declared");
  if (options.budget < 1) raise(Errc::invalid_argument, "budget must be >= 1");
  for (const Objective& obj : objectives)
    if (!is_registered_metric(obj.metric))
      raise(Errc::invalid_argument, "unknown metric '" + obj.metric + "'");
  if (space.dimensions.empty())
    raise(Errc::invalid_argument, "parameter space is empty");

  SplitMix64 rng(hash64(master_seed, "optimizer"));

  OptimizationResult result;
  result.strategy = options.strategy;

  std::vector<Point> grid;
  if (options.strategy == Strategy::grid) grid = enumerate_grid(space);

  for (std::size_t i = 0; i < options.budget; ++i) {
    Point point;
    if (options.strategy == Strategy::grid) {
      if (i >= grid.size()) break;
      point = grid[i];
    } else if (options.strategy == Strategy::random) {
      point = std::move(sample_random(space, 1, rng).front());
    } else {
      try {
        point = surrogate_suggest(space, result.evaluations, objectives, rng,
                                  options.surrogate);
      } catch (const Error& e) {
        if (e.code() == Errc::exhausted_space) break;
        throw;
      }
    }

    ExperimentSpec derived = materialize_point(spec, space, point);
    Evaluation eval;
    eval.point = std::move(point);
    eval.evaluation_index = static_cast<std::int64_t>(i);
    try {
      RunOutcome run = run_experiment_core(derived, pool, options.run);
      if (!options.out_dir.empty()) {
        std::string ref = "eval_" + std::to_string(i);
        write_archive(derived, run, options.out_dir / ref, options.run);
        eval.archive_ref = ref;
      }
      for (const Objective& obj : objectives)
        eval.objectives.push_back(aggregate_objective(run, obj));
    } catch (const Error& e) {
      raise(e.code(), "evaluation " + std::to_string(i) + ": " + e.what());
    }
    result.evaluations.push_back(std::move(eval));
  }

  result.budget_used = result.evaluations.size();
  result.pareto = pareto_front(result.evaluations, objectives);
  if (objectives.size() == 1 && !result.evaluations.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.evaluations.size(); ++i)
      if (scalarize(result.evaluations[i], objectives) <
          scalarize(result.evaluations[best], objectives))
        best = i;
    result.best = best;
  }

  for (std::size_t d = 0; d < space.dimensions.size(); ++d) {
    bool numeric = std::all_of(
        result.evaluations.begin(), result.evaluations.end(), [&](const Evaluation& e) {
          return !std::holds_alternative<std::string>(e.point[d]);
        });
    if (!numeric) continue;
    for (const Objective& obj : objectives)
      result.correlations.push_back(
          {space.dimensions[d].first, obj.metric,
           correlate(result.evaluations, space, space.dimensions[d].first, obj.metric,
                     objectives)});
  }
  return result;
}

void write_optimization_report(const OptimizationResult& result,
                               const ParameterSpace& space,
                               const std::vector<Objective>& objectives,
                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  auto point_json = [&](const Point& point) {
    json j = json::object();
    for (std::size_t i = 0; i < space.dimensions.size(); ++i) {
      const ParamValue& v = point[i];
      if (const auto* n = std::get_if<std::int64_t>(&v))
        j[space.dimensions[i].first] = *n;
      else if (const auto* d = std::get_if<double>(&v))
        j[space.dimensions[i].first] = *d;
      else
        j[space.dimensions[i].first] = std::get<std::string>(v);
    }
    return j;
  };

  json evals = json::array();
  for (const Evaluation& e : result.evaluations) {
    json objs = json::array();
    for (const Rational& v : e.objectives) objs.push_back(v.decimal_str());
    evals.push_back({{"archive", e.archive_ref},
                     {"index", e.evaluation_index},
                     {"objectives", std::move(objs)},
                     {"point", point_json(e.point)}});
  }

  json objectives_json = json::array();
  for (const Objective& obj : objectives)
    objectives_json.push_back({{"aggregator", aggregator_name(obj.aggregator)},
                               {"direction", direction_name(obj.direction)},
                               {"metric", obj.metric},
                               {"weight", obj.weight}});

  json correlations = json::array();
  for (const CorrelationEntry& c : result.correlations) {
    json entry = {{"metric", c.metric}, {"parameter", c.parameter}};
    if (c.r) entry["r"] = *c.r;
    else entry["r"] = nullptr;
    correlations.push_back(std::move(entry));
  }

  json root = {{"budget_used", result.budget_used},
               {"correlations", std::move(correlations)},
               {"evaluations", std::move(evals)},
               {"objectives", std::move(objectives_json)},
               {"pareto", result.pareto},
               {"strategy", strategy_name(result.strategy)}};
  if (result.best) root["best"] = *result.best;
  else root["best"] = nullptr;

  std::ofstream jf(out_dir / "optimization.json", std::ios::binary);
  if (!jf) raise(Errc::io, "cannot write optimization.json");
  jf << root.dump(2) << '\n';

  std::ofstream cf(out_dir / "evaluations.csv", std::ios::binary);
  if (!cf) raise(Errc::io, "cannot write evaluations.csv");
  cf << "index";
  for (const auto& [name, dom] : space.dimensions) cf << ',' << name;
  for (const Objective& obj : objectives)
    cf << ',' << obj.metric << ':' << aggregator_name(obj.aggregator);
  cf << '\n';
  for (const Evaluation& e : result.evaluations) {
    cf << e.evaluation_index;
    for (const ParamValue& v : e.point) cf << ',' << param_value_str(v);
    for (const Rational& v : e.objectives) cf << ',' << v.decimal_str();
    cf << '\n';
  }
}

}  // namespace clab
