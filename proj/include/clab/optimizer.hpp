#ifndef CLAB_OPTIMIZER_HPP
#define CLAB_OPTIMIZER_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clab/archive.hpp"
#include "clab/rng.hpp"
#include "clab/spec.hpp"

namespace clab {

enum class Direction { minimize, maximize };
enum class Aggregator { mean, p50, p95, p99, max };

struct Objective {
  std::string metric;
  Direction direction = Direction::minimize;
  Aggregator aggregator = Aggregator::mean;
  double weight = 1.0;  // weighted-sum scalarization for surrogate guidance
};

/// "metric:aggregator:direction[:weight]", e.g. "e2e_latency_ns:mean:minimize".
Objective parse_objective(std::string_view text);
const char* direction_name(Direction d);
const char* aggregator_name(Aggregator a);

/// One value per dimension, aligned with ParameterSpace::dimensions.
using Point = std::vector<ParamValue>;

struct Evaluation {
  Point point;
  std::vector<Rational> objectives;
  std::int64_t evaluation_index = 0;
  std::string archive_ref;
};

enum class Strategy { grid, random, surrogate };
Strategy parse_optimizer_strategy(std::string_view name);
const char* strategy_name(Strategy s);

/// Full Cartesian product in lexicographic (dimension order, domain order)
/// order. Throws Errc::continuous_dimension.
std::vector<Point> enumerate_grid(const ParameterSpace& space);

/// n independent uniform draws (range: uniform over steps, discrete:
/// uniform over values, continuous: uniform real).
std::vector<Point> sample_random(const ParameterSpace& space, std::size_t n,
                                 SplitMix64& rng);

struct SurrogateOptions {
  std::size_t pool_size = 64;
  double lambda = 0.5;  // exploration bonus on distance to nearest evaluation
};

/// IDW suggestion: predict candidates with inverse-squared-distance weights
/// over min-max-normalized dimensions, subtract lambda * d_min, take the
/// argmin. Cold start (<2 evaluations) falls back to a uniform unevaluated
/// point. Throws Errc::exhausted_space once a discrete space is fully
/// evaluated.
Point surrogate_suggest(const ParameterSpace& space, const std::vector<Evaluation>& history,
                        const std::vector<Objective>& objectives, SplitMix64& rng,
                        const SurrogateOptions& options = {});

/// Indices of the non-dominated evaluations, in evaluation_index order.
std::vector<std::size_t> pareto_front(const std::vector<Evaluation>& evaluations,
                                      const std::vector<Objective>& objectives);

/// Sample Pearson correlation between a numeric parameter and an objective
/// metric; nullopt when either variance is zero (UNDEFINED). Throws
/// Errc::non_numeric_parameter.
std::optional<double> correlate(const std::vector<Evaluation>& evaluations,
                                const ParameterSpace& space, std::string_view parameter,
                                std::string_view metric,
                                const std::vector<Objective>& objectives);

struct CorrelationEntry {
  std::string parameter;
  std::string metric;
  std::optional<double> r;
};

struct OptimizationResult {
  std::vector<Evaluation> evaluations;
  std::vector<std::size_t> pareto;      // indices into evaluations
  std::optional<std::size_t> best;      // single-objective only
  Strategy strategy = Strategy::grid;
  std::size_t budget_used = 0;
  std::vector<CorrelationEntry> correlations;
};

struct OptimizeOptions {
  Strategy strategy = Strategy::grid;
  std::size_t budget = 1;
  SurrogateOptions surrogate;
  RunOptions run;
  std::filesystem::path out_dir;  // empty: in-memory evaluations, no archives
};

/// The search loop: suggest, materialize a derived spec (parameter values
/// substituted into matching service params), run, aggregate. Deterministic
/// given master_seed.
OptimizationResult optimize_loop(const ExperimentSpec& spec, const HostPool& pool,
                                 const ParameterSpace& space,
                                 const std::vector<Objective>& objectives,
                                 const OptimizeOptions& options,
                                 std::uint64_t master_seed);

/// Derived spec with point values written into every service param whose
/// key matches a dimension name.
ExperimentSpec materialize_point(const ExperimentSpec& spec, const ParameterSpace& space,
                                 const Point& point);

void write_optimization_report(const OptimizationResult& result,
                               const ParameterSpace& space,
                               const std::vector<Objective>& objectives,
                               const std::filesystem::path& out_dir);

}  // namespace clab

#endif  // CLAB_OPTIMIZER_HPP
