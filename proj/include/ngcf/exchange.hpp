#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ngcf/corpus.hpp"
#include "ngcf/criterion.hpp"
#include "ngcf/heuristic.hpp"

namespace ngcf {

enum class InitMode {
  Frequency,  // most frequent elements as singletons, the rest in the last cluster
  Random,     // clusterable elements spread uniformly at random (seeded)
};

struct ExchangeConfig {
  ClusterId c1 = 2;
  ClusterId c2 = 2;
  Count min_count = 5;
  int max_iterations = 20;
  double b = kDefaultDiscount;
  double convergence_epsilon = 0.0;
  std::size_t max_rows_clustered = 500000;
  std::uint64_t seed = 42;
  InitMode init = InitMode::Frequency;
  bool cluster_rows = true;
  bool cluster_columns = true;

  ClusterId bound_for(Side s) const { return s == Side::Row ? c1 : c2; }
  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double criterion = 0.0;
  std::size_t moves = 0;
  double seconds = 0.0;
};

/// Record 0 holds the initial clustering; each later record one full pass.
struct ExchangeTrace {
  std::vector<IterationRecord> records;

  double final_criterion() const { return records.back().criterion; }
  bool converged() const { return !records.empty() && records.back().moves == 0; }
};

/// Instrumentation for the complexity checks; counts work, not time.
struct WorkCounters {
  std::uint64_t delta_evaluations = 0;  // (element, target) pairs evaluated
  std::uint64_t delta_cells = 0;        // profile cells touched by those evaluations
  std::uint64_t profile_entries = 0;    // table entries read to build profiles
  std::uint64_t score_ops = 0;          // heuristic list comparisons
  std::uint64_t refresh_cells = 0;      // pair cells scanned by list rebuilds
  std::uint64_t moves = 0;

  std::uint64_t move_evaluation_work() const { return delta_cells + score_ops; }
};

struct ExchangeResult {
  Clustering clustering;
  ExchangeTrace trace;
  WorkCounters work;                  // all iterations
  std::vector<WorkCounters> per_iteration;
};

/// Clusterable elements of one side in visiting order: marginal >= min_count
/// (rows additionally capped at max_rows_clustered), descending marginal,
/// ties by ascending id.
std::vector<std::uint32_t> element_order(const CountTable& counts, Side side,
                                         const ExchangeConfig& config);

Clustering initialize(const CountTable& counts, const ExchangeConfig& config);

/// Exchange clustering to a local optimum of the leaving-one-out criterion.
/// Each iteration visits all column elements, then all row elements, and moves
/// each to its best strictly improving target (all clusters, or the
/// heuristic's candidates when `heuristic` is set).
ExchangeResult cluster(const CountTable& counts, const ExchangeConfig& config,
                       const std::optional<HeuristicParams>& heuristic = std::nullopt);

/// Same, starting from a given clustering.
ExchangeResult cluster_from(const CountTable& counts, Clustering initial,
                            const ExchangeConfig& config,
                            const std::optional<HeuristicParams>& heuristic = std::nullopt);

/// Moves are accepted only when the criterion gain exceeds this margin, which
/// sits above the rounding noise of an incremental delta.
inline constexpr double kMinGain = 1e-9;

// ---- file formats ---------------------------------------------------------

/// "word<TAB>cluster" for every vocabulary id.
void write_word_clusters(std::ostream& out, const Clustering& clustering, const Vocabulary& vocab);
/// "ctx words<TAB>cluster" for every context row of `counts`.
void write_context_clusters(std::ostream& out, const Clustering& clustering,
                            const CountTable& counts, const Vocabulary& vocab);
/// Reads both files back against the table they were produced from. A zero
/// cluster bound is inferred as the largest id read plus one.
Clustering read_clustering(std::istream& g1_in, std::istream& g2_in, const CountTable& counts,
                           const Vocabulary& vocab, ClusterId c1 = 0, ClusterId c2 = 0);

/// "iteration<TAB>criterion<TAB>moves<TAB>seconds".
void write_trace(std::ostream& out, const ExchangeTrace& trace, bool with_time = true);

}  // namespace ngcf
