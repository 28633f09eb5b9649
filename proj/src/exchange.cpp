#include "ngcf/exchange.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "ngcf/errors.hpp"

namespace ngcf {

void ExchangeConfig::validate() const {
  if (c1 < 2 || c2 < 2) throw std::invalid_argument("cluster counts c1, c2 must be >= 2");
  if (min_count < 2) throw std::invalid_argument("min_count must be >= 2");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("discount b must lie in (0, 1)");
  if (convergence_epsilon < 0.0) throw std::invalid_argument("convergence_epsilon must be >= 0");
}

namespace {

std::size_t side_size(const CountTable& counts, Side side) {
  return side == Side::Row ? counts.num_rows() : counts.num_words();
}

Count side_marginal(const CountTable& counts, Side side, std::uint32_t e) {
  return side == Side::Row ? counts.row_marginal(e) : counts.col_marginal(e);
}

std::vector<ClusterId> initialize_side(const CountTable& counts, Side side,
                                       const ExchangeConfig& config) {
  const std::size_t n = side_size(counts, side);
  std::size_t nonzero = 0;
  for (std::uint32_t e = 0; e < n; ++e) nonzero += side_marginal(counts, side, e) > 0;
  if (nonzero < 2)
    throw InputError(std::string("fewer than two ") + (side == Side::Row ? "contexts" : "words") +
                     " with nonzero counts; nothing to cluster");

  const ClusterId bound = config.bound_for(side);
  const ClusterId residual = bound - 1;
  std::vector<ClusterId> assign(n, residual);
  auto order = element_order(counts, side, config);

  if (config.init == InitMode::Frequency) {
    const std::size_t singles = std::min<std::size_t>(static_cast<std::size_t>(residual), order.size());
    order.resize(singles);
    for (std::size_t i = 0; i < singles; ++i) assign[order[i]] = static_cast<ClusterId>(i);
  } else {
    std::mt19937_64 rng(config.seed ^ (side == Side::Row ? 0x9e3779b97f4a7c15ULL : 0ULL));
    for (auto e : order) assign[e] = static_cast<ClusterId>(rng() % static_cast<std::uint64_t>(bound));
  }

  // A residual cluster holding a single event would break the leaving-one-out
  // estimate; fold the least frequent actively placed element into it.
  Count residual_mass = 0;
  for (std::uint32_t e = 0; e < n; ++e)
    if (assign[e] == residual) residual_mass += side_marginal(counts, side, e);
  if (residual_mass == 1) {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (assign[*it] != residual) {
        assign[*it] = residual;
        break;
      }
    }
  }
  return assign;
}

}  // namespace

std::vector<std::uint32_t> element_order(const CountTable& counts, Side side,
                                         const ExchangeConfig& config) {
  std::vector<std::uint32_t> order;
  const std::size_t n = side_size(counts, side);
  for (std::uint32_t e = 0; e < n; ++e)
    if (side_marginal(counts, side, e) >= config.min_count) order.push_back(e);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return side_marginal(counts, side, a) > side_marginal(counts, side, b);
  });
  if (side == Side::Row && order.size() > config.max_rows_clustered)
    order.resize(config.max_rows_clustered);
  return order;
}

Clustering initialize(const CountTable& counts, const ExchangeConfig& config) {
  config.validate();
  if (counts.empty()) throw InputError("cannot cluster an empty count table");
  Clustering c;
  c.c1 = config.c1;
  c.c2 = config.c2;
  c.g1_of = initialize_side(counts, Side::Row, config);
  c.g2_of = initialize_side(counts, Side::Column, config);
  return c;
}

ExchangeResult cluster(const CountTable& counts, const ExchangeConfig& config,
                       const std::optional<HeuristicParams>& heuristic) {
  return cluster_from(counts, initialize(counts, config), config, heuristic);
}

ExchangeResult cluster_from(const CountTable& counts, Clustering initial,
                            const ExchangeConfig& config,
                            const std::optional<HeuristicParams>& heuristic) {
  using clock = std::chrono::steady_clock;
  config.validate();
  if (initial.c1 != config.c1 || initial.c2 != config.c2)
    throw ConsistencyError("initial clustering bounds differ from the configuration");

  ExchangeResult result;
  result.clustering = std::move(initial);
  Clustering& clustering = result.clustering;
  ClusterStats stats = build_stats(counts, clustering, config.b);

  const auto column_order = element_order(counts, Side::Column, config);
  const auto row_order = element_order(counts, Side::Row, config);

  std::optional<CandidateIndex> index;
  if (heuristic) index = build_index(stats, *heuristic);

  ProfileBuilder profiles;
  double previous = loo_criterion(stats);
  result.trace.records.push_back({0, previous, 0, 0.0});
  std::vector<ClusterId> all_targets;

  for (int it = 1; it <= config.max_iterations; ++it) {
    const auto started = clock::now();
    WorkCounters work;
    const std::uint64_t profile_before = profiles.entries_visited();
    const std::uint64_t refresh_before = index ? index->refresh_cells : 0;

    auto visit = [&](Side side, const std::vector<std::uint32_t>& order) {
      auto& assign = clustering.of(side);
      const ClusterId bound = clustering.bound(side);
      for (std::uint32_t element : order) {
        const ElementProfile profile = profiles.build(counts, clustering, side, element);
        const ClusterId from = assign[element];
        if (stats.marginal(side, from) - profile.total == 1) continue;

        const std::vector<ClusterId>* targets;
        std::vector<ClusterId> selected;
        if (index) {
          selected = select_targets(*index, stats, side, from, profile, &work.score_ops);
          targets = &selected;
        } else {
          all_targets.clear();
          for (ClusterId g = 0; g < bound; ++g)
            if (g != from) all_targets.push_back(g);
          targets = &all_targets;
        }

        double best = kMinGain;
        ClusterId best_to = kNoCluster;
        for (ClusterId to : *targets) {
          const double d = delta_move(stats, side, profile, from, to);
          ++work.delta_evaluations;
          work.delta_cells += profile.entries.size();
          if (d > best || (d == best && best_to != kNoCluster && to < best_to)) {
            best = d;
            best_to = to;
          }
        }
        if (best_to == kNoCluster) continue;
        apply_move(stats, side, profile, from, best_to);
        assign[element] = best_to;
        ++work.moves;
        if (index) note_move(*index, stats, side, from, best_to);
      }
    };
    if (config.cluster_columns) visit(Side::Column, column_order);
    if (config.cluster_rows) visit(Side::Row, row_order);

    work.profile_entries = profiles.entries_visited() - profile_before;
    if (index) work.refresh_cells = index->refresh_cells - refresh_before;
    const double value = loo_criterion(stats);
    const double seconds = std::chrono::duration<double>(clock::now() - started).count();
    result.trace.records.push_back({it, value, static_cast<std::size_t>(work.moves), seconds});
    result.per_iteration.push_back(work);

    auto& total = result.work;
    total.delta_evaluations += work.delta_evaluations;
    total.delta_cells += work.delta_cells;
    total.profile_entries += work.profile_entries;
    total.score_ops += work.score_ops;
    total.refresh_cells += work.refresh_cells;
    total.moves += work.moves;

    if (work.moves == 0) break;
    if (config.convergence_epsilon > 0.0 &&
        (value - previous) / std::max(std::abs(previous), 1.0) < config.convergence_epsilon)
      break;
    previous = value;
  }
  return result;
}

// ---- file formats ---------------------------------------------------------

namespace {

std::string join_context(std::span<const WordId> ctx, const Vocabulary& vocab) {
  std::string s;
  for (WordId id : ctx) {
    if (!s.empty()) s.push_back(' ');
    s += vocab.word(id);
  }
  return s;
}

ClusterId parse_cluster(const std::string& field, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const long v = std::stol(field, &used);
    if (used == field.size() && v >= 0 && v < (1L << 30)) return static_cast<ClusterId>(v);
  } catch (const std::exception&) {
  }
  throw InputError("clustering line " + std::to_string(line_no) + ": bad cluster id '" + field + "'");
}

}  // namespace

void write_word_clusters(std::ostream& out, const Clustering& clustering, const Vocabulary& vocab) {
  if (clustering.g2_of.size() != vocab.size())
    throw ConsistencyError("word clustering does not match the vocabulary size");
  for (WordId id = 0; id < vocab.size(); ++id)
    out << vocab.word(id) << '\t' << clustering.g2_of[id] << '\n';
}

void write_context_clusters(std::ostream& out, const Clustering& clustering,
                            const CountTable& counts, const Vocabulary& vocab) {
  if (clustering.g1_of.size() != counts.num_rows())
    throw ConsistencyError("context clustering does not match the count table");
  for (RowId r = 0; r < counts.num_rows(); ++r)
    out << join_context(counts.context(r), vocab) << '\t' << clustering.g1_of[r] << '\n';
}

Clustering read_clustering(std::istream& g1_in, std::istream& g2_in, const CountTable& counts,
                           const Vocabulary& vocab, ClusterId c1, ClusterId c2) {
  Clustering c;
  c.g1_of.assign(counts.num_rows(), kNoCluster);
  c.g2_of.assign(vocab.size(), kNoCluster);
  ClusterId max1 = -1;
  ClusterId max2 = -1;
  std::string line;
  std::size_t line_no = 0;

  auto word_id = [&](std::string_view w) {
    if (w != kUnkToken && !vocab.contains(w))
      throw ConsistencyError("clustering names unknown word '" + std::string(w) + "'");
    return vocab.id_of(w);
  };
  while (std::getline(g2_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw InputError("word clustering line " + std::to_string(line_no) + ": missing TAB");
    const ClusterId g = parse_cluster(line.substr(tab + 1), line_no);
    c.g2_of[word_id(std::string_view(line).substr(0, tab))] = g;
    max2 = std::max(max2, g);
  }
  line_no = 0;
  std::vector<WordId> ctx;
  while (std::getline(g1_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw InputError("context clustering line " + std::to_string(line_no) + ": missing TAB");
    const ClusterId g = parse_cluster(line.substr(tab + 1), line_no);
    ctx.clear();
    std::string_view words(line.data(), tab);
    while (!words.empty()) {
      const auto sp = words.find(' ');
      ctx.push_back(word_id(words.substr(0, sp)));
      if (sp == std::string_view::npos) break;
      words.remove_prefix(sp + 1);
    }
    const auto row = counts.find_row(ctx);
    if (!row) throw ConsistencyError("context clustering line " + std::to_string(line_no) + " names a context absent from the counts");
    c.g1_of[*row] = g;
    max1 = std::max(max1, g);
  }
  c.c1 = c1 > 0 ? c1 : max1 + 1;
  c.c2 = c2 > 0 ? c2 : max2 + 1;
  for (ClusterId g : c.g1_of)
    if (g == kNoCluster || g >= c.c1) throw ConsistencyError("context clustering is incomplete or out of range");
  for (ClusterId g : c.g2_of)
    if (g == kNoCluster || g >= c.c2) throw ConsistencyError("word clustering is incomplete or out of range");
  return c;
}

void write_trace(std::ostream& out, const ExchangeTrace& trace, bool with_time) {
  char buf[128];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%d\t%.10f\t%zu\t%.3f\n", r.iteration, r.criterion, r.moves,
                  with_time ? r.seconds : 0.0);
    out << buf;
  }
}

}  // namespace ngcf
