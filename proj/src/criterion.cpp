#include "ngcf/criterion.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace ngcf {

Count ElementProfile::at(ClusterId g) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), g,
                             [](const auto& e, ClusterId v) { return e.first < v; });
  return it != entries.end() && it->first == g ? it->second : 0;
}

ElementProfile ProfileBuilder::build(const CountTable& counts, const Clustering& clustering,
                                     Side side, std::uint32_t element) {
  const auto& opposite_of = clustering.of(opposite(side));
  acc_.resize(static_cast<std::size_t>(clustering.bound(opposite(side))), 0);
  touched_.clear();

  auto add = [&](std::uint32_t other, Count n) {
    const ClusterId g = opposite_of[other];
    if (acc_[g] == 0) touched_.push_back(g);
    acc_[g] += n;
  };
  if (side == Side::Row) {
    const auto words = counts.row_words(element);
    const auto cs = counts.row_counts(element);
    for (std::size_t k = 0; k < words.size(); ++k) add(words[k], cs[k]);
    visited_ += words.size();
  } else {
    const auto rows = counts.col_rows(element);
    const auto cs = counts.col_counts(element);
    for (std::size_t k = 0; k < rows.size(); ++k) add(rows[k], cs[k]);
    visited_ += rows.size();
  }

  std::sort(touched_.begin(), touched_.end());
  ElementProfile p;
  p.entries.reserve(touched_.size());
  for (ClusterId g : touched_) {
    p.entries.emplace_back(g, acc_[g]);
    p.total += acc_[g];
    acc_[g] = 0;
  }
  return p;
}

ElementProfile element_profile(const CountTable& counts, const Clustering& clustering, Side side,
                               std::uint32_t element) {
  ProfileBuilder builder;
  return builder.build(counts, clustering, side, element);
}

ClusterStats::ClusterStats(ClusterId c1, ClusterId c2, double b)
    : pairs_(CountMatrix::Zero(c1, c2)),
      rows_(CountVector::Zero(c1)),
      cols_(CountVector::Zero(c2)),
      b_(b) {
  if (c1 < 1 || c2 < 1) throw std::invalid_argument("cluster counts must be positive");
  if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("discount b must lie in (0, 1)");
}

void ClusterStats::recount_scalars() {
  rows_ = pairs_.rowwise().sum();
  cols_ = pairs_.colwise().sum().transpose();
  total_ = pairs_.sum();
  n_plus_ = (pairs_.array() > 0).count();
  n_one_ = (pairs_.array() == 1).count();
}

ClusterStats build_stats(const CountTable& counts, const Clustering& clustering, double b) {
  if (clustering.g1_of.size() < counts.num_rows() || clustering.g2_of.size() < counts.num_words())
    throw ConsistencyError("clustering does not cover the count table");
  ClusterStats stats(clustering.c1, clustering.c2, b);

  auto checked = [&](Side side, std::uint32_t element) {
    const ClusterId g = clustering.of(side)[element];
    if (g < 0 || g >= clustering.bound(side))
      throw ConsistencyError(std::string(side == Side::Row ? "context row " : "word ") +
                             std::to_string(element) + " has nonzero count but no valid cluster");
    return g;
  };
  for (RowId r = 0; r < counts.num_rows(); ++r) {
    const ClusterId g1 = checked(Side::Row, r);
    const auto words = counts.row_words(r);
    const auto cs = counts.row_counts(r);
    for (std::size_t k = 0; k < words.size(); ++k)
      stats.pairs_(g1, checked(Side::Column, words[k])) += cs[k];
  }
  stats.recount_scalars();
  return stats;
}

Clustering one_sided_clustering(const CountTable& bigrams, std::span<const ClusterId> word_cluster,
                                ClusterId num_clusters) {
  if (bigrams.order() != 2) throw ConsistencyError("one-sided clustering needs bigram counts");
  Clustering c;
  c.c1 = c.c2 = num_clusters;
  c.g2_of.assign(word_cluster.begin(), word_cluster.end());
  c.g1_of.resize(bigrams.num_rows());
  for (RowId r = 0; r < bigrams.num_rows(); ++r) c.g1_of[r] = word_cluster[bigrams.context(r)[0]];
  return c;
}

void write_stats(std::ostream& out, const ClusterStats& stats) {
  for (ClusterId g1 = 0; g1 < stats.c1(); ++g1)
    for (ClusterId g2 = 0; g2 < stats.c2(); ++g2)
      if (stats.pair(g1, g2) > 0) out << g1 << '\t' << g2 << '\t' << stats.pair(g1, g2) << '\n';
}

namespace detail {

void check_marginals(const ClusterStats& stats) {
  if ((stats.rows().array() == 1).any() || (stats.cols().array() == 1).any())
    throw GuardError("a nonempty cluster has marginal one; leaving-one-out is undefined");
}

}  // namespace detail

bool move_allowed(const ClusterStats& stats, Side side, const ElementProfile& profile,
                  ClusterId from, ClusterId to) {
  if (from == to) return true;
  return stats.marginal(side, from) - profile.total != 1 &&
         stats.marginal(side, to) + profile.total != 1;
}

void apply_move(ClusterStats& stats, Side side, const ElementProfile& profile, ClusterId from,
                ClusterId to) {
  if (from == to) return;
  if (!move_allowed(stats, side, profile, from, to))
    throw GuardError("move would leave a cluster with marginal one");
  for (const auto& [g, n] : profile.entries) {
    Count& f = stats.cell_ref(side, from, g);
    Count& t = stats.cell_ref(side, to, g);
    if (f < n) throw ConsistencyError("element profile exceeds the source cluster's counts");
    stats.n_plus_ -= (f > 0) + (t > 0);
    stats.n_one_ -= (f == 1) + (t == 1);
    f -= n;
    t += n;
    stats.n_plus_ += (f > 0) + (t > 0);
    stats.n_one_ += (f == 1) + (t == 1);
  }
  auto& marg = side == Side::Row ? stats.rows_ : stats.cols_;
  marg(from) -= profile.total;
  marg(to) += profile.total;
}

}  // namespace ngcf
