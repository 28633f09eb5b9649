#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "ngcf/corpus.hpp"
#include "ngcf/errors.hpp"
#include "ngcf/types.hpp"

namespace ngcf {

inline constexpr double kDefaultDiscount = 0.75;

/// Total assignment of row elements (contexts, indexed by table row) to
/// G1 clusters and of column elements (word ids) to G2 clusters.
struct Clustering {
  std::vector<ClusterId> g1_of;
  std::vector<ClusterId> g2_of;
  ClusterId c1 = 0;
  ClusterId c2 = 0;

  const std::vector<ClusterId>& of(Side s) const { return s == Side::Row ? g1_of : g2_of; }
  std::vector<ClusterId>& of(Side s) { return s == Side::Row ? g1_of : g2_of; }
  ClusterId bound(Side s) const { return s == Side::Row ? c1 : c2; }

  bool operator==(const Clustering&) const = default;
};

/// Counts of one element's events aggregated by the opposite side's clusters,
/// sorted by cluster id; `total` is the element's own marginal.
struct ElementProfile {
  std::vector<std::pair<ClusterId, Count>> entries;
  Count total = 0;

  Count at(ClusterId g) const;
};

/// Reusable accumulator so repeated profile construction stays O(events of
/// the element) without reallocating a C-sized buffer each time.
class ProfileBuilder {
 public:
  ElementProfile build(const CountTable& counts, const Clustering& clustering, Side side,
                       std::uint32_t element);

  /// Number of table entries visited by all build() calls so far.
  std::uint64_t entries_visited() const { return visited_; }

 private:
  std::vector<Count> acc_;
  std::vector<ClusterId> touched_;
  std::uint64_t visited_ = 0;
};

ElementProfile element_profile(const CountTable& counts, const Clustering& clustering, Side side,
                               std::uint32_t element);

/// Class-pair table N(g1,g2) over the configured C1 x C2 grid together with
/// its marginals and the scalars the leaving-one-out criterion needs.
/// Empty clusters still count towards the unseen-pair total n_zero.
class ClusterStats {
 public:
  ClusterStats(ClusterId c1, ClusterId c2, double b);

  ClusterId c1() const { return static_cast<ClusterId>(pairs_.rows()); }
  ClusterId c2() const { return static_cast<ClusterId>(pairs_.cols()); }
  double b() const { return b_; }

  const CountMatrix& pairs() const { return pairs_; }
  const CountVector& rows() const { return rows_; }
  const CountVector& cols() const { return cols_; }
  Count pair(ClusterId g1, ClusterId g2) const { return pairs_(g1, g2); }

  Count total() const { return total_; }
  Count n_plus() const { return n_plus_; }
  Count n_one() const { return n_one_; }
  Count n_zero() const { return static_cast<Count>(c1()) * c2() - n_plus_; }

  ClusterId bound(Side s) const { return s == Side::Row ? c1() : c2(); }
  Count marginal(Side s, ClusterId g) const { return s == Side::Row ? rows_(g) : cols_(g); }
  /// N(own, other) seen from `side`: rows index (own, other), columns (other, own).
  Count cell(Side s, ClusterId own, ClusterId other) const {
    return s == Side::Row ? pairs_(own, other) : pairs_(other, own);
  }

  bool operator==(const ClusterStats& o) const {
    return b_ == o.b_ && pairs_ == o.pairs_ && rows_ == o.rows_ && cols_ == o.cols_ &&
           total_ == o.total_ && n_plus_ == o.n_plus_ && n_one_ == o.n_one_;
  }

 private:
  friend ClusterStats build_stats(const CountTable&, const Clustering&, double);
  friend void apply_move(ClusterStats&, Side, const ElementProfile&, ClusterId, ClusterId);

  Count& cell_ref(Side s, ClusterId own, ClusterId other) {
    return s == Side::Row ? pairs_(own, other) : pairs_(other, own);
  }
  void recount_scalars();

  CountMatrix pairs_;
  CountVector rows_;
  CountVector cols_;
  Count total_ = 0;
  Count n_plus_ = 0;
  Count n_one_ = 0;
  double b_;
};

/// Aggregates word-level events into cluster pairs. Throws ConsistencyError
/// naming the first element with nonzero count and no (or an out-of-range)
/// cluster.
ClusterStats build_stats(const CountTable& counts, const Clustering& clustering,
                         double b = kDefaultDiscount);

/// Clustering for bigram counts induced by a single word classification G,
/// used for both the predecessor and the successor role.
Clustering one_sided_clustering(const CountTable& bigrams, std::span<const ClusterId> word_cluster,
                                ClusterId num_clusters);

void write_stats(std::ostream& out, const ClusterStats& stats);

// ---- criterion terms --------------------------------------------------------

namespace detail {

template <typename Real>
Real xlogx(Count n) {
  return n > 0 ? static_cast<Real>(n) * std::log(static_cast<Real>(n)) : Real(0);
}

// N * log(N - 1 - b) for pairs seen more than once.
template <typename Real>
Real pair_term(Count n, double b) {
  return n > 1 ? static_cast<Real>(n) * std::log(static_cast<Real>(n) - 1 - static_cast<Real>(b))
               : Real(0);
}

// N * log(N - 1); an empty cluster contributes nothing. N == 1 is rejected
// by the callers before reaching here.
template <typename Real>
Real marginal_term(Count n) {
  return n > 1 ? static_cast<Real>(n) * std::log(static_cast<Real>(n) - 1) : Real(0);
}

// n1 * log(b * (n+ - 1) / (n0 + 1)): mass left for pairs that become unseen
// when their single occurrence is held out.
template <typename Real>
Real singleton_term(Count n_one, Count n_plus, Count n_zero, double b) {
  if (n_one == 0) return Real(0);
  if (n_plus <= 1)
    throw NumericError("degenerate cluster statistics: singleton pairs with n_plus <= 1");
  return static_cast<Real>(n_one) *
         std::log(static_cast<Real>(b) * static_cast<Real>(n_plus - 1) /
                  static_cast<Real>(n_zero + 1));
}

void check_marginals(const ClusterStats& stats);

}  // namespace detail

/// Maximum-likelihood criterion sum N log N - sum N(g1) log N(g1) - sum N(g2) log N(g2).
template <typename Real = double>
Real ml_criterion(const ClusterStats& stats) {
  auto xlx = [](Count n) { return detail::xlogx<Real>(n); };
  return stats.pairs().unaryExpr(xlx).sum() - stats.rows().unaryExpr(xlx).sum() -
         stats.cols().unaryExpr(xlx).sum();
}

/// Leaving-one-out criterion with absolute discounting at stats.b(), natural log.
/// Requires every nonempty cluster marginal to be at least two.
template <typename Real = double>
Real loo_criterion(const ClusterStats& stats) {
  detail::check_marginals(stats);
  const double b = stats.b();
  const Real seen = stats.pairs().unaryExpr([b](Count n) { return detail::pair_term<Real>(n, b); }).sum();
  auto marg = [](Count n) { return detail::marginal_term<Real>(n); };
  return seen + detail::singleton_term<Real>(stats.n_one(), stats.n_plus(), stats.n_zero(), b) -
         stats.rows().unaryExpr(marg).sum() - stats.cols().unaryExpr(marg).sum();
}

/// True when moving the element keeps both affected marginals away from one.
bool move_allowed(const ClusterStats& stats, Side side, const ElementProfile& profile,
                  ClusterId from, ClusterId to);

/// Change in loo_criterion caused by moving one element from `from` to `to`.
/// Touches only the profile's cells in the two affected clusters, so the cost
/// is O(|profile|) and independent of the number of clusters.
template <typename Real = double>
Real delta_move(const ClusterStats& stats, Side side, const ElementProfile& profile,
                ClusterId from, ClusterId to) {
  if (from == to) return Real(0);
  if (!move_allowed(stats, side, profile, from, to))
    throw GuardError("move would leave a cluster with marginal one");
  const double b = stats.b();
  Real d = 0;
  Count d_plus = 0;
  Count d_one = 0;
  for (const auto& [g, n] : profile.entries) {
    const Count of = stats.cell(side, from, g);
    const Count ot = stats.cell(side, to, g);
    const Count nf = of - n;
    const Count nt = ot + n;
    d += detail::pair_term<Real>(nf, b) - detail::pair_term<Real>(of, b) +
         detail::pair_term<Real>(nt, b) - detail::pair_term<Real>(ot, b);
    d_plus += (nf > 0) - (of > 0) + (nt > 0) - (ot > 0);
    d_one += (nf == 1) - (of == 1) + (nt == 1) - (ot == 1);
  }
  const Count grid = static_cast<Count>(stats.c1()) * stats.c2();
  const Count np = stats.n_plus();
  d += detail::singleton_term<Real>(stats.n_one() + d_one, np + d_plus, grid - np - d_plus, b) -
       detail::singleton_term<Real>(stats.n_one(), np, grid - np, b);
  const Count k = profile.total;
  const Count mf = stats.marginal(side, from);
  const Count mt = stats.marginal(side, to);
  d -= detail::marginal_term<Real>(mf - k) - detail::marginal_term<Real>(mf) +
       detail::marginal_term<Real>(mt + k) - detail::marginal_term<Real>(mt);
  return d;
}

/// Commits the move described by delta_move; same guard.
void apply_move(ClusterStats& stats, Side side, const ElementProfile& profile, ClusterId from,
                ClusterId to);

}  // namespace ngcf
