#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ngcf/criterion.hpp"

namespace ngcf {

struct HeuristicParams {
  int h = 5;     // length of the co-occurrence lists
  int t = 10;    // target clusters tried per element
  int u = 1000;  // moves between full list refreshes
};

/// Per-cluster lists of the h most frequently co-occurring opposite-side
/// clusters. Only the lists of a move's source and destination are kept
/// current; everything is rebuilt after every u moves.
struct CandidateIndex {
  HeuristicParams params;
  std::vector<std::vector<ClusterId>> row_top;  // G1 cluster -> G2 clusters
  std::vector<std::vector<ClusterId>> col_top;  // G2 cluster -> G1 clusters
  int moves_since_refresh = 0;
  std::uint64_t refreshes = 0;
  std::uint64_t refresh_cells = 0;  // pair-table cells scanned while building lists

  const std::vector<ClusterId>& top(Side side, ClusterId g) const {
    return side == Side::Row ? row_top[g] : col_top[g];
  }
};

CandidateIndex build_index(const ClusterStats& stats, const HeuristicParams& params);

/// Top-h opposite clusters of cluster `g` on `side`, count descending then id
/// ascending, zero counts excluded.
std::vector<ClusterId> cluster_top(const ClusterStats& stats, Side side, ClusterId g, int h);

/// Top-h entries of an element profile under the same ordering.
std::vector<ClusterId> element_top(const ElementProfile& profile, int h);

/// Unweighted overlap of two top lists.
int candidate_score(std::span<const ClusterId> element_list, std::span<const ClusterId> cluster_list);

/// Up to t clusters on `side`, never `current`, ranked by overlap score, then
/// by the element's profile-weighted co-occurrence with the candidate over the
/// element's own top list, then by lower id. `score_ops` (optional) receives
/// the number of list comparisons spent.
std::vector<ClusterId> select_targets(const CandidateIndex& index, const ClusterStats& stats,
                                      Side side, ClusterId current, const ElementProfile& profile,
                                      std::uint64_t* score_ops = nullptr);

/// Refreshes the lists of `from` and `to` after a committed move and performs
/// a full rebuild once u moves have accumulated.
void note_move(CandidateIndex& index, const ClusterStats& stats, Side side, ClusterId from,
               ClusterId to);

/// "side<TAB>cluster<TAB>id id ..." per list.
void write_index(std::ostream& out, const CandidateIndex& index);

}  // namespace ngcf
