#include "ngcf/heuristic.hpp"

#include <algorithm>
#include <ostream>
#include <tuple>

namespace ngcf {

namespace {

struct Ranked {
  Count key;
  ClusterId id;
};

bool ranked_before(const Ranked& a, const Ranked& b) {
  return a.key != b.key ? a.key > b.key : a.id < b.id;
}

std::vector<ClusterId> take_top(std::vector<Ranked>& items, int h) {
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(h, 0)), items.size());
  std::partial_sort(items.begin(), items.begin() + k, items.end(), ranked_before);
  std::vector<ClusterId> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = items[i].id;
  return out;
}

}  // namespace

std::vector<ClusterId> cluster_top(const ClusterStats& stats, Side side, ClusterId g, int h) {
  if (h <= 0) return {};
  std::vector<Ranked> items;
  const ClusterId other = stats.bound(opposite(side));
  for (ClusterId o = 0; o < other; ++o) {
    const Count n = stats.cell(side, g, o);
    if (n > 0) items.push_back({n, o});
  }
  return take_top(items, h);
}

std::vector<ClusterId> element_top(const ElementProfile& profile, int h) {
  if (h <= 0) return {};
  std::vector<Ranked> items;
  items.reserve(profile.entries.size());
  for (const auto& [g, n] : profile.entries)
    if (n > 0) items.push_back({n, g});
  return take_top(items, h);
}

int candidate_score(std::span<const ClusterId> element_list, std::span<const ClusterId> cluster_list) {
  int score = 0;
  for (ClusterId a : element_list)
    score += static_cast<int>(std::find(cluster_list.begin(), cluster_list.end(), a) !=
                              cluster_list.end());
  return score;
}

CandidateIndex build_index(const ClusterStats& stats, const HeuristicParams& params) {
  CandidateIndex index;
  index.params = params;
  index.row_top.resize(static_cast<std::size_t>(stats.c1()));
  index.col_top.resize(static_cast<std::size_t>(stats.c2()));
  for (ClusterId g = 0; g < stats.c1(); ++g) index.row_top[g] = cluster_top(stats, Side::Row, g, params.h);
  for (ClusterId g = 0; g < stats.c2(); ++g)
    index.col_top[g] = cluster_top(stats, Side::Column, g, params.h);
  index.refresh_cells = 2 * static_cast<std::uint64_t>(stats.c1()) * stats.c2();
  return index;
}

std::vector<ClusterId> select_targets(const CandidateIndex& index, const ClusterStats& stats,
                                      Side side, ClusterId current, const ElementProfile& profile,
                                      std::uint64_t* score_ops) {
  const int h = index.params.h;
  const int t = index.params.t;
  const auto mine = element_top(profile, h);
  std::vector<std::pair<ClusterId, Count>> weights;
  weights.reserve(mine.size());
  for (ClusterId g : mine) weights.emplace_back(g, profile.at(g));

  struct Candidate {
    int score;
    Count weight;
    ClusterId id;
  };
  const ClusterId bound = stats.bound(side);
  std::vector<Candidate> cands;
  cands.reserve(static_cast<std::size_t>(bound));
  std::uint64_t ops = 0;
  for (ClusterId g = 0; g < bound; ++g) {
    if (g == current) continue;
    const auto& theirs = index.top(side, g);
    Candidate c{candidate_score(mine, theirs), 0, g};
    for (const auto& [o, n] : weights) c.weight += n * stats.cell(side, g, o);
    ops += 1 + mine.size() * (theirs.size() + 1);
    cands.push_back(c);
  }
  if (score_ops) *score_ops += ops;

  auto better = [](const Candidate& a, const Candidate& b) {
    return std::tie(b.score, b.weight, a.id) < std::tie(a.score, a.weight, b.id);
  };
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(t, 0)), cands.size());
  std::partial_sort(cands.begin(), cands.begin() + k, cands.end(), better);
  std::vector<ClusterId> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = cands[i].id;
  return out;
}

void note_move(CandidateIndex& index, const ClusterStats& stats, Side side, ClusterId from,
               ClusterId to) {
  auto& lists = side == Side::Row ? index.row_top : index.col_top;
  const int h = index.params.h;
  lists[from] = cluster_top(stats, side, from, h);
  lists[to] = cluster_top(stats, side, to, h);
  index.refresh_cells += 2 * static_cast<std::uint64_t>(stats.bound(opposite(side)));
  if (++index.moves_since_refresh >= index.params.u) {
    const auto cells = index.refresh_cells;
    const auto refreshes = index.refreshes;
    index = build_index(stats, index.params);
    index.refresh_cells += cells;
    index.refreshes = refreshes + 1;
  }
}

void write_index(std::ostream& out, const CandidateIndex& index) {
  auto dump = [&](char tag, const std::vector<std::vector<ClusterId>>& lists) {
    for (std::size_t g = 0; g < lists.size(); ++g) {
      out << tag << '\t' << g << '\t';
      for (std::size_t k = 0; k < lists[g].size(); ++k) out << (k ? " " : "") << lists[g][k];
      out << '\n';
    }
  };
  dump('r', index.row_top);
  dump('c', index.col_top);
}

}  // namespace ngcf
