#include "ngcf/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ngcf/errors.hpp"
#include "ngcf/parallel.hpp"

namespace ngcf {

namespace {

std::string context_key(std::span<const WordId> ctx) {
  return {reinterpret_cast<const char*>(ctx.data()), ctx.size_bytes()};
}

}  // namespace

// ---- clustered model --------------------------------------------------------

double adaptive_discount(const CountMatrix& pair_counts, double lo, double hi) {
  const auto n1 = static_cast<double>((pair_counts.array() == 1).count());
  const auto n2 = static_cast<double>((pair_counts.array() == 2).count());
  const double b = n1 + 2 * n2 > 0 ? n1 / (n1 + 2 * n2) : 0.0;
  return std::clamp(b, lo, hi);
}

ClusteredLM build_clustered_lm(const CountTable& counts, const Clustering& clustering,
                               const ClusteredOptions& options) {
  if (clustering.g2_of.size() != counts.num_words() || clustering.g1_of.size() != counts.num_rows())
    throw ConsistencyError("clustering does not match the count table");
  ClusteredLM lm;
  lm.order_ = counts.order();
  lm.word_cluster_ = clustering.g2_of;
  lm.word_counts_ = counts.col_marginals();
  lm.pair_counts_ = CountMatrix::Zero(clustering.c1, clustering.c2);
  lm.contexts_.reserve(counts.num_rows());
  lm.context_g1_ = clustering.g1_of;
  for (RowId r = 0; r < counts.num_rows(); ++r) {
    const auto ctx = counts.context(r);
    lm.contexts_.emplace_back(ctx.begin(), ctx.end());
    const ClusterId g1 = clustering.g1_of[r];
    const auto words = counts.row_words(r);
    const auto cs = counts.row_counts(r);
    for (std::size_t k = 0; k < words.size(); ++k) lm.pair_counts_(g1, clustering.g2_of[words[k]]) += cs[k];
  }
  if (options.discount) {
    if (!(*options.discount >= 0.0 && *options.discount < 1.0))
      throw std::invalid_argument("clustered-model discount must lie in [0, 1)");
    lm.b_final_ = *options.discount;
  } else {
    lm.b_final_ = adaptive_discount(lm.pair_counts_);
  }
  lm.emission_floor_ = options.emission_floor;
  lm.finalize();
  return lm;
}

void ClusteredLM::finalize() {
  const ClusterId n1 = c1();
  const ClusterId n2 = c2();
  const std::size_t v = word_cluster_.size();

  context_index_.clear();
  context_index_.reserve(contexts_.size());
  for (std::size_t i = 0; i < contexts_.size(); ++i) context_index_.emplace(context_key(contexts_[i]), context_g1_[i]);

  // emissions
  CountVector members = CountVector::Zero(n2);
  CountVector col_mass = CountVector::Zero(n2);
  for (WordId w = 0; w < v; ++w) {
    ++members(word_cluster_[w]);
    col_mass(word_cluster_[w]) += word_counts_[w];
  }
  const Count floor = emission_floor_ ? 1 : 0;
  emission_.resize(static_cast<Eigen::Index>(v));
  for (WordId w = 0; w < v; ++w) {
    const ClusterId g = word_cluster_[w];
    const Count denom = col_mass(g) + floor * members(g);
    emission_(w) = denom > 0 ? static_cast<double>(word_counts_[w] + floor) / static_cast<double>(denom) : 0.0;
  }

  // class unigram used to share out the discounted mass
  Eigen::VectorXd class_weight = (col_mass + floor * members).cast<double>();

  row_mass_ = pair_counts_.rowwise().sum();
  transition_ = Eigen::MatrixXd::Zero(n1, n2);
  const double b = b_final_;
  for (ClusterId g1 = 0; g1 < n1; ++g1) {
    const Count mass = row_mass_(g1);
    if (mass == 0) continue;
    const auto row = pair_counts_.row(g1);
    const Count seen = (row.array() > 0).count();
    double unseen_weight = 0.0;
    for (ClusterId g2 = 0; g2 < n2; ++g2)
      if (row(g2) == 0) unseen_weight += class_weight(g2);
    if (b > 0.0 && unseen_weight > 0.0) {
      const double gained = b * static_cast<double>(seen) / static_cast<double>(mass);
      for (ClusterId g2 = 0; g2 < n2; ++g2)
        transition_(g1, g2) = row(g2) > 0 ? (static_cast<double>(row(g2)) - b) / static_cast<double>(mass)
                                          : gained * class_weight(g2) / unseen_weight;
    } else {
      // nothing left to receive discounted mass: renormalize the kept part
      const double denom = static_cast<double>(mass) - b * static_cast<double>(seen);
      for (ClusterId g2 = 0; g2 < n2; ++g2)
        if (row(g2) > 0) transition_(g1, g2) = (static_cast<double>(row(g2)) - b) / denom;
    }
  }

  unseen_row_ = n1 - 1;
  if (row_mass_(unseen_row_) == 0) row_mass_.maxCoeff(&unseen_row_);
}

ClusterId ClusteredLM::context_cluster(std::span<const WordId> context) const {
  auto it = context_index_.find(context_key(context));
  return it == context_index_.end() ? unseen_row_ : it->second;
}

double ClusteredLM::class_prob(ClusterId g1, ClusterId g2) const {
  if (!reachable(g1))
    throw NumericError("context cluster " + std::to_string(g1) + " was never seen in training");
  return transition_(g1, g2);
}

double ClusteredLM::prob(std::span<const WordId> context, WordId word) const {
  if (context.size() != static_cast<std::size_t>(order_ - 1))
    throw ConsistencyError("context length does not match the model order");
  return class_prob(context_cluster(context), word_cluster_.at(word)) * emission_(word);
}

// ---- back-off model ---------------------------------------------------------

BackoffLM build_backoff(const CountTable& bigrams, Count cutoff, const BackoffOptions& options) {
  if (bigrams.order() != 2) throw ConsistencyError("back-off model needs bigram counts");
  if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
  BackoffLM lm;
  lm.cutoff_ = cutoff;
  lm.unigram_floor_ = options.unigram_floor;
  lm.unigram_counts_ = bigrams.col_marginals();
  lm.histories_.resize(bigrams.num_words());
  for (RowId r = 0; r < bigrams.num_rows(); ++r) {
    const auto words = bigrams.row_words(r);
    const auto cs = bigrams.row_counts(r);
    auto& h = lm.histories_[bigrams.context(r)[0]];
    h.total = bigrams.row_marginal(r);
    Count effective = cutoff;
    if (*std::min_element(cs.begin(), cs.end()) > cutoff)
      effective = *std::min_element(cs.begin(), cs.end());
    h.effective_cutoff = effective;
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (cs[k] <= effective) {
        h.discarded += cs[k];
      } else {
        h.kept_words.push_back(words[k]);
        h.kept_counts.push_back(cs[k]);
      }
    }
  }
  lm.finalize();
  return lm;
}

void BackoffLM::finalize() {
  const std::size_t v = unigram_counts_.size();
  const Count floor = unigram_floor_ ? 1 : 0;
  Count total = 0;
  for (Count c : unigram_counts_) total += c + floor;
  unigram_.resize(static_cast<Eigen::Index>(v));
  for (std::size_t w = 0; w < v; ++w)
    unigram_(static_cast<Eigen::Index>(w)) =
        total > 0 ? static_cast<double>(unigram_counts_[w] + floor) / static_cast<double>(total) : 0.0;

  unkept_unigram_.assign(histories_.size(), 1.0);
  for (std::size_t h = 0; h < histories_.size(); ++h) {
    Count kept = 0;
    for (WordId w : histories_[h].kept_words) kept += unigram_counts_[w] + floor;
    unkept_unigram_[h] = total > 0 ? static_cast<double>(total - kept) / static_cast<double>(total) : 0.0;
  }
}

double BackoffLM::alpha(WordId v) const {
  const auto& h = histories_.at(v);
  return h.total == 0 ? 1.0 : static_cast<double>(h.discarded) / static_cast<double>(h.total);
}

double BackoffLM::prob(std::span<const WordId> context, WordId word) const {
  if (context.size() != 1) throw ConsistencyError("back-off model expects a one-word context");
  const auto& h = histories_.at(context[0]);
  if (h.total == 0) return unigram_(word);
  auto it = std::lower_bound(h.kept_words.begin(), h.kept_words.end(), word);
  if (it != h.kept_words.end() && *it == word)
    return static_cast<double>(h.kept_counts[static_cast<std::size_t>(it - h.kept_words.begin())]) /
           static_cast<double>(h.total);
  const double rest = unkept_unigram_[context[0]];
  return rest > 0.0 ? alpha(context[0]) * unigram_(word) / rest : 0.0;
}

// ---- evaluation ---------------------------------------------------------------

EvalReport perplexity(const LanguageModel& model, const TokenStream& test, bool skip_unknown) {
  const std::size_t m = static_cast<std::size_t>(model.order() - 1);
  if (test.size() < m + 1)
    throw InputError("test stream of length " + std::to_string(test.size()) +
                     " is shorter than the model order " + std::to_string(model.order()));
  for (WordId id : test.ids)
    if (id >= model.vocab_size()) throw ConsistencyError("test stream uses ids outside the model vocabulary");

  // Fixed-size chunks summed in chunk order: the total does not depend on
  // how many threads ran.
  constexpr std::size_t kChunk = 8192;
  const std::size_t first = m;
  const std::size_t n = test.size();
  const std::size_t chunks = (n - first + kChunk - 1) / kChunk;
  struct Partial {
    double log_prob = 0.0;
    std::size_t scored = 0;
    std::size_t skipped = 0;
    std::size_t bad_position = std::numeric_limits<std::size_t>::max();
  };
  std::vector<Partial> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Partial& p = parts[c];
    const std::size_t lo = first + c * kChunk;
    const std::size_t hi = std::min(n, lo + kChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      const WordId w = test.ids[i];
      if (skip_unknown && w == kUnkId) {
        ++p.skipped;
        continue;
      }
      const double pr = model.prob(std::span<const WordId>(test.ids.data() + i - m, m), w);
      if (!(pr > 0.0)) {
        p.bad_position = i;
        return;
      }
      p.log_prob += std::log(pr);
      ++p.scored;
    }
  });

  EvalReport report;
  for (const auto& p : parts) {
    if (p.bad_position != std::numeric_limits<std::size_t>::max())
      throw NumericError("zero probability for the token at position " + std::to_string(p.bad_position));
    report.log_prob_total += p.log_prob;
    report.n_scored += p.scored;
    report.n_skipped += p.skipped;
  }
  if (report.n_scored == 0) throw NumericError("no tokens were scored");
  report.perplexity = std::exp(-report.log_prob_total / static_cast<double>(report.n_scored));
  return report;
}

std::string format_report(const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "pp=%.6f scored=%zu skipped=%zu logprob=%.6f", r.perplexity,
                r.n_scored, r.n_skipped, r.log_prob_total);
  return buf;
}

}  // namespace ngcf
