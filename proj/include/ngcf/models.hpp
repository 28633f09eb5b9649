#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "ngcf/corpus.hpp"
#include "ngcf/criterion.hpp"

namespace ngcf {

/// Conditional word distribution over a closed id space 0..vocab_size()-1
/// (the unknown-word id included).
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::string_view kind() const = 0;
  virtual int order() const = 0;
  virtual std::size_t vocab_size() const = 0;
  /// p(word | context); `context` holds the order()-1 preceding ids.
  virtual double prob(std::span<const WordId> context, WordId word) const = 0;
};

class UniformLM final : public LanguageModel {
 public:
  UniformLM(std::size_t vocab_size, int order) : vocab_size_(vocab_size), order_(order) {}

  std::string_view kind() const override { return "uniform"; }
  int order() const override { return order_; }
  std::size_t vocab_size() const override { return vocab_size_; }
  double prob(std::span<const WordId>, WordId) const override {
    return 1.0 / static_cast<double>(vocab_size_);
  }

 private:
  std::size_t vocab_size_;
  int order_;
};

struct ClusteredOptions {
  /// Fixed class-transition discount; unset selects n1 / (n1 + 2 n2) on the
  /// class-pair counts, clamped to [0.1, 0.9]. Zero disables discounting.
  std::optional<double> discount;
  /// Add one to every vocabulary word inside its cluster's emission.
  bool emission_floor = true;
};

/// Two-sided class model p(w | ctx) = p(G2(w) | G1(ctx)) * p(w | G2(w)).
/// Keeps the integer sufficient statistics and derives all probabilities
/// from them, so a saved and reloaded model scores bit-identically.
class ClusteredLM final : public LanguageModel {
 public:
  std::string_view kind() const override { return "clustered"; }
  int order() const override { return order_; }
  std::size_t vocab_size() const override { return word_cluster_.size(); }
  double prob(std::span<const WordId> context, WordId word) const override;

  ClusterId c1() const { return static_cast<ClusterId>(pair_counts_.rows()); }
  ClusterId c2() const { return static_cast<ClusterId>(pair_counts_.cols()); }
  double b_final() const { return b_final_; }
  bool emission_floor() const { return emission_floor_; }

  /// G1 cluster used for a context; contexts unseen in training map to the
  /// residual row (or the heaviest row when the residual is empty).
  ClusterId context_cluster(std::span<const WordId> context) const;
  ClusterId word_cluster(WordId w) const { return word_cluster_.at(w); }
  ClusterId unseen_row() const { return unseen_row_; }
  bool reachable(ClusterId g1) const { return row_mass_(g1) > 0; }

  /// p(g2 | g1); throws NumericError for a row never seen in training.
  double class_prob(ClusterId g1, ClusterId g2) const;
  double emission(WordId w) const { return emission_(w); }
  const Eigen::MatrixXd& transitions() const { return transition_; }

  const CountMatrix& pair_counts() const { return pair_counts_; }

 private:
  friend ClusteredLM build_clustered_lm(const CountTable&, const Clustering&,
                                        const ClusteredOptions&);
  friend void save_model(std::ostream&, const LanguageModel&, std::uint64_t);
  friend struct ModelReader;

  void finalize();

  int order_ = 2;
  std::vector<ClusterId> word_cluster_;
  std::vector<Count> word_counts_;
  std::vector<std::vector<WordId>> contexts_;  // parallel to context_g1_
  std::vector<ClusterId> context_g1_;
  std::unordered_map<std::string, ClusterId> context_index_;
  CountMatrix pair_counts_;
  double b_final_ = 0.0;
  bool emission_floor_ = true;
  ClusterId unseen_row_ = 0;

  CountVector row_mass_;
  Eigen::MatrixXd transition_;
  Eigen::VectorXd emission_;
};

ClusteredLM build_clustered_lm(const CountTable& counts, const Clustering& clustering,
                               const ClusteredOptions& options = {});

inline double clustered_prob(const ClusteredLM& lm, std::span<const WordId> context, WordId word) {
  return lm.prob(context, word);
}

/// Adaptive discount n1 / (n1 + 2 n2) over a class-pair table, clamped.
double adaptive_discount(const CountMatrix& pair_counts, double lo = 0.1, double hi = 0.9);

struct BackoffOptions {
  /// Add one to every vocabulary word in the unigram used for backed-off mass.
  bool unigram_floor = true;
};

/// Compact bigram back-off model: bigrams with count above the cutoff keep
/// their relative frequency, the discarded mass is spread over all other
/// words in proportion to the unigram. A history with nothing at or below
/// the cutoff discards its lowest count instead.
class BackoffLM final : public LanguageModel {
 public:
  struct History {
    Count total = 0;
    Count discarded = 0;
    Count effective_cutoff = 0;
    std::vector<WordId> kept_words;
    std::vector<Count> kept_counts;
  };

  std::string_view kind() const override { return "backoff"; }
  int order() const override { return 2; }
  std::size_t vocab_size() const override { return unigram_counts_.size(); }
  double prob(std::span<const WordId> context, WordId word) const override;

  Count cutoff() const { return cutoff_; }
  bool unigram_floor() const { return unigram_floor_; }
  double unigram(WordId w) const { return unigram_(w); }
  /// Back-off weight of a history; 1 for unseen histories.
  double alpha(WordId v) const;
  const History& history(WordId v) const { return histories_.at(v); }

 private:
  friend BackoffLM build_backoff(const CountTable&, Count, const BackoffOptions&);
  friend void save_model(std::ostream&, const LanguageModel&, std::uint64_t);
  friend struct ModelReader;

  void finalize();

  Count cutoff_ = 2;
  bool unigram_floor_ = true;
  std::vector<Count> unigram_counts_;
  std::vector<History> histories_;

  Eigen::VectorXd unigram_;
  std::vector<double> unkept_unigram_;  // per history: unigram mass outside the kept set
};

BackoffLM build_backoff(const CountTable& bigrams, Count cutoff, const BackoffOptions& options = {});

inline double backoff_prob(const BackoffLM& lm, WordId v, WordId w) {
  const WordId ctx[1] = {v};
  return lm.prob(ctx, w);
}

struct EvalReport {
  double perplexity = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_skipped = 0;
  double log_prob_total = 0.0;  // natural log
};

/// Scores every position with a full context (the first order()-1 tokens are
/// context only). With `skip_unknown`, positions predicting the unknown word
/// are skipped but unknown words still condition later predictions. Throws
/// NumericError naming the first position assigned probability zero.
EvalReport perplexity(const LanguageModel& model, const TokenStream& test, bool skip_unknown = true);

/// "pp=<float> scored=<int> skipped=<int> logprob=<float>"
std::string format_report(const EvalReport& report);

// ---- model files ----------------------------------------------------------

struct LoadedModel {
  std::unique_ptr<LanguageModel> model;
  std::uint64_t vocab_hash = 0;
};

void save_model(std::ostream& out, const LanguageModel& model, std::uint64_t vocab_hash);
LoadedModel load_model(std::istream& in);

}  // namespace ngcf
