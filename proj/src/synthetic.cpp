#include "ngcf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace ngcf {

namespace {

// Sampling is written out by hand (no std:: distributions) so the stream is
// identical across standard libraries.
class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 rng_;
};

struct Table {
  std::vector<double> cdf;
  std::vector<std::size_t> value;

  std::size_t draw(Source& src) const {
    const double u = src.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return value[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), value.size() - 1)];
  }
};

Table sparse_table(Source& src, std::size_t classes, std::size_t successors) {
  Table t;
  double acc = 0.0;
  double w = 1.0;
  for (std::size_t k = 0; k < successors; ++k) {
    acc += w * (0.5 + src.uniform());
    w *= 0.6;
    t.cdf.push_back(acc);
    t.value.push_back(src.below(classes));
  }
  return t;
}

std::string pseudo_word(Source& src) {
  static constexpr std::string_view onset = "bcdfghjklmnprstvwz";
  static constexpr std::string_view vowel = "aeiou";
  const std::size_t syllables = 1 + src.below(3);
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w.push_back(onset[src.below(onset.size())]);
    w.push_back(vowel[src.below(vowel.size())]);
  }
  if (src.uniform() < 0.3) w.push_back(onset[src.below(onset.size())]);
  return w;
}

}  // namespace

LabeledText synthesize_labeled(const SyntheticSpec& spec, std::size_t n_tokens) {
  if (spec.classes < 1 || spec.words_per_class < 1 || spec.successors < 1)
    throw std::invalid_argument("synthetic corpus needs at least one class, word and successor");
  Source src(spec.seed);
  const std::size_t k = spec.classes;

  std::vector<std::vector<std::string>> lexicon(k);
  std::unordered_set<std::string> used;
  for (auto& words : lexicon) {
    while (words.size() < spec.words_per_class) {
      std::string w = pseudo_word(src);
      if (used.insert(w).second) words.push_back(std::move(w));
    }
  }
  Table emission;
  {
    double acc = 0.0;
    for (std::size_t r = 0; r < spec.words_per_class; ++r) {
      acc += std::pow(static_cast<double>(r + 1), -spec.zipf);
      emission.cdf.push_back(acc);
      emission.value.push_back(r);
    }
  }
  std::vector<Table> first(k);
  for (auto& t : first) t = sparse_table(src, k, spec.successors);
  std::vector<Table> second(k * k);
  for (auto& t : second) t = sparse_table(src, k, spec.successors);

  LabeledText out;
  out.words.reserve(n_tokens);
  out.classes.reserve(n_tokens);
  std::size_t prev2 = 0;
  std::size_t prev1 = src.below(k);
  for (std::size_t i = 0; i < n_tokens; ++i) {
    std::size_t next;
    const double u = src.uniform();
    if (u < spec.leak)
      next = src.below(k);
    else if (u < spec.leak + (1.0 - spec.leak) * spec.second_order)
      next = second[prev2 * k + prev1].draw(src);
    else
      next = first[prev1].draw(src);
    out.words.push_back(lexicon[next][emission.draw(src)]);
    out.classes.push_back(static_cast<std::uint32_t>(next));
    prev2 = prev1;
    prev1 = next;
  }
  return out;
}

std::vector<std::string> synthesize(const SyntheticSpec& spec, std::size_t n_tokens) {
  return synthesize_labeled(spec, n_tokens).words;
}

std::string synthesize_text(const SyntheticSpec& spec, std::size_t n_tokens) {
  const auto words = synthesize(spec, n_tokens);
  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    text += words[i];
    text.push_back((i + 1) % 20 == 0 || i + 1 == words.size() ? '\n' : ' ');
  }
  return text;
}

}  // namespace ngcf
