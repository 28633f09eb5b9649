#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ngcf {

/// Hidden-class Markov text source. Each class owns a block of pseudo-words
/// with Zipfian emission weights; the class sequence follows a sparse random
/// transition table, optionally mixed with a second-order table keyed by the
/// previous two classes. Output depends only on the parameters and the seed.
struct SyntheticSpec {
  std::size_t classes = 40;
  std::size_t words_per_class = 120;
  double zipf = 1.1;            // emission exponent within a class
  std::size_t successors = 4;   // favoured next classes per state
  double leak = 0.05;           // probability of a uniformly random next class
  double second_order = 0.5;    // weight of the two-class table
  std::uint64_t seed = 42;
};

std::vector<std::string> synthesize(const SyntheticSpec& spec, std::size_t n_tokens);

/// Tokens together with the hidden class that emitted each one.
struct LabeledText {
  std::vector<std::string> words;
  std::vector<std::uint32_t> classes;
};

LabeledText synthesize_labeled(const SyntheticSpec& spec, std::size_t n_tokens);

/// Same tokens, space separated, a newline after every 20.
std::string synthesize_text(const SyntheticSpec& spec, std::size_t n_tokens);

}  // namespace ngcf
