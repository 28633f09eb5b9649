#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ngcf/exchange.hpp"
#include "ngcf/heuristic.hpp"
#include "ngcf/models.hpp"

namespace ngcf::cli {

enum ExitCode { kOk = 0, kUsage = 2, kConsistency = 3, kNumeric = 4 };

/// Entry point shared by the binary and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CompareOptions {
  std::vector<std::size_t> sizes;          // training prefix lengths in tokens
  std::vector<Count> cutoffs{2, 10, 50};   // one back-off model per cutoff
  std::vector<ClusterId> clusters{50};     // one clustered model per C (c1 = c2 = C)
  int order = 2;                           // clustered models only
  Count vocab_min_count = 1;
  std::size_t vocab_max_size = 20000;
  double heldout_fraction = 0.1;
  bool skip_unknown = true;
  ExchangeConfig exchange;                 // c1/c2 overridden per model
  std::optional<HeuristicParams> heuristic;
};

struct CompareTable {
  std::vector<std::string> models;               // column names
  std::vector<std::size_t> sizes;                // row labels
  std::vector<std::vector<double>> perplexity;   // [size][model]
  std::vector<std::vector<double>> improvement;  // [size][clustered model], percent vs best back-off
  std::size_t heldout_tokens = 0;
  std::size_t vocab_size = 0;
};

/// Largest training prefix available once the held-out tail is removed.
std::size_t max_training_tokens(std::size_t corpus_tokens, double heldout_fraction);

/// Trains every model on every prefix and scores the shared held-out tail.
/// Throws InputError when a requested size does not fit.
CompareTable compare_models(const std::vector<std::string>& words, const CompareOptions& options);

void write_compare(std::ostream& out, const CompareTable& table);

}  // namespace ngcf::cli
