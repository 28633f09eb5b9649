// Acceptance checks. `acceptance N` runs criterion N, `acceptance` runs all.
// Each criterion prints one PASS/FAIL line; the exit status is nonzero if any
// selected criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "ngcf/corpus.hpp"
#include "ngcf/criterion.hpp"
#include "ngcf/exchange.hpp"
#include "ngcf/heuristic.hpp"
#include "ngcf/models.hpp"
#include "ngcf/synthetic.hpp"
#include "oracles.hpp"

using namespace ngcf;

namespace {

// ---- pinned tolerances and settings --------------------------------------------

constexpr double kDeltaTolerance = 1e-9;          // criterion 1
constexpr int kDeltaTriples = 1000;
constexpr double kDeltaSeconds = 60.0;
constexpr int kConvergenceCorpora = 50;           // criterion 2
constexpr int kConvergenceCap = 50;
constexpr double kConvergenceSeconds = 300.0;
constexpr double kHeuristicPpTolerance = 0.05;    // criterion 3
constexpr double kFidelitySeconds = 1800.0;
constexpr double kFullGrowthLo = 3.5;             // criterion 4
constexpr double kFullGrowthHi = 4.5;
constexpr double kHeuristicGrowthMax = 2.5;
constexpr int kDegeneracyCorpora = 10;            // criterion 5
constexpr double kRobustnessGain = 5.0;           // criterion 6, percent
constexpr ClusterId kRobustnessClusters = 32;
constexpr double kSpearmanMax = -0.8;             // criterion 7
constexpr double kNormTolerance = 1e-6;           // criterion 8
constexpr int kNormHistories = 100;
constexpr double kTrigramBound = 0.15;            // criterion 10
constexpr ClusterId kTrigramClusters = 50;
constexpr int kTrigramIterations = 100;

constexpr std::size_t kDeskTokens = 1'120'000;
constexpr double kHeldout = 0.1;

struct Outcome {
  bool pass;
  std::string detail;
};

void report(int id, const char* name, const Outcome& o) {
  std::printf("criterion %d %s: %s (%s)\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// ---- desk corpus ---------------------------------------------------------------

const std::vector<std::string>& desk_words() {
  static const std::vector<std::string> words = [] {
    if (const char* path = std::getenv("NGCF_DESK_CORPUS")) return tokenize(read_file(path));
    return synthesize(SyntheticSpec{}, kDeskTokens);
  }();
  return words;
}

// Training part, vocabulary and held-out tail, split as the compare command does.
struct Desk {
  std::span<const std::string> train;
  Vocabulary vocab;
  TokenStream test;
};

const Desk& desk() {
  static const Desk d = [] {
    const auto& words = desk_words();
    const std::size_t n = cli::max_training_tokens(words.size(), kHeldout);
    Desk d;
    d.train = std::span<const std::string>(words.data(), n);
    d.vocab = build_vocabulary(d.train, 1, 20000);
    d.test = encode(std::span<const std::string>(words.data() + n, words.size() - n), d.vocab);
    return d;
  }();
  return d;
}

TokenStream desk_prefix(std::size_t n) {
  const auto& d = desk();
  return encode(d.train.first(std::min(n, d.train.size())), d.vocab);
}

double clustered_pp(const CountTable& counts, const Clustering& c) {
  return perplexity(build_clustered_lm(counts, c), desk().test).perplexity;
}

// Small hidden-class corpus for the property checks.
CountTable small_corpus(std::uint64_t seed, std::size_t tokens, int order = 2) {
  SyntheticSpec spec;
  spec.classes = 8 + seed % 8;
  spec.words_per_class = 20 + seed % 30;
  spec.seed = seed;
  const auto words = synthesize(spec, tokens);
  const auto vocab = build_vocabulary(words, 1, 100000);
  return count_ngrams(encode(words, vocab), order);
}

// ---- criteria -------------------------------------------------------------------

Outcome delta_oracle() {
  const auto started = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  int checked = 0;
  int guarded = 0;
  double worst = 0.0;
  while (checked < kDeltaTriples) {
    const std::size_t n = 50 + rng() % 4951;
    const auto counts = count_ngrams(oracle::random_stream(rng, n, 5 + rng() % 200, 0.7 + 0.1 * (rng() % 7)),
                                     2 + static_cast<int>(rng() % 2));
    const auto c1 = static_cast<ClusterId>(2 + rng() % 30);
    const auto c2 = static_cast<ClusterId>(2 + rng() % 30);
    const auto clustering = oracle::random_clustering(rng, counts, c1, c2);
    const auto stats = build_stats(counts, clustering);
    const double before = loo_criterion(stats);
    for (int k = 0; k < 10 && checked < kDeltaTriples; ++k) {
      const Side side = rng() % 2 ? Side::Row : Side::Column;
      const std::size_t m = side == Side::Row ? counts.num_rows() : counts.num_words();
      const auto e = static_cast<std::uint32_t>(rng() % m);
      const ClusterId from = clustering.of(side)[e];
      const auto to = static_cast<ClusterId>(rng() % clustering.bound(side));
      const auto profile = element_profile(counts, clustering, side, e);
      if (!move_allowed(stats, side, profile, from, to)) {
        ++guarded;
        continue;
      }
      auto moved = clustering;
      moved.of(side)[e] = to;
      const double full = loo_criterion(build_stats(counts, moved)) - before;
      worst = std::max(worst, std::abs(delta_move(stats, side, profile, from, to) - full));
      ++checked;
    }
  }
  const double secs = seconds_since(started);
  std::ostringstream d;
  d << checked << " triples, max |delta - recompute| = " << fmt("%.3g", worst) << ", " << guarded
    << " guarded moves skipped, " << fmt("%.1f", secs) << " s";
  return {worst <= kDeltaTolerance && secs < kDeltaSeconds, d.str()};
}

Outcome monotone_convergence() {
  const auto started = std::chrono::steady_clock::now();
  const ClusterId sizes[] = {5, 10, 20};
  int ok = 0;
  int max_iter = 0;
  std::string first_bad;
  for (int i = 0; i < kConvergenceCorpora; ++i) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
    const auto counts = small_corpus(seed, 2000 + (seed * 7919) % 18001);
    ExchangeConfig cfg;
    cfg.c1 = cfg.c2 = sizes[i % 3];
    cfg.max_iterations = kConvergenceCap;
    cfg.init = i % 2 ? InitMode::Random : InitMode::Frequency;
    cfg.seed = seed;
    const auto r = cluster(counts, cfg);
    bool good = r.trace.converged();
    for (std::size_t k = 1; k < r.trace.records.size(); ++k)
      good = good && r.trace.records[k].criterion >= r.trace.records[k - 1].criterion;
    max_iter = std::max(max_iter, static_cast<int>(r.trace.records.size()) - 1);
    if (good) ++ok;
    else if (first_bad.empty()) first_bad = ", first failure on corpus " + std::to_string(i);
  }
  std::ostringstream d;
  d << ok << "/" << kConvergenceCorpora << " runs monotone and converged, at most " << max_iter
    << " iterations (cap " << kConvergenceCap << ")" << first_bad;
  const double secs = seconds_since(started);
  d << ", " << fmt("%.1f", secs) << " s";
  return {ok == kConvergenceCorpora && secs < kConvergenceSeconds, d.str()};
}

Outcome heuristic_fidelity() {
  const auto started = std::chrono::steady_clock::now();
  const auto counts = count_ngrams(desk_prefix(100'000), 2);
  std::ostringstream d;
  bool pass = true;
  for (ClusterId c : {10, 20, 40}) {
    ExchangeConfig cfg;
    cfg.c1 = cfg.c2 = c;
    const double full = clustered_pp(counts, cluster(counts, cfg).clustering);
    const double heur = clustered_pp(counts, cluster(counts, cfg, HeuristicParams{}).clustering);
    const double rel = (heur - full) / full;
    pass = pass && rel <= kHeuristicPpTolerance;
    d << "C=" << c << " full " << fmt("%.1f", full) << " heuristic " << fmt("%.1f", heur) << " ("
      << fmt("%+.1f", 100 * rel) << "%) ";
  }
  const double secs = seconds_since(started);
  d << "total " << fmt("%.1f", secs) << " s";
  return {pass && secs < kFidelitySeconds, d.str()};
}

// Mean per-iteration work: profile cells touched by delta evaluations (plus
// list comparisons for the heuristic), and the raw evaluation count.
std::pair<double, double> mean_work(const ExchangeResult& r, bool heuristic) {
  double cells = 0, evals = 0;
  for (const auto& w : r.per_iteration) {
    cells += static_cast<double>(heuristic ? w.move_evaluation_work() : w.delta_cells);
    evals += static_cast<double>(w.delta_evaluations);
  }
  const auto n = static_cast<double>(r.per_iteration.size());
  return {cells / n, evals / n};
}

Outcome heuristic_scaling() {
  const auto counts = count_ngrams(desk_prefix(desk().train.size()), 2);
  ExchangeConfig cfg;
  cfg.max_iterations = 3;
  std::map<ClusterId, std::pair<std::pair<double, double>, std::pair<double, double>>> work;
  for (ClusterId c : {10, 20}) {
    cfg.c1 = cfg.c2 = c;
    work[c] = {mean_work(cluster(counts, cfg), false), mean_work(cluster(counts, cfg, HeuristicParams{}), true)};
  }
  const double full = work[20].first.first / work[10].first.first;
  const double heur = work[20].second.first / work[10].second.first;
  std::ostringstream d;
  d << "C 10->20 on " << counts.total() << " events: full-search work x" << fmt("%.2f", full) << ", heuristic work x"
    << fmt("%.2f", heur) << " (evaluation counts x" << fmt("%.2f", work[20].first.second / work[10].first.second)
    << " and x" << fmt("%.2f", work[20].second.second / work[10].second.second) << ")";
  return {full >= kFullGrowthLo && full <= kFullGrowthHi && heur <= kHeuristicGrowthMax, d.str()};
}

Outcome exact_degeneracy() {
  int same = 0;
  for (int i = 0; i < kDegeneracyCorpora; ++i) {
    const std::uint64_t seed = 500 + static_cast<std::uint64_t>(i);
    SyntheticSpec spec;
    spec.classes = 10;
    spec.words_per_class = 30;
    spec.seed = seed;
    const auto words = synthesize(spec, 5000 + 1000 * static_cast<std::size_t>(i));
    const auto vocab = build_vocabulary(words, 1, 100000);
    const auto counts = count_ngrams(encode(words, vocab), 2 + i % 2);
    ExchangeConfig cfg;
    cfg.c1 = cfg.c2 = static_cast<ClusterId>(4 + i);
    const HeuristicParams wide{cfg.c1, cfg.c1, 1000};
    auto dump = [&](const Clustering& c) {
      std::ostringstream out;
      write_word_clusters(out, c, vocab);
      write_context_clusters(out, c, counts, vocab);
      return out.str();
    };
    same += dump(cluster(counts, cfg).clustering) == dump(cluster(counts, cfg, wide).clustering);
  }
  return {same == kDegeneracyCorpora,
          std::to_string(same) + "/" + std::to_string(kDegeneracyCorpora) + " corpora byte-identical"};
}

Outcome robustness() {
  cli::CompareOptions opt;
  opt.sizes = {2000, 12000};
  opt.cutoffs = {2};
  opt.clusters = {kRobustnessClusters};
  const auto table = cli::compare_models(desk_words(), opt);
  std::ostringstream d;
  bool pass = true;
  for (std::size_t i = 0; i < table.sizes.size(); ++i) {
    const double gain = table.improvement[i][0];
    pass = pass && gain >= kRobustnessGain;
    d << table.sizes[i] << " tokens: back-off " << fmt("%.1f", table.perplexity[i][0]) << " clustered "
      << fmt("%.1f", table.perplexity[i][1]) << " (" << fmt("%+.1f", gain) << "%)";
    if (i + 1 < table.sizes.size()) d << "; ";
  }
  return {pass, d.str()};
}

Outcome coupling() {
  const auto counts = count_ngrams(desk_prefix(200'000), 2);
  std::vector<double> crit, pp;
  std::ostringstream d;
  for (ClusterId c : {4, 8, 12, 16, 24, 32}) {
    ExchangeConfig cfg;
    cfg.c1 = cfg.c2 = c;
    const auto r = cluster(counts, cfg);
    crit.push_back(r.trace.final_criterion());
    pp.push_back(clustered_pp(counts, r.clustering));
    d << "C=" << c << " F=" << fmt("%.0f", crit.back()) << " PP=" << fmt("%.1f", pp.back()) << ", ";
  }
  const double rho = oracle::spearman(crit, pp);
  d << "spearman " << fmt("%.3f", rho);
  return {rho <= kSpearmanMax, d.str()};
}

Outcome normalization() {
  const auto train = desk_prefix(200'000);
  const auto bigrams = count_ngrams(train, 2);
  const auto trigrams = count_ngrams(train, 3);
  ExchangeConfig cfg;
  cfg.c1 = cfg.c2 = 20;
  cfg.max_iterations = 5;
  // Every history of this table has all counts above the cutoff.
  std::vector<CountTable::Event> events;
  for (WordId v = 0; v < 60; ++v) {
    events.push_back({{v}, (v + 1) % 60, 60 + v});
    if (v % 3) events.push_back({{v}, (v + 7) % 60, 90});
  }
  const auto dense = CountTable::from_events(2, 60, events);

  struct Entry {
    std::string name;
    std::unique_ptr<LanguageModel> lm;
    const CountTable* table;
  };
  std::vector<Entry> models;
  models.push_back({"clustered-2", std::make_unique<ClusteredLM>(build_clustered_lm(bigrams, cluster(bigrams, cfg).clustering)), &bigrams});
  models.push_back({"clustered-3", std::make_unique<ClusteredLM>(build_clustered_lm(trigrams, cluster(trigrams, cfg).clustering)), &trigrams});
  for (Count cutoff : {2, 10, 50})
    models.push_back({"backoff-" + std::to_string(cutoff), std::make_unique<BackoffLM>(build_backoff(bigrams, cutoff)), &bigrams});
  models.push_back({"backoff-raised", std::make_unique<BackoffLM>(build_backoff(dense, 50)), &dense});
  models.push_back({"uniform", std::make_unique<UniformLM>(desk().vocab.size(), 2), &bigrams});

  std::mt19937_64 rng(77);
  double worst = 0.0;
  std::size_t histories = 0;
  std::size_t fallback_rows = 0;
  for (const auto& [name, lm, table_ptr] : models) {
    const auto& table = *table_ptr;
    const auto* bo = dynamic_cast<const BackoffLM*>(lm.get());
    std::vector<std::vector<WordId>> ctxs;
    // Seen contexts, unseen contexts and, for back-off, rows whose cutoff rose.
    if (bo)
      for (WordId v = 0; v < bo->vocab_size() && ctxs.size() < 30; ++v)
        if (bo->history(v).total > 0 && bo->history(v).effective_cutoff > bo->cutoff()) ctxs.push_back({v});
    fallback_rows += ctxs.size();
    while (ctxs.size() < 70) {
      const auto r = static_cast<RowId>(rng() % table.num_rows());
      const auto c = table.context(r);
      ctxs.emplace_back(c.begin(), c.end());
    }
    while (ctxs.size() < static_cast<std::size_t>(kNormHistories)) {
      std::vector<WordId> c(static_cast<std::size_t>(lm->order() - 1));
      for (auto& x : c) x = static_cast<WordId>(rng() % lm->vocab_size());
      ctxs.push_back(std::move(c));
    }
    for (const auto& ctx : ctxs) {
      double s = 0;
      for (WordId w = 0; w < lm->vocab_size(); ++w) s += lm->prob(ctx, w);
      worst = std::max(worst, std::abs(s - 1.0));
      ++histories;
    }
  }
  std::ostringstream d;
  d << models.size() << " models, " << histories << " histories (" << fallback_rows
    << " raised-cutoff rows), max |sum - 1| = " << fmt("%.3g", worst);
  return {worst <= kNormTolerance, d.str()};
}

Outcome cutoff_trend() {
  cli::CompareOptions opt;
  opt.sizes = {desk().train.size()};
  opt.cutoffs = {2, 10, 50};
  opt.clusters = {};
  const auto table = cli::compare_models(desk_words(), opt);
  const auto& pp = table.perplexity[0];
  std::ostringstream d;
  d << table.sizes[0] << " tokens: PP(2)=" << fmt("%.1f", pp[0]) << " PP(10)=" << fmt("%.1f", pp[1])
    << " PP(50)=" << fmt("%.1f", pp[2]);
  return {pp[2] >= pp[1] && pp[1] >= pp[0], d.str()};
}

Outcome trigram_smoke() {
  const auto train = desk_prefix(desk().train.size());
  ExchangeConfig cfg;
  cfg.c1 = cfg.c2 = kTrigramClusters;
  cfg.max_iterations = kTrigramIterations;
  const auto bigrams = count_ngrams(train, 2);
  const auto trigrams = count_ngrams(train, 3);
  const auto bi = cluster(bigrams, cfg);
  const auto tri = cluster(trigrams, cfg);
  bool monotone = tri.trace.converged();
  for (std::size_t k = 1; k < tri.trace.records.size(); ++k)
    monotone = monotone && tri.trace.records[k].criterion >= tri.trace.records[k - 1].criterion;
  const double pp2 = clustered_pp(bigrams, bi.clustering);
  const double pp3 = clustered_pp(trigrams, tri.clustering);
  const double rel = std::abs(pp3 - pp2) / pp2;
  std::ostringstream d;
  d << train.size() << " tokens, " << trigrams.num_rows() << " contexts, " << tri.trace.records.size() - 1
    << " iterations, trace " << (monotone ? "monotone and converged" : "NOT monotone or not converged") << ", PP trigram " << fmt("%.1f", pp3)
    << " bigram " << fmt("%.1f", pp2) << " (" << fmt("%.1f", 100 * rel) << "% apart)";
  return {monotone && rel <= kTrigramBound, d.str()};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"delta-oracle", delta_oracle},         {"monotone-convergence", monotone_convergence},
      {"heuristic-fidelity", heuristic_fidelity}, {"heuristic-scaling", heuristic_scaling},
      {"exact-degeneracy", exact_degeneracy}, {"robustness-vs-backoff", robustness},
      {"criterion-pp-coupling", coupling},    {"normalization", normalization},
      {"backoff-cutoff-trend", cutoff_trend}, {"trigram-smoke", trigram_smoke},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) selected.push_back(i);
  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto& c = criteria()[static_cast<std::size_t>(id - 1)];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(id, c.name, o);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
