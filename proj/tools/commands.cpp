#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ngcf/corpus.hpp"
#include "ngcf/errors.hpp"
#include "ngcf/synthetic.hpp"

namespace ngcf::cli {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  return in;
}

std::vector<std::string> read_words(const std::vector<std::string>& paths, bool lowercase) {
  std::vector<std::string> words;
  for (const auto& p : paths) {
    auto part = tokenize(read_file(p), lowercase);
    words.insert(words.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return words;
}

Vocabulary load_vocab(const std::string& path) {
  auto in = open_in(path);
  return read_vocabulary(in);
}

CountTable load_counts(const std::string& path, const Vocabulary& vocab) {
  auto in = open_in(path);
  return read_counts(in, vocab);
}

void add_exchange_flags(CLI::App* cmd, ExchangeConfig& cfg, HeuristicParams& hp, bool& heuristic) {
  cmd->add_option("--c1", cfg.c1, "context clusters")->check(CLI::Range(2, 1 << 24));
  cmd->add_option("--c2", cfg.c2, "word clusters")->check(CLI::Range(2, 1 << 24));
  cmd->add_option("--min-count", cfg.min_count, "smallest marginal that is clustered")->check(CLI::Range(2, 1 << 30));
  cmd->add_option("--iterations", cfg.max_iterations, "iteration cap")->check(CLI::Range(1, 1 << 20));
  cmd->add_option("--b", cfg.b, "discount used by the criterion")->check(CLI::Range(1e-9, 1.0 - 1e-9));
  cmd->add_option("--epsilon", cfg.convergence_epsilon, "stop below this relative gain")->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-rows", cfg.max_rows_clustered, "contexts clustered at most");
  cmd->add_option("--seed", cfg.seed, "seed for random initialization");
  cmd->add_option("--init", cfg.init, "frequency or random")
      ->transform(CLI::CheckedTransformer(std::map<std::string, InitMode>{{"frequency", InitMode::Frequency},
                                                                         {"random", InitMode::Random}}));
  cmd->add_flag("--heuristic", heuristic, "restrict targets with co-occurrence lists");
  cmd->add_option("--h", hp.h, "list length")->check(CLI::Range(0, 1 << 20));
  cmd->add_option("--t", hp.t, "targets per element")->check(CLI::Range(1, 1 << 24));
  cmd->add_option("--u", hp.u, "moves between list rebuilds")->check(CLI::Range(1, 1 << 30));
}

void check_heuristic(const ExchangeConfig& cfg, const HeuristicParams& hp, bool heuristic) {
  if (heuristic && hp.t > std::max(cfg.c1, cfg.c2))
    throw std::invalid_argument("--t " + std::to_string(hp.t) + " exceeds the number of clusters");
}

// ---- subcommands ------------------------------------------------------------

struct VocabArgs {
  std::vector<std::string> inputs;
  std::string output;
  Count min_count = 5;
  std::size_t max_size = 20000;
  bool lowercase = false;
};

int cmd_vocab(const VocabArgs& a, std::ostream& out, std::ostream& err) {
  WordCounts counts;
  std::size_t tokens = 0;
  for (const auto& p : a.inputs) {
    const auto words = tokenize(read_file(p), a.lowercase);
    tokens += words.size();
    merge_word_counts(counts, count_words(words));
  }
  const Vocabulary vocab = build_vocabulary(counts, a.min_count, a.max_size);
  auto f = open_out(a.output);
  write_vocabulary(f, vocab);
  if (vocab.size() == 1) err << "warning: no word reaches --min-count " << a.min_count << "; vocabulary holds only "
                            << kUnkToken << '\n';
  out << "vocab_size=" << vocab.size() << " tokens=" << tokens << " unknown=" << vocab.count(kUnkId) << '\n';
  return kOk;
}

struct CountArgs {
  std::vector<std::string> inputs;
  std::string vocab;
  std::string output;
  int order = 2;
  bool lowercase = false;
};

int cmd_count(const CountArgs& a, std::ostream& out) {
  const Vocabulary vocab = load_vocab(a.vocab);
  const TokenStream stream = encode(read_words(a.inputs, a.lowercase), vocab);
  const CountTable table = count_ngrams(stream, a.order);
  auto f = open_out(a.output);
  write_counts(f, table, vocab);
  out << "events=" << table.total() << " distinct=" << table.num_events() << " contexts=" << table.num_rows()
      << '\n';
  return kOk;
}

struct ClusterArgs {
  std::string vocab;
  std::string counts;
  std::string out_prefix;
  int order = 0;
  ExchangeConfig cfg;
  HeuristicParams hp;
  bool heuristic = false;
  bool timing = false;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
  check_heuristic(a.cfg, a.hp, a.heuristic);
  const Vocabulary vocab = load_vocab(a.vocab);
  const CountTable counts = load_counts(a.counts, vocab);
  if (a.order != 0 && a.order != counts.order())
    throw ConsistencyError("--order " + std::to_string(a.order) + " does not match the counts file (order " +
                           std::to_string(counts.order()) + ")");
  const auto result = cluster(counts, a.cfg, a.heuristic ? std::optional(a.hp) : std::nullopt);
  {
    auto f = open_out(a.out_prefix + ".words");
    write_word_clusters(f, result.clustering, vocab);
  }
  {
    auto f = open_out(a.out_prefix + ".contexts");
    write_context_clusters(f, result.clustering, counts, vocab);
  }
  {
    auto f = open_out(a.out_prefix + ".trace");
    write_trace(f, result.trace, a.timing);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.10f", result.trace.final_criterion());
  out << "iterations=" << result.trace.records.size() - 1 << " criterion=" << buf
      << " converged=" << (result.trace.converged() ? 1 : 0) << '\n';
  return kOk;
}

struct BuildArgs {
  std::string type = "clustered";
  std::string vocab;
  std::string counts;
  std::string clusters;  // prefix written by `cluster`
  std::string output;
  Count cutoff = 2;
  std::optional<double> discount;
  bool no_floor = false;
  ClusterId c1 = 0;
  ClusterId c2 = 0;
};

int cmd_build(const BuildArgs& a, std::ostream& out) {
  const Vocabulary vocab = load_vocab(a.vocab);
  auto f = open_out(a.output);
  if (a.type == "uniform") {
    save_model(f, UniformLM(vocab.size(), 2), vocab.hash());
    out << "model=uniform vocab_size=" << vocab.size() << '\n';
    return kOk;
  }
  if (a.counts.empty()) throw std::invalid_argument("--counts is required for type " + a.type);
  const CountTable counts = load_counts(a.counts, vocab);
  if (a.type == "backoff") {
    BackoffOptions opt;
    opt.unigram_floor = !a.no_floor;
    const BackoffLM lm = build_backoff(counts, a.cutoff, opt);
    save_model(f, lm, vocab.hash());
    out << "model=backoff cutoff=" << a.cutoff << '\n';
  } else {
    if (a.clusters.empty()) throw std::invalid_argument("--clusters is required for type clustered");
    auto g1 = open_in(a.clusters + ".contexts");
    auto g2 = open_in(a.clusters + ".words");
    const Clustering clustering = read_clustering(g1, g2, counts, vocab, a.c1, a.c2);
    ClusteredOptions opt;
    opt.discount = a.discount;
    opt.emission_floor = !a.no_floor;
    const ClusteredLM lm = build_clustered_lm(counts, clustering, opt);
    save_model(f, lm, vocab.hash());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", lm.b_final());
    out << "model=clustered order=" << lm.order() << " c1=" << lm.c1() << " c2=" << lm.c2() << " b_final=" << buf
        << '\n';
  }
  return kOk;
}

struct EvalArgs {
  std::string model;
  std::string vocab;
  std::vector<std::string> inputs;
  bool skip_unknown = true;
  bool lowercase = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  auto in = open_in(a.model);
  const LoadedModel loaded = load_model(in);
  const Vocabulary vocab = load_vocab(a.vocab);
  if (vocab.hash() != loaded.vocab_hash || vocab.size() != loaded.model->vocab_size())
    throw ConsistencyError("vocabulary '" + a.vocab + "' does not match the one the model was built with");
  const TokenStream test = encode(read_words(a.inputs, a.lowercase), vocab);
  out << format_report(perplexity(*loaded.model, test, a.skip_unknown)) << '\n';
  return kOk;
}

std::vector<std::size_t> parse_size_list(const std::vector<std::string>& items) {
  std::vector<std::size_t> out;
  for (const auto& s : items) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    std::size_t mult = 1;
    if (used < s.size()) {
      const char suffix = s[used];
      if (used + 1 != s.size() || (suffix != 'k' && suffix != 'K' && suffix != 'm' && suffix != 'M'))
        throw std::invalid_argument("bad size '" + s + "'");
      mult = (suffix == 'k' || suffix == 'K') ? 1000 : 1000000;
    }
    if (!(v > 0)) throw std::invalid_argument("bad size '" + s + "'");
    out.push_back(static_cast<std::size_t>(std::llround(v * static_cast<double>(mult))));
  }
  return out;
}

struct CompareArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> sizes;
  std::string output;
  CompareOptions opt;
  HeuristicParams hp;
  bool heuristic = false;
  bool lowercase = false;
};

int cmd_compare(CompareArgs& a, std::ostream& out) {
  a.opt.sizes = parse_size_list(a.sizes);
  if (a.heuristic) {
    for (ClusterId c : a.opt.clusters) {
      ExchangeConfig cfg = a.opt.exchange;
      cfg.c1 = cfg.c2 = c;
      check_heuristic(cfg, a.hp, true);
    }
    a.opt.heuristic = a.hp;
  }
  const CompareTable table = compare_models(read_words(a.inputs, a.lowercase), a.opt);
  if (a.output.empty() || a.output == "-") {
    write_compare(out, table);
  } else {
    auto f = open_out(a.output);
    write_compare(f, table);
  }
  return kOk;
}

struct SynthArgs {
  std::string output;
  std::size_t tokens = 100000;
  SyntheticSpec spec;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const std::string text = synthesize_text(a.spec, a.tokens);
  if (a.output.empty() || a.output == "-") {
    out << text;
  } else {
    auto f = open_out(a.output);
    f << text;
  }
  return kOk;
}

}  // namespace

// ---- comparison -------------------------------------------------------------

std::size_t max_training_tokens(std::size_t corpus_tokens, double heldout_fraction) {
  const auto heldout = static_cast<std::size_t>(std::ceil(static_cast<double>(corpus_tokens) * heldout_fraction));
  return corpus_tokens - std::min(corpus_tokens, heldout);
}

CompareTable compare_models(const std::vector<std::string>& words, const CompareOptions& options) {
  if (!(options.heldout_fraction > 0.0 && options.heldout_fraction < 1.0))
    throw std::invalid_argument("held-out fraction must lie in (0, 1)");
  if (options.sizes.empty()) throw std::invalid_argument("no training sizes given");
  const std::size_t train_max = max_training_tokens(words.size(), options.heldout_fraction);
  std::vector<std::size_t> bad;
  for (std::size_t s : options.sizes)
    if (s > train_max || s < 2) bad.push_back(s);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "corpus of " << words.size() << " tokens is too small: training prefixes may hold at most " << train_max
        << " tokens; achievable requested sizes:";
    bool any = false;
    for (std::size_t s : options.sizes)
      if (s <= train_max && s >= 2) {
        msg << ' ' << s;
        any = true;
      }
    if (!any) msg << " none";
    throw InputError(msg.str());
  }

  const std::span<const std::string> train_part(words.data(), train_max);
  const std::span<const std::string> heldout(words.data() + train_max, words.size() - train_max);
  const Vocabulary vocab = build_vocabulary(train_part, options.vocab_min_count, options.vocab_max_size);
  const TokenStream test = encode(heldout, vocab);

  CompareTable table;
  table.heldout_tokens = heldout.size();
  table.vocab_size = vocab.size();
  table.sizes = options.sizes;
  for (Count c : options.cutoffs) table.models.push_back("backoff_c" + std::to_string(c));
  for (ClusterId c : options.clusters) table.models.push_back("clustered_" + std::to_string(c));

  for (std::size_t size : options.sizes) {
    const TokenStream train = encode(train_part.first(size), vocab);
    std::vector<double> row;
    double best_backoff = std::numeric_limits<double>::infinity();
    {
      const CountTable bigrams = count_ngrams(train, 2);
      for (Count c : options.cutoffs) {
        const double pp = perplexity(build_backoff(bigrams, c), test, options.skip_unknown).perplexity;
        best_backoff = std::min(best_backoff, pp);
        row.push_back(pp);
      }
    }
    std::vector<double> impr;
    const CountTable counts = count_ngrams(train, options.order);
    for (ClusterId c : options.clusters) {
      ExchangeConfig cfg = options.exchange;
      cfg.c1 = cfg.c2 = c;
      const auto result = cluster(counts, cfg, options.heuristic);
      const double pp =
          perplexity(build_clustered_lm(counts, result.clustering), test, options.skip_unknown).perplexity;
      row.push_back(pp);
      impr.push_back(options.cutoffs.empty() ? 0.0 : (best_backoff - pp) / best_backoff * 100.0);
    }
    table.perplexity.push_back(std::move(row));
    table.improvement.push_back(std::move(impr));
  }
  return table;
}

void write_compare(std::ostream& out, const CompareTable& table) {
  out << "tokens";
  for (const auto& m : table.models) out << '\t' << m;
  for (const auto& m : table.models)
    if (m.rfind("clustered_", 0) == 0) out << "\timpr_" << m;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < table.sizes.size(); ++i) {
    out << table.sizes[i];
    for (double pp : table.perplexity[i]) {
      std::snprintf(buf, sizeof buf, "\t%.2f", pp);
      out << buf;
    }
    for (double p : table.improvement[i]) {
      std::snprintf(buf, sizeof buf, "\t%.1f", p);
      out << buf;
    }
    out << '\n';
  }
}

// ---- dispatch ---------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word and context clustering for class-based n-gram models", "ngcf"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);

  auto sub = [&](const char* name, const char* about) {
    auto* c = app.add_subcommand(name, about);
    c->set_help_flag("--help", "print help and exit");
    return c;
  };

  VocabArgs va;
  auto* vocab = sub("vocab", "build a vocabulary file");
  vocab->add_option("inputs", va.inputs, "corpus files (shards are merged)")->required();
  vocab->add_option("-o,--output", va.output)->required();
  vocab->add_option("--min-count", va.min_count)->check(CLI::Range(Count{1}, Count{1} << 40));
  vocab->add_option("--max-size", va.max_size)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 32));
  vocab->add_flag("--lowercase", va.lowercase);

  CountArgs ca;
  auto* count = sub("count", "count n-grams");
  count->add_option("inputs", ca.inputs)->required();
  count->add_option("--vocab", ca.vocab)->required();
  count->add_option("-o,--output", ca.output)->required();
  count->add_option("--order", ca.order)->check(CLI::Range(2, 16));
  count->add_flag("--lowercase", ca.lowercase);

  ClusterArgs cl;
  auto* clus = sub("cluster", "exchange clustering of contexts and words");
  clus->add_option("--vocab", cl.vocab)->required();
  clus->add_option("--counts", cl.counts)->required();
  clus->add_option("-o,--output", cl.out_prefix, "prefix for .words, .contexts and .trace")->required();
  clus->add_option("--order", cl.order, "expected order of the counts file")->check(CLI::Range(2, 16));
  clus->add_flag("--timing", cl.timing, "write wall-clock seconds into the trace");
  add_exchange_flags(clus, cl.cfg, cl.hp, cl.heuristic);

  BuildArgs ba;
  auto* build = sub("build", "build a language model file");
  build->add_option("--type", ba.type)->check(CLI::IsMember({"clustered", "backoff", "uniform"}));
  build->add_option("--vocab", ba.vocab)->required();
  build->add_option("--counts", ba.counts);
  build->add_option("--clusters", ba.clusters, "prefix written by cluster");
  build->add_option("-o,--output", ba.output)->required();
  build->add_option("--cutoff", ba.cutoff)->check(CLI::Range(Count{1}, Count{1} << 40));
  build->add_option("--discount", ba.discount, "fixed class discount instead of the adaptive one")
      ->check(CLI::Range(0.0, 1.0 - 1e-12));
  build->add_flag("--no-floor", ba.no_floor, "drop the add-one floor of emissions / back-off unigram");
  build->add_option("--c1", ba.c1)->check(CLI::Range(1, 1 << 24));
  build->add_option("--c2", ba.c2)->check(CLI::Range(1, 1 << 24));

  EvalArgs ea;
  auto* eval = sub("eval", "held-out perplexity");
  eval->add_option("--model", ea.model)->required();
  eval->add_option("--vocab", ea.vocab)->required();
  eval->add_option("inputs", ea.inputs)->required();
  eval->add_flag("--skip-unknown,!--no-skip-unknown", ea.skip_unknown)->default_val(true);
  eval->add_flag("--lowercase", ea.lowercase);

  CompareArgs cm;
  auto* cmp = sub("compare", "back-off vs clustered perplexity over nested training prefixes");
  cmp->add_option("inputs", cm.inputs)->required();
  cmp->add_option("--sizes", cm.sizes, "training prefix sizes (suffix k or M allowed)")->required()->delimiter(',');
  cmp->add_option("--cutoffs", cm.opt.cutoffs)->delimiter(',');
  cmp->add_option("--clusters", cm.opt.clusters, "cluster counts, c1 = c2")->delimiter(',');
  cmp->add_option("--order", cm.opt.order)->check(CLI::Range(2, 16));
  cmp->add_option("--vocab-min-count", cm.opt.vocab_min_count)->check(CLI::Range(Count{1}, Count{1} << 40));
  cmp->add_option("--max-size", cm.opt.vocab_max_size)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 32));
  cmp->add_flag("--skip-unknown,!--no-skip-unknown", cm.opt.skip_unknown)->default_val(true);
  cmp->add_option("-o,--output", cm.output);
  cmp->add_flag("--lowercase", cm.lowercase);
  add_exchange_flags(cmp, cm.opt.exchange, cm.hp, cm.heuristic);
  cmp->get_option("--c1")->description("ignored; see --clusters");
  cmp->get_option("--c2")->description("ignored; see --clusters");

  SynthArgs sa;
  auto* synth = sub("synth", "write a seeded synthetic corpus");
  synth->add_option("-o,--output", sa.output);
  synth->add_option("--tokens", sa.tokens)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 34));
  synth->add_option("--seed", sa.spec.seed);
  synth->add_option("--classes", sa.spec.classes)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 12));
  synth->add_option("--words-per-class", sa.spec.words_per_class)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  synth->add_option("--zipf", sa.spec.zipf)->check(CLI::NonNegativeNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (vocab->parsed()) return cmd_vocab(va, out, err);
    if (count->parsed()) return cmd_count(ca, out);
    if (clus->parsed()) return cmd_cluster(cl, out);
    if (build->parsed()) return cmd_build(ba, out);
    if (eval->parsed()) return cmd_eval(ea, out);
    if (cmp->parsed()) return cmd_compare(cm, out);
    if (synth->parsed()) return cmd_synth(sa, out);
  } catch (const InputError& e) {
    err << "error: " << e.what();
    if (e.offset() != InputError::npos) err << " (byte " << e.offset() << ')';
    err << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConsistencyError& e) {
    err << "consistency error: " << e.what() << '\n';
    return kConsistency;
  } catch (const GuardError& e) {
    err << "consistency error: " << e.what() << '\n';
    return kConsistency;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

}  // namespace ngcf::cli
