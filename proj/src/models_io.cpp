#include <charconv>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "ngcf/errors.hpp"
#include "ngcf/models.hpp"

namespace ngcf {

namespace {

constexpr std::string_view kMagic = "ngcf-model 1";

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_header(std::ostream& out, const LanguageModel& model, std::uint64_t vocab_hash) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(vocab_hash));
  out << kMagic << '\n'
      << "type\t" << model.kind() << '\n'
      << "order\t" << model.order() << '\n'
      << "vocab_size\t" << model.vocab_size() << '\n'
      << "vocab_hash\t" << hash << '\n';
}

}  // namespace

void save_model(std::ostream& out, const LanguageModel& model, std::uint64_t vocab_hash) {
  write_header(out, model, vocab_hash);
  if (const auto* lm = dynamic_cast<const ClusteredLM*>(&model)) {
    out << "c1\t" << lm->c1() << '\n'
        << "c2\t" << lm->c2() << '\n'
        << "b_final\t" << exact(lm->b_final_) << '\n'
        << "emission_floor\t" << (lm->emission_floor_ ? 1 : 0) << '\n';
    out << "[words]\t" << lm->word_cluster_.size() << '\n';
    for (std::size_t w = 0; w < lm->word_cluster_.size(); ++w)
      out << w << '\t' << lm->word_cluster_[w] << '\t' << lm->word_counts_[w] << '\n';
    out << "[contexts]\t" << lm->contexts_.size() << '\n';
    for (std::size_t i = 0; i < lm->contexts_.size(); ++i) {
      for (std::size_t k = 0; k < lm->contexts_[i].size(); ++k)
        out << (k ? " " : "") << lm->contexts_[i][k];
      out << '\t' << lm->context_g1_[i] << '\n';
    }
    const auto& pc = lm->pair_counts_;
    out << "[pairs]\t" << (pc.array() > 0).count() << '\n';
    for (Eigen::Index g1 = 0; g1 < pc.rows(); ++g1)
      for (Eigen::Index g2 = 0; g2 < pc.cols(); ++g2)
        if (pc(g1, g2) > 0) out << g1 << '\t' << g2 << '\t' << pc(g1, g2) << '\n';
  } else if (const auto* lm = dynamic_cast<const BackoffLM*>(&model)) {
    out << "cutoff\t" << lm->cutoff_ << '\n'
        << "unigram_floor\t" << (lm->unigram_floor_ ? 1 : 0) << '\n';
    out << "[unigrams]\t" << lm->unigram_counts_.size() << '\n';
    for (std::size_t w = 0; w < lm->unigram_counts_.size(); ++w) out << w << '\t' << lm->unigram_counts_[w] << '\n';
    std::size_t seen = 0;
    for (const auto& h : lm->histories_) seen += h.total > 0;
    out << "[histories]\t" << seen << '\n';
    for (std::size_t v = 0; v < lm->histories_.size(); ++v) {
      const auto& h = lm->histories_[v];
      if (h.total == 0) continue;
      out << v << '\t' << h.total << '\t' << h.discarded << '\t' << h.effective_cutoff << '\t'
          << h.kept_words.size();
      for (std::size_t k = 0; k < h.kept_words.size(); ++k) out << '\t' << h.kept_words[k] << ':' << h.kept_counts[k];
      out << '\n';
    }
  } else if (dynamic_cast<const UniformLM*>(&model) == nullptr) {
    throw ConsistencyError("cannot save a model of type " + std::string(model.kind()));
  }
  out << "end\n";
}

// Line-oriented parser with error messages that carry the line number.
struct ModelReader {
  std::istream& in;
  std::size_t line_no = 0;
  std::string line;

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("model file line " + std::to_string(line_no) + ": " + what);
  }

  void next() {
    if (!std::getline(in, line)) {
      ++line_no;
      fail("unexpected end of file");
    }
    ++line_no;
  }

  std::vector<std::string_view> fields(char sep = '\t') const {
    std::vector<std::string_view> out;
    std::string_view rest(line);
    while (true) {
      const auto p = rest.find(sep);
      out.push_back(rest.substr(0, p));
      if (p == std::string_view::npos) break;
      rest.remove_prefix(p + 1);
    }
    return out;
  }

  template <typename T>
  T number(std::string_view s) const {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad number '" + std::string(s) + "'");
    return v;
  }

  std::string_view value(std::string_view key) {
    next();
    const auto tab = line.find('\t');
    if (tab == std::string::npos || std::string_view(line).substr(0, tab) != key)
      fail("expected '" + std::string(key) + "'");
    return std::string_view(line).substr(tab + 1);
  }

  template <typename T>
  T keyed(std::string_view key) {
    return number<T>(value(key));
  }

  std::size_t section(std::string_view name) {
    return keyed<std::size_t>("[" + std::string(name) + "]");
  }

  template <typename T>
  T bounded(std::string_view s, T hi) const {
    const T v = number<T>(s);
    if (v < 0 || v >= hi) fail("value " + std::string(s) + " out of range");
    return v;
  }

  std::vector<std::string_view> record(std::size_t n) {
    next();
    auto f = fields();
    if (f.size() != n) fail("expected " + std::to_string(n) + " fields");
    return f;
  }

  std::unique_ptr<LanguageModel> clustered(int order, std::size_t v) {
    auto lm = std::make_unique<ClusteredLM>();
    lm->order_ = order;
    const auto c1 = keyed<ClusterId>("c1");
    const auto c2 = keyed<ClusterId>("c2");
    if (c1 < 1 || c2 < 1) fail("cluster counts must be positive");
    {
      const std::string s(value("b_final"));
      std::istringstream is(s);
      is >> lm->b_final_;
      if (!is || !is.eof() || lm->b_final_ < 0.0 || lm->b_final_ >= 1.0) fail("bad b_final");
    }
    lm->emission_floor_ = keyed<int>("emission_floor") != 0;
    if (section("words") != v) fail("word section does not match vocab_size");
    lm->word_cluster_.resize(v);
    lm->word_counts_.resize(v);
    for (std::size_t w = 0; w < v; ++w) {
      auto f = record(3);
      if (number<std::size_t>(f[0]) != w) fail("word records out of order");
      lm->word_cluster_[w] = bounded<ClusterId>(f[1], c2);
      lm->word_counts_[w] = bounded<Count>(f[2], std::numeric_limits<Count>::max());
    }
    const std::size_t n_ctx = section("contexts");
    lm->contexts_.reserve(n_ctx);
    for (std::size_t i = 0; i < n_ctx; ++i) {
      auto f = record(2);
      std::vector<WordId> ctx;
      std::string_view ids = f[0];
      while (true) {
        const auto sp = ids.find(' ');
        ctx.push_back(bounded<WordId>(ids.substr(0, sp), static_cast<WordId>(v)));
        if (sp == std::string_view::npos) break;
        ids.remove_prefix(sp + 1);
      }
      if (ctx.size() != static_cast<std::size_t>(order - 1)) fail("context length does not match order");
      lm->contexts_.push_back(std::move(ctx));
      lm->context_g1_.push_back(bounded<ClusterId>(f[1], c1));
    }
    lm->pair_counts_ = CountMatrix::Zero(c1, c2);
    const std::size_t n_pairs = section("pairs");
    for (std::size_t i = 0; i < n_pairs; ++i) {
      auto f = record(3);
      lm->pair_counts_(bounded<ClusterId>(f[0], c1), bounded<ClusterId>(f[1], c2)) =
          bounded<Count>(f[2], std::numeric_limits<Count>::max());
    }
    lm->finalize();
    return lm;
  }

  std::unique_ptr<LanguageModel> backoff(int order, std::size_t v) {
    if (order != 2) fail("back-off models are bigram models");
    auto lm = std::make_unique<BackoffLM>();
    lm->cutoff_ = keyed<Count>("cutoff");
    if (lm->cutoff_ < 1) fail("cutoff must be >= 1");
    lm->unigram_floor_ = keyed<int>("unigram_floor") != 0;
    if (section("unigrams") != v) fail("unigram section does not match vocab_size");
    lm->unigram_counts_.resize(v);
    for (std::size_t w = 0; w < v; ++w) {
      auto f = record(2);
      if (number<std::size_t>(f[0]) != w) fail("unigram records out of order");
      lm->unigram_counts_[w] = bounded<Count>(f[1], std::numeric_limits<Count>::max());
    }
    lm->histories_.resize(v);
    const std::size_t n_hist = section("histories");
    for (std::size_t i = 0; i < n_hist; ++i) {
      next();
      auto f = fields();
      if (f.size() < 5) fail("short history record");
      auto& h = lm->histories_[bounded<WordId>(f[0], static_cast<WordId>(v))];
      h.total = number<Count>(f[1]);
      h.discarded = number<Count>(f[2]);
      h.effective_cutoff = number<Count>(f[3]);
      const auto kept = number<std::size_t>(f[4]);
      if (f.size() != 5 + kept) fail("kept-bigram count does not match the record");
      Count sum = h.discarded;
      for (std::size_t k = 0; k < kept; ++k) {
        const auto colon = f[5 + k].find(':');
        if (colon == std::string_view::npos) fail("bad kept bigram");
        const WordId w = bounded<WordId>(f[5 + k].substr(0, colon), static_cast<WordId>(v));
        if (!h.kept_words.empty() && w <= h.kept_words.back()) fail("kept bigrams out of order");
        h.kept_words.push_back(w);
        h.kept_counts.push_back(number<Count>(f[5 + k].substr(colon + 1)));
        sum += h.kept_counts.back();
      }
      if (h.total <= 0 || sum != h.total) fail("history counts do not add up");
    }
    lm->finalize();
    return lm;
  }

  LoadedModel read() {
    next();
    if (line != kMagic) fail("not an ngcf model file");
    const std::string type(value("type"));
    const int order = keyed<int>("order");
    if (order < 2) fail("order must be >= 2");
    const auto v = keyed<std::size_t>("vocab_size");
    if (v < 1) fail("vocab_size must be >= 1");
    LoadedModel out;
    {
      const auto hex = value("vocab_hash");
      const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), out.vocab_hash, 16);
      if (ec != std::errc() || ptr != hex.data() + hex.size()) fail("bad vocab_hash");
    }
    if (type == "clustered")
      out.model = clustered(order, v);
    else if (type == "backoff")
      out.model = backoff(order, v);
    else if (type == "uniform")
      out.model = std::make_unique<UniformLM>(v, order);
    else
      fail("unknown model type '" + type + "'");
    next();
    if (line != "end") fail("expected 'end'");
    return out;
  }
};

LoadedModel load_model(std::istream& in) {
  ModelReader reader{in, 0, {}};
  return reader.read();
}

}  // namespace ngcf
