#include "ngcf/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ngcf/errors.hpp"

namespace ngcf {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length of the UTF-8 sequence starting at text[i], or 0 if it is invalid.
std::size_t utf8_sequence_length(std::string_view text, std::size_t i) {
  const auto lead = static_cast<unsigned char>(text[i]);
  std::size_t len;
  std::uint32_t min_cp;
  std::uint32_t cp;
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) {
    len = 2, min_cp = 0x80, cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3, min_cp = 0x800, cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4, min_cp = 0x10000, cp = lead & 0x07;
  } else {
    return 0;
  }
  if (i + len > text.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto c = static_cast<unsigned char>(text[i + k]);
    if ((c & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (c & 0x3F);
  }
  // overlong forms, surrogates, out of range
  if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

std::string context_key(std::span<const WordId> ctx) {
  return {reinterpret_cast<const char*>(ctx.data()), ctx.size_bytes()};
}

}  // namespace

// ---- Vocabulary -----------------------------------------------------------

Vocabulary::Vocabulary() : words_{std::string(kUnkToken)}, counts_{0} {
  index_.emplace(words_[0], kUnkId);
}

Vocabulary Vocabulary::from_entries(std::vector<std::pair<std::string, Count>> entries,
                                    Count unk_count) {
  Vocabulary v;
  v.counts_[0] = unk_count;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& [word, count] = entries[i];
    if (word.empty() || word == kUnkToken)
      throw InputError("vocabulary entry " + std::to_string(i + 1) + " has a reserved or empty word");
    if (count < 0) throw InputError("vocabulary entry '" + word + "' has a negative count");
    if (i > 0) {
      const auto& [pw, pc] = entries[i - 1];
      if (pc < count || (pc == count && !(pw < word)))
        throw InputError("vocabulary entries not in descending-count, lexicographic order at '" +
                         word + "'");
    }
    if (!v.index_.emplace(word, static_cast<WordId>(v.words_.size())).second)
      throw InputError("duplicate vocabulary entry '" + word + "'");
    v.words_.push_back(std::move(word));
    v.counts_.push_back(count);
  }
  return v;
}

WordId Vocabulary::id_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

std::uint64_t Vocabulary::hash() const {
  std::ostringstream os;
  write_vocabulary(os, *this);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---- text -> words -> ids -------------------------------------------------

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
  std::vector<std::string> words;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t len = utf8_sequence_length(text, i);
    if (len == 0) throw InputError("invalid UTF-8 at byte offset " + std::to_string(i), i);
    const auto c = static_cast<unsigned char>(text[i]);
    if (len == 1 && is_space(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (len == 1 && lowercase && c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      current.append(text.substr(i, len));
    }
    i += len;
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

WordCounts count_words(std::span<const std::string> words) {
  WordCounts counts;
  for (const auto& w : words) ++counts[w];
  return counts;
}

void merge_word_counts(WordCounts& into, const WordCounts& from) {
  for (const auto& [w, c] : from) into[w] += c;
}

Vocabulary build_vocabulary(const WordCounts& counts, Count min_count, std::size_t max_size) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  if (max_size < 1) throw std::invalid_argument("max_size must be >= 1");

  std::vector<std::pair<std::string, Count>> kept;
  Count total = 0;
  for (const auto& [w, c] : counts) {
    total += c;
    if (c >= min_count && w != kUnkToken) kept.emplace_back(w, c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (kept.size() > max_size - 1) kept.resize(max_size - 1);
  Count kept_total = 0;
  for (const auto& e : kept) kept_total += e.second;
  return Vocabulary::from_entries(std::move(kept), total - kept_total);
}

Vocabulary build_vocabulary(std::span<const std::string> words, Count min_count,
                            std::size_t max_size) {
  return build_vocabulary(count_words(words), min_count, max_size);
}

TokenStream encode(std::span<const std::string> words, const Vocabulary& vocab) {
  TokenStream s;
  s.vocab_size = vocab.size();
  s.ids.reserve(words.size());
  for (const auto& w : words) {
    const WordId id = vocab.id_of(w);
    if (id == kUnkId) ++s.n_unknown;
    s.ids.push_back(id);
  }
  return s;
}

std::vector<std::string> decode(const TokenStream& stream, const Vocabulary& vocab) {
  std::vector<std::string> words;
  words.reserve(stream.size());
  for (WordId id : stream.ids) words.push_back(vocab.word(id));
  return words;
}

// ---- CountTable -----------------------------------------------------------

CountTable CountTable::from_sorted(int order, std::size_t num_words,
                                   const std::vector<WordId>& flat,
                                   const std::vector<Count>& counts) {
  CountTable t;
  t.order_ = order;
  const std::size_t m = static_cast<std::size_t>(order - 1);
  const std::size_t n = counts.size();
  t.col_marginal_.assign(num_words, 0);
  t.row_begin_.assign(1, 0);
  t.entry_word_.reserve(n);
  t.entry_count_.reserve(n);

  for (std::size_t e = 0; e < n; ++e) {
    const WordId* tuple = flat.data() + e * order;
    const bool new_row =
        e == 0 || !std::equal(tuple, tuple + m, flat.data() + (e - 1) * order);
    if (new_row) {
      if (e != 0) t.row_begin_.push_back(t.entry_word_.size());
      t.contexts_.insert(t.contexts_.end(), tuple, tuple + m);
      t.row_marginal_.push_back(0);
    }
    const WordId w = tuple[m];
    if (w >= num_words) throw ConsistencyError("word id out of range for count table");
    t.entry_word_.push_back(w);
    t.entry_count_.push_back(counts[e]);
    t.row_marginal_.back() += counts[e];
    t.col_marginal_[w] += counts[e];
    t.total_ += counts[e];
  }
  if (n != 0) t.row_begin_.push_back(t.entry_word_.size());

  // transpose
  t.col_begin_.assign(num_words + 1, 0);
  for (WordId w : t.entry_word_) ++t.col_begin_[w + 1];
  std::partial_sum(t.col_begin_.begin(), t.col_begin_.end(), t.col_begin_.begin());
  t.col_entry_row_.resize(n);
  t.col_entry_count_.resize(n);
  std::vector<std::size_t> fill(t.col_begin_.begin(), t.col_begin_.end() - 1);
  for (RowId r = 0; r < t.num_rows(); ++r) {
    for (std::size_t k = t.row_begin_[r]; k < t.row_begin_[r + 1]; ++k) {
      const std::size_t slot = fill[t.entry_word_[k]]++;
      t.col_entry_row_[slot] = r;
      t.col_entry_count_[slot] = t.entry_count_[k];
    }
  }
  t.build_index();
  return t;
}

void CountTable::build_index() {
  index_.clear();
  index_.reserve(num_rows());
  for (RowId r = 0; r < num_rows(); ++r) index_.emplace(context_key(context(r)), r);
}

namespace {

// Sorts the event tuples, sums duplicates and drops zeros.
void canonicalize(int order, std::vector<WordId>& flat, std::vector<Count>& counts) {
  const std::size_t n = counts.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(flat.begin() + a * order, flat.begin() + (a + 1) * order,
                                        flat.begin() + b * order, flat.begin() + (b + 1) * order);
  });
  std::vector<WordId> out_flat;
  std::vector<Count> out_counts;
  out_flat.reserve(flat.size());
  out_counts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto src = flat.begin() + perm[k] * order;
    if (!out_counts.empty() && std::equal(src, src + order, out_flat.end() - order)) {
      out_counts.back() += counts[perm[k]];
    } else {
      out_flat.insert(out_flat.end(), src, src + order);
      out_counts.push_back(counts[perm[k]]);
    }
  }
  // drop zeros
  std::size_t keep = 0;
  for (std::size_t k = 0; k < out_counts.size(); ++k) {
    if (out_counts[k] == 0) continue;
    if (out_counts[k] < 0) throw ConsistencyError("negative n-gram count");
    std::copy(out_flat.begin() + k * order, out_flat.begin() + (k + 1) * order,
              out_flat.begin() + keep * order);
    out_counts[keep++] = out_counts[k];
  }
  out_flat.resize(keep * order);
  out_counts.resize(keep);
  flat.swap(out_flat);
  counts.swap(out_counts);
}

}  // namespace

CountTable CountTable::from_events(int order, std::size_t num_words, std::span<const Event> events) {
  if (order < 2) throw std::invalid_argument("n-gram order must be >= 2");
  std::vector<WordId> flat;
  std::vector<Count> counts;
  flat.reserve(events.size() * order);
  counts.reserve(events.size());
  for (const auto& e : events) {
    if (e.context.size() != static_cast<std::size_t>(order - 1))
      throw ConsistencyError("event context length does not match table order");
    flat.insert(flat.end(), e.context.begin(), e.context.end());
    flat.push_back(e.word);
    counts.push_back(e.count);
  }
  canonicalize(order, flat, counts);
  return from_sorted(order, num_words, flat, counts);
}

std::optional<RowId> CountTable::find_row(std::span<const WordId> ctx) const {
  auto it = index_.find(context_key(ctx));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Count CountTable::count(std::span<const WordId> ctx, WordId word) const {
  const auto row = find_row(ctx);
  if (!row) return 0;
  const auto words = row_words(*row);
  auto it = std::lower_bound(words.begin(), words.end(), word);
  if (it == words.end() || *it != word) return 0;
  return row_counts(*row)[static_cast<std::size_t>(it - words.begin())];
}

std::vector<CountTable::Event> CountTable::events() const {
  std::vector<Event> out;
  out.reserve(num_events());
  for (RowId r = 0; r < num_rows(); ++r) {
    const auto ctx = context(r);
    const auto words = row_words(r);
    const auto counts = row_counts(r);
    for (std::size_t k = 0; k < words.size(); ++k)
      out.push_back({std::vector<WordId>(ctx.begin(), ctx.end()), words[k], counts[k]});
  }
  return out;
}

bool CountTable::operator==(const CountTable& o) const {
  return order_ == o.order_ && contexts_ == o.contexts_ && row_begin_ == o.row_begin_ &&
         entry_word_ == o.entry_word_ && entry_count_ == o.entry_count_ &&
         col_marginal_ == o.col_marginal_;
}

CountTable count_ngrams(const TokenStream& stream, int order) {
  if (order < 2) throw std::invalid_argument("n-gram order must be >= 2");
  const std::size_t n = stream.size();
  if (n < static_cast<std::size_t>(order))
    throw InputError("token stream of length " + std::to_string(n) +
                     " is shorter than the n-gram order " + std::to_string(order));
  std::size_t num_words = stream.vocab_size;
  for (WordId id : stream.ids) num_words = std::max<std::size_t>(num_words, id + 1);

  const std::size_t events = n - order + 1;
  std::vector<WordId> flat;
  flat.reserve(events * order);
  for (std::size_t i = order - 1; i < n; ++i)
    flat.insert(flat.end(), stream.ids.begin() + (i - order + 1), stream.ids.begin() + i + 1);
  std::vector<Count> counts(events, 1);
  canonicalize(order, flat, counts);
  return CountTable::from_sorted(order, num_words, flat, counts);
}

CountTable merge_counts(std::span<const CountTable> tables) {
  if (tables.empty()) throw std::invalid_argument("merge_counts needs at least one table");
  const int order = tables.front().order();
  std::size_t num_words = 0;
  std::vector<CountTable::Event> all;
  for (const auto& t : tables) {
    if (t.order() != order) throw ConsistencyError("cannot merge count tables of different order");
    num_words = std::max(num_words, t.num_words());
    auto ev = t.events();
    all.insert(all.end(), std::make_move_iterator(ev.begin()), std::make_move_iterator(ev.end()));
  }
  return CountTable::from_events(order, num_words, all);
}

}  // namespace ngcf
