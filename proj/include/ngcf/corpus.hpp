#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ngcf/types.hpp"

namespace ngcf {

inline constexpr std::string_view kUnkToken = "<unk>";

/// Word <-> id map. Id 0 is reserved for the unknown-word token; the
/// remaining entries are ordered by descending count, ties lexicographic.
class Vocabulary {
 public:
  Vocabulary();

  /// Builds from (word, count) entries that already satisfy the ordering
  /// invariant. Throws InputError otherwise.
  static Vocabulary from_entries(std::vector<std::pair<std::string, Count>> entries,
                                 Count unk_count = 0);

  std::size_t size() const { return words_.size(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  Count count(WordId id) const { return counts_.at(id); }
  WordId id_of(std::string_view word) const;
  bool contains(std::string_view word) const;

  /// FNV-1a over the serialized vocabulary file contents.
  std::uint64_t hash() const;

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && counts_ == other.counts_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<Count> counts_;
  std::unordered_map<std::string, WordId> index_;
};

struct TokenStream {
  std::vector<WordId> ids;
  std::size_t vocab_size = 0;
  std::size_t n_unknown = 0;

  std::size_t size() const { return ids.size(); }
};

/// Splits on ASCII whitespace. Rejects invalid UTF-8 with an InputError that
/// carries the byte offset of the first bad sequence. Lowercasing is ASCII only.
std::vector<std::string> tokenize(std::string_view text, bool lowercase = false);

using WordCounts = std::unordered_map<std::string, Count>;

WordCounts count_words(std::span<const std::string> words);
void merge_word_counts(WordCounts& into, const WordCounts& from);

Vocabulary build_vocabulary(const WordCounts& counts, Count min_count, std::size_t max_size);
Vocabulary build_vocabulary(std::span<const std::string> words, Count min_count,
                            std::size_t max_size);

TokenStream encode(std::span<const std::string> words, const Vocabulary& vocab);
std::vector<std::string> decode(const TokenStream& stream, const Vocabulary& vocab);

/// Sparse (context, word) -> count table in canonical form: rows sorted
/// lexicographically by context, entries within a row sorted by word id,
/// no stored zeros. Rows and columns are addressable from both directions.
class CountTable {
 public:
  struct Event {
    std::vector<WordId> context;
    WordId word = 0;
    Count count = 0;
  };

  CountTable() = default;

  /// Aggregates duplicate (context, word) events and drops zero counts.
  static CountTable from_events(int order, std::size_t num_words, std::span<const Event> events);

  int order() const { return order_; }
  int context_length() const { return order_ - 1; }
  std::size_t num_rows() const { return row_marginal_.size(); }
  std::size_t num_words() const { return col_marginal_.size(); }
  std::size_t num_events() const { return entry_word_.size(); }
  Count total() const { return total_; }
  bool empty() const { return total_ == 0; }

  std::span<const WordId> context(RowId row) const {
    return {contexts_.data() + static_cast<std::size_t>(row) * context_length(),
            static_cast<std::size_t>(context_length())};
  }
  std::optional<RowId> find_row(std::span<const WordId> context) const;

  Count row_marginal(RowId row) const { return row_marginal_[row]; }
  Count col_marginal(WordId w) const { return col_marginal_[w]; }
  const std::vector<Count>& row_marginals() const { return row_marginal_; }
  const std::vector<Count>& col_marginals() const { return col_marginal_; }

  // Row-major view: words following `row` and their counts.
  std::span<const WordId> row_words(RowId row) const {
    return {entry_word_.data() + row_begin_[row], row_begin_[row + 1] - row_begin_[row]};
  }
  std::span<const Count> row_counts(RowId row) const {
    return {entry_count_.data() + row_begin_[row], row_begin_[row + 1] - row_begin_[row]};
  }
  // Column-major view: contexts preceding `w` and their counts.
  std::span<const RowId> col_rows(WordId w) const {
    return {col_entry_row_.data() + col_begin_[w], col_begin_[w + 1] - col_begin_[w]};
  }
  std::span<const Count> col_counts(WordId w) const {
    return {col_entry_count_.data() + col_begin_[w], col_begin_[w + 1] - col_begin_[w]};
  }

  Count count(std::span<const WordId> context, WordId word) const;

  std::vector<Event> events() const;

  bool operator==(const CountTable& other) const;

 private:
  friend CountTable count_ngrams(const TokenStream& stream, int order);

  // `flat` holds `order` ids per event (context then word), sorted and
  // aggregated; `counts` is parallel to it.
  static CountTable from_sorted(int order, std::size_t num_words, const std::vector<WordId>& flat,
                                const std::vector<Count>& counts);
  void build_index();

  int order_ = 2;
  std::vector<WordId> contexts_;
  std::vector<std::size_t> row_begin_{0};
  std::vector<WordId> entry_word_;
  std::vector<Count> entry_count_;
  std::vector<Count> row_marginal_;
  std::vector<Count> col_marginal_;
  std::vector<std::size_t> col_begin_{0};
  std::vector<RowId> col_entry_row_;
  std::vector<Count> col_entry_count_;
  Count total_ = 0;
  std::unordered_map<std::string, RowId> index_;
};

/// One event per position i >= order-1 with context ids[i-M..i-1] and word
/// ids[i]. Throws InputError when the stream is shorter than `order`.
CountTable count_ngrams(const TokenStream& stream, int order);

/// Pointwise sum. Throws ConsistencyError on mismatched orders.
CountTable merge_counts(std::span<const CountTable> tables);

// ---- file formats ---------------------------------------------------------

/// "word<TAB>count" per line, unk omitted.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocabulary(std::istream& in);

/// "ctx words<TAB>word<TAB>count" per event.
void write_counts(std::ostream& out, const CountTable& table, const Vocabulary& vocab);
CountTable read_counts(std::istream& in, const Vocabulary& vocab);

std::string read_file(const std::string& path);

}  // namespace ngcf
