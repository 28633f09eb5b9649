#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ngcf/corpus.hpp"
#include "ngcf/errors.hpp"

namespace ngcf {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Count parse_count(std::string_view field, std::size_t line_no) {
  Count value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0)
    throw InputError("line " + std::to_string(line_no) + ": bad count '" + std::string(field) + "'");
  return value;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  for (WordId id = 1; id < vocab.size(); ++id)
    out << vocab.word(id) << '\t' << vocab.count(id) << '\n';
}

Vocabulary read_vocabulary(std::istream& in) {
  std::vector<std::pair<std::string, Count>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 2)
      throw InputError("vocabulary line " + std::to_string(line_no) + ": expected word<TAB>count");
    entries.emplace_back(std::string(parts[0]), parse_count(parts[1], line_no));
  }
  return Vocabulary::from_entries(std::move(entries));
}

void write_counts(std::ostream& out, const CountTable& table, const Vocabulary& vocab) {
  for (RowId r = 0; r < table.num_rows(); ++r) {
    std::string ctx;
    for (WordId id : table.context(r)) {
      if (!ctx.empty()) ctx.push_back(' ');
      ctx += vocab.word(id);
    }
    const auto words = table.row_words(r);
    const auto counts = table.row_counts(r);
    for (std::size_t k = 0; k < words.size(); ++k)
      out << ctx << '\t' << vocab.word(words[k]) << '\t' << counts[k] << '\n';
  }
}

CountTable read_counts(std::istream& in, const Vocabulary& vocab) {
  std::vector<CountTable::Event> events;
  int order = 0;
  std::string line;
  std::size_t line_no = 0;
  auto lookup = [&](std::string_view w) {
    if (w == kUnkToken) return kUnkId;
    if (!vocab.contains(w))
      throw ConsistencyError("counts line " + std::to_string(line_no) + ": word '" +
                             std::string(w) + "' is not in the vocabulary");
    return vocab.id_of(w);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 3)
      throw InputError("counts line " + std::to_string(line_no) +
                       ": expected context<TAB>word<TAB>count");
    CountTable::Event e;
    for (auto w : split(parts[0], ' ')) e.context.push_back(lookup(w));
    e.word = lookup(parts[1]);
    e.count = parse_count(parts[2], line_no);
    const int this_order = static_cast<int>(e.context.size()) + 1;
    if (order == 0) order = this_order;
    if (this_order != order)
      throw InputError("counts line " + std::to_string(line_no) + ": inconsistent n-gram order");
    events.push_back(std::move(e));
  }
  if (order == 0) throw InputError("counts file is empty");
  return CountTable::from_events(order, vocab.size(), events);
}

}  // namespace ngcf
