#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ngcf {

// Malformed or unreadable input (text, vocabulary, counts, model files).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, std::size_t offset = npos)
      : std::runtime_error(what), offset_(offset) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Two artifacts that must agree do not (vocabulary hash, table orders, ...).
class ConsistencyError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scored event received probability zero, or a statistic left its domain.
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A cluster move that would leave a cluster whose marginal is exactly one.
class GuardError : public std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace ngcf
