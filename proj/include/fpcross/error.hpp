#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpcross {

/// Raised when a black-box function (oracle, drift, rhs) returns NaN or Inf.
class NonFiniteError : public std::runtime_error {
public:
  NonFiniteError(const std::string& what, std::vector<std::int64_t> index = {})
      : std::runtime_error(what + describe(index)), index_(std::move(index)) {}

  const std::vector<std::int64_t>& index() const noexcept { return index_; }

private:
  static std::string describe(const std::vector<std::int64_t>& index) {
    if (index.empty()) return {};
    std::ostringstream os;
    os << " at index (";
    for (std::size_t i = 0; i < index.size(); ++i) os << (i ? "," : "") << index[i];
    os << ")";
    return os.str();
  }

  std::vector<std::int64_t> index_;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace detail
}  // namespace fpcross
