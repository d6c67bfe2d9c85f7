#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace paac {

using Vec = std::vector<double>;

// Error taxonomy shared by every module. All of these derive from
// std::runtime_error so callers can catch broadly or by kind.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyBufferError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline void require_dim(const Vec& v, std::size_t dim, const char* what) {
  if (v.size() != dim) {
    throw ShapeError(std::string(what) + ": expected dimension " +
                     std::to_string(dim) + ", got " + std::to_string(v.size()));
  }
}

}  // namespace paac
