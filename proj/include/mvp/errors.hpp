#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A time argument lies on (or within the guard band of) a multiple of the
// cyclotron period, where the rotation change of variables degenerates.
class SingularTimeError : public Error {
 public:
  using Error::Error;
};

// A particle is outside the interior of the grid it is being deposited on or
// gathered from.
class DomainError : public Error {
 public:
  DomainError(std::size_t index, double x, double y, double z);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// The doubled free-space convolution grid would exceed the memory budget.
class MemoryBudgetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace mvp
