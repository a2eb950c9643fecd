#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoinf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in an expression or scene text.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected,
             const std::string& what)
      : Error(format(offset, expected, what)),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string format(std::size_t offset,
                            const std::vector<std::string>& expected,
                            const std::string& what) {
    std::string s = "parse error at byte " + std::to_string(offset) + ": " + what;
    if (!expected.empty()) {
      s += " (expected one of:";
      for (const auto& e : expected) s += " " + e;
      s += ")";
    }
    return s;
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifierError : public Error {
 public:
  UnknownIdentifierError(std::size_t offset, const std::string& name)
      : Error("unknown identifier '" + name + "' at byte " + std::to_string(offset)),
        offset_(offset),
        name_(name) {}
  std::size_t offset() const { return offset_; }
  const std::string& name() const { return name_; }

 private:
  std::size_t offset_;
  std::string name_;
};

/// sqrt/log of a negative number, division by zero, non-integer power of a
/// non-positive base. Carries the printed offending subexpression.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& subexpr)
      : Error("domain error in " + subexpr), subexpr_(subexpr) {}
  const std::string& subexpression() const { return subexpr_; }

 private:
  std::string subexpr_;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class UnknownBuiltinError : public Error {
 public:
  using Error::Error;
};

class EmptyIntersectionError : public Error {
 public:
  using Error::Error;
};

class NonfiniteIntegrandError : public Error {
 public:
  using Error::Error;
};

/// Raised when the cell budget of the measure engine runs out. The partial
/// estimate is kept so callers can still report it.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(const std::string& what, double partial_value, double partial_error)
      : Error(what), partial_value_(partial_value), partial_error_(partial_error) {}
  double partial_value() const { return partial_value_; }
  double partial_error() const { return partial_error_; }

 private:
  double partial_value_;
  double partial_error_;
};

class PointNotOnSetError : public Error {
 public:
  using Error::Error;
};

class InsufficientClustersError : public Error {
 public:
  using Error::Error;
};

class EmptyShellError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoinf
