#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace red {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Field shapes (or walker counts) that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside an operation's domain (dt <= 0, unknown mode, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A run that had to be aborted: instability, non-finite values, underflow.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// One offending location in a configuration document.
struct ConfigIssue {
  std::string path;  // JSON-pointer style, e.g. /system/masses/0
  std::string message;
};

/// Validation failure carrying every issue found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : Error(format(issues)), issues_(std::move(issues)) {}
  ConfigError(std::string path, std::string message)
      : ConfigError(std::vector<ConfigIssue>{{std::move(path), std::move(message)}}) {}

  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  static std::string format(const std::vector<ConfigIssue>& issues) {
    std::ostringstream os;
    os << "invalid configuration (" << issues.size() << " issue"
       << (issues.size() == 1 ? "" : "s") << ")";
    for (const auto& i : issues) os << "\n  " << i.path << ": " << i.message;
    return os.str();
  }

  std::vector<ConfigIssue> issues_;
};

namespace detail {

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

template <typename T>
std::string join(const std::vector<T>& v, const char* sep = "x") {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
  return os.str();
}

}  // namespace detail
}  // namespace red
