#ifndef SADIH_ERROR_HPP_
#define SADIH_ERROR_HPP_

#include <iostream>
#include <stdexcept>
#include <string>

namespace sadih {

// Base error. Each category maps onto a CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

// Invalid configuration or command-line input.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Malformed, inconsistent or unreadable data files.
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

// A numerical invariant was violated (non-finite values, negative norms...).
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

namespace log {

inline bool& warnings_enabled() {
  static bool enabled = true;
  return enabled;
}

inline void warn(const std::string& message) {
  if (warnings_enabled()) std::cerr << "warning: " << message << '\n';
}

inline void info(const std::string& message) { std::cerr << message << '\n'; }

}  // namespace log
}  // namespace sadih

#endif  // SADIH_ERROR_HPP_
