#ifndef EQREC_ERRORS_HPP
#define EQREC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eqrec {

// Base class for every error this library throws.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input line/row. Carries the 1-based line number.
class parse_error : public error {
 public:
  parse_error(const std::string& msg, std::size_t line)
      : error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Header/column problems in delimited files.
class schema_error : public error {
 public:
  using error::error;
};

// An operation received no data to work on.
class empty_input_error : public error {
 public:
  using error::error;
};

// Argument outside the operation's stated domain.
class domain_error : public error {
 public:
  using error::error;
};

// A rating level not present in an equalization map, fallback disabled.
class unknown_level_error : public error {
 public:
  unknown_level_error(double value)
      : error("rating level " + std::to_string(value) +
              " not present in equalization map"),
        value_(value) {}
  double value() const { return value_; }

 private:
  double value_;
};

// Training produced a non-finite factor entry.
class divergence_error : public error {
 public:
  divergence_error(int epoch)
      : error("training diverged (non-finite factor entry) at epoch " +
              std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Inconsistent or incomplete configuration.
class config_error : public error {
 public:
  using error::error;
};

// Filesystem failures.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace eqrec

#endif
