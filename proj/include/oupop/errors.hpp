#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace oupop {

// Base for every failure raised by the library. The CLI maps ConfigError to
// exit status 2 and everything else to 1.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
public:
  using Error::Error;
};

class ParameterError : public Error {
public:
  using Error::Error;
};

class OutOfRange : public Error {
public:
  using Error::Error;
};

class CoverageError : public Error {
public:
  using Error::Error;
};

class InconsistentBounds : public Error {
public:
  using Error::Error;
};

class CalibrationFailure : public Error {
public:
  CalibrationFailure(const std::string &what, double tightest_lower,
                     double tightest_upper, double last_beta);

  double tightest_lower() const { return lower_; }
  double tightest_upper() const { return upper_; }
  double last_beta() const { return beta_; }

private:
  double lower_;
  double upper_;
  double beta_;
};

class BlowUp : public Error {
public:
  explicit BlowUp(double time);
  double time() const { return time_; }

private:
  double time_;
};

class SingularMeasurement : public Error {
public:
  using Error::Error;
};

class NonMeanReverting : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// Scenario / command-line validation failure. `field` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(const std::string &field, const std::string &what);
  const std::string &field() const { return field_; }

private:
  std::string field_;
};

} // namespace oupop
