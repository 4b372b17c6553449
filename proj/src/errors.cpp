#include <oupop/errors.hpp>

#include <sstream>

namespace oupop {

CalibrationFailure::CalibrationFailure(const std::string &what,
                                       double tightest_lower,
                                       double tightest_upper, double last_beta)
    : Error(what), lower_(tightest_lower), upper_(tightest_upper),
      beta_(last_beta) {}

namespace {
std::string blow_up_message(double t) {
  std::ostringstream os;
  os << "state blew up at t=" << t;
  return os.str();
}
} // namespace

BlowUp::BlowUp(double time) : Error(blow_up_message(time)), time_(time) {}

ParseError::ParseError(const std::string &what, std::size_t line)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

ConfigError::ConfigError(const std::string &field, const std::string &what)
    : Error(field + ": " + what), field_(field) {}

} // namespace oupop
