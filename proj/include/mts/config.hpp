#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mts/sim.hpp"

namespace mts {

/// Parse failure carrying the 1-based line number (0 when not line-specific).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Sectioned `key = value` text. Unknown sections or keys are errors; keys
/// not mentioned keep their defaults. '#' starts a comment.
Scenario parse_config(std::istream& in, const std::string& source = "<config>");
Scenario load_config(const std::string& path);

/// Writes every scenario key. Parsing the output reproduces `scenario`.
void write_config(std::ostream& out, const Scenario& scenario);
std::string emit_reference_config();

}  // namespace mts
