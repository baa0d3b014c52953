#include "mts/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace mts {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + text + "'");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& text) {
  Int v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + text + "'");
}

// Clock minutes as HH:MM.
std::string format_clock(double minutes) {
  const long total = std::lround(minutes);
  if (std::abs(minutes - static_cast<double>(total)) > 1e-9) return format_double(minutes);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02ld:%02ld", total / 60, total % 60);
  return buf;
}

double parse_clock(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return parse_double(text);
  const int h = parse_int<int>(text.substr(0, colon));
  const int m = parse_int<int>(text.substr(colon + 1));
  if (h < 0 || m < 0 || m >= 60) throw std::invalid_argument("bad clock time '" + text + "'");
  return h * 60.0 + m;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

Field real(std::string section, std::string key, double& ref) {
  return {std::move(section), std::move(key), [&ref](const std::string& v) { ref = parse_double(v); },
          [&ref] { return format_double(ref); }};
}

template <class Int>
Field integer(std::string section, std::string key, Int& ref) {
  return {std::move(section), std::move(key), [&ref](const std::string& v) { ref = parse_int<Int>(v); },
          [&ref] { return std::to_string(ref); }};
}

Field flag(std::string section, std::string key, bool& ref) {
  return {std::move(section), std::move(key), [&ref](const std::string& v) { ref = parse_bool(v); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

Field clock(std::string section, std::string key, double& ref) {
  return {std::move(section), std::move(key), [&ref](const std::string& v) { ref = parse_clock(v); },
          [&ref] { return format_clock(ref); }};
}

void add_params(std::vector<Field>& f, const std::string& section, NlParams& p) {
  f.push_back(real(section, "beta_ovtt", p.beta_ovtt));
  f.push_back(real(section, "beta_ivtt", p.beta_ivtt));
  f.push_back(real(section, "beta_cost", p.beta_cost));
  f.push_back(real(section, "mu_nonmotorized", p.mu[0]));
  f.push_back(real(section, "mu_auto", p.mu[1]));
  f.push_back(real(section, "mu_public_transport", p.mu[2]));
  for (Mode m : kAllModes) {
    f.push_back(real(section, "asc_" + std::string(mode_name(m)), p.asc[index(m)]));
  }
}

std::vector<Field> fields(Scenario& s) {
  std::vector<Field> f;
  f.push_back(real("simulation", "lambda_per_hour", s.lambda));
  f.push_back(integer("simulation", "days", s.days));
  f.push_back(clock("simulation", "start", s.start_min));
  f.push_back(clock("simulation", "end", s.end_min));
  f.push_back(integer("simulation", "seed", s.seed));
  f.push_back(flag("simulation", "estimate_asc", s.estimate_asc));
  f.push_back(flag("simulation", "enforce_wtp", s.enforce_wtp));

  f.push_back(real("network", "region_size_km", s.network.region_size_km));
  f.push_back(integer("network", "zone_count", s.network.zone_count));
  f.push_back(real("network", "station_spacing_km", s.network.station_spacing_km));
  f.push_back(real("network", "station_merge_km", s.network.station_merge_km));
  f.push_back(real("network", "inner_ring_half_width_km", s.network.inner_ring_half_width_km));
  f.push_back(real("network", "outer_ring_half_width_km", s.network.outer_ring_half_width_km));
  f.push_back(real("network", "transit_speed_kmh", s.network.transit_speed_kmh));
  f.push_back(real("network", "boarding_wait_min", s.network.boarding_wait_min));

  f.push_back(integer("fleet", "size", s.fleet_size));
  f.push_back(integer("fleet", "capacity", s.capacity));
  f.push_back(real("fleet", "speed_kmh", s.dispatch.speed_kmh));
  f.push_back(real("fleet", "service_radius_km", s.dispatch.service_radius_km));
  f.push_back(real("fleet", "relocation_interval_min", s.dispatch.relocation_interval_min));
  f.push_back(integer("fleet", "k_nearest_stations", s.dispatch.k_nearest));
  f.push_back(real("fleet", "gamma", s.dispatch.gamma));
  f.push_back(real("fleet", "beta_delay", s.dispatch.beta_delay));

  f.push_back(real("fares", "base_fare", s.fares.base_fare));
  f.push_back(real("fares", "avg_op_cost_per_km", s.fares.avg_op_cost_per_km));
  f.push_back(real("fares", "markup_per_km", s.fares.markup_per_km));
  f.push_back(real("fares", "transit_fare", s.fares.transit_fare));
  f.push_back(real("fares", "taxi_flag", s.fares.taxi_flag));
  f.push_back(real("fares", "taxi_per_km", s.fares.taxi_per_km));
  f.push_back(real("fares", "car_cost_per_km", s.fares.car_cost_per_km));

  f.push_back(real("speeds", "walk_kmh", s.speeds.walk_kmh));
  f.push_back(real("speeds", "bike_kmh", s.speeds.bike_kmh));
  f.push_back(real("speeds", "car_kmh", s.speeds.car_kmh));
  f.push_back(real("speeds", "taxi_wait_min", s.speeds.taxi_wait_min));

  f.push_back(real("wtp", "car_cost_per_km", s.wtp.car_cost_per_km));
  f.push_back(real("wtp", "sigma", s.wtp.sigma));

  f.push_back({"pricing", "mode",
               [&s](const std::string& v) {
                 try {
                   s.pricing.mode = parse_pricing_mode(v);
                 } catch (const std::exception&) {
                   throw std::invalid_argument("pricing mode must be none, constrained or unconstrained");
                 }
               },
               [&s] { return std::string(pricing_mode_name(s.pricing.mode)); }});
  f.push_back(real("pricing", "alpha", s.pricing.alpha));
  f.push_back(real("pricing", "unconstrained_price_ceiling", s.pricing.unconstrained_price_ceiling));

  add_params(f, "true_model", s.truth);
  add_params(f, "initial_estimate", s.initial);
  return f;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Scenario parse_config(std::istream& in, const std::string& source) {
  Scenario scenario;
  auto table = fields(scenario);
  std::string section;
  std::string line;
  int number = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, number, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const Field& f : table) known = known || f.section == section;
      if (!known) throw ConfigError(source, number, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, number, "expected 'key = value'");
    if (section.empty()) throw ConfigError(source, number, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qualified = section + "." + key;
    Field* field = nullptr;
    for (Field& f : table) {
      if (f.section == section && f.key == key) field = &f;
    }
    if (!field) throw ConfigError(source, number, "unknown key '" + key + "' in [" + section + "]");
    if (std::find(seen.begin(), seen.end(), qualified) != seen.end()) {
      throw ConfigError(source, number, "duplicate key '" + qualified + "'");
    }
    seen.push_back(qualified);
    try {
      field->set(value);
    } catch (const std::exception& e) {
      throw ConfigError(source, number, qualified + ": " + e.what());
    }
  }
  // The transit fare lives in two places; keep them in step.
  scenario.network.transit_fare = scenario.fares.transit_fare;
  try {
    scenario.validate();
  } catch (const std::exception& e) {
    throw ConfigError(source, 0, e.what());
  }
  return scenario;
}

Scenario load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  return parse_config(in, path);
}

void write_config(std::ostream& out, const Scenario& scenario) {
  Scenario copy = scenario;
  const auto table = fields(copy);
  std::string section;
  for (const Field& f : table) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get() << '\n';
  }
}

std::string emit_reference_config() {
  std::ostringstream out;
  write_config(out, Scenario{});
  return out.str();
}

}  // namespace mts
