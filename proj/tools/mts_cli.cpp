// Command-line driver: runs a grid of scenario cells and writes CSV/JSON reports.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "mts/config.hpp"
#include "mts/sim.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mts;

namespace {

struct Cell {
  double lambda = 0.0;
  int capacity = 0;
  double sigma = 0.0;
  std::string label() const {
    std::ostringstream o;
    o << "lambda" << lambda << "_cap" << capacity << "_sigma" << sigma;
    return o.str();
  }
};

struct CellResult {
  Cell cell;
  std::vector<ExperimentReport> reports;  // one per pricing mode
  std::string error;
};

std::string num(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

std::ofstream open_csv(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

constexpr const char* kShareColumns[] = {"share_walk", "share_bike", "share_car", "share_taxi",
                                         "share_transit", "share_r", "share_rt"};

void write_daily(const fs::path& path, const std::vector<CellResult>& results) {
  auto out = open_csv(path);
  out << "day,lambda,capacity,sigma,mode,profit,wt,jt,vtl,gap";
  for (const char* c : kShareColumns) out << ',' << c;
  out << ",n_requests,n_served,mean_price\n";
  for (const CellResult& r : results) {
    for (const ExperimentReport& rep : r.reports) {
      for (const DayMetrics& d : rep.days) {
        out << d.day << ',' << num(rep.lambda) << ',' << rep.capacity << ',' << num(rep.sigma) << ','
            << pricing_mode_name(rep.pricing) << ',' << num(d.profit) << ',' << num(d.wt) << ','
            << num(d.jt) << ',' << num(d.vtl) << ',' << num(d.gap);
        for (double s : d.mode_share) out << ',' << num(s);
        out << ',' << d.n_requests << ',' << d.n_served << ',' << num(d.mean_price) << '\n';
      }
    }
  }
}

const ExperimentReport* baseline(const CellResult& r) {
  for (const ExperimentReport& rep : r.reports) {
    if (rep.pricing == PricingMode::none) return &rep;
  }
  return nullptr;
}

void write_tables(const fs::path& dir, const std::vector<CellResult>& results) {
  auto profit = open_csv(dir / "table_profit.csv");
  auto share = open_csv(dir / "table_mode_share.csv");
  auto perf = open_csv(dir / "table_performance.csv");
  auto sigma = open_csv(dir / "table_sigma.csv");
  const std::string key = "lambda,capacity,sigma,mode";
  profit << key << ",profit_mean,profit_sd,profit_delta_pct\n";
  share << key;
  for (const char* c : kShareColumns) share << ',' << c << "_mean," << c << "_sd," << c << "_delta_pct";
  share << ",share_mod_mean,share_mod_delta_pct\n";
  perf << key << ",wt_mean,wt_sd,jt_mean,jt_sd,vtl_mean,vtl_sd\n";
  sigma << key << ",profit_mean,price_mean,price_sd,share_mod_mean\n";

  for (const CellResult& r : results) {
    const ExperimentReport* base = baseline(r);
    for (const ExperimentReport& rep : r.reports) {
      std::ostringstream k;
      k << num(rep.lambda) << ',' << rep.capacity << ',' << num(rep.sigma) << ',' << pricing_mode_name(rep.pricing);
      const auto p = rep.stat(&DayMetrics::profit);
      profit << k.str() << ',' << num(p.mean) << ',' << num(p.sd) << ','
             << (base ? num(delta_percent(p.mean, base->stat(&DayMetrics::profit).mean)) : "") << '\n';
      share << k.str();
      for (Mode m : kAllModes) {
        const auto s = rep.mode_share_stat(m);
        share << ',' << num(s.mean) << ',' << num(s.sd) << ','
              << (base ? num(delta_percent(s.mean, base->mode_share_stat(m).mean)) : "");
      }
      const auto mod = rep.mod_share_stat();
      share << ',' << num(mod.mean) << ','
            << (base ? num(delta_percent(mod.mean, base->mod_share_stat().mean)) : "") << '\n';
      const auto wt = rep.stat(&DayMetrics::wt);
      const auto jt = rep.stat(&DayMetrics::jt);
      const auto vtl = rep.stat(&DayMetrics::vtl);
      perf << k.str() << ',' << num(wt.mean) << ',' << num(wt.sd) << ',' << num(jt.mean) << ',' << num(jt.sd)
           << ',' << num(vtl.mean) << ',' << num(vtl.sd) << '\n';
      const auto price = rep.price_stat();
      sigma << k.str() << ',' << num(p.mean) << ',' << num(price.mean) << ',' << num(price.sd) << ','
            << num(mod.mean) << '\n';
    }
  }
}

void write_prices(const fs::path& path, const std::vector<CellResult>& results) {
  auto out = open_csv(path);
  out << "lambda,capacity,sigma,mode,day,option,price\n";
  for (const CellResult& r : results) {
    for (const ExperimentReport& rep : r.reports) {
      for (const DayMetrics& d : rep.days) {
        const std::string prefix = num(rep.lambda) + ',' + std::to_string(rep.capacity) + ',' + num(rep.sigma) +
                                   ',' + std::string(pricing_mode_name(rep.pricing)) + ',' +
                                   std::to_string(d.day) + ',';
        for (double v : d.price_r) out << prefix << "rideshare," << num(v) << '\n';
        for (double v : d.price_rt) out << prefix << "rideshare_transit," << num(v) << '\n';
      }
    }
  }
}

void write_gaps(const fs::path& path, const std::vector<CellResult>& results) {
  auto out = open_csv(path);
  out << "lambda,capacity,sigma,mode,day,gap\n";
  for (const CellResult& r : results) {
    for (const ExperimentReport& rep : r.reports) {
      for (const DayMetrics& d : rep.days) {
        out << num(rep.lambda) << ',' << rep.capacity << ',' << num(rep.sigma) << ','
            << pricing_mode_name(rep.pricing) << ',' << d.day << ',' << num(d.gap) << '\n';
      }
    }
  }
}

std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::pickup: return "pickup";
    case EventKind::dropoff: return "dropoff";
    case EventKind::relocation_arrival: return "relocation_arrival";
    case EventKind::depot_return: return "depot_return";
  }
  return "?";
}

void write_cell_logs(const fs::path& dir, const CellResult& r, bool observations, bool events) {
  for (const ExperimentReport& rep : r.reports) {
    const std::string stem = r.cell.label() + "_" + std::string(pricing_mode_name(rep.pricing));
    if (observations) {
      auto out = open_csv(dir / ("observations_" + stem + ".csv"));
      write_observations_csv(out, rep.observations);
    }
    if (events) {
      auto out = open_csv(dir / ("events_" + stem + ".csv"));
      out << "day,time,vehicle,kind,request,x,y\n";
      for (const auto& [day, e] : rep.events) {
        out << day << ',' << num(e.time) << ',' << e.vehicle << ',' << event_name(e.kind) << ',' << e.request
            << ',' << num(e.location.x) << ',' << num(e.location.y) << '\n';
      }
    }
  }
}

template <class T>
std::vector<T> or_default(const std::vector<T>& given, T fallback) {
  return given.empty() ? std::vector<T>{fallback} : given;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microtransit simulator with learned nested-logit demand and chance-constrained pricing"};
  std::string config_path;
  std::vector<double> lambdas, sigmas;
  std::vector<int> capacities;
  std::vector<std::string> pricing_names;
  std::optional<int> days;
  std::optional<unsigned long long> seed;
  std::string out_dir = "mts_out";
  int workers = 1;
  bool validate_only = false, emit_default = false;
  std::string network_dump;
  std::vector<std::string> emit = {"tables", "price_cdf", "gap_series"};

  app.add_option("--config", config_path, "Scenario config file")->check(CLI::ExistingFile);
  app.add_option("--lambda", lambdas, "Arrival rates per hour (comma separated)")->delimiter(',');
  app.add_option("--capacity", capacities, "Vehicle capacities (comma separated)")->delimiter(',');
  app.add_option("--sigma", sigmas, "WTP noise variances (comma separated)")->delimiter(',');
  app.add_option("--pricing", pricing_names, "Pricing modes: none,constrained,unconstrained")
      ->delimiter(',')
      ->check(CLI::IsMember({"none", "constrained", "unconstrained"}));
  app.add_option("--days", days, "Days per experiment");
  app.add_option("--seed", seed, "Base random seed (falls back to MMS_SEED)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--workers", workers, "Parallel grid cells")->check(CLI::PositiveNumber);
  app.add_option("--emit", emit, "Artifacts: tables,price_cdf,gap_series,event_log,observations")
      ->delimiter(',')
      ->check(CLI::IsMember({"tables", "price_cdf", "gap_series", "event_log", "observations"}));
  app.add_option("--dump-network", network_dump, "Write the station/line listing to this file and exit");
  app.add_flag("--validate-only", validate_only, "Parse and print the resolved config, then exit");
  app.add_flag("--emit-default-config", emit_default, "Print the reference config and exit");
  CLI11_PARSE(app, argc, argv);

  if (emit_default) {
    std::cout << emit_reference_config();
    return 0;
  }

  Scenario base;
  try {
    if (!config_path.empty()) base = load_config(config_path);
    if (days) base.days = *days;
    if (seed) {
      base.seed = *seed;
    } else if (const char* env = std::getenv("MMS_SEED")) {
      base.seed = std::stoull(env);
    }
    base.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  if (!network_dump.empty()) {
    std::ofstream out(network_dump, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << network_dump << '\n';
      return 2;
    }
    Network::build(base.network).dump(out);
    return 0;
  }

  std::vector<PricingMode> modes;
  for (const std::string& n : pricing_names) modes.push_back(parse_pricing_mode(n));
  if (modes.empty()) modes = {PricingMode::none, base.pricing.mode};
  if (modes.size() == 2 && modes[0] == modes[1]) modes.pop_back();

  std::vector<Cell> cells;
  for (double l : or_default(lambdas, base.lambda)) {
    for (int c : or_default(capacities, base.capacity)) {
      for (double s : or_default(sigmas, base.wtp.sigma)) cells.push_back({l, c, s});
    }
  }

  if (validate_only) {
    write_config(std::cout, base);
    std::cout << "# cells: " << cells.size() << ", pricing modes: " << modes.size() << '\n';
    return 0;
  }

  const auto has = [&](const char* what) { return std::find(emit.begin(), emit.end(), what) != emit.end(); };
  ExperimentOptions options;
  options.keep_logs = has("observations");
  options.keep_events = has("event_log");

  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << dir << ": " << ec.message() << '\n';
    return 2;
  }

  std::vector<CellResult> results(cells.size());
  std::vector<double> cell_seconds(cells.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      results[i].cell = cells[i];
      Scenario s = base;
      s.lambda = cells[i].lambda;
      s.capacity = cells[i].capacity;
      s.wtp.sigma = cells[i].sigma;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        results[i].reports = compare_modes(s, modes, options);
        if (options.keep_logs || options.keep_events) {
          write_cell_logs(dir, results[i], options.keep_logs, options.keep_events);
        }
      } catch (const std::exception& e) {
        results[i].reports.clear();
        results[i].error = e.what();
      }
      cell_seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard lock(io);
      std::cerr << "cell " << cells[i].label() << (results[i].error.empty() ? " done" : " FAILED: " + results[i].error)
                << " (" << std::fixed << std::setprecision(1) << cell_seconds[i] << " s)\n";
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(workers, static_cast<int>(cells.size())); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<CellResult> ok;
  for (const CellResult& r : results) {
    if (r.error.empty()) ok.push_back(r);
  }

  json index;
  index["config"] = [&] {
    std::ostringstream o;
    write_config(o, base);
    return o.str();
  }();
  index["pricing_modes"] = json::array();
  for (PricingMode m : modes) index["pricing_modes"].push_back(std::string(pricing_mode_name(m)));
  index["files"] = json::array({"daily.csv"});
  write_daily(dir / "daily.csv", ok);
  if (has("tables")) {
    write_tables(dir, ok);
    for (const char* f : {"table_profit.csv", "table_mode_share.csv", "table_performance.csv", "table_sigma.csv"}) {
      index["files"].push_back(f);
    }
  }
  if (has("price_cdf")) {
    write_prices(dir / "prices.csv", ok);
    index["files"].push_back("prices.csv");
  }
  if (has("gap_series")) {
    write_gaps(dir / "gap_series.csv", ok);
    index["files"].push_back("gap_series.csv");
  }

  bool failed = false;
  index["cells"] = json::array();
  for (const CellResult& r : results) {
    json c{{"label", r.cell.label()},
           {"lambda", r.cell.lambda},
           {"capacity", r.cell.capacity},
           {"sigma", r.cell.sigma},
           {"status", r.error.empty() ? "ok" : "failed"}};
    if (!r.error.empty()) {
      c["error"] = r.error;
      failed = true;
    }
    json runs = json::array();
    for (const ExperimentReport& rep : r.reports) {
      json estimates = json::array();
      for (const NlParams& p : rep.estimates) {
        estimates.push_back({p.beta_ovtt, p.beta_ivtt, p.beta_cost, p.mu[0], p.mu[1], p.mu[2]});
      }
      runs.push_back({{"pricing", std::string(pricing_mode_name(rep.pricing))},
                      {"profit_mean", rep.stat(&DayMetrics::profit).mean},
                      {"profit_sd", rep.stat(&DayMetrics::profit).sd},
                      {"mod_share_mean", rep.mod_share_stat().mean},
                      {"price_mean", rep.price_stat().mean},
                      {"gap_series", rep.gap_series()},
                      {"estimates", estimates},
                      {"warnings", rep.warnings}});
    }
    c["runs"] = runs;
    index["cells"].push_back(c);
  }
  {
    std::ofstream out(dir / "index.json", std::ios::binary);
    out << index.dump(2) << '\n';
  }

  // Wall-clock timing lives apart from the deterministic outputs.
  {
    auto out = open_csv(dir / "timing.csv");
    out << "lambda,capacity,sigma,mode,day,wall_seconds\n";
    for (const CellResult& r : ok) {
      for (const ExperimentReport& rep : r.reports) {
        for (const DayMetrics& d : rep.days) {
          out << num(rep.lambda) << ',' << rep.capacity << ',' << num(rep.sigma) << ','
              << pricing_mode_name(rep.pricing) << ',' << d.day << ',' << num(d.wall_seconds) << '\n';
        }
      }
    }
  }
  return failed ? 1 : 0;
}
