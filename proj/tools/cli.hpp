#ifndef AGEAMP_TOOLS_CLI_HPP
#define AGEAMP_TOOLS_CLI_HPP

// Command-line front end. run_cli() is kept separate from main() so the test
// suites can drive it in-process.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <ageamp/ageamp.hpp>

namespace ageamp::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kDegenerate = 1, kUsage = 2, kNumerical = 3 };

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline std::string echo_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  // Shortest representation that parses back to the same double.
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline Budget parse_budget(const std::string& s, const char* what) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "inf" || lower == "+inf" || lower == "infinity") return Budget::unbounded();
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return Budget::of(v);
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid ") + what + ": '" + s + "'");
  }
}

/// start:stop:step, inclusive of stop within half a step.
inline std::vector<double> parse_grid(const std::string& s) {
  double a, b, step;
  char tail;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &tail) != 3) {
    throw UsageError("grid must be start:stop:step, got '" + s + "'");
  }
  if (!(step > 0) || !(b >= a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw UsageError("grid needs step > 0 and stop >= start");
  }
  std::vector<double> xs;
  for (long i = 0;; ++i) {
    const double x = a + static_cast<double>(i) * step;
    if (x > b + 0.5 * step) break;
    xs.push_back(x);
    if (xs.size() > 10'000'000) throw UsageError("grid too large");
  }
  return xs;
}

inline json budget_json(const Budget& b) {
  if (!b.bounded()) return "inf";
  return b.value();
}

inline json opt_json(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

inline json finite_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline json policy_json(const PolicySpec& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        json j;
        if constexpr (std::is_same_v<T, ZeroBatteryPolicy>) {
          j["type"] = "zero-battery";
          j["p"] = v.p;
        } else if constexpr (std::is_same_v<T, ZeroWaitPolicy>) {
          j["type"] = "zero-wait";
          j["g"] = v.g;
        } else if constexpr (std::is_same_v<T, WaitAndTransmitPolicy>) {
          j["type"] = "wait-and-transmit";
          j["omega"] = v.omega;
          j["g"] = v.g;
        } else if constexpr (std::is_same_v<T, ProbPeriodicPolicy>) {
          j["type"] = "prob-periodic";
          j["period_low"] = v.period_low;
          j["g_f"] = v.g_f;
        } else {
          j["type"] = "explicit-pmf";
          j["support_max"] = v.pmf.support_max();
        }
        return j;
      },
      p);
}

inline std::string policy_cell(const std::optional<PolicySpec>& p) {
  if (!p) return "";
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ZeroBatteryPolicy>) {
          return "p=" + csv::number(v.p);
        } else if constexpr (std::is_same_v<T, ZeroWaitPolicy>) {
          return "g=" + csv::number(v.g);
        } else if constexpr (std::is_same_v<T, WaitAndTransmitPolicy>) {
          return "omega=" + std::to_string(v.omega) + ";g=" + csv::number(v.g);
        } else if constexpr (std::is_same_v<T, ProbPeriodicPolicy>) {
          return "period_low=" + std::to_string(v.period_low) + ";g_f=" + csv::number(v.g_f);
        } else {
          const Moments m = pmf_moments(v.pmf);
          return "explicit-pmf;support_max=" + std::to_string(v.pmf.support_max()) +
                 ";mean=" + csv::number(m.mean);
        }
      },
      *p);
}

inline json metrics_json(const PolicyMetrics& m) {
  return {{"rate", m.rate},
          {"peak_age", m.peak_age},
          {"avg_age", m.avg_age},
          {"mean_interval", m.mean_interval},
          {"second_moment", m.second_moment}};
}

inline json point_json(const RegionPoint& p) {
  json j{{"source", to_string(p.source)},
         {"c_p", budget_json(p.c_p)},
         {"c_a", budget_json(p.c_a)},
         {"rate", p.rate},
         {"delta", p.delta},
         {"delta_kind", to_string(p.delta_kind)},
         {"peak_age", finite_or_null(p.peak_age)},
         {"avg_age", finite_or_null(p.avg_age)},
         {"status", to_string(p.status)}};
  j["policy"] = p.policy_params ? policy_json(*p.policy_params) : json(nullptr);
  return j;
}

inline json sim_stats_json(const SimStats& s) {
  return {{"update_count", s.update_count},
          {"empirical_peak_age", opt_json(s.empirical_peak_age)},
          {"empirical_avg_age", opt_json(s.empirical_avg_age)},
          {"empirical_avg_age_ratio", opt_json(s.empirical_avg_age_ratio)},
          {"interval_entropy_rate", opt_json(s.interval_entropy_rate)},
          {"empirical_mi_per_slot", opt_json(s.empirical_mi_per_slot)},
          {"battery_violations", s.battery_violations},
          {"final_battery", s.final_battery},
          {"save_phase_slots", s.save_phase_slots},
          {"degenerate", s.degenerate}};
}

inline json record(const std::string& command, const std::vector<std::string>& argv, json params,
                   json result) {
  json j;
  j["command"] = command;
  j["argv"] = argv;
  j["params"] = std::move(params);
  j["result"] = std::move(result);
  j["version"] = kVersion;
  return j;
}

inline Battery parse_battery(const std::string& s) {
  if (s == "zero") return Battery::zero;
  if (s == "infinite") return Battery::infinite;
  throw UsageError("battery must be zero or infinite");
}

inline std::vector<Source> parse_sources(const std::string& s, std::optional<Battery> battery) {
  if (s == "all") {
    if (!battery) return {std::begin(kAllSources), std::end(kAllSources)};
    if (*battery == Battery::zero) return {Source::zero_battery};
    return {Source::best_achievable, Source::wait_and_transmit, Source::zero_wait};
  }
  std::vector<Source> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "best") out.push_back(Source::best_achievable);
    else if (tok == "wat") out.push_back(Source::wait_and_transmit);
    else if (tok == "zero-wait") out.push_back(Source::zero_wait);
    else if (tok == "zero-battery") out.push_back(Source::zero_battery);
    else throw UsageError("unknown source '" + tok + "'");
  }
  if (out.empty()) throw UsageError("empty source list");
  return out;
}

inline void require_q(double q, bool allow_one) {
  const bool ok = q > 0.0 && (allow_one ? q <= 1.0 : q < 1.0);
  if (!ok) throw UsageError(allow_one ? "--q must lie in (0, 1]" : "--q must lie in (0, 1)");
}

inline const std::vector<std::string> kRegionHeader = {
    "kind", "battery", "source", "q", "r_min", "c_p", "c_a", "R", "delta",
    "delta_kind", "peak_age", "avg_age", "policy", "status"};

inline std::string budget_cell(const Budget& b) { return b.bounded() ? csv::number(b.value()) : "inf"; }

inline std::vector<std::string> region_row(const std::string& kind, const RegionPoint& p, double q,
                                           double r_min) {
  const Battery battery = p.source == Source::zero_battery ? Battery::zero : Battery::infinite;
  return {kind,
          to_string(battery),
          to_string(p.source),
          csv::number(q),
          csv::number(r_min),
          budget_cell(p.c_p),
          budget_cell(p.c_a),
          csv::number(p.rate),
          csv::number(p.delta),
          to_string(p.delta_kind),
          csv::number(p.peak_age),
          csv::number(p.avg_age),
          policy_cell(p.policy_params),
          to_string(p.status)};
}

/// Runs one CLI invocation. args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age of information, message rate and energy-state uncertainty trade-offs", "ageamp"};
  app.require_subcommand(1);
  unsigned threads = default_thread_count();

  // minage
  auto* minage = app.add_subcommand("minage", "Minimum peak and average age");
  double mq = 0;
  std::string mbattery = "infinite";
  minage->add_option("--q", mq, "Energy arrival probability")->required();
  minage->add_option("--battery", mbattery, "zero | infinite");

  // capacity
  auto* cap = app.add_subcommand("capacity", "Age-constrained capacity (infinite battery)");
  double cq = 0;
  std::string ccp = "inf", cca = "inf";
  bool cpmf = false;
  cap->add_option("--q", cq, "Energy arrival probability")->required();
  cap->add_option("--cp", ccp, "Peak-age budget or inf");
  cap->add_option("--ca", cca, "Average-age budget or inf");
  cap->add_flag("--pmf", cpmf, "Include the optimal interval law");
  cap->add_option("--threads", threads, "Worker threads");

  // policy
  auto* pol = app.add_subcommand("policy", "Optimize a parametric policy (infinite battery)");
  std::string pkind;
  double pq = 0;
  std::string pcp = "inf", pca = "inf";
  pol->add_option("kind", pkind, "zero-wait | wat | prob-periodic")->required();
  pol->add_option("--q", pq, "Energy arrival probability")->required();
  pol->add_option("--cp", pcp, "Peak-age budget or inf");
  pol->add_option("--ca", pca, "Average-age budget or inf");

  // region
  auto* reg = app.add_subcommand("region", "Amplification / masking regions and sweeps");
  std::string rkind, rbattery, rcp = "inf", rca = "inf", rgrid, rsource = "all", rformat = "csv";
  double rq = 0, rmin = 0.0;
  std::size_t rpoints = 101;
  reg->add_option("kind", rkind, "amplify | mask")->required();
  reg->add_option("--q", rq, "Energy arrival probability")->required();
  reg->add_option("--battery", rbattery, "zero | infinite");
  reg->add_option("--cp", rcp, "Peak-age budget or inf");
  reg->add_option("--ca", rca, "Average-age budget or inf");
  reg->add_option("--rmin", rmin, "Minimum message rate");
  reg->add_option("--cp-grid", rgrid, "Peak-budget sweep start:stop:step");
  reg->add_option("--grid", rpoints, "Boundary sample count");
  reg->add_option("--source", rsource, "all or comma list of best,wat,zero-wait,zero-battery");
  reg->add_option("--format", rformat, "csv | json");
  reg->add_option("--threads", threads, "Worker threads");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo simulation of the channel");
  std::string sbattery, spolicy, strace;
  double sq = 0, sp = 1.0, sg = 0.5;
  int somega = 1;
  std::uint64_t sn = 1'000'000, sseed = 0;
  std::optional<std::uint64_t> ssave;
  bool smm = false;
  sim->add_option("--battery", sbattery, "zero | infinite")->required();
  sim->add_option("--policy", spolicy, "zero-battery | zero-wait | wat | prob-periodic");
  sim->add_option("--q", sq, "Energy arrival probability")->required();
  sim->add_option("--p", sp, "Zero-battery transmission probability");
  sim->add_option("--g", sg, "Per-slot transmission probability");
  sim->add_option("--omega", somega, "Waiting threshold");
  sim->add_option("--n", sn, "Number of slots");
  sim->add_option("--seed", sseed, "PRNG seed")->required();
  sim->add_option("--save-phase", ssave, "Save-phase length (infinite battery)");
  sim->add_option("--trace", strace, "Write per-update CSV trace to this path");
  sim->add_flag("--miller-madow", smm, "Bias-correct plug-in estimators");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (minage->parsed()) {
      require_q(mq, true);
      const Battery b = parse_battery(mbattery);
      const MinAgeReport m = b == Battery::infinite ? min_ages_infinite(mq) : min_ages_zero(mq);
      json res{{"peak_min", m.peak_min}, {"avg_min", m.avg_min}, {"g_f", opt_json(m.g_f)}};
      out << record("minage", {"minage", "--q", echo_number(mq), "--battery", mbattery},
                    {{"q", mq}, {"battery", mbattery}}, res)
                 .dump(2)
          << "\n";
      return kOk;
    }

    if (cap->parsed()) {
      require_q(cq, false);
      const AgeConstraints c =
          AgeConstraints::make(parse_budget(ccp, "--cp"), parse_budget(cca, "--ca"));
      CapacityOptions opt;
      opt.threads = threads;
      const CapacityResult r = capacity(cq, c, opt);
      json res;
      res["status"] = r.feasible() ? "feasible" : "infeasible";
      res["reason"] = to_string(r.reason);
      if (r.feasible()) {
        res["value"] = r.value;
        res["k_star"] = r.k_star;
        res["avg_age"] = avg_age(*r.pmf_star);
        res["diagnostics"] = {{"evaluations", r.diagnostics.evaluations},
                              {"sweep_samples", r.diagnostics.sweep.size()},
                              {"inner_iterations", r.diagnostics.inner_iterations},
                              {"tail_mass", r.diagnostics.tail_mass},
                              {"v_max", r.diagnostics.v_max}};
        if (cpmf) {
          // Trim negligible trailing mass for readability.
          auto m = r.pmf_star->masses();
          while (m.size() > 1 && m.back() < 1e-15) m.pop_back();
          res["pmf"] = m;
        }
      }
      std::vector<std::string> echo{"capacity", "--q", echo_number(cq), "--cp", c.peak.to_string(),
                                    "--ca", c.average.to_string()};
      if (cpmf) echo.push_back("--pmf");
      out << record("capacity", echo,
                    {{"q", cq}, {"c_p", budget_json(c.peak)}, {"c_a", budget_json(c.average)}}, res)
                 .dump(2)
          << "\n";
      return kOk;
    }

    if (pol->parsed()) {
      require_q(pq, false);
      const AgeConstraints c =
          AgeConstraints::make(parse_budget(pcp, "--cp"), parse_budget(pca, "--ca"));
      std::optional<PolicyChoice> choice;
      if (pkind == "zero-wait") {
        choice = zero_wait_optimize(pq, c);
      } else if (pkind == "wat") {
        WatOptions wo;
        wo.threads = threads;
        choice = optimize_wat(pq, c, wo);
      } else if (pkind == "prob-periodic") {
        const ProbPeriodicPolicy pp = prob_periodic_policy(pq);
        const PolicyMetrics m = metrics_from_pmf(policy_to_pmf(pp, pp.period_low + 1));
        if (c.peak.admits(m.peak_age, 1e-12) && c.average.admits(m.avg_age, 1e-12)) {
          choice = PolicyChoice{pp, m};
        }
      } else {
        throw UsageError("policy kind must be zero-wait, wat or prob-periodic");
      }
      json res;
      res["status"] = choice ? "feasible" : "infeasible";
      if (choice) {
        res["policy"] = policy_json(choice->spec);
        res["metrics"] = metrics_json(choice->metrics);
      }
      out << record("policy",
                    {"policy", pkind, "--q", echo_number(pq), "--cp", c.peak.to_string(), "--ca",
                     c.average.to_string()},
                    {{"kind", pkind}, {"q", pq}, {"c_p", budget_json(c.peak)}, {"c_a", budget_json(c.average)}},
                    res)
                 .dump(2)
          << "\n";
      return kOk;
    }

    if (reg->parsed()) {
      require_q(rq, false);
      if (rformat != "csv" && rformat != "json") throw UsageError("--format must be csv or json");
      if (!(rmin >= 0.0)) throw UsageError("--rmin must be >= 0");
      if (rpoints < 2) throw UsageError("--grid must be >= 2");
      std::optional<Battery> battery;
      if (!rbattery.empty()) battery = parse_battery(rbattery);
      const Budget cp = parse_budget(rcp, "--cp");
      const Budget ca = parse_budget(rca, "--ca");
      AgeConstraints c = AgeConstraints::make(cp, ca);
      RegionOptions ro;
      ro.capacity.threads = 1;
      ro.wat.threads = 1;

      std::vector<RegionPoint> points;
      json extra = json::object();
      if (rkind == "amplify") {
        if (!rgrid.empty()) {
          const auto grid = parse_grid(rgrid);
          points = tradeoff_sweep(rq, rmin, ca, grid, parse_sources(rsource, battery), ro, threads);
        } else if (battery.value_or(Battery::infinite) == Battery::infinite) {
          try {
            points = amp_region_infinite(rq, c, rpoints, ro.capacity);
          } catch (const InfeasibleConstraints& e) {
            extra["infeasible"] = e.what();
          }
        } else {
          // Zero battery: max Delta_a at each rate on a grid up to the largest
          // rate any admissible p sustains.
          const double p_lo = std::clamp(zero_battery_p_min(rq, c), 0.0, 1.0);
          if (zero_battery_p_min(rq, c) > 1.0 + 1e-12) {
            extra["infeasible"] = "c_p/c_a unattainable with zero battery";
          } else {
            const auto peak = golden_section_maximize(
                [&](double p) { return zero_battery_rate(p, rq); }, p_lo, 1.0, 1e-12);
            for (std::size_t i = 0; i < rpoints; ++i) {
              const double r = (i + 1 == rpoints) ? peak.value : peak.value * double(i) / double(rpoints - 1);
              points.push_back(zero_battery_best_amp(rq, c, r));
            }
          }
        }
      } else if (rkind == "mask") {
        const MaskSweep ms =
            mask_region_sweep(rq, cp, battery.value_or(Battery::zero), rpoints, ca, ro.capacity);
        points = ms.points;
        extra["p_min"] = ms.p_min;
        if (ms.empty_budget) extra["infeasible"] = "c_p unattainable even at p = 1";
      } else {
        throw UsageError("region kind must be amplify or mask");
      }

      if (rformat == "csv") {
        csv::write_row(out, kRegionHeader);
        for (const auto& p : points) csv::write_row(out, region_row(rkind, p, rq, rmin));
        if (extra.contains("infeasible")) err << "warning: " << extra["infeasible"].get<std::string>() << "\n";
      } else {
        std::vector<std::string> echo{"region", rkind, "--q", echo_number(rq), "--cp", cp.to_string(),
                                      "--ca", ca.to_string(), "--rmin", echo_number(rmin),
                                      "--grid", std::to_string(rpoints), "--source", rsource,
                                      "--format", "json"};
        if (battery) {
          echo.push_back("--battery");
          echo.push_back(rbattery);
        }
        if (!rgrid.empty()) {
          echo.push_back("--cp-grid");
          echo.push_back(rgrid);
        }
        json res = extra;
        res["points"] = json::array();
        for (const auto& p : points) res["points"].push_back(point_json(p));
        out << record("region", echo,
                      {{"kind", rkind}, {"q", rq}, {"c_p", budget_json(cp)}, {"c_a", budget_json(ca)},
                       {"r_min", rmin}},
                      res)
                   .dump(2)
            << "\n";
      }
      return kOk;
    }

    if (sim->parsed()) {
      SimConfig cfg;
      cfg.q = sq;
      cfg.battery = parse_battery(sbattery);
      cfg.n_slots = sn;
      cfg.seed = sseed;
      cfg.save_phase_slots = ssave;
      cfg.record_trace = !strace.empty();
      cfg.miller_madow = smm;
      if (spolicy.empty()) spolicy = cfg.battery == Battery::zero ? "zero-battery" : "zero-wait";
      std::vector<std::string> echo{"simulate", "--battery", sbattery, "--policy", spolicy,
                                    "--q", echo_number(sq)};
      if (spolicy == "zero-battery") {
        cfg.policy = ZeroBatteryPolicy{sp};
        echo.insert(echo.end(), {"--p", echo_number(sp)});
      } else if (spolicy == "zero-wait") {
        cfg.policy = ZeroWaitPolicy{sg};
        echo.insert(echo.end(), {"--g", echo_number(sg)});
      } else if (spolicy == "wat") {
        cfg.policy = WaitAndTransmitPolicy{somega, sg};
        echo.insert(echo.end(), {"--omega", std::to_string(somega), "--g", echo_number(sg)});
      } else if (spolicy == "prob-periodic") {
        require_q(sq, true);
        cfg.policy = prob_periodic_policy(sq);
      } else {
        throw UsageError("unknown policy '" + spolicy + "'");
      }
      echo.insert(echo.end(), {"--n", std::to_string(sn), "--seed", std::to_string(sseed)});
      if (ssave) echo.insert(echo.end(), {"--save-phase", std::to_string(*ssave)});
      if (smm) echo.push_back("--miller-madow");

      const SimResult r = simulate(cfg);
      if (!strace.empty()) {
        std::ofstream f(strace, std::ios::binary);
        if (!f) throw UsageError("cannot open trace file '" + strace + "'");
        csv::write_row(f, {"slot", "interval", "battery"});
        for (const auto& t : r.trace) {
          csv::write_row(f, {std::to_string(t.slot), std::to_string(t.interval), std::to_string(t.battery)});
        }
      }
      json params{{"battery", sbattery}, {"policy", policy_json(cfg.policy)}, {"q", sq},
                  {"n_slots", sn}, {"save_phase_slots", r.stats.save_phase_slots}};
      json rec = record("simulate", echo, params, sim_stats_json(r.stats));
      rec["seed"] = sseed;
      out << rec.dump(2) << "\n";
      if (r.stats.degenerate) {
        err << "warning: degenerate run (" << r.stats.update_count
            << " updates); age estimates unavailable\n";
        return kDegenerate;
      }
      return kOk;
    }
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace ageamp::cli

#endif  // AGEAMP_TOOLS_CLI_HPP
