#pragma once

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hetsim/default_scenario.hpp"
#include "hetsim/experiment.hpp"
#include "hetsim/metrics.hpp"
#include "hetsim/scenario_json.hpp"

namespace hetsim::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kDefaultScenario = "default";

struct MethodFlags {
  std::string method = "none";
  std::string duty = "1/2";
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> sinr_tar;
  double ofst_max = 80.0;
  double ofst_min = 50.0;
};

struct CommonFlags {
  std::string scenario = kDefaultScenario;
  std::optional<double> pico_bias;
  std::optional<double> duration_s;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  bool fast = false;
  std::optional<std::string> macro_duty;
  bool no_macro_absf = false;
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline EicicMethod method_from_flags(const MethodFlags& f) {
  const std::string& m = f.method;
  if (m == "none") return NoEicic{};
  if (m == "time") {
    try {
      return TimeAbsf{absf_pattern(f.duty)};
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (m == "power1") {
    if (!f.beta) throw UsageError("power1 requires --beta");
    return Power1{f.alpha.value_or(1.0), *f.beta};
  }
  if (m == "power2") return Power2{f.ofst_max, f.ofst_min};
  if (m == "power3") {
    if (!f.sinr_tar) throw UsageError("power3 requires --sinr-tar");
    return Power3{*f.sinr_tar};
  }
  if (m == "power4") {
    Power4 p;
    p.alpha = f.alpha.value_or(1.0);
    p.beta_db = f.beta;
    p.sinr_tar_mue_db = f.sinr_tar.value_or(5.0);
    return p;
  }
  throw UsageError("unknown method '" + m + "'");
}

inline std::string method_label(const EicicMethod& m) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NoEicic>) return "none";
        else if constexpr (std::is_same_v<T, TimeAbsf>)
          return "time duty=" + std::to_string(p.pattern.blanked.size()) + "/" + std::to_string(p.pattern.period);
        else if constexpr (std::is_same_v<T, Power1>) return "power1 alpha=" + num(p.alpha) + " beta=" + num(p.beta_db);
        else if constexpr (std::is_same_v<T, Power2>) return "power2 ofst=" + num(p.p_ofst_min_db) + ".." + num(p.p_ofst_max_db);
        else if constexpr (std::is_same_v<T, Power3>) return "power3 tar=" + num(p.sinr_tar_hue_db);
        else {
          std::string s = "power4 alpha=" + num(p.alpha) + " tar=" + num(p.sinr_tar_mue_db);
          if (p.beta_db) s += " beta=" + num(*p.beta_db);
          return s;
        }
      },
      m);
}

inline ScenarioConfig load_config(const CommonFlags& f) {
  ScenarioConfig cfg;
  if (f.scenario == kDefaultScenario) {
    cfg = generate_default_scenario(f.seed.value_or(42));
  } else {
    cfg = load_scenario_file(f.scenario);
    if (f.seed) cfg.sim.seed = *f.seed;
  }
  if (f.pico_bias) cfg.sim.pico_bias_db = *f.pico_bias;
  if (f.duration_s) cfg.sim.duration_s = *f.duration_s;
  if (f.macro_duty) {
    cfg.eicic.macro_absf.enabled = true;
    try {
      cfg.eicic.macro_absf.duty = parse_duty(*f.macro_duty);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (f.no_macro_absf) cfg.eicic.macro_absf.enabled = false;
  if (f.fast) cfg = fast_preset(cfg);
  validate(cfg);
  return cfg;
}

inline std::string summary_line(const MetricsReport& r) {
  std::ostringstream o;
  o << r.label << ": mue_outages=" << r.mue_outages << " pue_outages=" << r.pue_outages
    << " macro_pico_hos=" << r.macro_pico_handovers << " gain=" << fixed2(r.femto_eicic_tp_gain_mbps) << "Mbps";
  if (r.femto_eicic_tp_gain_percent) o << " (" << fixed2(*r.femto_eicic_tp_gain_percent) << "%)";
  o << " pedestrian=" << fixed2(r.pedestrian_sum_tp_kbps) << "kbps femto_tier=" << fixed2(r.femto_tier_sum_tp_mbps)
    << "Mbps actions=" << fixed2(r.eicic_actions_per_femto_per_10min);
  return o.str();
}

/// Directory-safe version of a label.
inline std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') out += c;
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

inline std::vector<MetricsReport> reports_of(const std::vector<ExperimentResult>& rs) {
  std::vector<MetricsReport> v;
  for (const ExperimentResult& r : rs) v.push_back(r.report);
  return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

/// Entry point; returns the process exit status. 0 ok, 1 runtime error, 2 usage error.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LTE-A HetNet downlink eICIC simulator"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* c, CommonFlags& f) {
    c->add_option("--scenario", f.scenario, "scenario JSON path, or 'default' to generate one");
    c->add_option("--pico-bias", f.pico_bias, "pico range expansion bias [dB]");
    c->add_option("--duration-s", f.duration_s, "simulated duration [s]");
    c->add_option("--seed", f.seed, "seed (regenerates the default scenario)");
    c->add_option("--out", f.out, "output directory");
    c->add_flag("--fast", f.fast, "60 s run with time-compressed routes");
    c->add_option("--macro-duty", f.macro_duty, "macro ABSF duty for pico protection");
    c->add_flag("--no-macro-absf", f.no_macro_absf, "disable macro ABSF");
  };
  auto add_method = [](CLI::App* c, MethodFlags& f) {
    c->add_option("--method", f.method, "none|time|power1|power2|power3|power4")
        ->check(CLI::IsMember({"none", "time", "power1", "power2", "power3", "power4"}));
    c->add_option("--duty", f.duty, "femto ABSF duty for --method time (1/8, 2/8, 3/8, 3/20, 1/2)");
    c->add_option("--alpha", f.alpha, "power1/power4 slope");
    c->add_option("--beta", f.beta, "power1/power4 offset [dB]");
    c->add_option("--sinr-tar", f.sinr_tar, "SINR target [dB]");
    c->add_option("--ofst-max", f.ofst_max, "power2 upper offset [dB]");
    c->add_option("--ofst-min", f.ofst_min, "power2 lower offset [dB]");
  };

  CommonFlags run_c, t2_c, sw_c;
  MethodFlags run_m, sw_m;
  bool run_baseline = false, sw_baseline = false;
  std::string sw_param, sw_values;
  std::string val_path;
  std::uint64_t gen_seed = 42;
  std::string gen_out = "scenarios/default_paper.json";

  CLI::App* run = app.add_subcommand("run", "run one method");
  add_common(run, run_c);
  add_method(run, run_m);
  run->add_flag("--baseline", run_baseline, "also run the paired no-eICIC baseline");

  CLI::App* t2 = app.add_subcommand("table2", "run the eight-row comparison");
  add_common(t2, t2_c);

  CLI::App* sw = app.add_subcommand("sweep", "sweep one parameter");
  add_common(sw, sw_c);
  add_method(sw, sw_m);
  sw->add_flag("--baseline", sw_baseline, "also run paired no-eICIC baselines");
  sw->add_option("--param", sw_param, "alpha|beta|sinr-tar|duty|pico-bias|seed|macro-duty")
      ->required()
      ->check(CLI::IsMember({"alpha", "beta", "sinr-tar", "duty", "pico-bias", "seed", "macro-duty"}));
  sw->add_option("--values", sw_values, "comma separated values")->required();

  CLI::App* val = app.add_subcommand("validate", "check a scenario file");
  val->add_option("--scenario,scenario", val_path, "scenario JSON path")->required();

  CLI::App* gen = app.add_subcommand("generate", "write the default scenario");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output path");

  std::vector<const char*> argv{"hetsim"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0, every other parse failure is a usage error.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const ScenarioConfig cfg = load_config(run_c);
      MethodAssignment m = MethodAssignment::from(cfg);
      m.femto = method_from_flags(run_m);
      validate_method(m.femto);
      const auto res = run_experiments(cfg, {{method_label(m.femto), m}}, run_baseline);
      emit_csv(res.front().report, res.front().run.traces, run_c.out);
      out << summary_line(res.front().report) << "\n";
    } else if (*t2) {
      const ScenarioConfig cfg = load_config(t2_c);
      const auto res = run_experiments(cfg, table2_specs(cfg), true);
      std::vector<std::pair<std::filesystem::path, std::string>> files;
      const std::filesystem::path dir = t2_c.out;
      files.emplace_back(dir / "metrics.csv", metrics_csv(reports_of(res)));
      for (const ExperimentResult& r : res)
        for (const SinrTrace& t : r.run.traces)
          files.emplace_back(dir / "traces" / slug(r.label) / ("trace_" + std::to_string(t.user_id) + ".csv"),
                             trace_csv(t));
      for (const auto& [p, _] : files) std::filesystem::create_directories(p.parent_path());
      for (const auto& [p, content] : files) write_file_atomic(p, content);
      for (const ExperimentResult& r : res) out << summary_line(r.report) << "\n";
    } else if (*sw) {
      const std::vector<std::string> values = split_list(sw_values);
      std::vector<ScenarioConfig> cfgs;
      std::vector<ExperimentSpec> specs;
      for (const std::string& v : values) {
        CommonFlags c = sw_c;
        MethodFlags mf = sw_m;
        if (sw_param == "alpha") mf.alpha = parse_double(v);
        else if (sw_param == "beta") mf.beta = parse_double(v);
        else if (sw_param == "sinr-tar") mf.sinr_tar = parse_double(v);
        else if (sw_param == "duty") mf.duty = v;
        else if (sw_param == "pico-bias") c.pico_bias = parse_double(v);
        else if (sw_param == "macro-duty") c.macro_duty = v;
        else if (sw_param == "seed") c.seed = static_cast<std::uint64_t>(parse_double(v));
        const ScenarioConfig cfg = load_config(c);
        MethodAssignment m = MethodAssignment::from(cfg);
        m.femto = method_from_flags(mf);
        validate_method(m.femto);
        cfgs.push_back(cfg);
        specs.push_back({method_label(m.femto) + " " + sw_param + "=" + v, m});
      }
      const auto res = run_variants(cfgs, specs, sw_baseline);
      emit_csv(reports_of(res), {}, sw_c.out);
      for (const ExperimentResult& r : res) out << summary_line(r.report) << "\n";
    } else if (*val) {
      const ScenarioConfig cfg = load_scenario_file(val_path);
      out << "ok: " << cfg.cells.size() << " cells, " << cfg.users.size() << " users, " << cfg.buildings.size()
          << " buildings\n";
    } else if (*gen) {
      const std::string text = save_scenario(generate_default_scenario(gen_seed));
      const std::filesystem::path p = gen_out;
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
      write_file_atomic(p, text);
      out << "wrote " << gen_out << "\n";
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hetsim::cli
