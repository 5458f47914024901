#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sdfm/dfm.hpp"
#include "sdfm/errors.hpp"
#include "sdfm/impute.hpp"
#include "sdfm/io.hpp"
#include "sdfm/panel.hpp"
#include "sdfm/sarima.hpp"
#include "sdfm/sgcv.hpp"
#include "sdfm/simulate.hpp"
#include "sdfm/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Rethrows any library error with the pipeline stage prepended, so a failure
// deep inside a fit reads like "fit stage: station 's03', t=61: ...".
template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (sdfm::Error& e) {
    e.add_context(std::string(name) + " stage");
    throw;
  }
}

// Run manifest: resolved analytic flags plus an input fingerprint. The output
// directory is deliberately left out so reruns into different directories
// stay byte-identical.
void write_pipeline(const fs::path& out_dir, const std::string& command,
                    const ordered_json& flags, const fs::path& input,
                    const std::vector<std::string>& outputs) {
  ordered_json j;
  j["command"] = command;
  j["flags"] = flags;
  j["input"] = {{"path", input.string()},
                {"hash", sdfm::to_hex(sdfm::fnv1a64(sdfm::read_file(input)))}};
  j["outputs"] = outputs;
  sdfm::atomic_write(out_dir / "pipeline.json", j.dump(2) + "\n");
}

std::string format_share(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

sdfm::EigenMode parse_mode(const std::string& mode) {
  return mode == "general" ? sdfm::EigenMode::General
                           : sdfm::EigenMode::Symmetrize;
}

std::string describe_spec(const sdfm::SarimaSpec& s) {
  return "(" + std::to_string(s.p) + "," + std::to_string(s.d) + "," +
         std::to_string(s.q) + ")(" + std::to_string(s.P) + "," +
         std::to_string(s.D) + "," + std::to_string(s.Q) + ")_" +
         std::to_string(s.S);
}

// Paper orders: the first factor gets (2,0,0)(0,1,1)_S, the remaining
// nonstationary factors (1,0,0)(0,1,1)_S, stationary factors (1,0,0).
sdfm::SarimaSpec default_sarima_spec(int factor_index, const sdfm::FactorSpec& spec) {
  sdfm::SarimaSpec s;
  s.S = spec.S;
  if (factor_index <= spec.r_ns()) {
    s.p = factor_index == 1 ? 2 : 1;
    s.D = 1;
    s.Q = 1;
  } else {
    s.p = 1;
  }
  return s;
}

// "--sarima-order k:p,d,q,P,D,Q" override, k being the 1-based factor index.
void apply_sarima_overrides(const std::vector<std::string>& overrides,
                            std::vector<sdfm::SarimaSpec>& specs) {
  for (const std::string& text : overrides) {
    const auto colon = text.find(':');
    int numbers[7] = {0, 0, 0, 0, 0, 0, 0};
    int parsed = 0;
    if (colon != std::string::npos) {
      std::string rest = text;
      rest[colon] = ',';
      const char* cursor = rest.c_str();
      char* end = nullptr;
      for (; parsed < 7; ++parsed) {
        numbers[parsed] = static_cast<int>(std::strtol(cursor, &end, 10));
        if (end == cursor) break;
        cursor = end;
        if (*cursor == ',') ++cursor;
        else { ++parsed; break; }
      }
    }
    if (parsed != 7) {
      throw sdfm::SpecError("malformed --sarima-order '" + text +
                            "', expected k:p,d,q,P,D,Q");
    }
    const int k = numbers[0];
    if (k < 1 || k > static_cast<int>(specs.size())) {
      throw sdfm::SpecError("--sarima-order index " + std::to_string(k) +
                            " is outside 1.." + std::to_string(specs.size()));
    }
    sdfm::SarimaSpec& s = specs[static_cast<std::size_t>(k - 1)];
    s.p = numbers[1];
    s.d = numbers[2];
    s.q = numbers[3];
    s.P = numbers[4];
    s.D = numbers[5];
    s.Q = numbers[6];
    s.validate();
  }
}

std::vector<double> row_to_vector(const Eigen::MatrixXd& m, int row) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index t = 0; t < m.cols(); ++t) {
    out[static_cast<std::size_t>(t)] = m(row, t);
  }
  return out;
}

void write_factor_svg(const std::vector<double>& series, int factor_index,
                      const fs::path& path) {
  sdfm::SvgSeries line;
  line.label = "factor " + std::to_string(factor_index);
  line.stroke_width = 1.4;
  for (std::size_t t = 0; t < series.size(); ++t) {
    line.x.push_back(static_cast<double>(t + 1));
    line.y.push_back(series[t]);
  }
  sdfm::LineChart chart("Factor " + std::to_string(factor_index), "t", "value");
  chart.add(std::move(line));
  chart.write(path);
}

struct ImputeArgs {
  std::string input;
  std::string out;
  sdfm::ImputeConfig cfg;
};

void run_impute(const ImputeArgs& args) {
  const sdfm::Panel panel = stage("load", [&] { return sdfm::load_csv(args.input); });
  const auto [imputed, report] =
      stage("impute", [&] { return sdfm::impute_panel(panel, args.cfg); });
  const fs::path out(args.out);
  sdfm::write_csv(imputed, out / "imputed.csv");
  sdfm::write_report_csv(report, out / "impute_report.csv");
  sdfm::write_report_json(report, out / "impute_report.json");
  write_pipeline(out, "impute",
                 {{"season", args.cfg.season},
                  {"backward_cutoff", args.cfg.backward_cutoff},
                  {"horizon", args.cfg.horizon}},
                 args.input,
                 {"imputed.csv", "impute_report.csv", "impute_report.json"});
  std::cout << "imputed " << report.entries.size() << " cells\n";
}

struct EigensArgs {
  std::string input;
  std::string out;
  int season = 12;
  int d = 1;
  int max_lag = 36;
  int top_k = 5;
  std::string mode = "symmetrize";
  bool raw = false;
};

void run_eigens(const EigensArgs& args) {
  const sdfm::Panel panel = stage("load", [&] { return sdfm::load_csv(args.input); });
  const sdfm::Panel prepared =
      args.raw ? panel
               : stage("standardize", [&] { return sdfm::standardize(panel).first; });
  const sdfm::EigenSequence seq = stage("eigens", [&] {
    return sdfm::eigen_sequence(prepared, args.max_lag, args.top_k, args.d,
                                args.season, parse_mode(args.mode));
  });
  const fs::path out(args.out);
  sdfm::write_eigens_csv(seq, out / "eigens.csv");
  sdfm::write_eigens_svg(seq, out / "eigens.svg");
  write_pipeline(out, "eigens",
                 {{"season", args.season},
                  {"d", args.d},
                  {"max_lag", args.max_lag},
                  {"top_k", args.top_k},
                  {"mode", args.mode},
                  {"raw", args.raw}},
                 args.input, {"eigens.csv", "eigens.svg"});
}

struct FitArgs {
  std::string input;
  std::string out;
  int season = 12;
  int d = 1;
  int pca_lag = 12;
  int r1 = 0;
  int r2 = 2;
  int r3 = 0;
  int backward_cutoff = 25;
  int horizon = 5;
  std::vector<std::string> sarima_orders;
  std::vector<std::string> station_svgs;
};

struct FitResult {
  sdfm::Panel observed;
  sdfm::Panel standardized;
  sdfm::StandardizationParams params;
  sdfm::DfmFit fit;
  std::vector<std::string> outputs;
};

// Shared front half of `fit` and `residual-eigens`: load, impute when holes
// exist, standardize, estimate the DFM. When `out` is nonempty the imputation
// artifacts are written there.
FitResult run_dfm_pipeline(const std::string& input, const FitArgs& args,
                           const fs::path& out, bool write_impute_files) {
  FitResult result;
  result.observed = stage("load", [&] { return sdfm::load_csv(input); });

  sdfm::Panel filled = result.observed;
  if (result.observed.any_missing()) {
    sdfm::ImputeConfig cfg;
    cfg.season = args.season;
    cfg.backward_cutoff = args.backward_cutoff;
    cfg.horizon = args.horizon;
    auto [imputed, report] =
        stage("impute", [&] { return sdfm::impute_panel(filled, cfg); });
    filled = std::move(imputed);
    if (write_impute_files) {
      sdfm::write_csv(filled, out / "imputed.csv");
      sdfm::write_report_csv(report, out / "impute_report.csv");
      result.outputs.push_back("imputed.csv");
      result.outputs.push_back("impute_report.csv");
    }
  }

  auto standardized =
      stage("standardize", [&] { return sdfm::standardize(filled); });
  result.standardized = std::move(standardized.first);
  result.params = std::move(standardized.second);

  sdfm::FactorSpec spec;
  spec.r1 = args.r1;
  spec.r2 = args.r2;
  spec.r3 = args.r3;
  spec.h = args.pca_lag;
  spec.d = args.d;
  spec.S = args.season;
  result.fit =
      stage("fit", [&] { return sdfm::fit(result.standardized, spec); });
  return result;
}

ordered_json fit_flags_json(const FitArgs& args) {
  return {{"season", args.season},
          {"d", args.d},
          {"pca_lag", args.pca_lag},
          {"r1", args.r1},
          {"r2", args.r2},
          {"r3", args.r3},
          {"backward_cutoff", args.backward_cutoff},
          {"horizon", args.horizon}};
}

void run_fit(const FitArgs& args) {
  const fs::path out(args.out);
  FitResult result = run_dfm_pipeline(args.input, args, out, true);
  const sdfm::DfmFit& fit = result.fit;
  const int r = fit.spec.r();

  sdfm::save_fit(fit, result.standardized, out);
  for (const char* name :
       {"loadings.csv", "factors.csv", "common.csv", "residuals.csv", "fit.json"}) {
    result.outputs.push_back(name);
  }

  std::vector<sdfm::SarimaSpec> sarima_specs;
  for (int j = 1; j <= r; ++j) {
    sarima_specs.push_back(default_sarima_spec(j, fit.spec));
  }
  apply_sarima_overrides(args.sarima_orders, sarima_specs);

  ordered_json flags = fit_flags_json(args);
  flags["sarima_orders"] = ordered_json::array();
  for (const sdfm::SarimaSpec& s : sarima_specs) {
    flags["sarima_orders"].push_back(describe_spec(s));
  }

  for (int j = 1; j <= r; ++j) {
    const std::vector<double> series = row_to_vector(fit.factors, j - 1);
    const std::string tag = "factor_" + std::to_string(j);

    const sdfm::SarimaFit sfit = stage("sarima", [&] {
      return sdfm::fit_sarima(series, sarima_specs[static_cast<std::size_t>(j - 1)]);
    });
    sdfm::write_sarima_json(sfit, out / ("sarima_" + tag + ".json"));
    write_factor_svg(series, j, out / (tag + ".svg"));

    const sdfm::MonthlyPattern pattern = stage("pattern", [&] {
      return sdfm::monthly_pattern(series, result.standardized.time);
    });
    sdfm::write_pattern_csv(pattern, out / ("pattern_" + tag + ".csv"));
    sdfm::write_pattern_means_csv(pattern, out / ("pattern_" + tag + "_means.csv"));
    sdfm::write_pattern_svg(pattern, out / ("pattern_" + tag + ".svg"));

    for (const std::string& name :
         {"sarima_" + tag + ".json", tag + ".svg", "pattern_" + tag + ".csv",
          "pattern_" + tag + "_means.csv", "pattern_" + tag + ".svg"}) {
      result.outputs.push_back(name);
    }
  }

  for (const std::string& id : args.station_svgs) {
    int index = -1;
    for (int i = 0; i < result.observed.n(); ++i) {
      if (result.observed.stations[static_cast<std::size_t>(i)].id == id) {
        index = i;
        break;
      }
    }
    if (index < 0) {
      throw sdfm::SpecError("--station-svg names unknown station '" + id + "'");
    }
    // Fig. 6/7 top-panel layout: standardized series in grey, its estimated
    // common component in red.
    sdfm::SvgSeries observed;
    observed.label = "observed";
    observed.color = "#9aa3a8";
    observed.stroke_width = 1.2;
    sdfm::SvgSeries common;
    common.label = "common";
    common.color = "#d62728";
    common.stroke_width = 1.8;
    for (int t = 0; t < result.standardized.T(); ++t) {
      observed.x.push_back(t + 1);
      observed.y.push_back(result.standardized.values(index, t));
      common.x.push_back(t + 1);
      common.y.push_back(fit.common(index, t));
    }
    sdfm::LineChart chart("Station " + id, "t", "value");
    chart.add(std::move(observed));
    chart.add(std::move(common));
    const std::string name = "station_" + id + ".svg";
    chart.write(out / name);
    result.outputs.push_back(name);
  }

  write_pipeline(out, "fit", flags, args.input, result.outputs);
  std::cout << "explained " << format_share(fit.explained.back()) << " with "
            << r << " factors\n";
}

struct ResidualEigensArgs {
  FitArgs fit;
  int max_lag = 36;
  int top_k = 5;
  std::string mode = "symmetrize";
};

void run_residual_eigens(const ResidualEigensArgs& args) {
  const fs::path out(args.fit.out);
  FitResult result = run_dfm_pipeline(args.fit.input, args.fit, out, false);
  const sdfm::EigenSequence seq = stage("residual eigens", [&] {
    return sdfm::refit_residual_diagnostic(result.fit, args.max_lag, args.top_k,
                                           parse_mode(args.mode));
  });
  sdfm::write_eigens_csv(seq, out / "residual_eigens.csv");
  sdfm::write_eigens_svg(seq, out / "residual_eigens.svg");
  ordered_json flags = fit_flags_json(args.fit);
  flags["max_lag"] = args.max_lag;
  flags["top_k"] = args.top_k;
  flags["mode"] = args.mode;
  write_pipeline(out, "residual-eigens", flags, args.fit.input,
                 {"residual_eigens.csv", "residual_eigens.svg"});
}

struct PatternArgs {
  std::string input;
  std::string out;
  std::string station;
};

void run_pattern(const PatternArgs& args) {
  const sdfm::Panel panel = stage("load", [&] { return sdfm::load_csv(args.input); });
  int index = 0;
  if (!args.station.empty()) {
    index = -1;
    for (int i = 0; i < panel.n(); ++i) {
      if (panel.stations[static_cast<std::size_t>(i)].id == args.station) {
        index = i;
        break;
      }
    }
    if (index < 0) {
      throw sdfm::SpecError("--station names unknown station '" + args.station + "'");
    }
  }
  if (panel.missing.row(index).any()) {
    throw sdfm::MissingDataError("station '" +
                                 panel.stations[static_cast<std::size_t>(index)].id +
                                 "' has missing values; run impute first");
  }
  const std::vector<double> series = row_to_vector(panel.values, index);
  const sdfm::MonthlyPattern pattern = stage(
      "pattern", [&] { return sdfm::monthly_pattern(series, panel.time); });
  const fs::path out(args.out);
  sdfm::write_pattern_csv(pattern, out / "pattern.csv");
  sdfm::write_pattern_means_csv(pattern, out / "pattern_means.csv");
  sdfm::write_pattern_svg(pattern, out / "pattern.svg");
  write_pipeline(out, "pattern",
                 {{"station", panel.stations[static_cast<std::size_t>(index)].id}},
                 args.input, {"pattern.csv", "pattern_means.csv", "pattern.svg"});
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void run_simulate(const SimulateArgs& args) {
  sdfm::SimScenario scenario =
      stage("config", [&] { return sdfm::load_scenario(args.config); });
  if (args.seed_given) scenario.seed = args.seed;
  const sdfm::SimOutput sim =
      stage("simulate", [&] { return sdfm::gen_scenario(scenario); });
  const fs::path out(args.out);
  sdfm::save_sim_output(sim, out);
  sdfm::atomic_write(out / "scenario.json", sdfm::scenario_to_json(scenario));
  std::vector<std::string> outputs = {"panel.csv", "scenario.json",
                                      "truth/loadings.csv", "truth/factors.csv",
                                      "truth/common.csv"};
  if (sim.panel.any_missing()) {
    outputs.insert(outputs.begin() + 1, "full_panel.csv");
  }
  write_pipeline(out, "simulate", {{"seed", scenario.seed}}, args.config, outputs);
  std::cout << "seed " << scenario.seed << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonal dynamic factor model toolkit"};
  app.require_subcommand(1);

  auto impute_args = std::make_shared<ImputeArgs>();
  CLI::App* impute = app.add_subcommand(
      "impute", "Fill missing cells by the sequential two-estimate scheme");
  impute->add_option("input", impute_args->input, "Panel CSV")->required();
  impute->add_option("--out", impute_args->out, "Output directory")->required();
  impute->add_option("--season", impute_args->cfg.season, "Season length")
      ->capture_default_str();
  impute
      ->add_option("--backward-cutoff", impute_args->cfg.backward_cutoff,
                   "Largest t handled by the backward estimator")
      ->capture_default_str();
  impute
      ->add_option("--horizon", impute_args->cfg.horizon,
                   "Maximum years averaged per estimate")
      ->capture_default_str();
  impute->callback([impute_args] { run_impute(*impute_args); });

  auto eigens_args = std::make_shared<EigensArgs>();
  CLI::App* eigens = app.add_subcommand(
      "eigens", "Eigenvalue magnitudes of C(h) over a lag sweep");
  eigens->add_option("input", eigens_args->input, "Panel CSV")->required();
  eigens->add_option("--out", eigens_args->out, "Output directory")->required();
  eigens->add_option("--season", eigens_args->season, "Season length")
      ->capture_default_str();
  eigens->add_option("--d", eigens_args->d, "Differencing order in the scale factor")
      ->capture_default_str();
  eigens->add_option("--max-lag", eigens_args->max_lag, "Largest lag H")
      ->capture_default_str();
  eigens->add_option("--top-k", eigens_args->top_k, "Eigenvalues kept per lag")
      ->capture_default_str();
  eigens->add_option("--mode", eigens_args->mode, "symmetrize or general")
      ->capture_default_str()
      ->check(CLI::IsMember({"symmetrize", "general"}));
  eigens->add_flag("--raw", eigens_args->raw,
                   "Skip standardization and analyze the panel as-is");
  eigens->callback([eigens_args] { run_eigens(*eigens_args); });

  const auto add_fit_options = [](CLI::App* cmd, FitArgs& args) {
    cmd->add_option("input", args.input, "Panel CSV")->required();
    cmd->add_option("--out", args.out, "Output directory")->required();
    cmd->add_option("--season", args.season, "Season length")->capture_default_str();
    cmd->add_option("--d", args.d, "Differencing order in the scale factor")
        ->capture_default_str();
    cmd->add_option("--pca-lag", args.pca_lag, "Lag h of the PCA autocovariance")
        ->capture_default_str();
    cmd->add_option("--r1", args.r1, "Nonstationary nonseasonal factors")
        ->capture_default_str();
    cmd->add_option("--r2", args.r2, "Nonstationary seasonal factors")
        ->capture_default_str();
    cmd->add_option("--r3", args.r3, "Stationary factors")->capture_default_str();
    cmd->add_option("--backward-cutoff", args.backward_cutoff,
                    "Imputation regime boundary")
        ->capture_default_str();
    cmd->add_option("--horizon", args.horizon, "Imputation averaging horizon")
        ->capture_default_str();
  };

  auto fit_args = std::make_shared<FitArgs>();
  CLI::App* fit = app.add_subcommand(
      "fit", "Impute, standardize, fit the DFM, and model factors by SARIMA");
  add_fit_options(fit, *fit_args);
  fit->add_option("--sarima-order", fit_args->sarima_orders,
                  "Override per-factor orders as k:p,d,q,P,D,Q (repeatable)");
  fit->add_option("--station-svg", fit_args->station_svgs,
                  "Station ids for observed-vs-common charts (repeatable)");
  fit->callback([fit_args] { run_fit(*fit_args); });

  auto residual_args = std::make_shared<ResidualEigensArgs>();
  CLI::App* residual = app.add_subcommand(
      "residual-eigens", "Eigen diagnostic on the residuals of a DFM fit");
  add_fit_options(residual, residual_args->fit);
  residual->add_option("--max-lag", residual_args->max_lag, "Largest lag H")
      ->capture_default_str();
  residual->add_option("--top-k", residual_args->top_k, "Eigenvalues kept per lag")
      ->capture_default_str();
  residual->add_option("--mode", residual_args->mode, "symmetrize or general")
      ->capture_default_str()
      ->check(CLI::IsMember({"symmetrize", "general"}));
  residual->callback([residual_args] { run_residual_eigens(*residual_args); });

  auto pattern_args = std::make_shared<PatternArgs>();
  CLI::App* pattern = app.add_subcommand(
      "pattern", "Calendar-month pattern of one station's series");
  pattern->add_option("input", pattern_args->input, "Panel CSV")->required();
  pattern->add_option("--out", pattern_args->out, "Output directory")->required();
  pattern->add_option("--station", pattern_args->station,
                      "Station id (default: first column)");
  pattern->callback([pattern_args] { run_pattern(*pattern_args); });

  auto simulate_args = std::make_shared<SimulateArgs>();
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic panel from a scenario JSON");
  simulate->add_option("config", simulate_args->config, "Scenario JSON")->required();
  simulate->add_option("--out", simulate_args->out, "Output directory")->required();
  CLI::Option* seed_opt =
      simulate->add_option("--seed", simulate_args->seed, "Override the config seed");
  simulate->callback([simulate_args, seed_opt] {
    simulate_args->seed_given = seed_opt->count() > 0;
    run_simulate(*simulate_args);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const sdfm::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sdfm::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const sdfm::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
