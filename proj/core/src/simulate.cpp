#include "sdfm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "sdfm/errors.hpp"
#include "sdfm/io.hpp"
#include "sdfm/rng.hpp"

namespace sdfm {

namespace {

void validate_factor_block(const std::vector<FactorProcess>& block,
                           const char* block_name, bool needs_d, bool needs_D) {
  int index = 0;
  for (const FactorProcess& factor : block) {
    ++index;
    const std::string where =
        std::string(block_name) + " factor " + std::to_string(index);
    factor.spec.validate();
    if (needs_d && factor.spec.d < 1) {
      throw SpecError(where + " needs d >= 1");
    }
    if (!needs_d && factor.spec.d != 0) {
      throw SpecError(where + " must have d = 0");
    }
    if (needs_D && factor.spec.D < 1) {
      throw SpecError(where + " needs seasonal D >= 1");
    }
    if (!needs_D && factor.spec.D != 0) {
      throw SpecError(where + " must have D = 0");
    }
    if (!(factor.params.sigma2 > 0.0)) {
      throw SpecError(where + " needs sigma2 > 0");
    }
    if (!params_feasible(factor.spec, factor.params)) {
      throw SpecError(where + " has parameters violating the root constraints");
    }
    if (!factor.seasonal_init.empty()) {
      if (!needs_D) {
        throw SpecError(where + " may not carry a seasonal_init pattern; only "
                        "the seasonal block supports one");
      }
      if (static_cast<int>(factor.seasonal_init.size()) != factor.spec.S) {
        throw SpecError(where + " seasonal_init has length " +
                        std::to_string(factor.seasonal_init.size()) +
                        ", expected S = " + std::to_string(factor.spec.S));
      }
    }
  }
}

}  // namespace

void SimScenario::validate() const {
  if (n < 1) throw SpecError("scenario needs n >= 1");
  if (T < 1) throw SpecError("scenario needs T >= 1");
  if (start_month < 1 || start_month > 12) {
    throw SpecError("start_month must be in 1..12");
  }
  if (r() < 1) throw SpecError("scenario needs at least one factor");
  if (r() > n) {
    throw SpecError("scenario has " + std::to_string(r()) + " factors but only " +
                    std::to_string(n) + " series");
  }
  if (!(missing_rate >= 0.0) || missing_rate >= 1.0) {
    throw SpecError("missing_rate must lie in [0, 1)");
  }
  if (idio_sd.size() != 1 && idio_sd.size() != n) {
    throw SpecError("idio_sd must be a scalar or have one entry per series");
  }
  for (Eigen::Index i = 0; i < idio_sd.size(); ++i) {
    if (!(idio_sd(i) >= 0.0) || !std::isfinite(idio_sd(i))) {
      throw SpecError("idio_sd entries must be finite and nonnegative");
    }
  }
  validate_factor_block(nonseasonal, "nonseasonal", true, false);
  validate_factor_block(seasonal, "seasonal", false, true);
  validate_factor_block(stationary, "stationary", false, false);
}

namespace {

std::string station_id(int index, int n) {
  std::size_t width = 2;
  for (int value = n; value >= 100; value /= 10) ++width;
  std::string digits = std::to_string(index);
  if (digits.size() < width) {
    digits.insert(0, width - digits.size(), '0');
  }
  return "s" + digits;
}

Eigen::MatrixXd draw_loadings(int n, int r, LoadingStyle style, Rng& rng) {
  Eigen::MatrixXd raw(n, r);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) raw(i, j) = rng.normal();
  }
  if (style == LoadingStyle::GaussianRaw) return raw;

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  const Eigen::MatrixXd r_factor =
      qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (int j = 0; j < r; ++j) {
    if (r_factor(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

SimOutput gen_scenario(const SimScenario& scenario) {
  scenario.validate();
  const int n = scenario.n;
  const int T = scenario.T;
  const int r = scenario.r();

  SimOutput out;

  Rng loading_rng(derive_seed(scenario.seed, 0));
  out.true_loadings = draw_loadings(n, r, scenario.loading_style, loading_rng);

  std::vector<const FactorProcess*> processes;
  processes.reserve(static_cast<std::size_t>(r));
  for (const FactorProcess& f : scenario.nonseasonal) processes.push_back(&f);
  for (const FactorProcess& f : scenario.seasonal) processes.push_back(&f);
  for (const FactorProcess& f : scenario.stationary) processes.push_back(&f);

  out.true_factors.resize(r, T);
  for (int j = 0; j < r; ++j) {
    const FactorProcess& process = *processes[static_cast<std::size_t>(j)];
    const std::vector<double> path =
        simulate_sarima(process.spec, process.params, T,
                        derive_seed(scenario.seed, 1 + static_cast<std::uint64_t>(j)),
                        scenario.burn_in);
    for (int t = 0; t < T; ++t) {
      double value = path[static_cast<std::size_t>(t)];
      if (!process.seasonal_init.empty()) {
        value += process.seasonal_init[static_cast<std::size_t>(t % process.spec.S)];
      }
      out.true_factors(j, t) = value;
    }
  }

  out.true_common = out.true_loadings * out.true_factors;

  Eigen::VectorXd sds(n);
  if (scenario.idio_sd.size() == 1) {
    sds.setConstant(scenario.idio_sd(0));
  } else {
    sds = scenario.idio_sd;
  }
  Rng idio_rng(derive_seed(scenario.seed, static_cast<std::uint64_t>(r) + 1));
  Eigen::MatrixXd noise(n, T);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) noise(i, t) = sds(i) * idio_rng.normal();
  }

  Panel full;
  full.time = TimeIndex{scenario.start_year, scenario.start_month, T};
  full.stations.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) full.stations.push_back({station_id(i, n), "", {}, {}});
  full.values = out.true_common + noise;
  full.missing = MissingMask::Constant(n, T, false);
  full.validate();

  out.panel = full;
  if (scenario.missing_rate > 0.0) {
    Rng hole_rng(derive_seed(scenario.seed, static_cast<std::uint64_t>(r) + 2));
    for (int t = 1; t < T; ++t) {
      for (int i = 0; i < n; ++i) {
        if (hole_rng.uniform() < scenario.missing_rate) {
          out.panel.values(i, t) = std::numeric_limits<double>::quiet_NaN();
          out.panel.missing(i, t) = true;
        }
      }
    }
  }
  out.full_panel = std::move(full);
  return out;
}

double principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("principal_angle needs matrices of identical shape");
  }
  const Eigen::Index k = a.cols();
  if (k < 1 || k > a.rows()) {
    throw ShapeError("principal_angle needs 1 <= k <= n columns");
  }
  constexpr double kOrthoTol = 1e-8;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  if ((a.transpose() * a - eye).cwiseAbs().maxCoeff() > kOrthoTol ||
      (b.transpose() * b - eye).cwiseAbs().maxCoeff() > kOrthoTol) {
    throw NumericalError("principal_angle inputs must have orthonormal columns");
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
  const double smallest = svd.singularValues()(k - 1);
  const double cosine = std::clamp(smallest, 0.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

FactorProcess parse_factor(const json& j, const std::string& where) {
  FactorProcess factor;
  const auto order = j.value("order", std::vector<int>{0, 0, 0});
  if (order.size() != 3) {
    throw SpecError(where + ": order must be [p, d, q]");
  }
  factor.spec.p = order[0];
  factor.spec.d = order[1];
  factor.spec.q = order[2];
  const auto seasonal = j.value("seasonal_order", std::vector<int>{0, 0, 0, 12});
  if (seasonal.size() != 4) {
    throw SpecError(where + ": seasonal_order must be [P, D, Q, S]");
  }
  factor.spec.P = seasonal[0];
  factor.spec.D = seasonal[1];
  factor.spec.Q = seasonal[2];
  factor.spec.S = seasonal[3];
  factor.params.ar = j.value("ar", std::vector<double>{});
  factor.params.ma = j.value("ma", std::vector<double>{});
  factor.params.sar = j.value("sar", std::vector<double>{});
  factor.params.sma = j.value("sma", std::vector<double>{});
  factor.params.sigma2 = j.value("sigma2", 1.0);
  factor.seasonal_init = j.value("seasonal_init", std::vector<double>{});
  return factor;
}

ordered_json factor_to_json(const FactorProcess& factor) {
  ordered_json j;
  j["order"] = {factor.spec.p, factor.spec.d, factor.spec.q};
  j["seasonal_order"] = {factor.spec.P, factor.spec.D, factor.spec.Q, factor.spec.S};
  j["ar"] = factor.params.ar;
  j["ma"] = factor.params.ma;
  j["sar"] = factor.params.sar;
  j["sma"] = factor.params.sma;
  j["sigma2"] = factor.params.sigma2;
  if (!factor.seasonal_init.empty()) j["seasonal_init"] = factor.seasonal_init;
  return j;
}

}  // namespace

SimScenario parse_scenario(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    SimScenario scenario;
    scenario.n = j.at("n").get<int>();
    scenario.T = j.at("T").get<int>();
    scenario.start_year = j.value("start_year", 2008);
    scenario.start_month = j.value("start_month", 1);
    const std::string style = j.value("loading_style", std::string("orthonormal"));
    if (style == "orthonormal") {
      scenario.loading_style = LoadingStyle::Orthonormal;
    } else if (style == "gaussian_raw") {
      scenario.loading_style = LoadingStyle::GaussianRaw;
    } else {
      throw SpecError("unknown loading_style '" + style +
                      "' (expected orthonormal or gaussian_raw)");
    }
    if (j.contains("idio_sd") && j.at("idio_sd").is_array()) {
      const auto sds = j.at("idio_sd").get<std::vector<double>>();
      scenario.idio_sd = Eigen::Map<const Eigen::VectorXd>(
          sds.data(), static_cast<Eigen::Index>(sds.size()));
    } else {
      scenario.idio_sd = Eigen::VectorXd::Constant(1, j.value("idio_sd", 1.0));
    }
    scenario.missing_rate = j.value("missing_rate", 0.0);
    scenario.seed = j.value("seed", std::uint64_t{0});
    scenario.burn_in = j.value("burn_in", 120);
    if (j.contains("factors")) {
      const json& blocks = j.at("factors");
      const auto parse_block = [&](const char* name,
                                   std::vector<FactorProcess>& into) {
        if (!blocks.contains(name)) return;
        int index = 0;
        for (const json& item : blocks.at(name)) {
          ++index;
          into.push_back(parse_factor(
              item, std::string(name) + " factor " + std::to_string(index)));
        }
      };
      parse_block("nonseasonal", scenario.nonseasonal);
      parse_block("seasonal", scenario.seasonal);
      parse_block("stationary", scenario.stationary);
    }
    scenario.validate();
    return scenario;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
}

SimScenario load_scenario(const std::filesystem::path& path) {
  try {
    return parse_scenario(read_file(path));
  } catch (Error& e) {
    e.add_context("scenario file " + path.string());
    throw;
  }
}

std::string scenario_to_json(const SimScenario& scenario) {
  ordered_json j;
  j["n"] = scenario.n;
  j["T"] = scenario.T;
  j["start_year"] = scenario.start_year;
  j["start_month"] = scenario.start_month;
  j["loading_style"] = scenario.loading_style == LoadingStyle::Orthonormal
                           ? "orthonormal"
                           : "gaussian_raw";
  if (scenario.idio_sd.size() == 1) {
    j["idio_sd"] = scenario.idio_sd(0);
  } else {
    j["idio_sd"] = std::vector<double>(
        scenario.idio_sd.data(), scenario.idio_sd.data() + scenario.idio_sd.size());
  }
  j["missing_rate"] = scenario.missing_rate;
  j["seed"] = scenario.seed;
  j["burn_in"] = scenario.burn_in;
  ordered_json blocks;
  const auto block_to_json = [](const std::vector<FactorProcess>& block) {
    ordered_json arr = ordered_json::array();
    for (const FactorProcess& factor : block) arr.push_back(factor_to_json(factor));
    return arr;
  };
  blocks["nonseasonal"] = block_to_json(scenario.nonseasonal);
  blocks["seasonal"] = block_to_json(scenario.seasonal);
  blocks["stationary"] = block_to_json(scenario.stationary);
  j["factors"] = blocks;
  return j.dump(2) + "\n";
}

namespace {

void write_truth_loadings(const SimOutput& out, const std::filesystem::path& path) {
  const int n = static_cast<int>(out.true_loadings.rows());
  const int r = static_cast<int>(out.true_loadings.cols());
  std::string body = "station";
  for (int j = 1; j <= r; ++j) body += ",factor_" + std::to_string(j);
  body += "\n";
  for (int i = 0; i < n; ++i) {
    body += out.panel.stations[static_cast<std::size_t>(i)].id;
    for (int j = 0; j < r; ++j) body += "," + format_double(out.true_loadings(i, j));
    body += "\n";
  }
  atomic_write(path, body);
}

void write_truth_factors(const SimOutput& out, const std::filesystem::path& path) {
  const int r = static_cast<int>(out.true_factors.rows());
  const int T = static_cast<int>(out.true_factors.cols());
  std::string body = "date";
  for (int j = 1; j <= r; ++j) body += ",factor_" + std::to_string(j);
  body += "\n";
  for (int t = 1; t <= T; ++t) {
    body += out.panel.time.label(t);
    for (int j = 0; j < r; ++j) body += "," + format_double(out.true_factors(j, t - 1));
    body += "\n";
  }
  atomic_write(path, body);
}

void write_truth_common(const SimOutput& out, const std::filesystem::path& path) {
  std::string body = "date";
  for (const auto& station : out.panel.stations) body += "," + station.id;
  body += "\n";
  for (int t = 1; t <= out.panel.T(); ++t) {
    body += out.panel.time.label(t);
    for (int i = 0; i < out.panel.n(); ++i) {
      body += "," + format_double(out.true_common(i, t - 1));
    }
    body += "\n";
  }
  atomic_write(path, body);
}

}  // namespace

void save_sim_output(const SimOutput& out, const std::filesystem::path& dir) {
  write_csv(out.panel, dir / "panel.csv");
  if (out.panel.any_missing()) {
    write_csv(out.full_panel, dir / "full_panel.csv");
  }
  write_truth_loadings(out, dir / "truth" / "loadings.csv");
  write_truth_factors(out, dir / "truth" / "factors.csv");
  write_truth_common(out, dir / "truth" / "common.csv");
}

}  // namespace sdfm
