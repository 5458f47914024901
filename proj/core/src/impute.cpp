#include "sdfm/impute.hpp"

#include <nlohmann/json.hpp>

#include "sdfm/errors.hpp"
#include "sdfm/io.hpp"

namespace sdfm {

namespace {

void check_config(const ImputeConfig& cfg) {
  if (cfg.season < 2) throw SpecError("season must be >= 2");
  if (cfg.horizon < 1) throw SpecError("horizon must be >= 1");
  if (cfg.backward_cutoff < 1) throw SpecError("backward_cutoff must be >= 1");
}

}  // namespace

const char* to_string(ImputeMethod method) {
  return method == ImputeMethod::Forward ? "forward" : "backward";
}

ImputeEstimate estimate_forward(const Eigen::VectorXd& x, const BoolVec& missing,
                                int t, const ImputeConfig& cfg) {
  check_config(cfg);
  const int T = static_cast<int>(x.size());
  if (missing.size() != x.size()) {
    throw ShapeError("mask length does not match series length");
  }
  if (t <= cfg.backward_cutoff || t > T) {
    throw SpecError("forward estimate requires backward_cutoff < t <= T, got t=" +
                    std::to_string(t));
  }
  const int y1 = count_y1(t, cfg);
  const int y2 = count_y2(t, cfg);
  if (y1 <= 0 || y2 <= 0) {
    throw InsufficientHistory("no full past year available at t=" +
                              std::to_string(t));
  }

  const auto need = [&](int idx) -> double {
    if (missing(idx - 1)) {
      throw SequentialOrderViolation(
          "referenced value at t=" + std::to_string(idx) +
          " is still missing; holes must be imputed in increasing t");
    }
    return x(idx - 1);
  };

  ImputeEstimate est;
  double sum1 = 0.0;
  for (int i = 1; i <= y1; ++i) sum1 += need(t - cfg.season * i);
  est.x_hat_1 = sum1 / y1;
  est.count_1 = y1;

  double sum2 = 0.0;
  for (int i = 1; i <= y2; ++i) {
    sum2 += need(t - cfg.season * i) - need(t - cfg.season * i - 1);
  }
  est.x_hat_2 = need(t - 1) + sum2 / y2;
  est.count_2 = y2;
  return est;
}

ImputeEstimate estimate_backward(const Eigen::VectorXd& x,
                                 const BoolVec& missing_now,
                                 const BoolVec& missing_original, int t,
                                 const ImputeConfig& cfg) {
  check_config(cfg);
  const int T = static_cast<int>(x.size());
  if (missing_now.size() != x.size() || missing_original.size() != x.size()) {
    throw ShapeError("mask length does not match series length");
  }
  if (t == 1) {
    throw FirstObservationMissing(
        "x_1 is missing and the backward estimate needs x_{t-1}");
  }
  if (t < 2 || t > cfg.backward_cutoff || t > T) {
    throw SpecError("backward estimate requires 2 <= t <= backward_cutoff, got t=" +
                    std::to_string(t));
  }
  if (missing_now(t - 2)) {
    throw SequentialOrderViolation(
        "x_{t-1} at t=" + std::to_string(t) +
        " is still missing; holes must be imputed in increasing t");
  }

  // Indices past the end of the series count as missing in the x*/d* rule.
  const auto present = [&](int idx) {
    return idx <= T && !missing_original(idx - 1);
  };

  ImputeEstimate est;
  double sum1 = 0.0;
  for (int i = 1; i <= cfg.horizon; ++i) {
    const int idx = t + cfg.season * i;
    if (present(idx)) {
      sum1 += x(idx - 1);
      ++est.count_1;
    }
  }
  double sum2 = 0.0;
  for (int i = 1; i <= cfg.horizon; ++i) {
    const int idx = t + cfg.season * i;
    if (present(idx) && present(idx - 1)) {
      sum2 += x(idx - 1) - x(idx - 2);
      ++est.count_2;
    }
  }
  if (est.count_1 == 0 || est.count_2 == 0) {
    throw InsufficientFuture("no usable future terms at t=" + std::to_string(t) +
                             " (Z1=" + std::to_string(est.count_1) +
                             ", Z2=" + std::to_string(est.count_2) + ")");
  }
  est.x_hat_1 = sum1 / est.count_1;
  est.x_hat_2 = x(t - 2) + sum2 / est.count_2;
  return est;
}

std::pair<Panel, ImputationReport> impute_panel(const Panel& panel,
                                                const ImputeConfig& cfg) {
  check_config(cfg);
  panel.validate();
  Panel out = panel;
  ImputationReport report;

  for (int i = 0; i < panel.n(); ++i) {
    if (panel.missing(i, 0)) {
      throw FirstObservationMissing("station '" + panel.stations[i].id +
                                    "': the first observation is missing");
    }
  }

  for (int i = 0; i < panel.n(); ++i) {
    Eigen::VectorXd x = panel.values.row(i).transpose();
    BoolVec now = panel.missing.row(i).transpose();
    const BoolVec original = now;
    for (int t = 1; t <= panel.T(); ++t) {
      if (!now(t - 1)) continue;
      try {
        const ImputeEstimate est =
            t <= cfg.backward_cutoff
                ? estimate_backward(x, now, original, t, cfg)
                : estimate_forward(x, now, t, cfg);
        x(t - 1) = est.imputed();
        now(t - 1) = false;
        report.entries.push_back({panel.stations[i].id, t, panel.time.year_of(t),
                                  panel.time.month_of(t),
                                  t <= cfg.backward_cutoff
                                      ? ImputeMethod::Backward
                                      : ImputeMethod::Forward,
                                  est.x_hat_1, est.x_hat_2, est.imputed(),
                                  est.count_1, est.count_2});
      } catch (Error& e) {
        e.add_context("station '" + panel.stations[i].id + "', t=" +
                      std::to_string(t));
        throw;
      }
    }
    out.values.row(i) = x.transpose();
    out.missing.row(i).setConstant(false);
  }
  return {std::move(out), std::move(report)};
}

void write_report_csv(const ImputationReport& report,
                      const std::filesystem::path& path) {
  std::string out =
      "station,t,year,month,method,x_hat_1,x_hat_2,imputed,count_1,count_2\n";
  for (const auto& e : report.entries) {
    out += e.station_id;
    out += ',' + std::to_string(e.t);
    out += ',' + std::to_string(e.year);
    out += ',' + std::to_string(e.month);
    out += ',';
    out += to_string(e.method);
    out += ',' + format_double(e.x_hat_1);
    out += ',' + format_double(e.x_hat_2);
    out += ',' + format_double(e.imputed);
    out += ',' + std::to_string(e.count_1);
    out += ',' + std::to_string(e.count_2);
    out += '\n';
  }
  atomic_write(path, out);
}

void write_report_json(const ImputationReport& report,
                       const std::filesystem::path& path) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"station", e.station_id},
                       {"t", e.t},
                       {"year", e.year},
                       {"month", e.month},
                       {"method", to_string(e.method)},
                       {"x_hat_1", e.x_hat_1},
                       {"x_hat_2", e.x_hat_2},
                       {"imputed", e.imputed},
                       {"count_1", e.count_1},
                       {"count_2", e.count_2}});
  }
  nlohmann::ordered_json doc;
  doc["entries"] = std::move(entries);
  atomic_write(path, doc.dump(2) + "\n");
}

}  // namespace sdfm
