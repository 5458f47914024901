#include <doctest/doctest.h>

#include <Eigen/Dense>
#include <fstream>
#include <string>

#include "sdfm/errors.hpp"
#include "sdfm/io.hpp"
#include "sdfm/panel.hpp"
#include "test_util.hpp"

using namespace sdfm;
using sdfm_test::TempDir;
using sdfm_test::make_panel;

namespace {

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

void put(const std::filesystem::path& p, const std::string& body) {
  atomic_write(p, body);
}

}  // namespace

TEST_CASE("load_csv reads a small panel with one hole") {
  TempDir dir;
  const auto file = dir / "p.csv";
  put(file,
      "date,ber,ham\n"
      "2008-01,1.5,-2\n"
      "2008-02,,0.25\n"
      "2008-03,3,4\n");
  const Panel p = load_csv(file);
  CHECK(p.n() == 2);
  CHECK(p.T() == 3);
  CHECK(p.stations[0].id == "ber");
  CHECK(p.stations[1].id == "ham");
  CHECK(p.time.start_year == 2008);
  CHECK(p.time.start_month == 1);
  CHECK(p.values(0, 0) == 1.5);
  CHECK(p.values(1, 0) == -2.0);
  CHECK(p.missing(0, 1));
  CHECK(std::isnan(p.values(0, 1)));
  CHECK(p.values(1, 1) == 0.25);
  CHECK(p.missing.count() == 1);
}

TEST_CASE("load_csv accepts NA as a missing marker") {
  TempDir dir;
  const auto file = dir / "p.csv";
  put(file, "date,a\n2010-06,1\n2010-07,NA\n");
  const Panel p = load_csv(file);
  CHECK(p.missing(0, 1));
  CHECK(p.time.start_month == 6);
}

TEST_CASE("load_csv rejects a gap in the month sequence") {
  TempDir dir;
  const auto file = dir / "p.csv";
  put(file, "date,a\n2008-01,1\n2008-03,2\n");
  CHECK_THROWS_AS(load_csv(file), GapInTimeIndex);
}

TEST_CASE("load_csv rejects a duplicated month") {
  TempDir dir;
  const auto file = dir / "p.csv";
  put(file, "date,a\n2008-01,1\n2008-01,2\n");
  CHECK_THROWS_AS(load_csv(file), DuplicateTimestamp);
}

TEST_CASE("load_csv names the offending cell on a parse failure") {
  TempDir dir;
  const auto file = dir / "p.csv";
  put(file, "date,a,b\n2008-01,1,2\n2008-02,1,zz\n");
  try {
    load_csv(file);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("column 3") != std::string::npos);
  }
}

TEST_CASE("load_csv rejects duplicate station ids and ragged rows") {
  TempDir dir;
  const auto file = dir / "p.csv";
  put(file, "date,a,a\n2008-01,1,2\n");
  CHECK_THROWS_AS(load_csv(file), DataError);
  put(file, "date,a,b\n2008-01,1\n");
  CHECK_THROWS_AS(load_csv(file), ParseError);
}

TEST_CASE("load_csv handles the full-size panel shape") {
  TempDir dir;
  const auto file = dir / "big.csv";
  Panel big = make_panel(sdfm_test::seasonal_matrix(42, 204, 99));
  write_csv(big, file);
  const Panel back = load_csv(file);
  CHECK(back.n() == 42);
  CHECK(back.T() == 204);
  CHECK(back.time.label(1) == "2008-01");
  CHECK(back.time.label(204) == "2024-12");
}

TEST_CASE("write then load is bit-stable") {
  TempDir dir;
  Eigen::MatrixXd v = sdfm_test::random_matrix(5, 60, 4242);
  v.array() *= 17.3;
  MissingMask mask = MissingMask::Constant(5, 60, false);
  mask(2, 10) = true;
  mask(4, 59) = true;
  const Panel p = make_panel(v, mask, 1999, 7);
  const auto f1 = dir / "a.csv";
  const auto f2 = dir / "b.csv";
  write_csv(p, f1);
  const Panel q = load_csv(f1);
  write_csv(q, f2);
  CHECK(slurp(f1) == slurp(f2));
  REQUIRE(q.n() == p.n());
  REQUIRE(q.T() == p.T());
  CHECK((q.missing == p.missing).all());
  for (int i = 0; i < p.n(); ++i)
    for (int t = 0; t < p.T(); ++t)
      if (!p.missing(i, t)) CHECK(q.values(i, t) == p.values(i, t));
  CHECK(q.time.start_year == 1999);
  CHECK(q.time.start_month == 7);
}

TEST_CASE("station meta sidecar attaches coordinates") {
  TempDir dir;
  const auto meta_file = dir / "stations.csv";
  put(meta_file,
      "id,name,latitude,longitude\n"
      "s1,Berlin,52.52,13.405\n"
      "s3,Hamburg,53.55,\n"
      "zz,Ghost,1,1\n");
  Panel p = make_panel(Eigen::MatrixXd::Random(3, 24));
  const auto meta = load_station_meta(meta_file);
  REQUIRE(meta.size() == 3);
  apply_station_meta(p, meta);
  REQUIRE(p.stations[0].latitude.has_value());
  CHECK(p.stations[0].latitude.value() == 52.52);
  CHECK(p.stations[0].name == "Berlin");
  CHECK(p.stations[2].longitude.has_value() == false);
  CHECK(p.stations[2].latitude.value() == 53.55);
  CHECK(p.stations[1].latitude.has_value() == false);
  p.validate();
}

TEST_CASE("validate rejects out-of-range coordinates") {
  Panel p = make_panel(Eigen::MatrixXd::Random(2, 12));
  p.stations[0].latitude = 95.0;
  CHECK_THROWS_AS(p.validate(), DataError);
  p.stations[0].latitude = 45.0;
  p.stations[0].longitude = -200.0;
  CHECK_THROWS_AS(p.validate(), DataError);
}

TEST_CASE("standardize maps 1,2,3 to -1,0,1") {
  Eigen::MatrixXd v(1, 3);
  v << 1, 2, 3;
  const auto [std_panel, params] = standardize(make_panel(v));
  CHECK(std_panel.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std_panel.values(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std_panel.values(0, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(params.means(0) == doctest::Approx(2.0));
  CHECK(params.sds(0) == doctest::Approx(1.0));
}

TEST_CASE("standardize leaves zero-mean unit-sd rows") {
  const Panel p = make_panel(sdfm_test::seasonal_matrix(3, 24, 7));
  const auto [s, params] = standardize(p);
  const int T = s.T();
  for (int i = 0; i < s.n(); ++i) {
    const double mean = s.values.row(i).mean();
    const double sd = std::sqrt(
        (s.values.row(i).array() - mean).square().sum() / (T - 1));
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(sd - 1.0) < 1e-12);
  }
}

TEST_CASE("standardize names the degenerate station") {
  Eigen::MatrixXd v = Eigen::MatrixXd::Random(2, 24);
  v.row(1).setConstant(3.25);
  try {
    standardize(make_panel(v));
    FAIL("expected DegenerateSeriesError");
  } catch (const DegenerateSeriesError& e) {
    CHECK(std::string(e.what()).find("s2") != std::string::npos);
  }
}

TEST_CASE("standardize refuses missing cells") {
  Eigen::MatrixXd v = Eigen::MatrixXd::Random(2, 24);
  MissingMask mask = MissingMask::Constant(2, 24, false);
  mask(0, 3) = true;
  CHECK_THROWS_AS(standardize(make_panel(v, mask)), MissingDataError);
}

TEST_CASE("destandardize inverts standardize") {
  const Panel p = make_panel(sdfm_test::seasonal_matrix(3, 24, 11));
  const auto [s, params] = standardize(p);
  const Panel back = destandardize(s, params);
  CHECK((back.values - p.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("destandardize applies mean and sd per row") {
  Eigen::MatrixXd v(1, 3);
  v << -1, 0, 1;
  StandardizationParams params;
  params.means = Eigen::VectorXd::Constant(1, 2.0);
  params.sds = Eigen::VectorXd::Constant(1, 3.0);
  const Panel out = destandardize(make_panel(v), params);
  CHECK(out.values(0, 0) == doctest::Approx(-1.0));
  CHECK(out.values(0, 1) == doctest::Approx(2.0));
  CHECK(out.values(0, 2) == doctest::Approx(5.0));
}

TEST_CASE("destandardize with identity parameters is a no-op") {
  const Panel p = make_panel(sdfm_test::random_matrix(2, 12, 5));
  StandardizationParams params;
  params.means = Eigen::VectorXd::Zero(2);
  params.sds = Eigen::VectorXd::Ones(2);
  const Panel out = destandardize(p, params);
  CHECK(sdfm_test::same_values(out.values, p.values));
}

TEST_CASE("destandardize checks parameter shape") {
  const Panel p = make_panel(Eigen::MatrixXd::Random(3, 12));
  StandardizationParams params;
  params.means = Eigen::VectorXd::Zero(2);
  params.sds = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(destandardize(p, params), ShapeError);
}
