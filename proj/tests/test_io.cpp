#include <doctest.h>

#include <random>
#include <sstream>

#include "icapath/errors.hpp"
#include "icapath/io.hpp"
#include "test_util.hpp"

using namespace icapath;
using doctest::Approx;

TEST_CASE("CSV records") {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\r\n\n4,,6");
  const auto rec = parse_csv_records(in);
  REQUIRE(rec.size() == 3);
  CHECK(rec[0][1] == "b,c");
  CHECK(rec[0][2] == "say \"hi\"");
  CHECK(rec[2][1].empty());
  std::istringstream open_quote("a,\"b\n");
  CHECK_THROWS_AS(parse_csv_records(open_quote), DataError);
  std::istringstream stray("a,b\"c\n");
  CHECK_THROWS_AS(parse_csv_records(stray), DataError);
}

TEST_CASE("CSV tables") {
  std::istringstream in("x1,y,\"x 2\"\n1.5,0,2\n-3,1,4e-1\n");
  const CsvTable t = read_csv(in);
  CHECK(t.predictor_names == std::vector<std::string>{"x1", "x 2"});
  CHECK(t.data.n() == 2);
  CHECK(t.data.x(1, 0) == -3.0);
  CHECK(t.data.x(1, 1) == Approx(0.4));
  CHECK(t.data.y[1] == 1.0);

  std::istringstream bad_cell("x1,y\n1,0\nfoo,1\n");
  CHECK_THROWS_WITH_AS(read_csv(bad_cell), doctest::Contains("row 2, column 1"), DataError);
  std::istringstream no_y("a,b\n1,2\n");
  CHECK_THROWS_WITH_AS(read_csv(no_y), doctest::Contains("response column"), DataError);
  std::istringstream ragged("x,y\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(ragged), DataError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), DataError);
  std::istringstream header_only("x,y\n");
  CHECK_THROWS_AS(read_csv(header_only), DataError);
  CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), DataError);
}

TEST_CASE("path JSON round trip") {
  std::mt19937_64 rng(1);
  Vector beta(4);
  beta << 1.0, 0.0, -0.7, 0.0;
  Dataset d = testutil::glm_data(FamilySpec::poisson(), 100, beta, rng);
  d.x.col(1) *= 3.0;
  SolverConfig cfg;
  cfg.nlambda = 15;
  const auto fam = FamilySpec::poisson();
  const auto pen = PenaltySpec::mcp(2.5);
  const PathResult path = ica_path(d, fam, pen, cfg);
  const RunManifest m = make_manifest("fit", "settings", 5);
  const nlohmann::json j = path_to_json(path, fam, pen, cfg, {"a", "b", "c", "d"}, m);
  CHECK(j["manifest"]["config_digest"] == fnv1a_hex("settings"));
  CHECK(j["fits"].size() == 15);

  const StoredPath sp = path_from_json(nlohmann::json::parse(j.dump()));
  CHECK(sp.family == fam);
  CHECK(sp.penalty == pen);
  CHECK(sp.predictor_names[2] == "c");
  CHECK(sp.standardized);
  CHECK(sp.tol == cfg.tol);
  REQUIRE(sp.coefficients.size() == path.points.size());
  for (std::size_t k = 0; k < sp.coefficients.size(); ++k) {
    CHECK(sp.coefficients[k] == path.coefficients(k));
    CHECK(sp.fitted_coefficients(k).isApprox(path.fitted_coefficients(k)));
    CHECK(sp.converged[k] == path.points[k].converged);
  }

  std::ostringstream plot;
  write_plot_csv(plot, sp);
  std::istringstream back(plot.str());
  const auto rows = parse_csv_records(back);
  CHECK(rows.size() == 16);
  CHECK(rows[0][0] == "lambda");
  CHECK(rows[0][4] == "d");

  nlohmann::json broken = j;
  broken.erase("lambdas");
  CHECK_THROWS_AS(path_from_json(broken), DataError);
  broken = j;
  broken["fits"][1]["coefficients"]["9"] = 1.0;
  CHECK_THROWS_AS(path_from_json(broken), DataError);
}

TEST_CASE("manifest digest") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  const RunManifest m = make_manifest("simulate", "x", 3);
  CHECK(m.version == version_string());
  CHECK(m.timestamp.size() == 20);
}
