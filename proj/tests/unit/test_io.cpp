#include "catch_amalgamated.hpp"

#include "fixtures.hpp"
#include "gresfa/error.hpp"
#include "gresfa_io/csv.hpp"
#include "gresfa_io/files.hpp"
#include "gresfa_io/fit_document.hpp"
#include "gresfa_io/grid_syntax.hpp"
#include "gresfa_io/model_file.hpp"
#include "gresfa_io/reports.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace gresfa;
using namespace gresfa::io;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

DataMatrix csv(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "t.csv");
}

ModelSpec model(const std::string& text) {
  std::istringstream in(text);
  return parse_model_spec(in, "m.txt");
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gresfa_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("CSV parsing") {
  const DataMatrix d = csv("a,b,c\n1,2,3\n4,5.5,-6e-1\n2,0,1\n");
  REQUIRE(d.n() == 3);
  REQUIRE(d.m() == 3);
  REQUIRE(d.column_names == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(d.values(1, 2) == -0.6);

  const DataMatrix q = csv("\xEF\xBB\xBF\"x 1\",y\r\n1,2\r\n3,5\r\n");
  REQUIRE(q.column_names.front() == "x 1");
  REQUIRE(q.values(1, 1) == 5.0);
}

TEST_CASE("CSV errors name the location") {
  REQUIRE_THROWS_WITH(csv("a,b\n1,2\n3,\n"), ContainsSubstring("line 3") && ContainsSubstring("column 2"));
  REQUIRE_THROWS_WITH(csv("a,b\n1,2\n3,x\n"), ContainsSubstring("line 3"));
  REQUIRE_THROWS_AS(csv("a,b\n1,2\n3,x\n"), ParseError);
  REQUIRE_THROWS_AS(csv("a,b\n1,2,3\n"), ParseError);
  REQUIRE_THROWS_AS(csv("a,b\n"), DataError);
  REQUIRE_THROWS_AS(csv("a,b\n1,2\n1,3\n"), DataError);
  REQUIRE_THROWS_AS(ingest_csv(scratch("missing.csv")), IoError);
}

TEST_CASE("CSV round trip keeps every bit") {
  RandomStream rng(81);
  const DataMatrix d = simulate_data(fixture::one_factor_params(4), 30, rng);
  const DataMatrix back = csv(format_csv(d));
  REQUIRE(back.values == d.values);
  REQUIRE(back.column_names == d.column_names);
}

TEST_CASE("model files") {
  const ModelSpec spec = model("# two factors\nm = 4\nd = 2\nmean_structure = false\nloading_pattern:\n1 0\n1 0\n0 1\n0 1  # last\n");
  REQUIRE(spec.m == 4);
  REQUIRE(spec.d == 2);
  REQUIRE_FALSE(spec.mean_structure);
  REQUIRE(spec.loading_pattern(3, 1) == 1);
  REQUIRE(spec.loading_pattern(3, 0) == 0);

  const ModelSpec again = model(format_model_spec(spec));
  REQUIRE(again.loading_pattern == spec.loading_pattern);
  REQUIRE(again.mean_structure == spec.mean_structure);

  REQUIRE(model("m = 3\nd = 1\nloading_pattern:\n1\n1\n1\n").mean_structure);
  REQUIRE_THROWS_WITH(model("m = 2\nd = 1\nloading_pattern:\n1\n2\n"), ContainsSubstring("m.txt:5"));
  REQUIRE_THROWS_AS(model("m = 3\nd = 1\nloading_pattern:\n1\n1\n"), ParseError);
  REQUIRE_THROWS_AS(model("m = 2\nd = 1\nwhat = 1\nloading_pattern:\n1\n1\n"), ParseError);
  REQUIRE_THROWS_AS(model("m = 2\nd = 2\nloading_pattern:\n1 1\n1\n"), ParseError);
  REQUIRE_THROWS_WITH(model("m = 2\nd = 2\nloading_pattern:\n1 0\n1 0\n"), ContainsSubstring("no indicators"));
}

TEST_CASE("grid syntax") {
  const auto dims = parse_grid_spec("-3:3:19,-2.5:2.5:7");
  REQUIRE(dims.size() == 2);
  REQUIRE(dims[1].lo == -2.5);
  REQUIRE(dims[1].count == 7);
  REQUIRE(format_grid_spec(dims) == "-3:3:19,-2.5:2.5:7");
  REQUIRE_THROWS_AS(parse_grid_spec("-3:3"), ParseError);
  REQUIRE_THROWS_AS(parse_grid_spec("-3:3:0"), ParseError);
  REQUIRE_THROWS_AS(parse_grid_spec("3:-3:5"), ParseError);
  REQUIRE_THROWS_AS(parse_grid_spec("a:3:5"), ParseError);
  REQUIRE_THROWS_AS(parse_grid_spec("-3:3:5,"), ParseError);
}

TEST_CASE("number formatting") {
  REQUIRE(format_double(0.1) == "0.1");
  REQUIRE(format_double(-2.0) == "-2");
  REQUIRE(format_double(std::nan("")) == "nan");
  REQUIRE(format_double(-INFINITY) == "-inf");
  const double x = 0.1 + 0.2;
  REQUIRE(std::stod(format_double(x)) == x);
}

TEST_CASE("hashing and atomic writes") {
  REQUIRE(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path p = scratch("atomic.txt");
  write_atomic(p, "first");
  write_atomic(p, "second");
  REQUIRE(read_file(p) == "second");
  REQUIRE(sha256_file(p) == sha256_hex("second"));
  for (const auto& entry : fs::directory_iterator(p.parent_path())) {
    REQUIRE(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
}

TEST_CASE("fit document round trip") {
  RandomStream rng(82);
  const DataMatrix data = simulate_data(fixture::one_factor_params(5, 0.3), 300, rng);
  OptimOptions opts;
  opts.information_draws = 2000;
  const FitResult fit = fit_ml(data, ModelSpec::one_factor(5), opts);
  const fs::path p = scratch("fit.json");
  write_fit_document(p, fit, FitProvenance{"d", "m", 1, 2000});
  const FitResult back = read_fit_document(p);
  REQUIRE(back.free_params == fit.free_params);
  REQUIRE(back.params.lambda == fit.params.lambda);
  REQUIRE(back.params.theta == fit.params.theta);
  REQUIRE(back.loglik == fit.loglik);
  REQUIRE(back.converged == fit.converged);
  REQUIRE(back.n == fit.n);
  REQUIRE(back.information == fit.information);
  REQUIRE(back.spec.loading_pattern == fit.spec.loading_pattern);

  const auto doc = fit_to_json(fit, FitProvenance{});
  REQUIRE(doc["format"] == "gresfa-fit");
  REQUIRE(doc["free_parameters"].size() == 15);
  REQUIRE(doc["free_parameters"][5]["label"] == "lambda[1,1]");

  auto broken = nlohmann::json::parse(doc.dump());
  broken["format_version"] = 99;
  REQUIRE_THROWS_AS(fit_from_json(broken), ParseError);
}

TEST_CASE("test report layout") {
  TestReport report;
  report.label = "linearity:y2";
  report.n = 100;
  report.s = 1;
  ReportPoint a;
  a.coordinates = Vector::Constant(1, -1.0);
  a.z = 0.5;
  ReportPoint b = a;
  b.coordinates(0) = 1.0;
  b.unstable = true;
  b.z = std::nan("");
  report.points = {a, b};
  report.summary = SummaryResult{2.5, 1, 0.11, 1};
  report.notes = {"1 unstable summary point(s) excluded from T"};
  Provenance prov = base_provenance("test");
  prov.add("seed", "7");
  const std::string text = format_test_report(report, prov);
  std::istringstream lines(text);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE_THAT(text, ContainsSubstring("# seed: 7"));
  REQUIRE_THAT(text, ContainsSubstring("# note: 1 unstable"));
  REQUIRE_THAT(text, ContainsSubstring("record,x1,eta_hat,eta,residual,se,z,p,unstable,T,s"));
  REQUIRE(rows.back().rfind("summary,", 0) == 0);
  REQUIRE_THAT(rows.back(), ContainsSubstring("2.5"));
  // Unstable points leave z and p empty.
  REQUIRE_THAT(text, ContainsSubstring("point,1,0,0,0,0,,,1,,"));
}
