#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "themis/error.hpp"
#include "themis/model.hpp"

using namespace themis;

namespace {

std::string validation_path(const RegionModel& m) {
  try {
    validate(m);
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<valid>";
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("bundled Country X model has the full roster") {
    const auto m = test::bundled_model();
    CHECK(m.region_name == "Country X");
    CHECK(m.parameters.size() == 25);
    const std::vector<std::string> domains = {"Demography", "Economic", "Educational",
                                              "Sociological", "Healthcare", "Resources"};
    CHECK(m.domains() == domains);
    CHECK(m.series.size() == 25);
    for (const auto& s : m.series) CHECK(s.observations.size() == 20);
    CHECK(m.horizon_years == 25);
    CHECK(m.actors.size() == 3);
    REQUIRE(m.scenarios.size() == 1);
    CHECK(m.scenarios[0].description.find("calibrated") != std::string::npos);
    REQUIRE(m.adjacency);
    for (std::size_t i = 0; i < m.adjacency->size(); ++i) CHECK(m.adjacency->related(i, i));
  }

  TEST_CASE("load and save are inverse on the bundled model") {
    const auto m = test::bundled_model();
    const auto out = test::temp_path("roundtrip.model.json");
    save_region_model(m, out);
    const auto back = load_region_model(out);
    CHECK(back == m);
    CHECK(to_json(back) == to_json(m));
    CHECK(fingerprint(back) == fingerprint(m));
    CHECK(read_text(out) == read_text(test::bundled_model_path()));
  }

  TEST_CASE("fingerprint is a 16 digit hash that tracks content") {
    auto m = test::bundled_model();
    const auto fp = fingerprint(m);
    CHECK(fp.size() == 16);
    m.series[0].observations[0].value += 1e-9;
    CHECK(fingerprint(m) != fp);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("validation names the offending path") {
    const auto base = test::bundled_model();
    CHECK(validation_path(base) == "<valid>");

    auto m = base;
    m.parameters[1].id = m.parameters[0].id;
    CHECK(validation_path(m) == "/parameters/1/id");

    m = base;
    m.series[2].parameter = "no_such_parameter";
    CHECK(validation_path(m) == "/series/2/parameter");

    m = base;
    std::swap(m.series[0].observations[3], m.series[0].observations[4]);
    CHECK(validation_path(m).rfind("/series/0/observations/", 0) == 0);

    m = base;
    m.actors.clear();
    CHECK(validation_path(m) == "/actors");

    m = base;
    m.actors[0].goals[0].weight = 0.0;
    CHECK(validation_path(m) == "/actors/0/goals/0/weight");

    m = base;
    m.actors[1].constraints[0].rhs_from->parameter = "ghost";
    CHECK(validation_path(m) == "/actors/1/constraints/0/rhs/parameter");

    m = base;
    m.scenarios[0].nodes[0].root_mapping->source = "ghost";
    CHECK(validation_path(m).find("/scenario_template") == 0);

    m = base;
    m.horizon_years = 0;
    CHECK(validation_path(m) == "/horizon_years");
  }

  TEST_CASE("parse errors carry a JSON pointer") {
    auto doc = to_json(test::bundled_model());
    doc["parameters"][3].erase("domain");
    try {
      model_from_json(doc);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.path() == "/parameters/3/domain");
    }
    CHECK_THROWS_AS(load_region_model(test::temp_path("missing.json")), IoError);
  }

  TEST_CASE("CSV ingestion rebuilds the bundled series") {
    auto empty = test::bundled_model();
    const auto expected = empty.series;
    empty.series.clear();
    const auto m = ingest_series(empty, test::data_dir() / "country_x.series.csv");
    REQUIRE(m.series.size() == 25);
    std::size_t rows = 0;
    for (const auto& s : m.series) {
      CHECK(s.observations.size() == 20);
      rows += s.observations.size();
    }
    CHECK(rows == 500);
    CHECK(m.series == expected);
  }

  TEST_CASE("CSV ingestion merges and sorts new years") {
    auto m = test::bundled_model();
    const auto out = ingest_series_text(m, "parameter_id,domain,year,value\ngdp,Economic,2026,400\ngdp,Economic,2025,401\n");
    const auto* s = out.find_series("gdp");
    REQUIRE(s);
    REQUIRE(s->observations.size() == 22);
    CHECK(s->observations[20].year == 2025);
    CHECK(s->observations[21].year == 2026);
    CHECK(s->observations[21].value == 400.0);
  }

  TEST_CASE("CSV ingestion rejects bad rows") {
    const auto m = test::bundled_model();
    const std::string header = "parameter_id,domain,year,value\n";
    CHECK_THROWS_AS(ingest_series_text(m, "id,domain,year,value\n"), ParseError);
    CHECK_THROWS_AS(ingest_series_text(m, header + "ghost,Economic,2030,1\n"), ValidationError);
    CHECK_THROWS_AS(ingest_series_text(m, header + "gdp,Healthcare,2030,1\n"), ValidationError);
    CHECK_THROWS_AS(ingest_series_text(m, header + "gdp,Economic,2030,abc\n"), ParseError);
    CHECK_THROWS_AS(ingest_series_text(m, header + "gdp,Economic,20x0,1\n"), ParseError);
    CHECK_THROWS_AS(ingest_series_text(m, header + "gdp,Economic,2010,1\n"), ValidationError);
    CHECK_THROWS_AS(ingest_series_text(m, header + "gdp,Economic,2030,1\ngdp,Economic,2030,2\n"), ValidationError);
    try {
      ingest_series_text(m, header + "gdp,Economic,2030,1\ngdp,Economic,2031,oops\n");
    } catch (const ParseError& e) {
      CHECK(e.path() == "line 3");
    }
  }

  TEST_CASE("adjacency keeps its diagonal") {
    AdjacencyMatrix adj({"a", "b", "c"});
    CHECK(adj.related("a", "a"));
    CHECK_FALSE(adj.related("a", "b"));
    adj.set(0, 1, true);
    CHECK(adj.related(0, 1));
    CHECK_FALSE(adj.related(1, 0));
    CHECK(adj.count_related() == 4);
  }
}
