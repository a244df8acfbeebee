#include <doctest.h>

#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "support.hpp"

using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "themis");
  std::ostringstream out, err;
  const int code = themis::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string model() { return test::bundled_model_path().string(); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("validate reports the roster") {
    const auto r = cli({"validate", model()});
    CHECK(r.code == 0);
    CHECK(r.out.find("Country X, 25 parameters in 6 domains") != std::string::npos);

    const auto missing = cli({"validate", test::temp_path("absent.json").string()});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("io_error") != std::string::npos);
  }

  TEST_CASE("usage errors exit with 1 and help with 0") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"run", model(), "--samples", "0"}).code == 1);
    CHECK(cli({"run", model(), "--tripwire", "1.5"}).code == 1);
    CHECK(cli({"run", model(), "--no-such-flag"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
  }

  TEST_CASE("invalid model documents exit with 1") {
    auto doc = to_json(test::bundled_model());
    doc["horizon_years"] = 0;
    const auto path = test::temp_path("invalid.model.json");
    std::ofstream(path) << doc.dump();
    const auto r = cli({"validate", path.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("/horizon_years") != std::string::npos);
  }

  TEST_CASE("analyze prints the key variables and sign table") {
    const auto r = cli({"analyze", model()});
    REQUIRE(r.code == 0);
    for (const char* id : {"migration", "gdp", "literacy", "religious_education", "level_of_health",
                           "status_of_women", "potable_water"})
      CHECK(r.out.find(id) != std::string::npos);
    CHECK(r.out.find("sign matrix") != std::string::npos);
    const auto j = cli({"analyze", model(), "--json"});
    REQUIRE(j.code == 0);
    CHECK(json::parse(j.out).at("key_variables").at("selected").size() == 7);
  }

  TEST_CASE("run output is byte-identical across invocations") {
    const std::vector<std::string> args = {"run", model(), "--seed", "7", "--samples", "50", "--horizon", "3", "--json"};
    const auto a = cli(args);
    const auto b = cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    CHECK(cli(threaded).out == a.out);
    const auto doc = json::parse(a.out);
    CHECK(doc.at("per_year").size() == 3);
    CHECK_FALSE(doc.contains("started"));
    const auto stamped = json::parse(cli({"run", model(), "--samples", "5", "--horizon", "1", "--json", "--timestamps"}).out);
    CHECK(stamped.contains("started"));
  }

  TEST_CASE("run writes a record that report reads back") {
    const auto path = test::temp_path("cli.run.json");
    const auto r = cli({"run", model(), "--seed", "42", "--samples", "100", "--horizon", "4", "-o", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("final-year intervention index (2028)") != std::string::npos);
    CHECK(r.out.find("run id: ") != std::string::npos);

    const auto rep = cli({"report", path.string(), "--tripwire", "0.5"});
    REQUIRE(rep.code == 0);
    CHECK(rep.out.find("tripwire 0.50:") != std::string::npos);
    CHECK(rep.out.find("drivers") != std::string::npos);
    const auto j = cli({"report", path.string(), "--json", "--tripwire", "1"});
    REQUIRE(j.code == 0);
    CHECK(json::parse(j.out).at("tripwire_years").empty());

    const auto garbage = test::temp_path("garbage.json");
    std::ofstream(garbage) << "{oops";
    CHECK(cli({"report", garbage.string()}).code == 1);
  }

  TEST_CASE("ingest merges CSV rows into a new model file") {
    auto stripped = test::bundled_model();
    stripped.series.clear();
    const auto in = test::temp_path("stripped.model.json");
    themis::save_region_model(stripped, in);
    const auto out = test::temp_path("ingested.model.json");
    const auto r = cli({"ingest", in.string(), (test::data_dir() / "country_x.series.csv").string(), "-o", out.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("25 series, 500 observations") != std::string::npos);
    CHECK(themis::load_region_model(out) == test::bundled_model());
  }
}
