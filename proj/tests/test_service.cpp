#include <doctest.h>

#include <httplib.h>

#include <fstream>
#include <thread>

#include "support.hpp"
#include "themis/service.hpp"

using namespace themis;
using namespace themis::service;
using nlohmann::json;

namespace {

std::string model_text() {
  std::ifstream in(test::bundled_model_path());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string run_body(const std::string& model_id, int samples = 100) {
  return json{{"model_id", model_id}, {"config", {{"seed", 42}, {"samples", samples}, {"horizon_years", 4}}}}.dump();
}

void check_envelope(const Response& r, int status, const std::string& code) {
  CHECK(r.status == status);
  CHECK(r.body.at("code") == code);
  CHECK(r.body.contains("message"));
  CHECK(r.body.contains("path"));
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("health and model routes") {
    Session s;
    const auto health = s.handle("GET", "/api/health");
    CHECK(health.status == 200);
    CHECK(health.body.at("status") == "ok");
    CHECK(health.body.contains("version"));

    CHECK(s.handle("GET", "/api/models").body.empty());
    const auto created = s.handle("POST", "/api/models", model_text());
    REQUIRE(created.status == 201);
    const auto id = created.body.at("id").get<std::string>();
    CHECK(created.body.at("region_name") == "Country X");
    CHECK(created.body.at("parameters") == 25);
    CHECK(s.handle("GET", "/api/models").body.size() == 1);
    const auto doc = s.handle("GET", "/api/models/" + id);
    CHECK(doc.status == 200);
    CHECK(model_from_json(doc.body) == test::bundled_model());

    check_envelope(s.handle("GET", "/api/models/nope"), 404, "not_found");
    check_envelope(s.handle("POST", "/api/models", "{not json"), 400, "parse_error");
    auto broken = json::parse(model_text());
    broken["parameters"][3].erase("domain");
    const auto bad = s.handle("POST", "/api/models", broken.dump());
    check_envelope(bad, 422, "validation_error");
    CHECK(bad.body.at("path") == "/parameters/3/domain");
    auto invalid = json::parse(model_text());
    invalid["horizon_years"] = 0;
    check_envelope(s.handle("POST", "/api/models", invalid.dump()), 422, "validation_error");
    check_envelope(s.handle("GET", "/nothing"), 404, "not_found");
  }

  TEST_CASE("runs, reports and sensitivity") {
    Session s;
    const auto id = s.add_model(test::bundled_model());
    check_envelope(s.handle("POST", "/api/runs", run_body("missing")), 404, "not_found");

    const auto first = s.handle("POST", "/api/runs", run_body(id));
    REQUIRE(first.status == 200);
    const auto second = s.handle("POST", "/api/runs", run_body(id));
    REQUIRE(second.status == 200);
    CHECK(first.body.at("per_year") == second.body.at("per_year"));
    CHECK(first.body.at("run_id") != second.body.at("run_id"));
    CHECK(s.run_count() == 2);
    CHECK(s.handle("GET", "/api/runs").body.size() == 2);

    const auto run_id = first.body.at("run_id").get<std::string>();
    CHECK(s.handle("GET", "/api/runs/" + run_id).body == first.body);
    check_envelope(s.handle("GET", "/api/runs/ghost"), 404, "not_found");

    const auto report = s.handle("GET", "/api/runs/" + run_id + "/report", "", {{"tripwire", "0.55"}});
    REQUIRE(report.status == 200);
    CHECK(report.body.at("tripwire_threshold") == 0.55);
    CHECK(report.body.at("index_series").size() == 4);
    check_envelope(s.handle("GET", "/api/runs/" + run_id + "/report", "", {{"tripwire", "abc"}}), 422, "validation_error");

    const auto sens = s.handle("GET", "/api/runs/" + run_id + "/sensitivity/water_shortage");
    REQUIRE(sens.status == 200);
    CHECK(sens.body.at("points").size() == 5);
    CHECK(sens.body.at("year") == 2028);
    check_envelope(s.handle("GET", "/api/runs/" + run_id + "/sensitivity/ghost"), 404, "not_found");
    check_envelope(s.handle("GET", "/api/runs/" + run_id + "/sensitivity/water_shortage", "", {{"year", "1990"}}),
                   422, "validation_error");

    const auto bad_config =
        s.handle("POST", "/api/runs", json{{"model_id", id}, {"config", {{"samples", 0}}}}.dump());
    check_envelope(bad_config, 422, "validation_error");
    CHECK(bad_config.body.at("path") == "/config/samples");
  }

  TEST_CASE("what-if with no edits reports like its parent") {
    Session s;
    const auto id = s.add_model(test::bundled_model());
    const auto parent = s.handle("POST", "/api/runs", run_body(id)).body;
    const auto pid = parent.at("run_id").get<std::string>();
    const auto child = s.handle("POST", "/api/runs/" + pid + "/whatif", R"({"edits": []})");
    REQUIRE(child.status == 200);
    CHECK(child.body.at("parent_run_id") == pid);
    const auto cid = child.body.at("run_id").get<std::string>();
    auto a = s.handle("GET", "/api/runs/" + pid + "/report").body;
    auto b = s.handle("GET", "/api/runs/" + cid + "/report").body;
    a.erase("run_id");
    b.erase("run_id");
    CHECK(a == b);

    const auto edited = s.handle("POST", "/api/runs/" + pid + "/whatif",
                                 R"({"edits": [{"kind": "override_trend", "parameter": "potable_water", "slope": -20}]})");
    REQUIRE(edited.status == 200);
    CHECK(edited.body.at("stages_executed")[0] == "trends");
    check_envelope(s.handle("POST", "/api/runs/" + pid + "/whatif", R"({"edits": [{"kind": "bogus"}]})"), 422,
                   "validation_error");
    check_envelope(s.handle("POST", "/api/runs/" + pid + "/whatif",
                            R"({"edits": [{"kind": "remove_actor", "actor_id": "ghost"}]})"),
                   422, "validation_error");
    check_envelope(s.handle("POST", "/api/runs/ghost/whatif", R"({"edits": []})"), 404, "not_found");
  }

  TEST_CASE("sample cap guards synchronous runs") {
    ServiceConfig cfg;
    cfg.sample_cap = 50;
    Session s(cfg);
    const auto id = s.add_model(test::bundled_model());
    const auto r = s.handle("POST", "/api/runs", run_body(id, 51));
    check_envelope(r, 422, "validation_error");
    CHECK(r.body.at("path") == "/config/samples");
    CHECK(s.handle("POST", "/api/runs", run_body(id, 50)).status == 200);
  }

  TEST_CASE("runs persist to the data directory") {
    const auto dir = test::temp_path("service-data");
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    ServiceConfig cfg;
    cfg.data_dir = dir;
    std::string run_id;
    {
      Session s(cfg);
      const auto id = s.add_model(test::bundled_model());
      run_id = s.handle("POST", "/api/runs", run_body(id)).body.at("run_id");
    }
    Session reloaded(cfg);
    REQUIRE(reloaded.find_run(run_id));
    CHECK(reloaded.handle("GET", "/api/runs/" + run_id + "/report").status == 200);
  }

  TEST_CASE("environment overrides host and port") {
    ::setenv("THEMIS_PORT", "9123", 1);
    ::setenv("THEMIS_HOST", "0.0.0.0", 1);
    const auto cfg = config_from_env();
    CHECK(cfg.port == 9123);
    CHECK(cfg.host == "0.0.0.0");
    ::unsetenv("THEMIS_PORT");
    ::unsetenv("THEMIS_HOST");
  }

  TEST_CASE("HTTP server speaks JSON with CORS headers") {
    Session s;
    s.add_model(test::bundled_model());
    HttpServer server(s);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.listen(); });

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    auto health = client.Get("/api/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(json::parse(health->body).at("status") == "ok");

    auto models = client.Get("/api/models");
    REQUIRE(models);
    const auto id = json::parse(models->body).at(0).at("id").get<std::string>();
    auto run = client.Post("/api/runs", run_body(id, 20), "application/json");
    REQUIRE(run);
    CHECK(run->status == 200);
    CHECK(json::parse(run->body).at("per_year").size() == 4);

    auto missing = client.Get("/api/runs/ghost");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body).at("code") == "not_found");

    auto preflight = client.Options("/api/runs");
    REQUIRE(preflight);
    CHECK(preflight->status == 204);

    server.stop();
    t.join();
  }
}
