#include "themis/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include <httplib.h>

#include "themis/error.hpp"

namespace themis::service {

using nlohmann::json;

namespace {

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& message, std::string path = {}) : Error("not_found", message, std::move(path)) {}
};

json envelope(const Error& e) { return {{"code", e.code()}, {"message", e.what()}, {"path", e.path()}}; }

int status_for(const Error& e) {
  if (e.code() == "not_found") return 404;
  if (e.code() == "parse_error") return 400;
  if (e.code() == "validation_error" || e.code() == "domain_error") return 422;
  return 500;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("request body is not JSON: ") + e.what());
  }
}

json model_summary(const std::string& id, const RegionModel& m) {
  return {{"id", id},
          {"region_name", m.region_name},
          {"parameters", m.parameters.size()},
          {"domains", m.domains()},
          {"actors", m.actors.size()},
          {"scenarios", m.scenarios.size()},
          {"theory", m.theory},
          {"horizon_years", m.horizon_years}};
}

double parse_number(const std::string& text, const std::string& name) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("query parameter '" + name + "' must be a number", "/" + name);
  }
}

}  // namespace

ServiceConfig config_from_env(ServiceConfig base) {
  if (const char* host = std::getenv("THEMIS_HOST"); host && *host) base.host = host;
  if (const char* port = std::getenv("THEMIS_PORT"); port && *port) base.port = std::atoi(port);
  return base;
}

Session::Session(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.data_dir) return;
  const auto dir = *config_.data_dir / "runs";
  std::filesystem::create_directories(dir);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    try {
      auto run = scenario::run_from_json(json::parse(in));
      if (run.model) models_.emplace(fingerprint(*run.model), run.model);
      const std::string id = run.run_id;
      runs_.emplace(id, std::make_shared<const scenario::PipelineRun>(std::move(run)));
    } catch (const std::exception&) {
      // Unreadable records are skipped; the store stays usable.
    }
  }
}

std::string Session::add_model(const RegionModel& model) {
  validate(model);
  const std::string id = fingerprint(model);
  std::unique_lock lock(mutex_);
  models_.emplace(id, std::make_shared<const RegionModel>(model));
  return id;
}

std::shared_ptr<const scenario::PipelineRun> Session::find_run(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = runs_.find(id);
  return it == runs_.end() ? nullptr : it->second;
}

std::size_t Session::run_count() const {
  std::shared_lock lock(mutex_);
  return runs_.size();
}

std::string Session::store_run(scenario::PipelineRun run) {
  {
    std::unique_lock lock(mutex_);
    const std::string base = run.run_id;
    for (int k = 2; runs_.count(run.run_id); ++k) run.run_id = base + "-" + std::to_string(k);
    runs_.emplace(run.run_id, std::make_shared<const scenario::PipelineRun>(run));
  }
  if (config_.data_dir) {
    std::ofstream out(*config_.data_dir / "runs" / (run.run_id + ".json"));
    out << scenario::to_json(run).dump(2) << "\n";
    if (!out) throw IoError("cannot persist run '" + run.run_id + "'");
  }
  return run.run_id;
}

Response Session::handle(const std::string& method, const std::string& path, const std::string& body,
                         const std::map<std::string, std::string>& query) {
  try {
    return dispatch(method, split_path(path), body, query);
  } catch (const Error& e) {
    return {status_for(e), envelope(e)};
  } catch (const std::exception&) {
    return {500, {{"code", "internal_error"}, {"message", "internal error"}, {"path", ""}}};
  }
}

Response Session::dispatch(const std::string& method, const std::vector<std::string>& p, const std::string& body,
                           const std::map<std::string, std::string>& query) {
  const bool get = method == "GET", post = method == "POST";
  if (p.empty() || p[0] != "api") throw NotFound("no route for " + method + " /" + (p.empty() ? "" : p[0]));

  if (p.size() == 2 && p[1] == "health" && get) return {200, {{"status", "ok"}, {"version", THEMIS_VERSION}}};

  if (p.size() >= 2 && p[1] == "models") {
    if (p.size() == 2 && get) {
      json list = json::array();
      std::shared_lock lock(mutex_);
      for (const auto& [id, m] : models_) list.push_back(model_summary(id, *m));
      return {200, list};
    }
    if (p.size() == 2 && post) {
      const json doc = parse_body(body);
      RegionModel model;
      try {
        model = model_from_json(doc);
      } catch (const ParseError& e) {
        throw ValidationError(e.what(), e.path());
      }
      const std::string id = add_model(model);
      return {201, model_summary(id, model)};
    }
    if (p.size() == 3 && get) {
      std::shared_lock lock(mutex_);
      auto it = models_.find(p[2]);
      if (it == models_.end()) throw NotFound("unknown model '" + p[2] + "'", "/model_id");
      return {200, to_json(*it->second)};
    }
  }

  if (p.size() >= 2 && p[1] == "runs") {
    if (p.size() == 2 && get) {
      json list = json::array();
      std::shared_lock lock(mutex_);
      for (const auto& [id, r] : runs_)
        list.push_back({{"run_id", id},
                        {"parent_run_id", r->parent_run_id ? json(*r->parent_run_id) : json(nullptr)},
                        {"region_name", r->region_name},
                        {"seed", r->config.seed}});
      return {200, list};
    }
    if (p.size() == 2 && post) {
      const json req = parse_body(body);
      if (!req.contains("model_id") || !req.at("model_id").is_string())
        throw ValidationError("request needs a model_id", "/model_id");
      const auto model_id = req.at("model_id").get<std::string>();
      std::shared_ptr<const RegionModel> model;
      {
        std::shared_lock lock(mutex_);
        auto it = models_.find(model_id);
        if (it == models_.end()) throw NotFound("unknown model '" + model_id + "'", "/model_id");
        model = it->second;
      }
      const auto config = scenario::run_config_from_json(req.value("config", json::object()));
      if (config.samples > config_.sample_cap)
        throw ValidationError("samples exceeds the service cap of " + std::to_string(config_.sample_cap) +
                                  "; use the command line for larger runs",
                              "/config/samples");
      auto run = scenario::run_pipeline(*model, config);
      const auto id = store_run(std::move(run));
      return {200, scenario::to_json(*find_run(id))};
    }

    auto run = p.size() >= 3 ? find_run(p[2]) : nullptr;
    if (p.size() >= 3 && !run) throw NotFound("unknown run '" + p[2] + "'", "/run_id");

    if (p.size() == 3 && get) return {200, scenario::to_json(*run)};

    if (p.size() == 4 && p[3] == "whatif" && post) {
      const json req = parse_body(body);
      const json edits_json = req.value("edits", json::array());
      if (!edits_json.is_array()) throw ValidationError("edits must be an array", "/edits");
      std::vector<scenario::Edit> edits;
      for (std::size_t i = 0; i < edits_json.size(); ++i)
        edits.push_back(scenario::edit_from_json(edits_json[i], "/edits/" + std::to_string(i)));
      auto child = scenario::what_if(*run, edits);
      const auto id = store_run(std::move(child));
      return {200, scenario::to_json(*find_run(id))};
    }

    if (p.size() == 4 && p[3] == "report" && get) {
      double tripwire = run->config.tripwire;
      if (auto it = query.find("tripwire"); it != query.end()) tripwire = parse_number(it->second, "tripwire");
      return {200, scenario::to_json(scenario::compute_intervention_index(*run, tripwire))};
    }

    if (p.size() == 5 && p[3] == "sensitivity" && get) {
      if (run->per_year.empty()) throw ValidationError("run has no horizon years");
      int year = run->per_year.back().year;
      if (auto it = query.find("year"); it != query.end()) year = static_cast<int>(parse_number(it->second, "year"));
      const auto nets = scenario::networks_for_year(*run, year);
      const std::string& root = p[4];
      const bool known = std::any_of(nets.begin(), nets.end(), [&](const bbn::ScenarioNetwork& n) {
        return std::any_of(n.nodes.begin(), n.nodes.end(), [&](const bbn::BbnNode& b) { return b.id == root; });
      });
      if (!known) throw NotFound("unknown node '" + root + "'", "/root");
      const auto sweep = scenario::sweep_root(nets, root);
      json points = json::array();
      for (std::size_t i = 0; i < sweep.sweep.size(); ++i)
        points.push_back({{"delta", scenario::kDriverDeltas[i]},
                          {"p_root", sweep.sweep[i].p_root},
                          {"p_intervention", sweep.sweep[i].p_intervention}});
      return {200, {{"run_id", run->run_id}, {"root", root}, {"year", year}, {"range", sweep.delta}, {"points", points}}};
    }
  }
  throw NotFound("no route for " + method + " /" + [&] {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "/" : "") + p[i];
    return s;
  }());
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  Session& session;
  httplib::Server server;
  explicit Impl(Session& s) : session(s) {}
};

HttpServer::HttpServer(Session& session) : impl_(std::make_unique<Impl>(session)) {
  auto& svr = impl_->server;
  const std::string origin = session.config().cors_origin;
  svr.set_default_headers({{"Access-Control-Allow-Origin", origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const auto out = impl_->session.handle(req.method, req.path, req.body, query);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  svr.Get(R"(/.*)", handler);
  svr.Post(R"(/.*)", handler);
  svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    res.status = 500;
    res.set_content(json{{"code", "internal_error"}, {"message", "internal error"}, {"path", ""}}.dump(),
                    "application/json");
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace themis::service
