#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "themis/model.hpp"
#include "themis/scenario.hpp"

namespace themis::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int sample_cap = 10000;
  std::optional<std::filesystem::path> data_dir;  // run records are persisted here when set
  std::string cors_origin = "*";
};

/// Fills host/port from THEMIS_HOST / THEMIS_PORT when they are set.
ServiceConfig config_from_env(ServiceConfig base = {});

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// In-memory store of models and runs plus the route table. Thread-safe:
/// handlers compute outside the lock and only insert under it.
class Session {
 public:
  explicit Session(ServiceConfig config = {});

  Response handle(const std::string& method, const std::string& path, const std::string& body = {},
                  const std::map<std::string, std::string>& query = {});

  /// Validates and stores a model; returns its id (the content fingerprint).
  std::string add_model(const RegionModel& model);

  std::shared_ptr<const scenario::PipelineRun> find_run(const std::string& id) const;
  std::size_t run_count() const;
  const ServiceConfig& config() const { return config_; }

 private:
  Response dispatch(const std::string& method, const std::vector<std::string>& parts, const std::string& body,
                    const std::map<std::string, std::string>& query);
  std::string store_run(scenario::PipelineRun run);

  ServiceConfig config_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const RegionModel>> models_;
  std::map<std::string, std::shared_ptr<const scenario::PipelineRun>> runs_;
};

/// Blocking HTTP server over a session. Returns when stop() is called from
/// another thread.
class HttpServer {
 public:
  explicit HttpServer(Session& session);
  ~HttpServer();

  /// Binds (port 0 picks a free port) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  void listen();  // after bind
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace themis::service
