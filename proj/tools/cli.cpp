#include "cli.hpp"

#include <csignal>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "themis/analysis.hpp"
#include "themis/error.hpp"
#include "themis/model.hpp"
#include "themis/scenario.hpp"
#include "themis/service.hpp"

namespace themis::cli {

using nlohmann::json;

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("cannot write '" + path + "'");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void print_report(const scenario::InterventionReport& rep, const scenario::PipelineRun& run, std::ostream& out) {
  out << "year  index   90% interval\n";
  for (const auto& y : run.per_year)
    out << fmt("%4d  %.4f  [%.4f, %.4f]%s\n", y.year, y.p_intervention_mean, y.ci_lo, y.ci_hi,
               y.p_intervention_mean >= rep.tripwire_threshold ? "  *" : "");
  out << fmt("tripwire %.2f:", rep.tripwire_threshold);
  if (rep.tripwire_years.empty()) out << " none";
  for (int y : rep.tripwire_years) out << " " << y;
  out << "\n";
  if (!run.per_year.empty())
    out << fmt("final-year intervention index (%d): %.4f\n", run.per_year.back().year,
               run.per_year.back().p_intervention_mean);
}

service::HttpServer* g_server = nullptr;

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scenario analysis pipeline: ingest, analyze, run, report, serve", "themis"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Print pipeline stages to stderr");

  std::string model_path, csv_path, output, run_path;

  auto* validate_cmd = app.add_subcommand("validate", "Validate a model document");
  validate_cmd->add_option("model", model_path, "Model JSON")->required();

  auto* ingest_cmd = app.add_subcommand("ingest", "Merge a parameter_id,domain,year,value CSV into a model");
  ingest_cmd->add_option("model", model_path, "Model JSON")->required();
  ingest_cmd->add_option("csv", csv_path, "Series CSV")->required();
  ingest_cmd->add_option("-o,--output", output, "Output model JSON")->required();

  double variance_threshold = 0.90, r_threshold = 0.3;
  std::size_t max_vars = 7;
  bool as_json = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Print key variables and the sign matrix");
  analyze_cmd->add_option("model", model_path, "Model JSON")->required();
  analyze_cmd->add_option("--variance-threshold", variance_threshold, "Cumulative variance to retain")
      ->check(CLI::Range(0.0, 1.0));
  analyze_cmd->add_option("--max-vars", max_vars, "Maximum number of key variables")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--r-threshold", r_threshold, "Lagged correlation needed for a sign")
      ->check(CLI::Range(0.0, 1.0));
  analyze_cmd->add_flag("--json", as_json, "Machine-readable output");

  scenario::RunConfig cfg;
  std::optional<int> horizon;
  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline");
  run_cmd->add_option("model", model_path, "Model JSON")->required();
  run_cmd->add_option("--seed", cfg.seed, "Random seed");
  run_cmd->add_option("--samples", cfg.samples, "Monte Carlo samples per year")->check(CLI::Range(1, 100000000));
  run_cmd->add_option("--horizon", horizon, "Horizon in years (default: the model's)")->check(CLI::Range(1, 1000));
  run_cmd->add_option("--tripwire", cfg.tripwire, "Tripwire threshold")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--variance-threshold", cfg.variance_threshold, "Cumulative variance to retain")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--r-threshold", cfg.r_threshold, "Lagged correlation needed for a sign")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--trend-window", cfg.trend_window, "Years used by each trend fit")->check(CLI::Range(2, 10000));
  run_cmd->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");
  run_cmd->add_option("-o,--output", output, "Write the run record here");
  run_cmd->add_flag("--json", as_json, "Print the run record instead of the table");
  run_cmd->add_flag("--timestamps", cfg.timestamps, "Record start and finish times");

  std::optional<double> report_tripwire;
  auto* report_cmd = app.add_subcommand("report", "Intervention report for a saved run");
  report_cmd->add_option("run", run_path, "Run record JSON")->required();
  report_cmd->add_option("--tripwire", report_tripwire, "Tripwire threshold (default: the run's)")
      ->check(CLI::Range(0.0, 1.0));
  report_cmd->add_flag("--json", as_json, "Machine-readable output");

  service::ServiceConfig svc = service::config_from_env();
  std::string data_dir;
  std::vector<std::string> preload;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");
  serve_cmd->add_option("--host", svc.host, "Listen address (env THEMIS_HOST)");
  serve_cmd->add_option("--port", svc.port, "Listen port (env THEMIS_PORT)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--data-dir", data_dir, "Persist run records here");
  serve_cmd->add_option("--sample-cap", svc.sample_cap, "Largest sample count accepted per run")
      ->check(CLI::PositiveNumber);
  serve_cmd->add_option("--model", preload, "Model JSON to load at startup (repeatable)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate_cmd) {
      const auto m = load_region_model(model_path);
      out << fmt("ok: %s, %zu parameters in %zu domains, %zu series, %zu actors, %zu scenarios\n",
                 m.region_name.c_str(), m.parameters.size(), m.domains().size(), m.series.size(), m.actors.size(),
                 m.scenarios.size());
    } else if (*ingest_cmd) {
      const auto m = ingest_series(load_region_model(model_path), csv_path);
      save_region_model(m, output);
      std::size_t rows = 0;
      for (const auto& s : m.series) rows += s.observations.size();
      out << fmt("wrote %s: %zu series, %zu observations\n", output.c_str(), m.series.size(), rows);
    } else if (*analyze_cmd) {
      const auto m = load_region_model(model_path);
      const auto panel = analysis::standardize(m.series);
      const auto pca = analysis::pca(panel);
      const auto keys = analysis::select_key_variables(pca, panel, variance_threshold, max_vars);
      const auto signs = analysis::estimate_signs(panel, keys, m.adjacency ? &*m.adjacency : nullptr, r_threshold);
      if (as_json) {
        out << json{{"key_variables", analysis::to_json(keys)}, {"sign_matrix", analysis::to_json(signs)}}.dump(2)
            << "\n";
      } else {
        out << fmt("%zu components retained (variance threshold %.2f), %zu key variables:\n",
                   keys.components_retained, variance_threshold, keys.selected.size());
        for (const auto& n : keys.trace)
          out << fmt("  %-22s component %zu  loading %+.3f  explained %.3f\n", n.variable.c_str(), n.component + 1,
                     n.loading, n.explained);
        out << "\nsign matrix (row affects column one year later):\n" << analysis::format_sign_table(signs);
      }
    } else if (*run_cmd) {
      cfg.horizon_years = horizon;
      const auto m = load_region_model(model_path);
      const auto result = scenario::run_pipeline(m, cfg);
      if (verbose)
        for (const auto& s : result.stages_executed) err << "stage " << s << " done\n";
      const json record = scenario::to_json(result);
      if (!output.empty()) write_json(record, output);
      if (as_json) {
        out << record.dump(2) << "\n";
      } else {
        out << fmt("%s: seed %llu, %d samples per year, theory %s\n", result.region_name.c_str(),
                   static_cast<unsigned long long>(cfg.seed), cfg.samples, result.theory.c_str());
        print_report(scenario::compute_intervention_index(result, cfg.tripwire), result, out);
        out << "run id: " << result.run_id << "\n";
      }
    } else if (*report_cmd) {
      const auto result = scenario::run_from_json(read_json(run_path));
      const auto rep = scenario::compute_intervention_index(result, report_tripwire.value_or(result.config.tripwire));
      if (as_json) {
        out << scenario::to_json(rep).dump(2) << "\n";
      } else {
        out << "run " << result.run_id << " (" << result.region_name << ")\n";
        print_report(rep, result, out);
        for (const auto& [year, drivers] : rep.top_drivers) {
          out << fmt("drivers %d:", year);
          for (const auto& d : drivers) out << fmt(" %s %.4f", d.root.c_str(), d.delta);
          out << "\n";
        }
      }
    } else if (*serve_cmd) {
      if (!data_dir.empty()) svc.data_dir = data_dir;
      service::Session session(svc);
      for (const auto& path : preload)
        out << "loaded model " << session.add_model(load_region_model(path)) << " from " << path << "\n";
      service::HttpServer server(session);
      const int port = server.bind(svc.host, svc.port);
      if (port < 0) throw IoError("cannot listen on " + svc.host + ":" + std::to_string(svc.port));
      out << "listening on http://" << svc.host << ":" << port << "\n" << std::flush;
      g_server = &server;
      std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
      });
      server.listen();
      g_server = nullptr;
    }
    return 0;
  } catch (const Error& e) {
    err << "error [" << e.code() << "]";
    if (!e.path().empty()) err << " at " << e.path();
    err << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace themis::cli
