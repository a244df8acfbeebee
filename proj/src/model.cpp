#include "themis/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "themis/error.hpp"

namespace themis {

using nlohmann::json;

// ---------------------------------------------------------------------------
// AdjacencyMatrix

AdjacencyMatrix::AdjacencyMatrix(std::vector<std::string> variables)
    : variables_(std::move(variables)), cells_(variables_.size() * variables_.size(), 0) {
  for (std::size_t i = 0; i < variables_.size(); ++i) cells_[i * variables_.size() + i] = 1;
}

bool AdjacencyMatrix::related(const std::string& a, const std::string& b) const {
  auto i = index_of(a);
  auto j = index_of(b);
  return i && j && related(*i, *j);
}

void AdjacencyMatrix::set(std::size_t i, std::size_t j, bool value) {
  if (i == j) return;  // diagonal is fixed
  cells_[i * variables_.size() + j] = value ? 1 : 0;
}

std::optional<std::size_t> AdjacencyMatrix::index_of(const std::string& id) const {
  auto it = std::find(variables_.begin(), variables_.end(), id);
  if (it == variables_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variables_.begin());
}

std::size_t AdjacencyMatrix::count_related() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------
// ActorType

ActorType ActorType::parse(const std::string& s) {
  if (s == "A") return {Kind::A, {}};
  if (s == "B") return {Kind::B, {}};
  if (s == "C") return {Kind::C, {}};
  return {Kind::other, s};
}

std::string ActorType::label() const {
  switch (kind) {
    case Kind::A: return "A";
    case Kind::B: return "B";
    case Kind::C: return "C";
    case Kind::other: return name;
  }
  return name;
}

// ---------------------------------------------------------------------------
// RegionModel lookups

const ParameterDefinition* RegionModel::find_parameter(const std::string& id) const {
  for (const auto& p : parameters)
    if (p.id == id) return &p;
  return nullptr;
}

const ParameterSeries* RegionModel::find_series(const std::string& id) const {
  for (const auto& s : series)
    if (s.parameter == id) return &s;
  return nullptr;
}

const ActorSpec* RegionModel::find_actor(const std::string& id) const {
  for (const auto& a : actors)
    if (a.id == id) return &a;
  return nullptr;
}

std::vector<std::string> RegionModel::domains() const {
  std::vector<std::string> out;
  for (const auto& p : parameters)
    if (std::find(out.begin(), out.end(), p.domain) == out.end()) out.push_back(p.domain);
  return out;
}

int RegionModel::last_observed_year() const {
  int last = 0;
  bool any = false;
  for (const auto& s : series) {
    if (s.observations.empty()) continue;
    last = any ? std::max(last, s.observations.back().year) : s.observations.back().year;
    any = true;
  }
  if (!any) throw DomainError("model has no observations");
  return last;
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::le: return "<=";
    case Relation::eq: return "=";
    case Relation::ge: return ">=";
  }
  return "?";
}

std::string to_string(Penalize p) {
  switch (p) {
    case Penalize::under: return "under";
    case Penalize::over: return "over";
    case Penalize::both: return "both";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// JSON helpers

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing required key '") + key + "'", child(path, key));
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError("expected a number", path);
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError("value must be finite", path);
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError("expected an integer", path);
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError("expected a string", path);
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError("expected an array", path);
  return j;
}

std::string optional_string(const json& obj, const char* key, const std::string& path, std::string fallback = {}) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return as_string(*it, child(path, key));
}

Coefficients coefficients_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError("expected an object of coefficients", path);
  Coefficients out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = as_number(it.value(), child(path, it.key()));
  return out;
}

Relation relation_from_string(const std::string& s, const std::string& path) {
  if (s == "<=" || s == "le") return Relation::le;
  if (s == "=" || s == "==" || s == "eq") return Relation::eq;
  if (s == ">=" || s == "ge") return Relation::ge;
  throw ParseError("unknown relation '" + s + "'", path);
}

Penalize penalize_from_string(const std::string& s, const std::string& path) {
  if (s == "under") return Penalize::under;
  if (s == "over") return Penalize::over;
  if (s == "both") return Penalize::both;
  throw ParseError("unknown penalize mode '" + s + "'", path);
}

json parameter_to_json(const ParameterDefinition& p) {
  json j = {{"id", p.id}, {"domain", p.domain}, {"units", p.units}, {"display_name", p.display_name}};
  if (p.lower) j["lower"] = *p.lower;
  if (p.upper) j["upper"] = *p.upper;
  return j;
}

ParameterDefinition parameter_from_json(const json& j, const std::string& path) {
  ParameterDefinition p;
  p.id = as_string(require(j, "id", path), child(path, "id"));
  p.domain = as_string(require(j, "domain", path), child(path, "domain"));
  p.units = optional_string(j, "units", path);
  p.display_name = optional_string(j, "display_name", path, p.id);
  if (auto it = j.find("lower"); it != j.end() && !it->is_null()) p.lower = as_number(*it, child(path, "lower"));
  if (auto it = j.find("upper"); it != j.end() && !it->is_null()) p.upper = as_number(*it, child(path, "upper"));
  return p;
}

json series_to_json(const ParameterSeries& s) {
  json obs = json::array();
  for (const auto& o : s.observations) obs.push_back(json::array({o.year, o.value}));
  return {{"parameter", s.parameter}, {"observations", obs}};
}

ParameterSeries series_from_json(const json& j, const std::string& path) {
  ParameterSeries s;
  s.parameter = as_string(require(j, "parameter", path), child(path, "parameter"));
  const std::string obs_path = child(path, "observations");
  const json& obs = as_array(require(j, "observations", path), obs_path);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string p = child(obs_path, i);
    const json& o = obs[i];
    if (o.is_array()) {
      if (o.size() != 2) throw ParseError("observation must be [year, value]", p);
      s.observations.push_back({as_int(o[0], child(p, 0)), as_number(o[1], child(p, 1))});
    } else {
      s.observations.push_back({as_int(require(o, "year", p), child(p, "year")),
                                as_number(require(o, "value", p), child(p, "value"))});
    }
  }
  return s;
}

json adjacency_to_json(const AdjacencyMatrix& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.size(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < a.size(); ++k) row.push_back(a.related(i, k) ? 1 : 0);
    rows.push_back(row);
  }
  return {{"variables", a.variables()}, {"related", rows}};
}

AdjacencyMatrix adjacency_from_json(const json& j, const std::string& path) {
  const std::string vpath = child(path, "variables");
  const json& vars = as_array(require(j, "variables", path), vpath);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < vars.size(); ++i) ids.push_back(as_string(vars[i], child(vpath, i)));
  const std::string rpath = child(path, "related");
  const json& rows = as_array(require(j, "related", path), rpath);
  if (rows.size() != ids.size())
    throw ValidationError("adjacency must be square with one row per variable", rpath);
  AdjacencyMatrix a(ids);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string row_path = child(rpath, i);
    const json& row = as_array(rows[i], row_path);
    if (row.size() != ids.size()) throw ValidationError("adjacency row has wrong length", row_path);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const json& cell = row[k];
      bool v = cell.is_boolean() ? cell.get<bool>() : as_number(cell, child(row_path, k)) != 0.0;
      if (i == k && !v) throw ValidationError("adjacency diagonal must be true", child(row_path, k));
      a.set(i, k, v);
    }
  }
  return a;
}

json constraint_to_json(const LinearConstraint& c) {
  json j = {{"coefficients", c.coefficients}, {"relation", to_string(c.relation)}};
  if (c.rhs_from) {
    j["rhs"] = {{"parameter", c.rhs_from->parameter}, {"scale", c.rhs_from->scale}, {"offset", c.rhs_from->offset}};
  } else {
    j["rhs"] = c.rhs;
  }
  return j;
}

LinearConstraint constraint_from_json(const json& j, const std::string& path) {
  LinearConstraint c;
  c.coefficients = coefficients_from_json(require(j, "coefficients", path), child(path, "coefficients"));
  c.relation = relation_from_string(as_string(require(j, "relation", path), child(path, "relation")),
                                    child(path, "relation"));
  const json& rhs = require(j, "rhs", path);
  const std::string rpath = child(path, "rhs");
  if (rhs.is_object()) {
    RhsBinding b;
    b.parameter = as_string(require(rhs, "parameter", rpath), child(rpath, "parameter"));
    if (auto it = rhs.find("scale"); it != rhs.end()) b.scale = as_number(*it, child(rpath, "scale"));
    if (auto it = rhs.find("offset"); it != rhs.end()) b.offset = as_number(*it, child(rpath, "offset"));
    c.rhs_from = b;
  } else {
    c.rhs = as_number(rhs, rpath);
  }
  return c;
}

json goal_to_json(const Goal& g) {
  return {{"name", g.name},     {"expression", g.expression},         {"target", g.target},
          {"weight", g.weight}, {"penalize", to_string(g.penalize)}};
}

Goal goal_from_json(const json& j, const std::string& path) {
  Goal g;
  g.name = optional_string(j, "name", path);
  g.expression = coefficients_from_json(require(j, "expression", path), child(path, "expression"));
  g.target = as_number(require(j, "target", path), child(path, "target"));
  if (auto it = j.find("weight"); it != j.end()) g.weight = as_number(*it, child(path, "weight"));
  if (auto it = j.find("penalize"); it != j.end())
    g.penalize = penalize_from_string(as_string(*it, child(path, "penalize")), child(path, "penalize"));
  return g;
}

}  // namespace

json to_json(const ActorSpec& a) {
  json goals = json::array();
  for (const auto& g : a.goals) goals.push_back(goal_to_json(g));
  json constraints = json::array();
  for (const auto& c : a.constraints) constraints.push_back(constraint_to_json(c));
  json bounds = json::object();
  for (const auto& [id, b] : a.bounds) {
    json jb = {{"lower", b.lower}};
    if (b.upper) jb["upper"] = *b.upper;
    bounds[id] = jb;
  }
  return {{"id", a.id},         {"type", a.actor_type.label()}, {"objective", a.objective_coefficients},
          {"goals", goals},     {"constraints", constraints},   {"bounds", bounds},
          {"metadata", a.metadata}};
}

ActorSpec actor_from_json(const json& j, const std::string& path) {
  ActorSpec a;
  a.id = as_string(require(j, "id", path), child(path, "id"));
  a.actor_type = ActorType::parse(as_string(require(j, "type", path), child(path, "type")));
  if (auto it = j.find("objective"); it != j.end())
    a.objective_coefficients = coefficients_from_json(*it, child(path, "objective"));
  const std::string gpath = child(path, "goals");
  const json& goals = as_array(require(j, "goals", path), gpath);
  for (std::size_t i = 0; i < goals.size(); ++i) a.goals.push_back(goal_from_json(goals[i], child(gpath, i)));
  if (auto it = j.find("constraints"); it != j.end()) {
    const std::string cpath = child(path, "constraints");
    const json& cs = as_array(*it, cpath);
    for (std::size_t i = 0; i < cs.size(); ++i) a.constraints.push_back(constraint_from_json(cs[i], child(cpath, i)));
  }
  if (auto it = j.find("bounds"); it != j.end()) {
    const std::string bpath = child(path, "bounds");
    if (!it->is_object()) throw ParseError("expected an object", bpath);
    for (auto b = it->begin(); b != it->end(); ++b) {
      const std::string p = child(bpath, b.key());
      VariableBound vb;
      if (auto lo = b->find("lower"); lo != b->end()) vb.lower = as_number(*lo, child(p, "lower"));
      if (auto hi = b->find("upper"); hi != b->end() && !hi->is_null()) vb.upper = as_number(*hi, child(p, "upper"));
      a.bounds[b.key()] = vb;
    }
  }
  if (auto it = j.find("metadata"); it != j.end() && !it->is_null()) a.metadata = *it;
  return a;
}

json to_json(const RegionModel& m) {
  json params = json::array();
  for (const auto& p : m.parameters) params.push_back(parameter_to_json(p));
  json series = json::array();
  for (const auto& s : m.series) series.push_back(series_to_json(s));
  json actors = json::array();
  for (const auto& a : m.actors) actors.push_back(to_json(a));
  json scenario;
  if (m.scenarios.size() == 1) {
    scenario = bbn::to_json(m.scenarios.front());
  } else {
    scenario = json::array();
    for (const auto& s : m.scenarios) scenario.push_back(bbn::to_json(s));
  }
  return {{"format_version", m.format_version},
          {"region_name", m.region_name},
          {"horizon_years", m.horizon_years},
          {"theory", m.theory},
          {"parameters", params},
          {"series", series},
          {"adjacency", m.adjacency ? adjacency_to_json(*m.adjacency) : json(nullptr)},
          {"actors", actors},
          {"scenario_template", scenario},
          {"metadata", m.metadata}};
}

RegionModel model_from_json(const json& doc) {
  const std::string root;
  RegionModel m;
  m.format_version = as_int(require(doc, "format_version", root), "/format_version");
  if (m.format_version != kFormatVersion)
    throw ValidationError("unsupported format_version " + std::to_string(m.format_version), "/format_version");
  m.region_name = as_string(require(doc, "region_name", root), "/region_name");
  if (auto it = doc.find("horizon_years"); it != doc.end()) m.horizon_years = as_int(*it, "/horizon_years");
  if (auto it = doc.find("theory"); it != doc.end()) m.theory = as_string(*it, "/theory");

  const json& params = as_array(require(doc, "parameters", root), "/parameters");
  for (std::size_t i = 0; i < params.size(); ++i)
    m.parameters.push_back(parameter_from_json(params[i], child("/parameters", i)));

  if (auto it = doc.find("series"); it != doc.end()) {
    const json& series = as_array(*it, "/series");
    for (std::size_t i = 0; i < series.size(); ++i)
      m.series.push_back(series_from_json(series[i], child("/series", i)));
  }
  if (auto it = doc.find("adjacency"); it != doc.end() && !it->is_null())
    m.adjacency = adjacency_from_json(*it, "/adjacency");

  const json& actors = as_array(require(doc, "actors", root), "/actors");
  for (std::size_t i = 0; i < actors.size(); ++i) m.actors.push_back(actor_from_json(actors[i], child("/actors", i)));

  const json& scenario = require(doc, "scenario_template", root);
  if (scenario.is_array()) {
    for (std::size_t i = 0; i < scenario.size(); ++i)
      m.scenarios.push_back(bbn::network_from_json(scenario[i], child("/scenario_template", i)));
  } else {
    m.scenarios.push_back(bbn::network_from_json(scenario, "/scenario_template"));
  }
  if (auto it = doc.find("metadata"); it != doc.end() && !it->is_null()) m.metadata = *it;

  validate(m);
  return m;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_parameter_refs(const RegionModel& m, const Coefficients& coeffs, const std::string& path) {
  for (const auto& [id, _] : coeffs)
    if (!m.find_parameter(id)) throw ValidationError("unknown parameter '" + id + "'", child(path, id));
}

void validate_actor(const RegionModel& m, const ActorSpec& a, const std::string& path) {
  if (a.id.empty()) throw ValidationError("actor id must be non-empty", child(path, "id"));
  check_parameter_refs(m, a.objective_coefficients, child(path, "objective"));
  if (a.goals.empty()) throw ValidationError("actor '" + a.id + "' must have at least one goal", child(path, "goals"));
  for (std::size_t g = 0; g < a.goals.size(); ++g) {
    const Goal& goal = a.goals[g];
    const std::string gp = child(child(path, "goals"), g);
    if (goal.expression.empty()) throw ValidationError("goal expression must be non-empty", child(gp, "expression"));
    check_parameter_refs(m, goal.expression, child(gp, "expression"));
    if (!(goal.weight > 0.0)) throw ValidationError("goal weight must be > 0", child(gp, "weight"));
    if (!std::isfinite(goal.target)) throw ValidationError("goal target must be finite", child(gp, "target"));
  }
  for (std::size_t c = 0; c < a.constraints.size(); ++c) {
    const LinearConstraint& lc = a.constraints[c];
    const std::string cp = child(child(path, "constraints"), c);
    check_parameter_refs(m, lc.coefficients, child(cp, "coefficients"));
    bool nonzero = std::any_of(lc.coefficients.begin(), lc.coefficients.end(),
                               [](const auto& kv) { return kv.second != 0.0; });
    if (!nonzero) throw ValidationError("constraint needs at least one nonzero coefficient", child(cp, "coefficients"));
    if (lc.rhs_from && !m.find_parameter(lc.rhs_from->parameter))
      throw ValidationError("unknown parameter '" + lc.rhs_from->parameter + "'", child(child(cp, "rhs"), "parameter"));
  }
  for (const auto& [id, b] : a.bounds) {
    const std::string bp = child(child(path, "bounds"), id);
    if (!m.find_parameter(id)) throw ValidationError("unknown parameter '" + id + "'", bp);
    if (b.upper && *b.upper < b.lower) throw ValidationError("upper bound below lower bound", bp);
  }
}

}  // namespace

void validate(const RegionModel& m) {
  if (m.format_version != kFormatVersion) throw ValidationError("unsupported format_version", "/format_version");
  if (m.horizon_years < 1) throw ValidationError("horizon_years must be >= 1", "/horizon_years");
  if (m.theory.empty()) throw ValidationError("theory must be non-empty", "/theory");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < m.parameters.size(); ++i) {
    const auto& p = m.parameters[i];
    const std::string path = child("/parameters", i);
    if (p.id.empty()) throw ValidationError("parameter id must be non-empty", child(path, "id"));
    if (p.domain.empty()) throw ValidationError("parameter '" + p.id + "' needs a domain", child(path, "domain"));
    if (!ids.insert(p.id).second) throw ValidationError("duplicate parameter id '" + p.id + "'", child(path, "id"));
    if (p.lower && p.upper && *p.upper < *p.lower)
      throw ValidationError("parameter '" + p.id + "' has upper < lower", path);
  }

  std::set<std::string> with_series;
  for (std::size_t i = 0; i < m.series.size(); ++i) {
    const auto& s = m.series[i];
    const std::string path = child("/series", i);
    if (!m.find_parameter(s.parameter))
      throw ValidationError("series references unknown parameter '" + s.parameter + "'", child(path, "parameter"));
    if (!with_series.insert(s.parameter).second)
      throw ValidationError("duplicate series for parameter '" + s.parameter + "'", child(path, "parameter"));
    for (std::size_t k = 0; k < s.observations.size(); ++k) {
      const std::string op = child(child(path, "observations"), k);
      if (!std::isfinite(s.observations[k].value)) throw ValidationError("observation value must be finite", op);
      if (k > 0 && s.observations[k].year <= s.observations[k - 1].year)
        throw ValidationError("years must be strictly increasing in series '" + s.parameter + "'", op);
    }
  }

  if (m.adjacency) {
    const auto& vars = m.adjacency->variables();
    std::set<std::string> seen;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const std::string path = child("/adjacency/variables", i);
      if (!m.find_parameter(vars[i])) throw ValidationError("unknown parameter '" + vars[i] + "'", path);
      if (!seen.insert(vars[i]).second) throw ValidationError("duplicate adjacency variable '" + vars[i] + "'", path);
      if (!m.adjacency->related(i, i)) throw ValidationError("adjacency diagonal must be true", path);
    }
  }

  if (m.actors.empty()) throw ValidationError("actors must be non-empty", "/actors");
  std::set<std::string> actor_ids;
  for (std::size_t i = 0; i < m.actors.size(); ++i) {
    const std::string path = child("/actors", i);
    if (!actor_ids.insert(m.actors[i].id).second)
      throw ValidationError("duplicate actor id '" + m.actors[i].id + "'", child(path, "id"));
    validate_actor(m, m.actors[i], path);
  }

  if (m.scenarios.empty()) throw ValidationError("scenario_template is required", "/scenario_template");
  std::set<std::string> scenario_ids;
  for (std::size_t s = 0; s < m.scenarios.size(); ++s) {
    const auto& net = m.scenarios[s];
    const std::string path = m.scenarios.size() == 1 ? std::string("/scenario_template")
                                                     : child("/scenario_template", s);
    if (!scenario_ids.insert(net.id).second) throw ValidationError("duplicate scenario id '" + net.id + "'", path);
    try {
      bbn::validate_network(net);
    } catch (const ValidationError& e) {
      throw ValidationError(e.what(), path + e.path());
    }
    for (std::size_t n = 0; n < net.nodes.size(); ++n) {
      const auto& node = net.nodes[n];
      if (!node.root_mapping) continue;
      const std::string mp = child(child(child(path, "nodes"), n), "root_mapping");
      const auto& rm = *node.root_mapping;
      if (rm.kind == bbn::RootMapping::Kind::parameter_trend && !m.find_parameter(rm.source))
        throw ValidationError("root mapping references unknown parameter '" + rm.source + "'", child(mp, "parameter"));
      if (rm.kind == bbn::RootMapping::Kind::actor_attainment && !m.find_actor(rm.source))
        throw ValidationError("root mapping references unknown actor '" + rm.source + "'", child(mp, "actor"));
    }
  }
}

// ---------------------------------------------------------------------------
// Files

RegionModel load_region_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
  return model_from_json(doc);
}

void save_region_model(const RegionModel& model, const std::filesystem::path& path) {
  validate(model);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file '" + path.string() + "'");
  out << to_json(model).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                          : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

RegionModel ingest_series_text(const RegionModel& model, const std::string& csv_text) {
  RegionModel out = model;
  std::istringstream in(csv_text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<std::string, std::map<int, double>> incoming;

  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    auto fields = split_csv(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"parameter_id", "domain", "year", "value"})
        throw ParseError("CSV header must be 'parameter_id,domain,year,value'", where);
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) throw ParseError("expected 4 fields", where);
    const std::string& id = fields[0];
    const ParameterDefinition* def = out.find_parameter(id);
    if (!def) throw ValidationError("unknown parameter id '" + id + "'", where);
    if (!fields[1].empty() && fields[1] != def->domain)
      throw ValidationError("domain '" + fields[1] + "' does not match parameter '" + id + "' (" + def->domain + ")",
                            where);
    int year = 0;
    {
      const auto& f = fields[2];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), year);
      if (ec != std::errc() || ptr != f.data() + f.size()) throw ParseError("year must be an integer", where);
    }
    double value = 0.0;
    {
      const auto& f = fields[3];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        throw ParseError("non-numeric value '" + f + "'", where);
      if (!std::isfinite(value)) throw ValidationError("value must be finite", where);
    }
    if (!incoming[id].emplace(year, value).second)
      throw ValidationError("duplicate year " + std::to_string(year) + " for parameter '" + id + "'", where);
  }
  if (!header_seen) throw ParseError("CSV is empty", "line 1");

  for (const auto& def : model.parameters) {
    auto found = incoming.find(def.id);
    if (found == incoming.end()) continue;
    const std::string& id = def.id;
    const auto& rows = found->second;
    auto it = std::find_if(out.series.begin(), out.series.end(), [&](const auto& s) { return s.parameter == id; });
    if (it == out.series.end()) {
      out.series.push_back({id, {}});
      it = std::prev(out.series.end());
    }
    for (const auto& o : it->observations) {
      if (rows.count(o.year))
        throw ValidationError("duplicate year " + std::to_string(o.year) + " for parameter '" + id + "'", id);
    }
    for (const auto& [year, value] : rows) it->observations.push_back({year, value});
    std::sort(it->observations.begin(), it->observations.end(),
              [](const Observation& a, const Observation& b) { return a.year < b.year; });
  }
  validate(out);
  return out;
}

RegionModel ingest_series(const RegionModel& model, const std::filesystem::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw IoError("cannot open CSV '" + csv.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ingest_series_text(model, buffer.str());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fingerprint(const RegionModel& model) { return fnv1a_hex(to_json(model).dump()); }

}  // namespace themis
