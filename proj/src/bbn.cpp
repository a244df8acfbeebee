#include "themis/bbn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "themis/error.hpp"

namespace themis::bbn {

using nlohmann::json;

std::size_t ScenarioNetwork::index_of(const std::string& node_id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == node_id) return i;
  throw ValidationError("unknown node '" + node_id + "'");
}

std::vector<std::pair<std::string, std::string>> ScenarioNetwork::edges() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& n : nodes)
    for (const auto& p : n.parents) out.emplace_back(p, n.id);
  return out;
}

double PosteriorReport::probability(const std::string& state) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == state) return marginal.at(i);
  throw ValidationError("node '" + query_node + "' has no state '" + state + "'");
}

namespace {

std::string node_path(std::size_t i) { return "/nodes/" + std::to_string(i); }

std::size_t find_node(const ScenarioNetwork& net, const std::string& id) {
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (net.nodes[i].id == id) return i;
  return net.nodes.size();
}

std::size_t row_count(const ScenarioNetwork& net, const BbnNode& node) {
  std::size_t rows = 1;
  for (const auto& p : node.parents) rows *= net.nodes[find_node(net, p)].states.size();
  return rows;
}

}  // namespace

std::vector<std::string> topological_order(const ScenarioNetwork& net) {
  const std::size_t n = net.nodes.size();
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& p : net.nodes[i].parents) {
      const std::size_t pi = find_node(net, p);
      if (pi == n) throw ValidationError("node '" + net.nodes[i].id + "' has unknown parent '" + p + "'", node_path(i));
      children[pi].push_back(i);
      ++indegree[i];
    }
  std::vector<std::string> order;
  std::vector<bool> done(n, false);
  // Repeatedly take the earliest-declared ready node, for a stable order.
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && indegree[i] == 0) {
        pick = i;
        break;
      }
    if (pick == n) break;
    done[pick] = true;
    order.push_back(net.nodes[pick].id);
    for (std::size_t c : children[pick]) --indegree[c];
  }
  if (order.size() == n) return order;

  // Walk parent links among the leftover nodes until one repeats.
  std::size_t start = 0;
  while (done[start]) ++start;
  std::vector<std::size_t> trail;
  std::vector<int> seen_at(n, -1);
  std::size_t cur = start;
  while (seen_at[cur] < 0) {
    seen_at[cur] = static_cast<int>(trail.size());
    trail.push_back(cur);
    for (const auto& p : net.nodes[cur].parents) {
      const std::size_t pi = find_node(net, p);
      if (!done[pi]) {
        cur = pi;
        break;
      }
    }
  }
  std::vector<std::string> cycle;
  for (std::size_t k = static_cast<std::size_t>(seen_at[cur]); k < trail.size(); ++k)
    cycle.push_back(net.nodes[trail[k]].id);
  std::reverse(cycle.begin(), cycle.end());
  std::string listing = "[";
  for (std::size_t k = 0; k < cycle.size(); ++k) listing += (k ? "," : "") + cycle[k];
  listing += "]";
  throw ValidationError("network has a cycle " + listing, "/nodes");
}

void validate_network(const ScenarioNetwork& net) {
  if (net.nodes.empty()) throw ValidationError("network has no nodes", "/nodes");
  if (!(net.weight > 0.0) || !std::isfinite(net.weight)) throw ValidationError("scenario weight must be > 0", "/weight");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const auto& node = net.nodes[i];
    if (node.id.empty()) throw ValidationError("node id must be non-empty", node_path(i) + "/id");
    if (!ids.insert(node.id).second) throw ValidationError("duplicate node id '" + node.id + "'", node_path(i) + "/id");
    if (node.states.size() < 2)
      throw ValidationError("node '" + node.id + "' needs at least 2 states", node_path(i) + "/states");
    std::set<std::string> st(node.states.begin(), node.states.end());
    if (st.size() != node.states.size())
      throw ValidationError("node '" + node.id + "' has duplicate states", node_path(i) + "/states");
  }
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const auto& node = net.nodes[i];
    std::set<std::string> seen;
    for (const auto& p : node.parents) {
      if (find_node(net, p) == net.nodes.size())
        throw ValidationError("node '" + node.id + "' has unknown parent '" + p + "'", node_path(i) + "/parents");
      if (p == node.id) throw ValidationError("node '" + node.id + "' is its own parent", node_path(i) + "/parents");
      if (!seen.insert(p).second)
        throw ValidationError("node '" + node.id + "' lists parent '" + p + "' twice", node_path(i) + "/parents");
    }
  }
  topological_order(net);

  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const auto& node = net.nodes[i];
    const std::size_t k = node.states.size();
    const std::size_t rows = row_count(net, node);
    const std::string cpath = node_path(i) + "/cpt";
    if (node.cpt.size() != rows * k)
      throw ValidationError("CPT of '" + node.id + "' has " + std::to_string(node.cpt.size()) + " entries, expected " +
                                std::to_string(rows * k) + " (missing rows)",
                            cpath);
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        const double p = node.cpt[r * k + s];
        if (!std::isfinite(p) || p < 0.0 || p > 1.0)
          throw ValidationError("CPT of '" + node.id + "' has probability outside [0,1]",
                                cpath + "/" + std::to_string(r));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("CPT row " + std::to_string(r) + " of '" + node.id + "' sums to " +
                                  std::to_string(sum) + ", not 1 (normalization)",
                              cpath + "/" + std::to_string(r));
    }
    if (node.root_mapping) {
      const std::string mpath = node_path(i) + "/root_mapping";
      if (!node.is_root())
        throw ValidationError("root_mapping on non-root node '" + node.id + "'", mpath);
      if (k != 2) throw ValidationError("root_mapping requires a binary node", mpath);
      const auto& m = *node.root_mapping;
      if (m.kind == RootMapping::Kind::parameter_trend && !(m.scale > 0.0))
        throw ValidationError("root mapping scale must be > 0", mpath + "/scale");
      if (m.kind == RootMapping::Kind::constant && !(m.p >= 0.0 && m.p <= 1.0))
        throw ValidationError("constant root probability must be in [0,1]", mpath + "/p");
      if (m.kind != RootMapping::Kind::constant && m.source.empty())
        throw ValidationError("root mapping needs a source id", mpath);
    }
  }
  const std::size_t iv = find_node(net, net.intervention_node);
  if (net.intervention_node.empty() || iv == net.nodes.size())
    throw ValidationError("intervention node '" + net.intervention_node + "' does not exist", "/intervention_node");
  if (net.nodes[iv].states.size() != 2)
    throw ValidationError("intervention node must be binary", "/intervention_node");
}

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double trend_probability(const RootMapping& m, double mean) {
  const double z = (m.threshold - mean) / m.scale;
  return m.direction == Direction::below ? logistic(z) : logistic(-z);
}

void set_root_prior(ScenarioNetwork& net, const std::string& root, double p) {
  BbnNode& node = net.node(root);
  if (!node.is_root()) throw ValidationError("node '" + root + "' is not a root");
  if (node.states.size() != 2) throw ValidationError("node '" + root + "' is not binary");
  p = std::clamp(p, 0.0, 1.0);
  node.cpt = {p, 1.0 - p};
}

double root_prior(const ScenarioNetwork& net, const std::string& root) {
  const BbnNode& node = net.node(root);
  if (!node.is_root()) throw ValidationError("node '" + root + "' is not a root");
  return node.cpt.at(0);
}

ScenarioNetwork map_roots(const ScenarioNetwork& net, const std::map<std::string, Projection>& trends,
                          const std::map<std::string, double>& attainments) {
  ScenarioNetwork out = net;
  for (auto& node : out.nodes) {
    if (!node.root_mapping) continue;
    const RootMapping& m = *node.root_mapping;
    double p = m.p;
    switch (m.kind) {
      case RootMapping::Kind::parameter_trend: {
        auto it = trends.find(m.source);
        if (it == trends.end())
          throw ValidationError("no projection for parameter '" + m.source + "' (root '" + node.id + "')");
        p = trend_probability(m, it->second.mean);
        break;
      }
      case RootMapping::Kind::actor_attainment: {
        auto it = attainments.find(m.source);
        if (it == attainments.end())
          throw ValidationError("no attainment for actor '" + m.source + "' (root '" + node.id + "')");
        p = m.invert ? 1.0 - it->second : it->second;
        break;
      }
      case RootMapping::Kind::constant:
        break;
    }
    p = std::clamp(p, 0.0, 1.0);
    node.cpt = {p, 1.0 - p};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factors and variable elimination

namespace {

struct Factor {
  std::vector<std::size_t> vars;  // node indices, first most significant
  std::vector<std::size_t> cards;
  std::vector<double> values;
};

Factor cpt_factor(const ScenarioNetwork& net, std::size_t i) {
  const BbnNode& node = net.nodes[i];
  Factor f;
  for (const auto& p : node.parents) {
    const std::size_t pi = net.index_of(p);
    f.vars.push_back(pi);
    f.cards.push_back(net.nodes[pi].states.size());
  }
  f.vars.push_back(i);
  f.cards.push_back(node.states.size());
  f.values = node.cpt;
  return f;
}

std::size_t position(const Factor& f, std::size_t var) {
  auto it = std::find(f.vars.begin(), f.vars.end(), var);
  return it == f.vars.end() ? f.vars.size() : static_cast<std::size_t>(it - f.vars.begin());
}

// Keep only entries where `var` takes `state`; the variable disappears.
Factor reduce(const Factor& f, std::size_t var, std::size_t state) {
  const std::size_t pos = position(f, var);
  if (pos == f.vars.size()) return f;
  Factor out;
  for (std::size_t k = 0; k < f.vars.size(); ++k)
    if (k != pos) {
      out.vars.push_back(f.vars[k]);
      out.cards.push_back(f.cards[k]);
    }
  std::size_t inner = 1;
  for (std::size_t k = pos + 1; k < f.cards.size(); ++k) inner *= f.cards[k];
  const std::size_t card = f.cards[pos];
  const std::size_t outer = f.values.size() / (inner * card);
  out.values.reserve(outer * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < inner; ++in) out.values.push_back(f.values[(o * card + state) * inner + in]);
  return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
  const std::size_t pos = position(f, var);
  Factor out;
  for (std::size_t k = 0; k < f.vars.size(); ++k)
    if (k != pos) {
      out.vars.push_back(f.vars[k]);
      out.cards.push_back(f.cards[k]);
    }
  std::size_t inner = 1;
  for (std::size_t k = pos + 1; k < f.cards.size(); ++k) inner *= f.cards[k];
  const std::size_t card = f.cards[pos];
  const std::size_t outer = f.values.size() / (inner * card);
  out.values.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t s = 0; s < card; ++s)
      for (std::size_t in = 0; in < inner; ++in) out.values[o * inner + in] += f.values[(o * card + s) * inner + in];
  return out;
}

Factor product(const Factor& a, const Factor& b) {
  Factor out = a;
  for (std::size_t k = 0; k < b.vars.size(); ++k)
    if (position(out, b.vars[k]) == out.vars.size()) {
      out.vars.push_back(b.vars[k]);
      out.cards.push_back(b.cards[k]);
    }
  std::size_t total = 1;
  for (std::size_t c : out.cards) total *= c;
  out.values.assign(total, 0.0);

  // Strides of a and b expressed in the output variable order.
  auto strides_for = [&](const Factor& f) {
    std::vector<std::size_t> own(f.vars.size());
    std::size_t s = 1;
    for (std::size_t k = f.vars.size(); k-- > 0;) {
      own[k] = s;
      s *= f.cards[k];
    }
    std::vector<std::size_t> mapped(out.vars.size(), 0);
    for (std::size_t k = 0; k < f.vars.size(); ++k) mapped[position(out, f.vars[k])] = own[k];
    return mapped;
  };
  const auto sa = strides_for(a);
  const auto sb = strides_for(b);
  std::vector<std::size_t> idx(out.vars.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    out.values[flat] = a.values[ia] * b.values[ib];
    for (std::size_t k = out.vars.size(); k-- > 0;) {
      if (++idx[k] < out.cards[k]) {
        ia += sa[k];
        ib += sb[k];
        break;
      }
      ia -= sa[k] * (out.cards[k] - 1);
      ib -= sb[k] * (out.cards[k] - 1);
      idx[k] = 0;
    }
  }
  return out;
}

std::vector<std::size_t> check_evidence(const ScenarioNetwork& net, const Evidence& evidence) {
  std::vector<std::size_t> state(net.nodes.size(), SIZE_MAX);
  for (const auto& [id, value] : evidence) {
    const std::size_t i = find_node(net, id);
    if (i == net.nodes.size()) throw ValidationError("evidence names unknown node '" + id + "'");
    const auto& st = net.nodes[i].states;
    auto it = std::find(st.begin(), st.end(), value);
    if (it == st.end()) throw ValidationError("node '" + id + "' has no state '" + value + "'");
    state[i] = static_cast<std::size_t>(it - st.begin());
  }
  return state;
}

PosteriorReport finish(const ScenarioNetwork& net, std::size_t q, const Evidence& evidence, std::vector<double> unnorm) {
  PosteriorReport r;
  r.query_node = net.nodes[q].id;
  r.states = net.nodes[q].states;
  r.evidence = evidence;
  double total = 0.0;
  for (double v : unnorm) total += v;
  r.evidence_probability = total;
  if (!(total > 0.0)) {
    r.consistent = false;
    return r;
  }
  for (double& v : unnorm) v /= total;
  r.marginal = std::move(unnorm);
  return r;
}

}  // namespace

PosteriorReport infer(const ScenarioNetwork& net, const std::string& query, const Evidence& evidence,
                      std::span<const std::string> order) {
  const std::size_t n = net.nodes.size();
  const std::size_t q = find_node(net, query);
  if (q == n) throw ValidationError("unknown query node '" + query + "'");
  const auto ev = check_evidence(net, evidence);

  // Only ancestors of the query and evidence nodes matter; barren nodes sum to 1.
  std::vector<bool> relevant(n, false);
  std::vector<std::size_t> stack{q};
  for (std::size_t i = 0; i < n; ++i)
    if (ev[i] != SIZE_MAX) stack.push_back(i);
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (relevant[i]) continue;
    relevant[i] = true;
    for (const auto& p : net.nodes[i].parents) stack.push_back(net.index_of(p));
  }

  std::vector<Factor> factors;
  for (std::size_t i = 0; i < n; ++i) {
    if (!relevant[i]) continue;
    Factor f = cpt_factor(net, i);
    for (std::size_t k = 0; k < n; ++k)
      if (ev[k] != SIZE_MAX && k != q) f = reduce(f, k, ev[k]);
    factors.push_back(std::move(f));
  }

  std::vector<std::size_t> hidden;
  for (std::size_t i = 0; i < n; ++i)
    if (relevant[i] && i != q && ev[i] == SIZE_MAX) hidden.push_back(i);

  auto eliminate = [&](std::size_t var) {
    Factor joined;
    bool any = false;
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (position(f, var) == f.vars.size()) {
        rest.push_back(std::move(f));
      } else if (!any) {
        joined = std::move(f);
        any = true;
      } else {
        joined = product(joined, f);
      }
    }
    if (any) rest.push_back(sum_out(joined, var));
    factors = std::move(rest);
  };

  std::vector<bool> gone(n, false);
  for (const auto& id : order) {
    const std::size_t i = find_node(net, id);
    if (i == n) throw ValidationError("elimination order names unknown node '" + id + "'");
    if (gone[i] || std::find(hidden.begin(), hidden.end(), i) == hidden.end()) continue;
    eliminate(i);
    gone[i] = true;
  }
  for (;;) {
    // Min-degree on the current interaction graph; earliest node wins ties.
    std::size_t best = n, best_degree = SIZE_MAX;
    for (std::size_t v : hidden) {
      if (gone[v]) continue;
      std::set<std::size_t> nb;
      for (const auto& f : factors)
        if (position(f, v) != f.vars.size())
          for (std::size_t u : f.vars)
            if (u != v) nb.insert(u);
      if (nb.size() < best_degree) {
        best_degree = nb.size();
        best = v;
      }
    }
    if (best == n) break;
    eliminate(best);
    gone[best] = true;
  }

  Factor result;
  result.values = {1.0};
  for (const auto& f : factors) result = product(result, f);
  std::vector<double> unnorm(net.nodes[q].states.size(), 0.0);
  if (ev[q] != SIZE_MAX) {
    Factor reduced = reduce(result, q, ev[q]);
    unnorm[ev[q]] = reduced.values.at(0);
  } else {
    const std::size_t pos = position(result, q);
    if (pos == result.vars.size()) throw DomainError("query variable vanished during elimination");
    for (std::size_t s = 0; s < unnorm.size(); ++s) unnorm[s] = reduce(result, q, s).values.at(0);
  }
  return finish(net, q, evidence, std::move(unnorm));
}

PosteriorReport enumerate_joint(const ScenarioNetwork& net, const std::string& query, const Evidence& evidence) {
  const std::size_t n = net.nodes.size();
  const std::size_t q = find_node(net, query);
  if (q == n) throw ValidationError("unknown query node '" + query + "'");
  const auto ev = check_evidence(net, evidence);
  std::size_t total = 1;
  for (const auto& node : net.nodes) {
    if (total > kMaxJointStates / node.states.size())
      throw DomainError("joint state space exceeds 2^20 configurations");
    total *= node.states.size();
  }
  std::vector<std::vector<std::size_t>> parents(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& p : net.nodes[i].parents) parents[i].push_back(net.index_of(p));

  std::vector<double> unnorm(net.nodes[q].states.size(), 0.0);
  std::vector<std::size_t> assign(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    bool consistent = true;
    for (std::size_t i = 0; i < n && consistent; ++i) consistent = ev[i] == SIZE_MAX || ev[i] == assign[i];
    if (consistent) {
      double p = 1.0;
      for (std::size_t i = 0; i < n && p != 0.0; ++i) {
        std::size_t row = 0;
        for (std::size_t pi : parents[i]) row = row * net.nodes[pi].states.size() + assign[pi];
        p *= net.nodes[i].cpt[row * net.nodes[i].states.size() + assign[i]];
      }
      unnorm[assign[q]] += p;
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++assign[i] < net.nodes[i].states.size()) break;
      assign[i] = 0;
    }
  }
  return finish(net, q, evidence, std::move(unnorm));
}

double intervention_probability(const ScenarioNetwork& net) {
  return infer(net, net.intervention_node).marginal.at(0);
}

std::vector<SensitivityPoint> sensitivity(const ScenarioNetwork& net, const std::string& root,
                                          std::span<const double> deltas) {
  const std::size_t i = find_node(net, root);
  if (i == net.nodes.size()) throw ValidationError("unknown node '" + root + "'");
  if (!net.nodes[i].is_root()) throw ValidationError("node '" + root + "' is not a root");
  if (net.nodes[i].states.size() != 2) throw ValidationError("node '" + root + "' is not binary");
  const double base = root_prior(net, root);
  std::vector<SensitivityPoint> out;
  ScenarioNetwork work = net;
  for (double d : deltas) {
    const double p = std::clamp(base + d, 0.0, 1.0);
    set_root_prior(work, root, p);
    out.push_back({p, intervention_probability(work)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const RootMapping& m) {
  switch (m.kind) {
    case RootMapping::Kind::parameter_trend:
      return {{"kind", "parameter_trend"},
              {"parameter", m.source},
              {"threshold", m.threshold},
              {"scale", m.scale},
              {"direction", m.direction == Direction::below ? "below" : "above"}};
    case RootMapping::Kind::actor_attainment:
      return {{"kind", "actor_attainment"}, {"actor", m.source}, {"invert", m.invert}};
    case RootMapping::Kind::constant:
      return {{"kind", "constant"}, {"p", m.p}};
  }
  return nullptr;
}

namespace {

const json& need(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ParseError("expected an object", path);
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing required key '") + key + "'", path + "/" + key);
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError("expected a number", path);
  return j.get<double>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError("expected a string", path);
  return j.get<std::string>();
}

}  // namespace

RootMapping root_mapping_from_json(const json& j, const std::string& path) {
  const std::string kind = text(need(j, "kind", path), path + "/kind");
  if (kind == "parameter_trend") {
    const std::string dir = j.contains("direction") ? text(j["direction"], path + "/direction") : "below";
    if (dir != "below" && dir != "above") throw ParseError("direction must be 'below' or 'above'", path + "/direction");
    return RootMapping::trend(text(need(j, "parameter", path), path + "/parameter"),
                              number(need(j, "threshold", path), path + "/threshold"),
                              number(need(j, "scale", path), path + "/scale"),
                              dir == "below" ? Direction::below : Direction::above);
  }
  if (kind == "actor_attainment") {
    bool invert = false;
    if (auto it = j.find("invert"); it != j.end()) {
      if (!it->is_boolean()) throw ParseError("expected a boolean", path + "/invert");
      invert = it->get<bool>();
    }
    return RootMapping::attainment(text(need(j, "actor", path), path + "/actor"), invert);
  }
  if (kind == "constant") return RootMapping::fixed(number(need(j, "p", path), path + "/p"));
  throw ParseError("unknown root mapping kind '" + kind + "'", path + "/kind");
}

json to_json(const ScenarioNetwork& net) {
  json nodes = json::array();
  for (const auto& node : net.nodes) {
    const std::size_t k = node.states.size();
    json rows = json::array();
    for (std::size_t r = 0; r * k < node.cpt.size(); ++r)
      rows.push_back(std::vector<double>(node.cpt.begin() + static_cast<std::ptrdiff_t>(r * k),
                                         node.cpt.begin() + static_cast<std::ptrdiff_t>(std::min(node.cpt.size(), (r + 1) * k))));
    json jn = {{"id", node.id}, {"states", node.states}, {"parents", node.parents}, {"cpt", rows}};
    if (node.root_mapping) jn["root_mapping"] = to_json(*node.root_mapping);
    nodes.push_back(jn);
  }
  return {{"id", net.id},
          {"weight", net.weight},
          {"description", net.description},
          {"intervention_node", net.intervention_node},
          {"nodes", nodes}};
}

ScenarioNetwork network_from_json(const json& j, const std::string& path) {
  ScenarioNetwork net;
  if (!j.is_object()) throw ParseError("expected a network object", path);
  if (auto it = j.find("id"); it != j.end()) net.id = text(*it, path + "/id");
  if (auto it = j.find("weight"); it != j.end()) net.weight = number(*it, path + "/weight");
  if (auto it = j.find("description"); it != j.end()) net.description = text(*it, path + "/description");
  net.intervention_node = text(need(j, "intervention_node", path), path + "/intervention_node");
  const json& nodes = need(j, "nodes", path);
  if (!nodes.is_array()) throw ParseError("expected an array", path + "/nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string np = path + "/nodes/" + std::to_string(i);
    const json& jn = nodes[i];
    BbnNode node;
    node.id = text(need(jn, "id", np), np + "/id");
    if (auto it = jn.find("states"); it != jn.end()) {
      if (!it->is_array()) throw ParseError("expected an array", np + "/states");
      node.states.clear();
      for (std::size_t s = 0; s < it->size(); ++s)
        node.states.push_back(text((*it)[s], np + "/states/" + std::to_string(s)));
    }
    if (auto it = jn.find("parents"); it != jn.end()) {
      if (!it->is_array()) throw ParseError("expected an array", np + "/parents");
      for (std::size_t s = 0; s < it->size(); ++s)
        node.parents.push_back(text((*it)[s], np + "/parents/" + std::to_string(s)));
    }
    const json& cpt = need(jn, "cpt", np);
    if (!cpt.is_array()) throw ParseError("expected an array", np + "/cpt");
    for (std::size_t r = 0; r < cpt.size(); ++r) {
      const std::string rp = np + "/cpt/" + std::to_string(r);
      if (cpt[r].is_array()) {
        for (std::size_t s = 0; s < cpt[r].size(); ++s) node.cpt.push_back(number(cpt[r][s], rp + "/" + std::to_string(s)));
      } else {
        node.cpt.push_back(number(cpt[r], rp));
      }
    }
    if (auto it = jn.find("root_mapping"); it != jn.end() && !it->is_null())
      node.root_mapping = root_mapping_from_json(*it, np + "/root_mapping");
    net.nodes.push_back(std::move(node));
  }
  return net;
}

json to_json(const PosteriorReport& r) {
  json marginal = json::object();
  for (std::size_t i = 0; i < r.marginal.size(); ++i) marginal[r.states[i]] = r.marginal[i];
  return {{"query_node", r.query_node},
          {"states", r.states},
          {"marginal", r.consistent ? marginal : json(nullptr)},
          {"evidence", r.evidence},
          {"evidence_probability", r.evidence_probability},
          {"consistent", r.consistent}};
}

}  // namespace themis::bbn
