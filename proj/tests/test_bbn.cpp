#include <doctest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "themis/bbn.hpp"
#include "themis/error.hpp"

using namespace themis;
using namespace themis::bbn;

namespace {

ScenarioNetwork chain() {
  ScenarioNetwork net;
  net.id = "chain";
  BbnNode a;
  a.id = "a";
  a.cpt = {0.3, 0.7};
  BbnNode b;
  b.id = "b";
  b.parents = {"a"};
  b.cpt = {0.9, 0.1, 0.2, 0.8};
  net.nodes = {a, b};
  net.intervention_node = "b";
  return net;
}

std::string validation_message(const ScenarioNetwork& net) {
  try {
    validate_network(net);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

ScenarioNetwork bundled_network() {
  std::ifstream in(test::data_dir() / "country_x.network.json");
  return network_from_json(nlohmann::json::parse(in));
}

}  // namespace

TEST_SUITE("bbn") {
  TEST_CASE("two node chain by hand") {
    const auto net = chain();
    // P(b) = 0.3 * 0.9 + 0.7 * 0.2
    CHECK(intervention_probability(net) == doctest::Approx(0.41).epsilon(1e-12));
    const auto post = infer(net, "a", {{"b", "true"}});
    CHECK(post.probability("true") == doctest::Approx(0.27 / 0.41).epsilon(1e-12));
    CHECK(post.evidence_probability == doctest::Approx(0.41).epsilon(1e-12));
  }

  TEST_CASE("validation rejects malformed networks") {
    auto net = chain();
    net.nodes[1].cpt = {0.9, 0.1, 0.2, 0.7};
    CHECK(validation_message(net).find("b") != std::string::npos);

    net = chain();
    net.nodes[1].cpt.pop_back();
    CHECK_THROWS_AS(validate_network(net), ValidationError);

    net = chain();
    net.nodes[0].parents = {"b"};
    net.nodes[0].cpt = {0.5, 0.5, 0.5, 0.5};
    CHECK(validation_message(net).find("cycle") != std::string::npos);

    net = chain();
    net.nodes[1].parents = {"ghost"};
    CHECK_THROWS_AS(validate_network(net), ValidationError);

    net = chain();
    net.intervention_node = "nowhere";
    CHECK_THROWS_AS(validate_network(net), ValidationError);

    net = chain();
    net.nodes[1].root_mapping = RootMapping::fixed(0.5);
    CHECK_THROWS_AS(validate_network(net), ValidationError);

    net = chain();
    net.nodes[1].id = "a";
    CHECK_THROWS_AS(validate_network(net), ValidationError);
  }

  TEST_CASE("elimination matches the joint sum on random networks") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 2 + static_cast<int>(gen() % 9);
      const auto net = test::random_network(gen, n);
      validate_network(net);
      for (const auto& node : net.nodes) {
        const auto want = oracle::joint_marginal(net, node.id);
        const auto got = infer(net, node.id);
        REQUIRE(got.marginal.size() == want.size());
        for (std::size_t s = 0; s < want.size(); ++s) CHECK(std::abs(got.marginal[s] - want[s]) < 1e-9);
      }
      Evidence ev{{net.nodes.front().id, "false"}};
      const auto want = oracle::joint_marginal(net, net.intervention_node, ev);
      const auto got = infer(net, net.intervention_node, ev);
      const auto brute = enumerate_joint(net, net.intervention_node, ev);
      for (std::size_t s = 0; s < want.size(); ++s) {
        CHECK(std::abs(got.marginal[s] - want[s]) < 1e-9);
        CHECK(std::abs(brute.marginal[s] - want[s]) < 1e-9);
      }
    }
  }

  TEST_CASE("elimination order does not change the answer") {
    std::mt19937_64 gen(3);
    const auto net = test::random_network(gen, 8);
    const auto base = infer(net, net.intervention_node);
    std::vector<std::string> order;
    for (const auto& n : net.nodes) order.push_back(n.id);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(order.begin(), order.end(), gen);
      const auto r = infer(net, net.intervention_node, {}, order);
      CHECK(std::abs(r.marginal[0] - base.marginal[0]) < 1e-12);
    }
  }

  TEST_CASE("impossible evidence is reported, not divided by") {
    auto net = chain();
    net.nodes[0].cpt = {1.0, 0.0};
    net.nodes[1].cpt = {1.0, 0.0, 0.2, 0.8};
    const auto r = infer(net, "a", {{"b", "false"}});
    CHECK_FALSE(r.consistent);
    CHECK(r.marginal.empty());
    CHECK(r.evidence_probability == 0.0);
    CHECK(oracle::joint_marginal(net, "a", {{"b", "false"}}).empty());
    CHECK_THROWS_AS(infer(net, "a", {{"b", "maybe"}}), ValidationError);
  }

  TEST_CASE("bundled crisis network yields the calibrated template value") {
    const auto net = bundled_network();
    validate_network(net);
    CHECK(std::abs(intervention_probability(net) - 0.62) < 0.005);
    CHECK(std::abs(intervention_probability(net) - oracle::joint_marginal(net, net.intervention_node)[0]) < 1e-12);
    CHECK(net.description.find("calibrated") != std::string::npos);
  }

  TEST_CASE("trend mappings are logistic in the distance to the threshold") {
    const auto below = RootMapping::trend("x", 10.0, 2.0, Direction::below);
    CHECK(trend_probability(below, 10.0) == doctest::Approx(0.5));
    CHECK(trend_probability(below, 6.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    const auto above = RootMapping::trend("x", 10.0, 2.0, Direction::above);
    CHECK(trend_probability(above, 14.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    CHECK(trend_probability(above, 14.0) + trend_probability(below, 14.0) == doctest::Approx(1.0));
  }

  TEST_CASE("root mapping replaces priors from trends and attainments") {
    auto net = chain();
    net.nodes[0].root_mapping = RootMapping::trend("x", 10.0, 1.0, Direction::above);
    const auto mapped = map_roots(net, {{"x", {10.0, 3.0}}}, {});
    CHECK(root_prior(mapped, "a") == doctest::Approx(0.5));
    CHECK_THROWS_AS(map_roots(net, {}, {}), ValidationError);

    net.nodes[0].root_mapping = RootMapping::attainment("gov", true);
    CHECK(root_prior(map_roots(net, {}, {{"gov", 0.8}}), "a") == doctest::Approx(0.2));
    net.nodes[0].root_mapping = RootMapping::fixed(0.9);
    CHECK(root_prior(map_roots(net, {}, {}), "a") == doctest::Approx(0.9));
  }

  TEST_CASE("sensitivity shifts and clamps the root prior") {
    const auto net = chain();
    const std::vector<double> deltas = {-0.5, 0.0, 0.2, 0.9};
    const auto pts = sensitivity(net, "a", deltas);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0].p_root == 0.0);
    CHECK(pts[1].p_root == doctest::Approx(0.3));
    CHECK(pts[2].p_root == doctest::Approx(0.5));
    CHECK(pts[3].p_root == 1.0);
    for (const auto& p : pts) CHECK(p.p_intervention == doctest::Approx(p.p_root * 0.9 + (1 - p.p_root) * 0.2));
    CHECK_THROWS_AS(sensitivity(net, "b", deltas), ValidationError);
  }

  TEST_CASE("JSON round trip preserves the network") {
    const auto net = bundled_network();
    const auto back = network_from_json(to_json(net));
    CHECK(back == net);
    CHECK(to_json(back) == to_json(net));
    auto doc = to_json(net);
    doc["nodes"][2].erase("id");
    CHECK_THROWS_AS(network_from_json(doc), ParseError);
  }

  TEST_CASE("joint enumeration refuses oversized networks") {
    std::mt19937_64 gen(1);
    const auto net = test::random_network(gen, 21, 1);
    CHECK_THROWS_AS(enumerate_joint(net, net.intervention_node), DomainError);
    CHECK_NOTHROW(infer(net, net.intervention_node));
  }
}
