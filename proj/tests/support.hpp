#pragma once

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "themis/bbn.hpp"
#include "themis/model.hpp"

namespace test {

inline std::filesystem::path data_dir() { return THEMIS_DATA_DIR; }
inline std::filesystem::path bundled_model_path() { return data_dir() / "country_x.model.json"; }
inline themis::RegionModel bundled_model() { return themis::load_region_model(bundled_model_path()); }

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "themis-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

/// Random DAG over binary nodes: node k may take any earlier node as parent.
inline themis::bbn::ScenarioNetwork random_network(std::mt19937_64& gen, int nodes, int max_parents = 3) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  themis::bbn::ScenarioNetwork net;
  net.id = "random";
  for (int k = 0; k < nodes; ++k) {
    themis::bbn::BbnNode n;
    n.id = "n" + std::to_string(k);
    std::vector<int> pool;
    for (int j = 0; j < k; ++j) pool.push_back(j);
    std::shuffle(pool.begin(), pool.end(), gen);
    const int np = std::min<int>(static_cast<int>(pool.size()), static_cast<int>(gen() % (max_parents + 1)));
    for (int j = 0; j < np; ++j) n.parents.push_back("n" + std::to_string(pool[static_cast<std::size_t>(j)]));
    for (int row = 0; row < (1 << np); ++row) {
      const double p = u(gen);
      n.cpt.push_back(p);
      n.cpt.push_back(1.0 - p);
    }
    net.nodes.push_back(std::move(n));
  }
  net.intervention_node = net.nodes.back().id;
  return net;
}

}  // namespace test
