#pragma once

// Topology interchange format: a single JSON document with keys
// params/Q/sections/A_W/M/jump/B/A_R/L. Arrays are ascending and maps are
// emitted as sorted [key, value] pairs, so serialisation is byte-stable and
// load + dump reproduces the input exactly.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "branchsim/topology.hpp"

namespace branchsim {

struct TopologyIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline nlohmann::ordered_json params_to_json(const ModelParams& p) {
  nlohmann::ordered_json j;
  j["K"] = p.K;
  j["Q_size"] = p.Q_size;
  j["N"] = p.N;
  j["I"] = p.I;
  j["T"] = p.T;
  j["alpha"] = p.alpha;
  j["L0"] = p.L0;
  j["d_min"] = p.d_min;
  j["n_reg"] = p.n_reg;
  j["n_split"] = p.n_split;
  j["seed"] = p.seed;
  return j;
}

inline ModelParams params_from_json(const nlohmann::json& j) {
  ModelParams p;
  p.K = j.at("K").get<int>();
  p.Q_size = j.at("Q_size").get<int>();
  p.N = j.at("N").get<int>();
  p.I = j.at("I").get<long long>();
  p.T = j.at("T").get<int>();
  p.alpha = j.at("alpha").get<double>();
  p.L0 = j.at("L0").get<double>();
  p.d_min = j.at("d_min").get<int>();
  p.n_reg = j.at("n_reg").get<int>();
  p.n_split = j.at("n_split").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

inline std::string topology_to_json(const OrbitTopology& topo) {
  nlohmann::ordered_json j;
  j["params"] = params_to_json(topo.params);

  nlohmann::ordered_json q = nlohmann::ordered_json::array();
  nlohmann::ordered_json sections = nlohmann::ordered_json::array();
  for (const auto& s : topo.sections) {
    q.push_back(s.q);
    sections.push_back({s.start, s.q});
  }
  j["Q"] = q;
  j["sections"] = sections;

  nlohmann::ordered_json aw = nlohmann::ordered_json::array();
  for (int k = 1; k <= topo.params.K; ++k)
    if (!topo.write_sets[k].empty()) aw.push_back({k, topo.write_sets[k]});
  j["A_W"] = aw;

  j["M"] = topo.triggers;

  nlohmann::ordered_json jump = nlohmann::ordered_json::array();
  nlohmann::ordered_json blank = nlohmann::ordered_json::array();
  for (const auto& s : topo.sections) {
    jump.push_back({s.q, topo.jump[s.q]});
    blank.push_back({s.q, topo.blank_req[s.q]});
  }
  j["jump"] = jump;
  j["B"] = blank;

  nlohmann::ordered_json ar = nlohmann::ordered_json::array();
  for (const auto& [m, recs] : topo.recall_sets) ar.push_back({m, recs});
  j["A_R"] = ar;

  nlohmann::ordered_json lengths = nlohmann::ordered_json::array();
  for (const auto& [m, L] : topo.recall_len) lengths.push_back({m, L});
  j["L"] = lengths;

  return j.dump(2) + "\n";
}

inline OrbitTopology topology_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw TopologyIoError(std::string("topology parse error: ") + e.what());
  }

  OrbitTopology topo;
  try {
    topo.params = params_from_json(j.at("params"));
    topo.params.validate();
    const int K = topo.params.K;
    const long long I = topo.params.I;

    topo.section_of.assign(K + 1, -1);
    for (const auto& s : j.at("sections")) {
      Section sec{s.at(0).get<int>(), s.at(1).get<int>()};
      for (int k = sec.start; k <= sec.q; ++k) topo.section_of[k] = static_cast<int>(topo.sections.size());
      topo.sections.push_back(sec);
    }

    topo.write_sets.assign(K + 1, {});
    topo.record_writer.assign(I + 1, 0);
    for (const auto& e : j.at("A_W")) {
      int k = e.at(0).get<int>();
      topo.write_sets[k] = e.at(1).get<std::vector<int>>();
      for (int rec : topo.write_sets[k]) topo.record_writer[rec] = k;
    }

    topo.triggers = j.at("M").get<std::vector<int>>();
    topo.trigger_of.assign(K + 1, 0);
    for (int m : topo.triggers) topo.trigger_of[topo.record_writer[m]] = m;

    topo.jump.assign(K + 1, {});
    for (const auto& e : j.at("jump"))
      topo.jump[e.at(0).get<int>()] = e.at(1).get<std::vector<int>>();

    topo.blank_req.assign(K + 1, {});
    for (const auto& e : j.at("B"))
      topo.blank_req[e.at(0).get<int>()] = e.at(1).get<std::vector<int>>();

    for (const auto& e : j.at("A_R"))
      topo.recall_sets[e.at(0).get<int>()] = e.at(1).get<std::vector<int>>();
    for (const auto& e : j.at("L"))
      topo.recall_len[e.at(0).get<int>()] = e.at(1).get<double>();
  } catch (const TopologyIoError&) {
    throw;
  } catch (const std::exception& e) {
    throw TopologyIoError(std::string("topology document malformed: ") + e.what());
  }
  return topo;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TopologyIoError("cannot open for writing: " + path);
  out << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TopologyIoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace branchsim
