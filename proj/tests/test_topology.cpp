#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "branchsim/topology.hpp"
#include "branchsim/topology_io.hpp"

using namespace branchsim;

namespace {

ModelParams micro_params() {
  ModelParams p;
  p.K = 12;
  p.Q_size = 2;
  p.N = 7;
  p.I = 0;
  p.T = 5;
  p.alpha = 1.5;
  p.L0 = 1.0;
  p.d_min = 6;
  p.n_reg = 1;
  p.n_split = 2;
  p.seed = 42;
  return p;
}

ModelParams meso_params(std::uint64_t seed) {
  ModelParams p;
  p.K = 60;
  p.Q_size = 6;
  p.N = 32;
  p.I = 0;
  p.T = 20;
  p.alpha = 1.5;
  p.L0 = 2.0;
  p.d_min = 4;
  p.n_reg = 2;
  p.n_split = 2;
  p.seed = seed;
  return p;
}

// Index-level walker, independent of the library's section-graph check:
// explores every split path for up to T steps and reports index revisits.
bool walk_is_loop_free(const OrbitTopology& topo, int from, int T) {
  std::function<bool(int, int, std::set<int>&)> go =
      [&](int k, int t, std::set<int>& seen) {
        if (!seen.insert(k).second) return false;
        if (t == T) {
          seen.erase(k);
          return true;
        }
        bool ok = true;
        if (topo.is_branch_point(k)) {
          for (int target : topo.jump[k]) {
            std::set<int> copy = seen;
            ok = ok && go(target, t + 1, copy);
          }
        } else {
          ok = go(k + 1, t + 1, seen);
        }
        seen.erase(k);
        return ok;
      };
  std::set<int> seen;
  return go(from, 0, seen);
}

// Two-section toy topology where both branch points jump to both starts.
OrbitTopology two_section_fixture() {
  OrbitTopology topo;
  topo.params.K = 8;
  topo.params.Q_size = 2;
  topo.params.N = 8;
  topo.params.I = 8;
  topo.params.T = 6;
  topo.params.alpha = 1.5;
  topo.params.L0 = 1.0;
  topo.params.d_min = 4;
  topo.sections = {{1, 4}, {5, 8}};
  topo.section_of.assign(9, 0);
  for (int k = 5; k <= 8; ++k) topo.section_of[k] = 1;
  topo.write_sets.assign(9, {});
  topo.record_writer.assign(9, 0);
  topo.trigger_of.assign(9, 0);
  for (int k = 1; k <= 8; ++k) {
    topo.write_sets[k] = {k};
    topo.record_writer[k] = k;
    if (k != 4 && k != 8) {
      topo.trigger_of[k] = k;
      topo.triggers.push_back(k);
    }
  }
  topo.jump.assign(9, {});
  topo.jump[4] = {1, 5};
  topo.jump[8] = {1, 5};
  topo.blank_req.assign(9, {});
  return topo;
}

}  // namespace

TEST_CASE("construction is a pure function of params and seed") {
  auto a = build_full_topology(meso_params(7));
  auto b = build_full_topology(meso_params(7));
  CHECK(topology_to_json(a) == topology_to_json(b));
  auto c = build_full_topology(meso_params(8));
  CHECK(topology_to_json(a) != topology_to_json(c));
}

TEST_CASE("write sets are pairwise disjoint and cover the record range") {
  auto topo = build_full_topology(meso_params(3));
  std::set<int> seen;
  long long total = 0;
  for (int k = 1; k <= topo.params.K; ++k) {
    for (int rec : topo.write_sets[k]) {
      CHECK(seen.insert(rec).second);
      ++total;
    }
  }
  CHECK(total == topo.params.I);
}

TEST_CASE("invalid parameter combinations are rejected") {
  auto p = micro_params();
  p.T = 7;  // T must stay below N
  CHECK_THROWS_AS(build_full_topology(p), InvalidParams);

  p = micro_params();
  p.n_reg = 2;  // 2^2 pools cannot be filled from 2 branch points
  CHECK_THROWS_AS(build_full_topology(p), InvalidParams);
}

TEST_CASE("equal-length layout pins branch points and jump targets") {
  // d_min = K/Q forces two sections of length 6; the only register-consistent
  // jump targets are the two section starts.
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    auto p = micro_params();
    p.seed = seed;
    auto topo = build_full_topology(p);
    REQUIRE(topo.sections.size() == 2);
    CHECK(topo.sections[0].q == 6);
    CHECK(topo.sections[1].q == 12);
    for (int q : {6, 12}) {
      REQUIRE(topo.jump[q].size() == 2);
      for (int target : topo.jump[q]) CHECK((target == 1 || target == 7));
    }
  }
}

TEST_CASE("sections respect d_min and tile the orbital range") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto topo = build_full_topology(meso_params(seed));
    int expect_start = 1;
    for (const auto& s : topo.sections) {
      CHECK(s.start == expect_start);
      CHECK(s.length() >= topo.params.d_min);
      expect_start = s.q + 1;
    }
    CHECK(topo.sections.back().q == topo.params.K);
    for (const auto& s : topo.sections)
      for (int target : topo.jump[s.q])
        CHECK(topo.section(target).start == target);
  }
}

TEST_CASE("no forward walk within the lifetime revisits an index") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto topo = build_full_topology(meso_params(seed));
    for (const auto& s : topo.sections)
      CHECK(walk_is_loop_free(topo, s.start, topo.params.T));
  }
}

TEST_CASE("diverging walks stay in disjoint register pools") {
  ModelParams p;
  p.K = 48;
  p.Q_size = 8;
  p.N = 16;
  p.I = 0;
  p.T = 12;
  p.alpha = 1.5;
  p.L0 = 1.0;
  p.d_min = 3;
  p.n_reg = 2;
  p.n_split = 2;
  p.seed = 11;
  auto topo = build_full_topology(p);

  // Pools of branch points reachable from a start at a given jump depth.
  auto pools_at_depth = [&](int start, int depth) {
    std::set<int> frontier{start};
    std::set<int> pools;
    for (int d = 0; d < depth; ++d) {
      std::set<int> next;
      pools.clear();
      for (int s : frontier) {
        int q = topo.section(s).q;
        pools.insert(topo.pool_of[q]);
        for (int target : topo.jump[q]) next.insert(target);
      }
      frontier = std::move(next);
    }
    // pools of the branch points terminating the depth-th sections
    std::set<int> out;
    for (int s : frontier) out.insert(topo.pool_of[topo.section(s).q]);
    return out;
  };

  for (const auto& sec : topo.sections) {
    int q = sec.q;
    for (int d = 1; d <= p.n_reg; ++d) {
      auto a = pools_at_depth(topo.jump[q][0], d - 1);
      auto b = pools_at_depth(topo.jump[q][1], d - 1);
      for (int pool : a) CHECK(b.count(pool) == 0);
    }
  }
}

TEST_CASE("backward tree collects every section that can reach a trigger") {
  auto topo = two_section_fixture();

  // Record 6 sits in the second section; both branch points jump to start 5,
  // so depth 1 holds both of them.
  auto nodes = backward_tree(topo, 6);
  std::set<int> depth1;
  for (const auto& n : nodes)
    if (n.depth == 1) depth1.insert(n.c);
  CHECK(depth1 == std::set<int>{4, 8});
  for (const auto& n : nodes) CHECK(n.depth <= topo.backward_depth_limit());

  // Non-triggers are rejected.
  CHECK_THROWS_AS(backward_tree(topo, 4), std::domain_error);
}

TEST_CASE("a section nobody jumps to yields a depth-0 singleton") {
  auto topo = two_section_fixture();
  topo.jump[4] = {5, 5};
  topo.jump[8] = {5, 5};
  auto nodes = backward_tree(topo, 2);
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0].c == 2);
  CHECK(nodes[0].depth == 0);
}

TEST_CASE("recall sets stay causal and never contain their trigger") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto topo = build_full_topology(meso_params(seed));
    for (const auto& [m, recall] : topo.recall_sets) {
      CHECK(!std::binary_search(recall.begin(), recall.end(), m));
      std::set<int> reachable;
      auto nodes = backward_tree(topo, m);
      for (const auto& node : nodes) {
        int start = topo.section(node.c).start;
        for (int k = start; k <= node.c; ++k)
          for (int rec : topo.write_sets[k]) reachable.insert(rec);
      }
      for (int rec : recall) CHECK(reachable.count(rec) == 1);
      long long bound =
          topo.recalls_per_section(topo.recall_len.at(m)) *
          static_cast<long long>(nodes.size());
      CHECK(static_cast<long long>(recall.size()) <= bound);
    }
  }
}

TEST_CASE("per-section recall quota follows the ceil formula") {
  auto topo = build_full_topology(meso_params(1));
  // K=60, T=20, Q=6 gives l = ceil(60 L / 120) = ceil(L / 2)
  CHECK(topo.recalls_per_section(2.0) == 1);
  CHECK(topo.recalls_per_section(2.1) == 2);
  CHECK(topo.recalls_per_section(7.0) == 4);
}

TEST_CASE("drawn lengths honour the cap and follow the power law") {
  RngStream structure_rng(meso_params(1).seed, 0);
  auto topo = build_topology(meso_params(1), structure_rng);

  std::vector<double> lengths;
  for (int rep = 0; rep < 200; ++rep) {
    RngStream rng(9000 + rep);
    build_recall_sets(topo, rng);
    for (const auto& [m, L] : topo.recall_len) {
      lengths.push_back(L);
      CHECK(L <= static_cast<double>(topo.params.I));
      CHECK(L >= topo.params.L0);
    }
  }
  REQUIRE(lengths.size() >= 10000);

  std::sort(lengths.begin(), lengths.end());
  const double n = static_cast<double>(lengths.size());
  const double alpha = topo.params.alpha;
  const double L0 = topo.params.L0;
  double d = 0.0;
  for (size_t i = 0; i < lengths.size(); ++i) {
    double theo = std::pow(L0 / lengths[i], alpha);
    d = std::max(d, std::abs(theo - (1.0 - static_cast<double>(i) / n)));
    d = std::max(d, std::abs(theo - (1.0 - static_cast<double>(i + 1) / n)));
  }
  CHECK(d < 0.02);
}

