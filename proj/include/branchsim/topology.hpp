#pragma once

// Frozen random construction of the constant evolution operator: section
// layout, per-index write sets, trigger records, register-partitioned jump
// addresses, blank-requirement sets, and recall sets drawn from the
// backward-branching search. Everything random happens here, driven by a
// single seeded stream; the result is immutable and shareable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "branchsim/params.hpp"
#include "branchsim/pareto.hpp"
#include "branchsim/rng.hpp"

namespace branchsim {

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Section {
  int start = 0;  // first orbital index of the section
  int q = 0;      // terminal branch point; the section is [start, q]
  int length() const { return q - start + 1; }
};

struct OrbitTopology {
  ModelParams params;  // with I resolved to the actual record count

  std::vector<Section> sections;        // ascending, covering 1..K
  std::vector<int> section_of;          // orbital index -> section id (size K+1)
  std::vector<std::vector<int>> write_sets;  // A_W, indexed by orbital index
  std::vector<int> record_writer;       // record id -> orbital index (size I+1)
  std::vector<int> trigger_of;          // orbital index -> trigger record id or 0
  std::vector<int> triggers;            // trigger record ids, ascending
  std::vector<std::vector<int>> jump;   // branch point -> n_split target starts
  std::vector<std::vector<int>> blank_req;  // branch point -> record ids that
                                            // must be blank before it acts
  std::vector<int> pool_of;             // branch point -> register pool id
  std::vector<std::vector<int>> pools;  // pool id -> branch points, ascending

  std::map<int, std::vector<int>> recall_sets;  // trigger -> A_R, ascending
  std::map<int, double> recall_len;             // trigger -> drawn length L

  int clamp_count = 0;     // recall draws clamped to undersized sections
  int build_attempts = 0;  // layouts discarded before loop freedom held

  int section_id(int k) const { return section_of[k]; }
  const Section& section(int k) const { return sections[section_of[k]]; }
  bool is_branch_point(int k) const { return !jump[k].empty(); }
  int k_in() const { return 1; }

  // Records recalled per section for a drawn length L.
  long long recalls_per_section(double L) const {
    return static_cast<long long>(
        std::ceil(static_cast<double>(params.K) * L /
                  (static_cast<double>(params.T) * params.Q_size)));
  }

  int backward_depth_limit() const {
    return static_cast<int>(std::ceil(static_cast<double>(params.T) *
                                      params.Q_size / params.K));
  }
};

namespace detail {

// Register pools are addressed by words of n_reg digits base n_split, the
// oldest digit in the highest place. Following branch c shifts the oldest
// digit out and appends c.
inline int successor_pool(int pool, int c, int n_split, int n_reg) {
  int high = 1;
  for (int i = 0; i < n_reg - 1; ++i) high *= n_split;
  return (pool % high) * n_split + c;
}

inline std::vector<int> draw_section_lengths(const ModelParams& p, RngStream& rng) {
  int lo = p.d_min;
  int hi = std::max(lo, 2 * p.K / p.Q_size - p.d_min);
  // Keep the target sum reachable in edge cases of integer division.
  while (static_cast<long long>(hi) * p.Q_size < p.K) ++hi;
  std::vector<int> len(p.Q_size);
  for (auto& l : len) l = static_cast<int>(rng.uniform_int(lo, hi));
  long long sum = std::accumulate(len.begin(), len.end(), 0LL);
  while (sum != p.K) {
    int i = static_cast<int>(rng.uniform_index(p.Q_size));
    if (sum < p.K && len[i] < hi) {
      ++len[i];
      ++sum;
    } else if (sum > p.K && len[i] > lo) {
      --len[i];
      --sum;
    }
  }
  return len;
}

// Walks every split path from every section start and reports the first
// index revisit within T steps. Jumps land on section starts only, so a
// revisit is exactly a re-entered section. Paths stop at a revisit, which
// keeps the search self-avoiding and small.
struct LoopCheck {
  const OrbitTopology& topo;
  long long budget = 1LL << 22;
  std::vector<char> on_path;
  std::vector<int> path;
  std::string violation;

  explicit LoopCheck(const OrbitTopology& t)
      : topo(t), on_path(t.sections.size(), 0) {}

  bool dfs(int sec, long long t_arrival) {
    if (--budget < 0)
      throw TopologyError("loop verification budget exceeded");
    if (on_path[sec]) {
      std::ostringstream os;
      os << "orbital loop within lifetime: section starts";
      for (int s : path) os << ' ' << topo.sections[s].start;
      os << " -> " << topo.sections[sec].start << " (revisited at t=" << t_arrival
         << ")";
      violation = os.str();
      return false;
    }
    on_path[sec] = 1;
    path.push_back(sec);
    long long t_hop = t_arrival + topo.sections[sec].length();
    bool ok = true;
    if (t_hop <= topo.params.T) {
      for (int target : topo.jump[topo.sections[sec].q]) {
        if (!dfs(topo.section_of[target], t_hop)) {
          ok = false;
          break;
        }
      }
    }
    path.pop_back();
    on_path[sec] = 0;
    return ok;
  }

  bool run() {
    for (size_t s = 0; s < topo.sections.size(); ++s)
      if (!dfs(static_cast<int>(s), 0)) return false;
    return true;
  }
};

}  // namespace detail

// Builds the orbital structure: sections, write sets, triggers, register
// pools and jump addresses. Loop freedom within T steps is verified
// directly; failing layouts are redrawn a bounded number of times.
inline OrbitTopology build_topology(const ModelParams& params_in, RngStream& rng) {
  ModelParams params = params_in;
  params.validate();
  params.I = params.resolved_record_count();

  const int max_attempts = 64;
  std::string last_violation = "no layout attempted";

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    OrbitTopology topo;
    topo.params = params;
    topo.build_attempts = attempt;

    // Section layout. Lengths are random within [d_min, 2K/Q - d_min] and
    // sum to K; the last terminal is K by construction.
    std::vector<int> lengths = detail::draw_section_lengths(params, rng);
    topo.section_of.assign(params.K + 1, -1);
    int start = 1;
    for (int i = 0; i < params.Q_size; ++i) {
      Section s{start, start + lengths[i] - 1};
      for (int k = s.start; k <= s.q; ++k) topo.section_of[k] = i;
      topo.sections.push_back(s);
      start = s.q + 1;
    }

    std::set<int> q_set;
    for (const auto& s : topo.sections) q_set.insert(s.q);

    // Write sets: record ids are dealt in rounds over a fixed index order,
    // section starts first so that short record budgets still cover the
    // indices every walk passes first. The first record of a non-branch
    // index is its trigger.
    std::vector<int> order;
    std::vector<char> is_start(params.K + 1, 0);
    for (const auto& s : topo.sections) {
      order.push_back(s.start);
      is_start[s.start] = 1;
    }
    for (int k = 1; k <= params.K; ++k)
      if (!is_start[k]) order.push_back(k);

    topo.write_sets.assign(params.K + 1, {});
    topo.record_writer.assign(params.I + 1, 0);
    topo.trigger_of.assign(params.K + 1, 0);
    long long next_record = 1;
    while (next_record <= params.I) {
      for (int k : order) {
        if (next_record > params.I) break;
        int rec = static_cast<int>(next_record++);
        topo.write_sets[k].push_back(rec);
        topo.record_writer[rec] = k;
        if (!q_set.count(k) && topo.trigger_of[k] == 0) {
          topo.trigger_of[k] = rec;
          topo.triggers.push_back(rec);
        }
      }
    }
    for (auto& ws : topo.write_sets) std::sort(ws.begin(), ws.end());
    std::sort(topo.triggers.begin(), topo.triggers.end());

    // Register pools: shuffle the branch points, deal round-robin so every
    // pool is populated as evenly as possible.
    int pool_count = static_cast<int>(params.register_pool_count());
    std::vector<int> q_shuffled(q_set.begin(), q_set.end());
    for (int i = static_cast<int>(q_shuffled.size()) - 1; i > 0; --i) {
      int j = static_cast<int>(rng.uniform_index(i + 1));
      std::swap(q_shuffled[i], q_shuffled[j]);
    }
    topo.pool_of.assign(params.K + 1, -1);
    topo.pools.assign(pool_count, {});
    for (size_t i = 0; i < q_shuffled.size(); ++i) {
      int pool = static_cast<int>(i % pool_count);
      topo.pools[pool].push_back(q_shuffled[i]);
      topo.pool_of[q_shuffled[i]] = pool;
    }
    for (auto& pool : topo.pools) std::sort(pool.begin(), pool.end());

    // Jump addresses: branch c from a point in pool s draws a branch point
    // from pool shift(s, c) and targets the start of its section. A target
    // whose section is short enough to be re-entered within T is redrawn.
    topo.jump.assign(params.K + 1, {});
    bool draw_ok = true;
    for (const auto& sec : topo.sections) {
      int q = sec.q;
      topo.jump[q].reserve(params.n_split);
      for (int c = 0; c < params.n_split && draw_ok; ++c) {
        int pool = detail::successor_pool(topo.pool_of[q], c, params.n_split,
                                          params.n_reg);
        const auto& cand = topo.pools[pool];
        int target = -1;
        for (int tries = 0; tries < 8 * static_cast<int>(cand.size()); ++tries) {
          int kp = cand[rng.uniform_index(cand.size())];
          const Section& ts = topo.sections[topo.section_of[kp]];
          if (ts.start == sec.start && ts.length() <= params.T) continue;
          target = ts.start;
          break;
        }
        if (target < 0) {
          draw_ok = false;
          last_violation = "no admissible jump target for branch point " +
                           std::to_string(q);
          break;
        }
        topo.jump[q].push_back(target);
      }
      if (!draw_ok) break;
    }
    if (!draw_ok) continue;

    detail::LoopCheck check(topo);
    if (!check.run()) {
      last_violation = check.violation;
      continue;
    }

    // Blank requirements: a branch point must see blank records wherever
    // another branch point shares one of its jump targets, itself included.
    topo.blank_req.assign(params.K + 1, {});
    for (const auto& sec : topo.sections) {
      int q = sec.q;
      std::set<int> req;
      for (const auto& other : topo.sections) {
        int l = other.q;
        bool shares = false;
        for (int t1 : topo.jump[q])
          for (int t2 : topo.jump[l]) shares = shares || t1 == t2;
        if (shares)
          req.insert(topo.write_sets[l].begin(), topo.write_sets[l].end());
      }
      topo.blank_req[q].assign(req.begin(), req.end());
    }

    return topo;
  }
  throw TopologyError("loop-free construction failed after " +
                      std::to_string(max_attempts) + " layouts; last: " +
                      last_violation);
}

struct BackNode {
  int c = 0;      // deepest index of the section portion: the writing index
                  // at depth 0, a branch point at depth >= 1
  int depth = 0;  // jumps traced backward from the writing section

  friend bool operator<(const BackNode& a, const BackNode& b) {
    return a.depth != b.depth ? a.depth < b.depth : a.c < b.c;
  }
  friend bool operator==(const BackNode& a, const BackNode& b) {
    return a.depth == b.depth && a.c == b.c;
  }
};

// Sections that may have led to the writing of trigger m, traced through
// the reversed jump map up to the depth bound ceil(T*Q/K). Depth 0 is the
// partial section up to the writing index itself.
inline std::vector<BackNode> backward_tree(const OrbitTopology& topo, int m) {
  if (!std::binary_search(topo.triggers.begin(), topo.triggers.end(), m))
    throw std::domain_error("backward_tree: record " + std::to_string(m) +
                            " is not a trigger");

  // start index -> branch points jumping there
  std::map<int, std::vector<int>> rev;
  for (const auto& sec : topo.sections)
    for (int target : topo.jump[sec.q]) rev[target].push_back(sec.q);

  int depth_limit = topo.backward_depth_limit();
  std::set<BackNode> seen;
  std::vector<BackNode> frontier{{topo.record_writer[m], 0}};
  seen.insert(frontier.front());
  for (int depth = 0; depth < depth_limit && !frontier.empty(); ++depth) {
    std::vector<BackNode> next;
    for (const auto& node : frontier) {
      int start = topo.section(node.c).start;
      auto it = rev.find(start);
      if (it == rev.end()) continue;
      for (int q : it->second) {
        BackNode pred{q, depth + 1};
        if (seen.insert(pred).second) next.push_back(pred);
      }
    }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

// Draws the recall-set length for every trigger from the capped Pareto law
// and fills A_R with per-section random picks over the backward tree.
inline void build_recall_sets(OrbitTopology& topo, RngStream& rng) {
  const ModelParams& p = topo.params;
  CappedPareto length_law(p.alpha, p.L0, static_cast<double>(p.I));
  topo.recall_sets.clear();
  topo.recall_len.clear();
  topo.clamp_count = 0;

  for (int m : topo.triggers) {
    double L = length_law.sample(rng);
    long long want = topo.recalls_per_section(L);
    std::set<int> recall;
    for (const auto& node : backward_tree(topo, m)) {
      int start = topo.section(node.c).start;
      std::vector<int> pool;
      for (int k = start; k <= node.c; ++k)
        for (int rec : topo.write_sets[k])
          if (rec != m) pool.push_back(rec);
      if (static_cast<long long>(pool.size()) <= want) {
        if (static_cast<long long>(pool.size()) < want) ++topo.clamp_count;
        recall.insert(pool.begin(), pool.end());
        continue;
      }
      for (long long i = 0; i < want; ++i) {
        size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
        recall.insert(pool[i]);
      }
    }
    topo.recall_sets[m] = std::vector<int>(recall.begin(), recall.end());
    topo.recall_len[m] = L;
  }
}

// Structure and recall sets in one deterministic call: stream 0 of the seed
// drives the orbital construction, stream 1 the recall draws.
inline OrbitTopology build_full_topology(const ModelParams& params) {
  RngStream structure(params.seed, 0);
  OrbitTopology topo = build_topology(params, structure);
  RngStream recall(params.seed, 1);
  build_recall_sets(topo, recall);
  return topo;
}

}  // namespace branchsim
