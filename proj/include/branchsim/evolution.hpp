#pragma once

// Symbolic evolution of the initial product state under repeated steps of
// ageing, orbital motion with equal-amplitude splitting, and triggered
// recall. A superposition is a list of product branches; amplitudes are
// implicit as n_split^(-p/2) with p the branching count, so the partition
// of unity can be checked exactly in integers.
//
// Two independent implementations produce the same superposition: evolve()
// steps branch by branch, closed_form() constructs every branch directly
// from the branching recursion and the age exponent rule. Their agreement
// is a core consistency check.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "branchsim/topology.hpp"

namespace branchsim {

struct ModelViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BranchLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BranchState {
  int k = 0;                       // orbital index
  int p = 0;                       // branching points passed
  std::vector<std::uint8_t> choices;  // branch digit taken at each split
  std::vector<int> targets;        // jump target entered at each split
  std::vector<std::uint8_t> ages;  // record id -> age, 0 = blank (size I+1)
  std::vector<std::uint16_t> rotations;  // record id -> recall rotations

  int age(int rec) const { return ages[rec]; }

  long long written_count() const {
    long long n = 0;
    for (size_t i = 1; i < ages.size(); ++i) n += ages[i] > 0;
    return n;
  }

  // "k_in-b1-b2-..." labels the branch by the jump targets it entered.
  std::string path_label(int k_in) const {
    std::string s = std::to_string(k_in);
    for (int b : targets) {
      s += '-';
      s += std::to_string(b);
    }
    return s;
  }
};

struct Superposition {
  int t = 0;
  std::vector<BranchState> branches;
  long long age_wrap_events = 0;  // ages that cycled N-1 -> 1; a valid run
                                  // (T < N) never produces any
};

struct EvolveOptions {
  long long branch_limit = kDefaultBranchLimit;
  bool track_rotations = false;
};

inline Superposition initial_state(const OrbitTopology& topo) {
  Superposition sup;
  sup.t = 0;
  BranchState b;
  b.k = topo.k_in();
  b.ages.assign(topo.params.I + 1, 0);
  b.rotations.assign(topo.params.I + 1, 0);
  sup.branches.push_back(std::move(b));
  return sup;
}

// Ageing: blanks stay blank, written ages advance, N-1 cycles to 1.
inline void step_age(BranchState& b, int N, long long* wrap_events = nullptr) {
  for (auto& a : b.ages) {
    if (a == 0) continue;
    if (a == N - 1) {
      a = 1;
      if (wrap_events) ++*wrap_events;
    } else {
      ++a;
    }
  }
}

namespace detail {

inline void apply_writes(BranchState& b, const std::vector<int>& recs, int k) {
  for (int rec : recs) {
    if (b.ages[rec] != 0)
      throw ModelViolation("write set of index " + std::to_string(k) +
                           " not blank: record " + std::to_string(rec) +
                           " has age " + std::to_string(b.ages[rec]));
    b.ages[rec] = 1;
  }
}

}  // namespace detail

// Orbital motion: a non-branch index advances to k+1; a branch point fans
// out into one branch per jump target. Fresh records of the visited index
// are written either way. The blank requirements detect topology bugs, not
// user errors.
inline std::vector<BranchState> step_orbital(const BranchState& b,
                                             const OrbitTopology& topo) {
  std::vector<BranchState> out;
  if (!topo.is_branch_point(b.k)) {
    out.push_back(b);
    detail::apply_writes(out.back(), topo.write_sets[b.k], b.k);
    out.back().k = b.k + 1;
    return out;
  }
  for (int rec : topo.blank_req[b.k])
    if (b.ages[rec] != 0)
      throw ModelViolation("blank requirement of branch point " +
                           std::to_string(b.k) + " violated by record " +
                           std::to_string(rec));
  const auto& targets = topo.jump[b.k];
  out.reserve(targets.size());
  for (size_t c = 0; c < targets.size(); ++c) {
    out.push_back(b);
    BranchState& child = out.back();
    detail::apply_writes(child, topo.write_sets[b.k], b.k);
    child.k = targets[c];
    child.p += 1;
    child.choices.push_back(static_cast<std::uint8_t>(c));
    child.targets.push_back(targets[c]);
  }
  return out;
}

// Triggered recall: every written trigger rotates the written members of
// its recall set; blank records are untouched on both sides.
inline void step_conscious(BranchState& b, const OrbitTopology& topo) {
  for (const auto& [m, recall] : topo.recall_sets) {
    if (b.ages[m] == 0) continue;
    for (int l : recall)
      if (b.ages[l] != 0) ++b.rotations[l];
  }
}

// Exact partition-of-unity check: sum of n_split^(-p) over branches == 1,
// evaluated in integers as sum of n_split^(p_max - p) == n_split^p_max.
inline bool norm_is_unity(const std::vector<BranchState>& branches, int n_split) {
  if (branches.empty()) return false;
  int p_max = 0;
  for (const auto& b : branches) p_max = std::max(p_max, b.p);
  unsigned long long target = 1;
  for (int i = 0; i < p_max; ++i) target *= static_cast<unsigned>(n_split);
  unsigned long long sum = 0;
  for (const auto& b : branches) {
    unsigned long long term = 1;
    for (int i = 0; i < p_max - b.p; ++i) term *= static_cast<unsigned>(n_split);
    sum += term;
  }
  return sum == target;
}

inline Superposition evolve(const OrbitTopology& topo, int T,
                            const EvolveOptions& opts = {},
                            std::vector<long long>* z_history = nullptr) {
  if (T >= topo.params.N)
    throw ModelViolation("evolve: T must stay below N");
  Superposition sup = initial_state(topo);
  if (z_history) {
    z_history->clear();
    z_history->push_back(1);
  }
  for (int t = 1; t <= T; ++t) {
    std::vector<BranchState> next;
    next.reserve(sup.branches.size());
    for (auto& b : sup.branches) {
      step_age(b, topo.params.N, &sup.age_wrap_events);
      auto expanded = step_orbital(b, topo);
      if (static_cast<long long>(next.size() + expanded.size()) >
          opts.branch_limit)
        throw BranchLimitExceeded("branch count would exceed limit " +
                                  std::to_string(opts.branch_limit) +
                                  " at step " + std::to_string(t));
      for (auto& child : expanded) {
        if (opts.track_rotations) step_conscious(child, topo);
        next.push_back(std::move(child));
      }
    }
    sup.branches = std::move(next);
    sup.t = t;
    if (!norm_is_unity(sup.branches, topo.params.n_split))
      throw ModelViolation("partition of unity broken at step " +
                           std::to_string(t));
    if (z_history) z_history->push_back(static_cast<long long>(sup.branches.size()));
  }
  return sup;
}

// Direct construction of the time-T superposition from the branching
// recursion: targets are enumerated depth-first in choice order, the
// orbital index is the last target plus the time since entering it, and a
// record written at offset l of the section entered at time t_n carries
// age T - t_n - l whenever that is positive. Recall rotations are not part
// of this reconstruction.
inline Superposition closed_form(const OrbitTopology& topo, int T,
                                 const EvolveOptions& opts = {}) {
  if (T >= topo.params.N)
    throw ModelViolation("closed_form: T must stay below N");

  Superposition sup;
  sup.t = T;

  struct Node {
    int b;
    int t_arrive;
  };
  std::vector<Node> stack{{topo.k_in(), 0}};
  std::vector<std::uint8_t> choices;
  std::vector<int> targets;

  auto emit = [&]() {
    BranchState br;
    br.p = static_cast<int>(choices.size());
    br.choices = choices;
    br.targets = targets;
    br.ages.assign(topo.params.I + 1, 0);
    br.rotations.assign(topo.params.I + 1, 0);
    for (const auto& node : stack) {
      const Section& sec = topo.section(node.b);
      for (int l = 0; node.b + l <= sec.q; ++l) {
        int age = T - node.t_arrive - l;
        if (age <= 0) break;
        for (int rec : topo.write_sets[node.b + l])
          br.ages[rec] = static_cast<std::uint8_t>(age);
      }
    }
    const Node& last = stack.back();
    br.k = last.b + (T - last.t_arrive);
    sup.branches.push_back(std::move(br));
    if (static_cast<long long>(sup.branches.size()) > opts.branch_limit)
      throw BranchLimitExceeded("branch count would exceed limit " +
                                std::to_string(opts.branch_limit));
  };

  // Depth-first over branch choices, children in digit order so the output
  // ordering matches evolve().
  struct Walker {
    const OrbitTopology& topo;
    int T;
    std::vector<Node>& stack;
    std::vector<std::uint8_t>& choices;
    std::vector<int>& targets;
    const std::function<void()>& emit;

    void descend() {
      const Node& node = stack.back();
      const Section& sec = topo.section(node.b);
      int t_hop = node.t_arrive + (sec.q - node.b + 1);
      if (t_hop > T) {
        emit();
        return;
      }
      const auto& jump = topo.jump[sec.q];
      for (size_t c = 0; c < jump.size(); ++c) {
        choices.push_back(static_cast<std::uint8_t>(c));
        targets.push_back(jump[c]);
        stack.push_back({jump[c], t_hop});
        descend();
        stack.pop_back();
        targets.pop_back();
        choices.pop_back();
      }
    }
  };

  std::function<void()> emit_fn = emit;
  Walker walker{topo, T, stack, choices, targets, emit_fn};
  walker.descend();

  if (!norm_is_unity(sup.branches, topo.params.n_split))
    throw ModelViolation("closed form: partition of unity broken");
  return sup;
}

// Structural equality of two superpositions over (k, p, choices, ages);
// rotations are excluded since the closed form does not carry them.
inline bool same_structure(const Superposition& a, const Superposition& b) {
  if (a.t != b.t || a.branches.size() != b.branches.size()) return false;
  for (size_t i = 0; i < a.branches.size(); ++i) {
    const auto& x = a.branches[i];
    const auto& y = b.branches[i];
    if (x.k != y.k || x.p != y.p || x.choices != y.choices ||
        x.targets != y.targets || x.ages != y.ages)
      return false;
  }
  return true;
}

struct TriggerRecall {
  int m = 0;            // trigger record
  int trigger_age = 0;  // age of the trigger at evaluation time
  int count = 0;        // written members of its recall set
};

struct BranchRecalls {
  std::vector<TriggerRecall> items;  // written triggers only
  int r_max = 0;                     // conscious dimension is 2^r_max
};

inline BranchRecalls branch_recall_count(const BranchState& b,
                                         const OrbitTopology& topo) {
  BranchRecalls out;
  for (const auto& [m, recall] : topo.recall_sets) {
    if (b.ages[m] == 0) continue;
    TriggerRecall item;
    item.m = m;
    item.trigger_age = b.ages[m];
    for (int l : recall) item.count += b.ages[l] != 0;
    out.r_max = std::max(out.r_max, item.count);
    out.items.push_back(item);
  }
  return out;
}

// Rotation counters derived from write times alone: a trigger fires on a
// target at every step where both are written, so the count is
// min(age of trigger, age of target). Must agree with per-step recall.
inline std::vector<std::uint16_t> rotations_from_ages(const BranchState& b,
                                                      const OrbitTopology& topo) {
  std::vector<std::uint16_t> rot(b.ages.size(), 0);
  for (const auto& [m, recall] : topo.recall_sets) {
    if (b.ages[m] == 0) continue;
    for (int l : recall)
      if (b.ages[l] != 0)
        rot[l] += std::min<int>(b.ages[m], b.ages[l]);
  }
  return rot;
}

inline void write_superposition_csv(const Superposition& sup,
                                    const OrbitTopology& topo, std::ostream& out,
                                    bool verbose_ages = false) {
  out << "path,p,k,t,n_written,R_max,log2_dC";
  if (verbose_ages) out << ",ages";
  out << "\n";
  for (const auto& b : sup.branches) {
    BranchRecalls rec = branch_recall_count(b, topo);
    out << b.path_label(topo.k_in()) << ',' << b.p << ',' << b.k << ',' << sup.t
        << ',' << b.written_count() << ',' << rec.r_max << ',' << rec.r_max;
    if (verbose_ages) {
      out << ",\"[";
      bool first = true;
      for (size_t i = 1; i < b.ages.size(); ++i) {
        if (b.ages[i] == 0) continue;
        if (!first) out << ',';
        out << '[' << i << ',' << static_cast<int>(b.ages[i]) << ']';
        first = false;
      }
      out << "]\"";
    }
    out << "\n";
  }
}

}  // namespace branchsim
