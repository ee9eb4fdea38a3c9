#pragma once

// Scalar model parameters and the key/value config format.

#include <cctype>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace branchsim {

// Default per-index record redundancy used when I is left as 0.
inline constexpr int kDefaultWriteRedundancy = 8;

// Refusal threshold for full branch enumeration.
inline constexpr long long kDefaultBranchLimit = 1LL << 20;

struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ModelParams {
  int K = 0;             // orbital indices 1..K
  int Q_size = 0;        // number of branch points
  int N = 0;             // age states per record (0 = blank, 1..N-1 written)
  long long I = 0;       // total record count; 0 derives K * redundancy
  int T = 0;             // lifetime in steps, must stay below N
  double alpha = 1.5;    // Pareto exponent, in (1, 2)
  double L0 = 1.0;       // Pareto scale
  int d_min = 2;         // minimal quasiclassical section length
  int n_reg = 1;         // register length (recent branch choices kept apart)
  int n_split = 2;       // branch arity
  std::uint64_t seed = 0;

  long long resolved_record_count() const {
    return I > 0 ? I : static_cast<long long>(K) * kDefaultWriteRedundancy;
  }

  long long register_pool_count() const {
    long long p = 1;
    for (int i = 0; i < n_reg; ++i) {
      p *= n_split;
      if (p > Q_size) return p;  // already infeasible, avoid overflow
    }
    return p;
  }

  void validate() const {
    if (K < 2) throw InvalidParams("params: K must be >= 2");
    if (Q_size < 1 || Q_size >= K)
      throw InvalidParams("params: Q_size must lie in [1, K)");
    if (N < 2) throw InvalidParams("params: N must be >= 2");
    if (N > 255) throw InvalidParams("params: N must be <= 255");
    if (T < 1) throw InvalidParams("params: T must be >= 1");
    if (T >= N) throw InvalidParams("params: T must be < N (ages run to N-1)");
    if (!(alpha > 1.0) || !(alpha < 2.0))
      throw InvalidParams("params: alpha must lie in (1, 2)");
    if (!(L0 >= 1.0)) throw InvalidParams("params: L0 must be >= 1");
    if (d_min < 2) throw InvalidParams("params: d_min must be >= 2");
    if (n_split < 2) throw InvalidParams("params: n_split must be >= 2");
    if (n_reg < 1) throw InvalidParams("params: n_reg must be >= 1");
    if (register_pool_count() > Q_size)
      throw InvalidParams(
          "params: Q_size must be >= n_split^n_reg (register partition impossible)");
    if (static_cast<long long>(Q_size) * d_min > K)
      throw InvalidParams("params: K must be >= Q_size * d_min");
    long long records = resolved_record_count();
    if (records < 1) throw InvalidParams("params: I must resolve to >= 1");
    if (!(static_cast<double>(records) > L0))
      throw InvalidParams("params: I must exceed L0 (length cap)");
  }
};

// Parses "key = value" lines; '#' starts a comment. All fields are required
// so a config file is a complete, reproducible description of a run.
inline ModelParams parse_params(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = true;
      for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
      if (blank) continue;
      throw InvalidParams("config line " + std::to_string(lineno) +
                          ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw InvalidParams("config line " + std::to_string(lineno) +
                          ": empty key or value");
    if (kv.count(key))
      throw InvalidParams("config: duplicate key '" + key + "'");
    kv[key] = val;
  }

  static const std::vector<std::string> known = {
      "K",  "Q_size", "N",     "I",       "T",    "alpha",
      "L0", "d_min",  "n_reg", "n_split", "seed"};
  for (const auto& k : known)
    if (!kv.count(k)) throw InvalidParams("config: missing required key '" + k + "'");
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (const auto& name : known) ok = ok || name == k;
    if (!ok) throw InvalidParams("config: unknown key '" + k + "'");
  }

  auto as_ll = [&](const std::string& k) {
    try {
      size_t pos = 0;
      long long v = std::stoll(kv[k], &pos);
      if (pos != kv[k].size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw InvalidParams("config: key '" + k + "' is not an integer");
    }
  };
  auto as_double = [&](const std::string& k) {
    try {
      size_t pos = 0;
      double v = std::stod(kv[k], &pos);
      if (pos != kv[k].size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw InvalidParams("config: key '" + k + "' is not a number");
    }
  };

  ModelParams p;
  p.K = static_cast<int>(as_ll("K"));
  p.Q_size = static_cast<int>(as_ll("Q_size"));
  p.N = static_cast<int>(as_ll("N"));
  p.I = as_ll("I");
  p.T = static_cast<int>(as_ll("T"));
  p.alpha = as_double("alpha");
  p.L0 = as_double("L0");
  p.d_min = static_cast<int>(as_ll("d_min"));
  p.n_reg = static_cast<int>(as_ll("n_reg"));
  p.n_split = static_cast<int>(as_ll("n_split"));
  p.seed = static_cast<std::uint64_t>(as_ll("seed"));
  return p;
}

}  // namespace branchsim
