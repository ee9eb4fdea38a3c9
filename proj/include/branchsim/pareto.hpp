#pragma once

// Capped Pareto distribution for recall-set lengths. The tail fraction of
// lengths greater than L is (scale/L)^alpha on [scale, cap]; draws above the
// cap are rejected and redrawn, so the sampler realises the truncated law.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "branchsim/rng.hpp"

namespace branchsim {

struct CappedPareto {
  double alpha = 1.5;
  double scale = 1.0;  // lower endpoint, every draw is >= scale
  double cap = std::numeric_limits<double>::infinity();

  CappedPareto(double alpha_, double scale_, double cap_)
      : alpha(alpha_), scale(scale_), cap(cap_) {
    if (!(alpha > 1.0) || !(alpha < 2.0))
      throw std::domain_error("pareto: alpha must lie in (1, 2)");
    if (!(scale >= 1.0))
      throw std::domain_error("pareto: scale must be >= 1");
    if (!(cap > scale))
      throw std::domain_error("pareto: cap must exceed scale");
  }

  // Tail fraction of the uncapped law, zero beyond the cap.
  double ccdf(double x) const {
    if (x < scale) return 1.0;
    if (x > cap) return 0.0;
    return std::pow(scale / x, alpha);
  }

  // Mean of the uncapped law; a benchmark value, exact only for cap >> scale.
  double uncapped_mean() const { return alpha * scale / (alpha - 1.0); }

  double sample(RngStream& rng) const {
    for (;;) {
      double u = rng.uniform_pos();
      double x = scale * std::pow(u, -1.0 / alpha);
      if (x <= cap) return x;
    }
  }
};

inline double sample_pareto(double alpha, double scale, double cap, RngStream& rng) {
  return CappedPareto(alpha, scale, cap).sample(rng);
}

}  // namespace branchsim
