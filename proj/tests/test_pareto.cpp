#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "branchsim/pareto.hpp"

using namespace branchsim;

namespace {

// Test-side KS statistic against a closed-form CCDF; evaluated on both
// sides of every empirical step.
double ks_against_ccdf(std::vector<double> xs,
                       const std::function<double(double)>& ccdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double tail_hi = 1.0 - static_cast<double>(i) / n;        // just below x_i
    double tail_lo = 1.0 - static_cast<double>(i + 1) / n;    // just above x_i
    double f = ccdf(xs[i]);
    d = std::max(d, std::max(std::abs(f - tail_hi), std::abs(f - tail_lo)));
  }
  return d;
}

}  // namespace

TEST_CASE("tail fraction endpoints") {
  CappedPareto law(1.5, 10.0, 1e9);
  CHECK(law.ccdf(10.0) == 1.0);
  CHECK(law.ccdf(9.0) == 1.0);
  CHECK(law.ccdf(2e9) == 0.0);
}

TEST_CASE("tail fraction at twice the scale") {
  CappedPareto law(1.5, 10.0, 1e9);
  CHECK(law.ccdf(20.0) == Catch::Approx(0.3535533905932738).epsilon(1e-12));
}

TEST_CASE("sample mean approaches alpha*L0/(alpha-1) for a high cap") {
  CappedPareto law(1.5, 10.0, 1e12);
  RngStream rng(20240817);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += law.sample(rng);
  double mean = sum / n;
  CHECK(mean == Catch::Approx(30.0).epsilon(0.05));
}

TEST_CASE("samples stay inside [scale, cap]") {
  CappedPareto law(1.5, 10.0, 15.0);
  RngStream rng(7);
  for (int i = 0; i < 20000; ++i) {
    double x = law.sample(rng);
    CHECK(x >= 10.0);
    CHECK(x <= 15.0);
  }
}

TEST_CASE("empirical tail matches the closed form") {
  CappedPareto law(1.5, 10.0, 1e9);
  RngStream rng(99);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = law.sample(rng);
  double d = ks_against_ccdf(std::move(xs),
                             [&](double x) { return law.ccdf(x); });
  CHECK(d < 0.02);
}

TEST_CASE("parameter domain is enforced") {
  CHECK_THROWS_AS(CappedPareto(1.0, 10.0, 100.0), std::domain_error);
  CHECK_THROWS_AS(CappedPareto(2.0, 10.0, 100.0), std::domain_error);
  CHECK_THROWS_AS(CappedPareto(1.5, 0.5, 100.0), std::domain_error);
  CHECK_THROWS_AS(CappedPareto(1.5, 10.0, 10.0), std::domain_error);
}
