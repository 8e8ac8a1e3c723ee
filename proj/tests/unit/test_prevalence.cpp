#include <doctest.h>

#include <cmath>

#include <boost/math/distributions/binomial.hpp>

#include "pooldesign/prevalence.hpp"

using namespace pooldesign;

namespace {

double tail_oracle(std::size_t S, double rho, int D) {
  if (D >= static_cast<int>(S)) return 0.0;
  if (rho <= 0.0) return 0.0;
  if (rho >= 1.0) return 1.0;
  boost::math::binomial_distribution<double> dist(static_cast<double>(S), rho);
  return boost::math::cdf(boost::math::complement(dist, static_cast<double>(D)));
}

}  // namespace

TEST_CASE("exact tail against the binomial distribution") {
  for (std::size_t S : {1u, 5u, 20u, 50u, 100u, 500u}) {
    for (double rho : {0.0, 0.001, 0.02, 0.1, 0.5, 0.9, 1.0}) {
      for (int D = 0; D <= 6; ++D) {
        CAPTURE(S);
        CAPTURE(rho);
        CAPTURE(D);
        const double want = tail_oracle(S, rho, D);
        const double got = error_prob_exact(S, rho, D);
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
        if (want < 1e-300) CHECK(got < 1e-290);
      }
    }
  }
}

TEST_CASE("exact tail identities") {
  for (double rho : {0.0, 0.01, 0.3}) {
    for (std::size_t S : {1u, 10u, 77u}) CHECK(error_prob_exact(S, rho, 0) == doctest::Approx(1 - std::pow(1 - rho, S)));
  }
  for (std::size_t S : {10u, 60u, 200u}) {
    for (double rho : {0.005, 0.05, 0.4}) {
      for (int D = 0; D <= 5; ++D) {
        double cdf = 0;
        for (int k = 0; k <= D; ++k) cdf += binomial_pmf(S, rho, static_cast<std::size_t>(k));
        CHECK(std::abs(error_prob_exact(S, rho, D) + cdf - 1.0) < 1e-12);
      }
    }
  }
  CHECK(error_prob_exact(20, 0.02, 4) < 1e-3);
  CHECK(error_prob_exact(100, 0.02, 4) > 1e-3);
}

TEST_CASE("monotonicity grid") {
  const double rhos[] = {0, .005, .01, .02, .05, .1};
  const std::size_t sizes[] = {20, 50, 100};
  for (std::size_t si = 0; si < 3; ++si) {
    for (std::size_t ri = 0; ri < 6; ++ri) {
      for (int D = 0; D <= 4; ++D) {
        const double p = error_prob_exact(sizes[si], rhos[ri], D);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        if (ri + 1 < 6) CHECK(error_prob_exact(sizes[si], rhos[ri + 1], D) >= p);
        if (si + 1 < 3) CHECK(error_prob_exact(sizes[si + 1], rhos[ri], D) >= p);
        if (D < 4) CHECK(error_prob_exact(sizes[si], rhos[ri], D + 1) <= p);
      }
    }
  }
}

TEST_CASE("normal approximation") {
  for (int D = 1; D <= 4; ++D) {
    const double e = error_prob_exact(100, 0.02, D);
    const double n = error_prob_normal(100, 0.02, D);
    CHECK(n < 3 * e);
    CHECK(n > e / 3);
  }
  const double e2 = error_prob_exact(100, 0.02, 2);
  const double n2 = error_prob_normal(100, 0.02, 2);
  CHECK(std::abs(std::log10(e2) - std::log10(n2)) < 1.0);
  // error shrinks with S at fixed rho and D/S
  double prev = 1.0;
  for (std::size_t S : {50u, 100u, 500u}) {
    const int D = static_cast<int>(S / 10);
    const double gap = std::abs(error_prob_exact(S, 0.1, D) - error_prob_normal(S, 0.1, D));
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK_THROWS_AS(error_prob_normal(50, 0.0, 1), InputError);
  CHECK_THROWS_AS(error_prob_normal(50, 1.0, 1), InputError);
}

TEST_CASE("split parts") {
  const auto parts = split_parts(101, 5, 3);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0].samples == 34);
  CHECK(parts[1].samples == 34);
  CHECK(parts[2].samples == 33);
  CHECK(parts[0].differentiate == 2);
  CHECK(parts[1].differentiate == 2);
  CHECK(parts[2].differentiate == 1);
  for (std::size_t S : {20u, 57u, 100u}) {
    for (int D = 0; D <= 8; ++D) {
      for (std::size_t eta = 1; eta <= 5; ++eta) {
        const auto ps = split_parts(S, D, eta);
        std::size_t ss = 0;
        int dd = 0;
        for (const auto& p : ps) {
          ss += p.samples;
          dd += p.differentiate;
        }
        CHECK(ss == S);
        CHECK(dd == D);
      }
    }
  }
}

TEST_CASE("split probability") {
  for (double rho : {0.0, 0.005, 0.02, 0.2}) {
    for (int D = 0; D <= 4; ++D) {
      const auto r = error_prob_split({100, rho, D, 1});
      CHECK(std::abs(r.probability - error_prob_exact(100, rho, D)) <= 1e-12);
      CHECK(r.first_order == r.probability);
    }
  }
  for (double rho : {0.005, 0.01, 0.02}) {
    for (std::size_t eta : {2u, 4u}) {
      const auto r = error_prob_split({100, rho, 4, eta});
      double prod = 1, sum = 0;
      for (const auto& p : split_parts(100, 4, eta)) {
        const double pi = error_prob_exact(p.samples, rho, p.differentiate);
        prod *= 1 - pi;
        sum += pi;
      }
      CHECK(r.probability == doctest::Approx(1 - prod).epsilon(1e-12));
      CHECK(r.first_order == doctest::Approx(sum).epsilon(1e-12));
      CHECK(r.first_order >= r.probability);
      CHECK(r.first_order - r.probability <= r.first_order * r.first_order);
    }
  }
}

TEST_CASE("recommendations") {
  RecommendOptions no_designs;
  no_designs.suggest_designs = false;
  const auto a = recommend(20, 0.02, 1e-3, no_designs);
  CHECK(a.advisable);
  CHECK(a.splits == 1);
  // smallest D whose tail meets the tolerance
  int smallest = 0;
  while (tail_oracle(20, 0.02, smallest) > 1e-3) ++smallest;
  CHECK(a.differentiate == std::max(smallest, 1));
  CHECK(smallest == 3);
  CHECK(recommend(20, 0.02, 5e-4, no_designs).differentiate == 4);

  const auto z = recommend(50, 0.0, 1e-3, no_designs);
  CHECK(z.differentiate == 1);
  CHECK(z.splits == 1);

  const auto b = recommend(100, 0.02, 1e-3, no_designs);
  CHECK(b.advisable);
  CHECK(b.splits >= 2);
  CHECK(b.probability <= 1e-3);

  const auto c = recommend(100, 0.4, 1e-3, no_designs);
  CHECK_FALSE(c.advisable);
  CHECK(c.message.find("not advisable") != std::string::npos);

  const auto d = recommend(20, 0.02, 1e-3);
  CHECK(d.suggestions.size() == 3);
  CHECK_THROWS_AS(recommend(20, 0.02, 0.0), InputError);
  CHECK_THROWS_AS(recommend(20, 1.5, 0.1), InputError);
}

TEST_CASE("error rate document") {
  const auto j = error_rate_json({20, 0.02, 4, 1});
  CHECK(j["exact"].get<double>() < 1e-3);
  CHECK(j["approximation"] == true);
  CHECK(j.contains("normal"));
  const auto z = error_rate_json({20, 0.0, 1, 1});
  CHECK(z["exact"] == 0.0);
  CHECK(z["normal"].is_null());
}
