#include <catch2/catch_amalgamated.hpp>

#include "openrabi/core.hpp"

using namespace openrabi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("raw_rates reproduces the definition arithmetic", "[core]") {
  SECTION("two-photon rate at large eta") {
    ModelParams p(1.0, 2500.0, 2.0, 1.5, 0.1, 44.26);
    REQUIRE_THAT(raw_rates(p).kappa2, WithinRel(0.017704, 1e-12));
  }
  SECTION("coupling at eta = 1") {
    ModelParams p(1.0, 1.0, 0.0, 1.0, 0.0, 0.0);
    REQUIRE_THAT(raw_rates(p).lambda, WithinRel(0.5, 1e-14));
  }
  SECTION("one-photon rate and spin splitting") {
    ModelParams p(2.0, 100.0, 0.0, 0.0, 0.1, 0.0);
    const RawRates r = raw_rates(p);
    REQUIRE_THAT(r.kappa1, WithinRel(0.2, 1e-14));
    REQUIRE_THAT(r.Omega, WithinRel(200.0, 1e-14));
  }
}

TEST_CASE("rawed-normalized round trip is the identity to 1e-14", "[core]") {
  const ModelParams cases[] = {
      ModelParams(1.0, 2500.0, 2.0, 1.73, 0.1, 44.26),
      ModelParams(2.7, 30.0, 1.7, 1.3, 0.6, 2.5),
      ModelParams(0.5, 1.0, -0.3, 0.0, 0.0, 0.0),
      ModelParams(1.0, 1e6, 0.0, 1.4142135623730951, 1.0, 1.0),
  };
  for (const auto& p : cases) {
    const RawRates r = raw_rates(p);
    const ModelParams q =
        normalize(p.omega0, r.Omega, r.lambda, r.kappa1, r.kappa2, p.mu);
    REQUIRE_THAT(q.eta, WithinRel(p.eta, 1e-14));
    if (p.g > 0) REQUIRE_THAT(q.g, WithinRel(p.g, 1e-14));
    if (p.gamma1 > 0) REQUIRE_THAT(q.gamma1, WithinRel(p.gamma1, 1e-14));
    if (p.gamma2 > 0) REQUIRE_THAT(q.gamma2, WithinRel(p.gamma2, 1e-14));
    const RawRates r2 = raw_rates(q);
    REQUIRE_THAT(r2.Omega, WithinRel(r.Omega, 1e-14));
    if (r.lambda > 0) REQUIRE_THAT(r2.lambda, WithinRel(r.lambda, 1e-14));
    if (r.kappa1 > 0) REQUIRE_THAT(r2.kappa1, WithinRel(r.kappa1, 1e-14));
    if (r.kappa2 > 0) REQUIRE_THAT(r2.kappa2, WithinRel(r.kappa2, 1e-14));
  }
}

TEST_CASE("critical_mu values and monotonicity", "[core]") {
  REQUIRE_THAT(critical_mu(ModelParams(1, 1, 0, 0, 1.0, 0)),
               WithinRel(std::sqrt(2.0), 1e-14));
  REQUIRE_THAT(critical_mu(ModelParams(1, 1, 0, 0, 0.0, 0)),
               WithinRel(1.0, 1e-14));
  REQUIRE_THAT(critical_mu(ModelParams(1, 1, 0, 0, 0.1, 0)),
               WithinAbs(1.004988, 1e-6));
  double prev = 0.0;
  for (double gamma1 : {0.0, 0.2, 0.5, 1.0, 2.0, 5.0}) {
    const double mc = critical_mu(ModelParams(1, 1, 0, 0, gamma1, 0));
    REQUIRE(mc >= 1.0);
    REQUIRE(mc >= prev);
    prev = mc;
  }
}

TEST_CASE("parameter validation rejects invalid inputs", "[core]") {
  REQUIRE_THROWS_AS(ModelParams(0.0, 1, 0, 0, 0, 0), InvalidParams);
  REQUIRE_THROWS_AS(ModelParams(-1.0, 1, 0, 0, 0, 0), InvalidParams);
  REQUIRE_THROWS_AS(ModelParams(1, 0.0, 0, 0, 0, 0), InvalidParams);
  REQUIRE_THROWS_AS(ModelParams(1, 1, 0, -0.5, 0, 0), InvalidParams);
  REQUIRE_THROWS_AS(ModelParams(1, 1, 0, 0, -0.1, 0), InvalidParams);
  REQUIRE_THROWS_AS(ModelParams(1, 1, 0, 0, 0, -0.1), InvalidParams);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(ModelParams(1, 1, nan, 0, 0, 0), InvalidParams);
  REQUIRE_NOTHROW(ModelParams(1, 1, -2.0, 0, 0, 0));  // mu may be negative
}

TEST_CASE("JSON round trip preserves parameters exactly", "[core]") {
  const ModelParams p(1.25, 2500.0, 2.0, 1.7291616465790323, 0.1,
                      44.257920792079208);
  json j = p;
  REQUIRE(j.size() == 6);
  for (const char* key : {"omega0", "eta", "mu", "g", "gamma1", "gamma2"})
    REQUIRE(j.contains(key));
  const ModelParams q = j.get<ModelParams>();
  REQUIRE_THAT(q.omega0, WithinRel(p.omega0, 1e-14));
  REQUIRE_THAT(q.eta, WithinRel(p.eta, 1e-14));
  REQUIRE_THAT(q.mu, WithinRel(p.mu, 1e-14));
  REQUIRE_THAT(q.g, WithinRel(p.g, 1e-14));
  REQUIRE_THAT(q.gamma1, WithinRel(p.gamma1, 1e-14));
  REQUIRE_THAT(q.gamma2, WithinRel(p.gamma2, 1e-14));

  // String round trip as used by the CLI config echo.
  const ModelParams r = json::parse(j.dump()).get<ModelParams>();
  REQUIRE_THAT(r.g, WithinRel(p.g, 1e-14));
  REQUIRE_THAT(r.gamma2, WithinRel(p.gamma2, 1e-14));
}

TEST_CASE("branch labels", "[core]") {
  REQUIRE(branch_sign(Branch::Plus) == +1.0);
  REQUIRE(branch_sign(Branch::Minus) == -1.0);
  REQUIRE(branch_from_string("plus") == Branch::Plus);
  REQUIRE(branch_from_string("minus") == Branch::Minus);
  REQUIRE(branch_from_string("-") == Branch::Minus);
  REQUIRE_THROWS_AS(branch_from_string("sideways"), InvalidParams);
  REQUIRE(std::string(branch_name(Branch::Minus)) == "minus");
}
