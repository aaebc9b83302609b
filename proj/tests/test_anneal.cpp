#include <doctest.h>

#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sgdsa/anneal.hpp"
#include "sgdsa/rng.hpp"

using namespace sgdsa;

TEST_CASE("acceptance probability worked values") {
  CHECK(acceptance_probability(-0.5, 1.0) == 1.0);
  CHECK(acceptance_probability(0.0, 1.0) == 1.0);
  CHECK(std::abs(acceptance_probability(0.693147, 1.0) - 0.5) < 1e-6);
  CHECK(std::abs(acceptance_probability(1.0, 0.1) - std::exp(-10.0)) < 1e-9);
  CHECK(acceptance_probability(1.0, 0.1) == doctest::Approx(4.5399929762484854e-05).epsilon(1e-12));
}

TEST_CASE("acceptance probability rejects invalid input") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(acceptance_probability(0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(acceptance_probability(0.1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(acceptance_probability(nan, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(acceptance_probability(0.1, nan), std::invalid_argument);
}

TEST_CASE("acceptance probability is monotone in worsening and temperature") {
  double prev = 1.0;
  for (double d = 0.0; d <= 5.0; d += 0.01) {
    const double p = acceptance_probability(d, 0.7);
    CHECK(p <= prev);
    CHECK(p >= 0.0);
    prev = p;
  }
  prev = 0.0;
  for (double t = 0.01; t <= 10.0; t *= 1.1) {
    const double p = acceptance_probability(0.3, t);
    CHECK(p >= prev);
    prev = p;
  }
  // Continuous at zero: a tiny positive worsening is just below 1.
  CHECK(acceptance_probability(1e-12, 1.0) < 1.0);
  CHECK(acceptance_probability(1e-12, 1.0) > 1.0 - 1e-11);
}

TEST_CASE("raw probability exceeds one for improvements; clipped does not") {
  CHECK(raw_acceptance_probability(-1.0, 1.0) == doctest::Approx(std::exp(1.0)));
  CHECK(acceptance_probability(-1.0, 1.0) == 1.0);
}

TEST_CASE("decide consumes exactly one draw") {
  RngState rng = RngState::new_master(1).substream(Purpose::accept);
  const CoolingState cooling(1.0, 0.8);
  for (double d : {-1.0, 0.0, 0.5, 1e6}) {
    const auto before = rng.draws();
    RngState copy = rng;
    const auto decision = decide(d, cooling, rng);
    CHECK(rng.draws() == before + 1);
    CHECK(decision.draw == copy.uniform01());
  }
}

TEST_CASE("decide: improvements always accepted, huge worsening rejected") {
  RngState rng = RngState::new_master(2).substream(Purpose::accept);
  const CoolingState cooling(1.0, 0.8);
  for (int i = 0; i < 1000; ++i) {
    CHECK(decide(-1e-3, cooling, rng).accepted);
    CHECK(decide(0.0, cooling, rng).accepted);
    CHECK_FALSE(decide(1e6, cooling, rng).accepted);
  }
}

TEST_CASE("decide: acceptance frequency matches probability") {
  RngState rng = RngState::new_master(3).substream(Purpose::accept);
  const CoolingState cooling(1.0, 0.8);
  int accepted = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) accepted += decide(std::log(2.0), cooling, rng).accepted ? 1 : 0;
  const double freq = static_cast<double>(accepted) / n;
  CHECK(freq >= 0.48);
  CHECK(freq <= 0.52);
}

TEST_CASE("decide flushes underflowing probabilities to zero and rejects") {
  RngState rng = RngState::new_master(4).substream(Purpose::accept);
  const CoolingState cooling(1e-300, 0.5);
  const auto d = decide(1.0, cooling, rng);
  CHECK(d.probability == 0.0);
  CHECK(d.raw_probability == 0.0);
  CHECK_FALSE(d.accepted);
  // Just above the threshold stays positive.
  CHECK(acceptance_probability(700.0, 1.0) > DBL_MIN);
  CHECK(acceptance_probability(745.0, 1.0) == 0.0);
}

TEST_CASE("geometric cooling") {
  CoolingState c(1.0, 0.8);
  c.cool();
  CHECK(c.current() == doctest::Approx(0.8));
  c.cool();
  c.cool();
  CHECK(c.current() == doctest::Approx(0.512));
  CHECK(c.epochs_cooled() == 3);
  CHECK(c.t0() == 1.0);

  CoolingState s(1.0, 0.97);
  for (int i = 0; i < 100; ++i) s = s.cooled();
  CHECK(std::abs(s.current() - 0.04755) < 1e-5);
  CHECK(s.current() == doctest::Approx(std::pow(0.97, 100)).epsilon(1e-12));
}

TEST_CASE("cooling constructor validation") {
  CHECK_THROWS_AS(CoolingState(0.0, 0.8), std::invalid_argument);
  CHECK_THROWS_AS(CoolingState(-1.0, 0.8), std::invalid_argument);
  CHECK_THROWS_AS(CoolingState(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(CoolingState(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CoolingState(1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(CoolingState(std::numeric_limits<double>::infinity(), 0.5), std::invalid_argument);
}

TEST_CASE("temperature strictly decreases and never reaches zero") {
  CoolingState c(1.0, 0.5);
  double prev = c.current();
  for (int i = 0; i < 2000; ++i) {
    c.cool();
    CHECK(c.current() > 0.0);
    if (prev > std::numeric_limits<double>::denorm_min()) CHECK(c.current() < prev);
    prev = c.current();
  }
  CHECK(c.current() == std::numeric_limits<double>::denorm_min());
}
