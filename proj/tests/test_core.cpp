#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dcal/dataset.hpp"
#include "dcal/errors.hpp"
#include "dcal/link.hpp"
#include "dcal/math_util.hpp"
#include "dcal/rng.hpp"
#include "dcal/tuning.hpp"

using namespace dcal;

namespace {

Dataset toy_dataset(int n, int p, std::uint64_t seed) {
  CounterRng rng(seed);
  Dataset d;
  d.X.resize(n, p);
  d.T.resize(n);
  d.Y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) d.X(i, j) = rng.uniform(-1.0, 1.0);
    d.T[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    d.Y[i] = rng.normal();
  }
  return d;
}

}  // namespace

TEST_CASE("counter rng is reproducible and seed-sensitive") {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  bool differs = false;
  CounterRng a2(42);
  for (int i = 0; i < 10; ++i) differs |= (a2.next_u64() != c.next_u64());
  CHECK(differs);
}

TEST_CASE("rng uniforms in (0,1), clipped normals within cap") {
  CounterRng rng(7);
  double mn = 1.0, mx = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    mn = std::min(mn, u);
    mx = std::max(mx, u);
  }
  CHECK(mn > 0.0);
  CHECK(mx < 1.0);
  for (int i = 0; i < 1000; ++i) CHECK(std::abs(rng.clipped_normal(2.0, 6.0)) <= 6.0);
}

TEST_CASE("norm_quantile matches erfc round trip") {
  for (double p : {1e-8, 1e-3, 0.025, 0.5, 0.8, 0.975, 1.0 - 1e-6}) {
    const double x = norm_quantile(p);
    CHECK(norm_cdf(x) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("link derivative matches central finite differences") {
  const double h = 1e-5;
  for (const Link* l : {&Link::identity(), &Link::logistic(), &Link::probit()}) {
    for (double t = -10.0; t <= 10.0; t += 0.5) {
      const double fd = (l->value(t + h) - l->value(t - h)) / (2.0 * h);
      CHECK(std::abs(l->deriv(t) - fd) <= 1e-6 * (1.0 + std::abs(l->deriv(t))));
    }
  }
}

TEST_CASE("ps links are monotone with the right limits") {
  for (const Link* l : {&Link::logistic(), &Link::probit()}) {
    CHECK(std::abs(l->value(50.0) - 1.0) < 1e-6);
    CHECK(std::abs(l->value(-50.0)) < 1e-6);
    double prev = l->value(-8.0);
    for (double t = -7.5; t <= 8.0; t += 0.5) {
      CHECK(l->value(t) > prev);
      prev = l->value(t);
    }
    // first derivative bounded away from zero on compact sets
    for (double u : {1.0, 2.0, 5.0}) {
      double dmin = 1e9;
      for (double w = -u; w <= u; w += u / 32.0) dmin = std::min(dmin, std::abs(l->deriv(w)));
      CHECK(dmin > 0.0);
    }
  }
}

TEST_CASE("logistic symmetry identity") {
  const Link& l = Link::logistic();
  for (double t = -30.0; t <= 30.0; t += 0.37)
    CHECK(std::abs(l.value(t) + l.value(-t) - 1.0) <= 1e-12);
}

TEST_CASE("eval_link_vector basics") {
  Eigen::VectorXd eta(1);
  eta << 0.0;
  CHECK(eval_link_vector(Link::logistic(), eta)[0] == doctest::Approx(0.5));
  Eigen::VectorXd e2(2);
  e2 << -2.0, 3.0;
  const Eigen::VectorXd out = eval_link_vector(Link::identity(), e2);
  CHECK(out[0] == -2.0);
  CHECK(out[1] == 3.0);
  Eigen::VectorXd e3(1);
  e3 << std::log(3.0);
  CHECK(eval_link_vector(Link::logistic(), e3)[0] == doctest::Approx(0.75).epsilon(1e-12));
  Eigen::VectorXd bad(1);
  bad << std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eval_link_vector(Link::identity(), bad), numeric_error);
}

TEST_CASE("split_three_way: exact division, remainder rule, determinism") {
  const Dataset d9 = toy_dataset(9, 3, 1);
  const SplitData s9 = split_three_way(d9, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 7);
  CHECK(s9.main.n() == 3);
  CHECK(s9.aux.n() == 3);
  CHECK(s9.train.n() == 3);

  const SplitData s9b = split_three_way(d9, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 7);
  CHECK(s9.main.X == s9b.main.X);
  CHECK(s9.aux.X == s9b.aux.X);
  CHECK(s9.train.X == s9b.train.X);

  const Dataset d10 = toy_dataset(10, 3, 2);
  const SplitData s10 = split_three_way(d10, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1);
  CHECK(s10.main.n() == 4);  // remainder to main
  CHECK(s10.aux.n() == 3);
  CHECK(s10.train.n() == 3);
}

TEST_CASE("split_three_way: partition property over seeds") {
  const int N = 23;
  const Dataset d = toy_dataset(N, 4, 3);
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, 12345ULL}) {
    const SplitData s = split_three_way(d, {0.5, 0.25, 0.25}, seed);
    CHECK(s.main.n() + s.aux.n() + s.train.n() == N);
    // identify rows by their unique covariate signature
    std::multiset<double> seen;
    for (const Dataset* part : {&s.main, &s.aux, &s.train})
      for (int i = 0; i < part->n(); ++i) seen.insert(part->X(i, 1));
    std::multiset<double> want;
    for (int i = 0; i < N; ++i) want.insert(d.X(i, 1));
    CHECK(seen == want);
  }
}

TEST_CASE("split_three_way: config errors") {
  const Dataset d = toy_dataset(12, 3, 4);
  CHECK_THROWS_AS(split_three_way(d, {0.5, 0.2, 0.2}, 1), invalid_config_error);
  CHECK_THROWS_AS(split_three_way(d, {0.98, 0.01, 0.01}, 1), invalid_config_error);
  const Dataset small = toy_dataset(8, 3, 5);
  CHECK_THROWS_AS(split_three_way(small, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1), invalid_config_error);
}

TEST_CASE("dataset validation catches broken invariants") {
  Dataset d = toy_dataset(5, 3, 6);
  CHECK_NOTHROW(d.validate());
  Dataset bad_intercept = d;
  bad_intercept.X(2, 0) = 0.0;
  CHECK_THROWS_AS(bad_intercept.validate(), data_error);
  Dataset bad_t = d;
  bad_t.T[1] = 0.5;
  CHECK_THROWS_AS(bad_t.validate(), data_error);
  bad_t.treatment_kind = TreatmentKind::continuous;
  CHECK_NOTHROW(bad_t.validate());
}

TEST_CASE("tuning: positivity checks and level bounds") {
  TuningParams t;
  t.eta_r = -1.0;
  CHECK_THROWS_AS(t.check(), invalid_config_error);
  t.eta_r = 0.1;
  t.level = 1.5;
  CHECK_THROWS_AS(t.check(), invalid_config_error);
}

TEST_CASE("pairwise sum and median") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(pairwise_sum(v) == 10.0);
  CHECK(median(v) == doctest::Approx(2.5));
  v.push_back(100.0);
  CHECK(median(v) == 3.0);
}
