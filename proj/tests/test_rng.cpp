#include <doctest.h>

#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "hazardband/quantile.hpp"
#include "hazardband/rng.hpp"

using namespace hazardband;

TEST_CASE("splitmix64 reference outputs from state 0") {
  std::uint64_t state = 0;
  CHECK(rng::splitmix64(state) == 0xe220a8397b1dcdafULL);
  CHECK(rng::splitmix64(state) == 0x6e789e6aa1b965f4ULL);
  CHECK(rng::splitmix64(state) == 0x06c45d188009454fULL);
}

TEST_CASE("xoshiro256++ first output follows the published recurrence") {
  std::uint64_t state = 0;
  std::uint64_t s[4];
  for (auto& w : s) w = rng::splitmix64(state);
  const std::uint64_t sum = s[0] + s[3];
  const std::uint64_t expected = ((sum << 23) | (sum >> 41)) + s[0];
  Xoshiro256pp gen(0);
  CHECK(gen() == expected);
}

TEST_CASE("FNV-1a label hash") {
  CHECK(rng::hash_label("") == 0xcbf29ce484222325ULL);
  CHECK(rng::hash_label("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(rng::hash_label("0>1") != rng::hash_label("1>0"));
}

TEST_CASE("streams are reproducible and separated by every coordinate") {
  const SeedSpec base{42, 3, 7};
  auto a = make_stream(base, stream_tag::multipliers);
  auto b = make_stream(base, stream_tag::multipliers);
  for (int i = 0; i < 100; ++i) REQUIRE(a() == b());

  std::set<std::uint64_t> keys;
  keys.insert(stream_key(base, stream_tag::multipliers));
  keys.insert(stream_key({43, 3, 7}, stream_tag::multipliers));
  keys.insert(stream_key({42, 4, 7}, stream_tag::multipliers));
  keys.insert(stream_key({42, 3, 8}, stream_tag::multipliers));
  keys.insert(stream_key(base, stream_tag::bridge));
  keys.insert(stream_key({42, 7, 3}, stream_tag::multipliers));
  CHECK(keys.size() == 6);
}

TEST_CASE("uniforms lie strictly inside (0, 1) with the right mean") {
  auto gen = make_stream({1, 0, 0}, stream_tag::data);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = gen.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("order-statistic quantile ranks") {
  CHECK(quantile_rank(1000, 0.95) == 950);
  CHECK(quantile_rank(20, 0.95) == 19);
  CHECK(quantile_rank(3, 0.01) == 1);
  CHECK(quantile_rank(3, 0.999) == 3);
  CHECK_THROWS_AS(quantile_rank(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(quantile_rank(10, 1.0), std::invalid_argument);

  std::vector<double> draws(100);
  std::iota(draws.begin(), draws.end(), 1.0);
  CHECK(order_statistic_quantile(draws, 0.95) == 95.0);
  CHECK(order_statistic_quantile(std::vector<double>(50, 0.0), 0.95) == 0.0);

  const std::vector<double> matrix{1, 10, 2, 20, 3, 30, 4, 40};
  CHECK(order_statistic_quantile(matrix, 2, 1, 0.5) == 20.0);
  CHECK(order_statistic_quantile(matrix, 2, 0, 0.75) == 3.0);
}
