#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "trialmarket/error.hpp"
#include "trialmarket/policies.hpp"

using namespace trialmarket;
using trialmarket::testing::naive_best_ranking_value;
using trialmarket::testing::naive_purchase_probability;
using trialmarket::testing::random_counts;
using trialmarket::testing::random_market;
using trialmarket::testing::same_for_all_classes;

namespace {

std::vector<std::size_t> order_of(const Ranking& r) {
  return std::vector<std::size_t>(r.order().begin(), r.order().end());
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const MarketError& e) {
    return e.kind();
  }
  FAIL("expected a MarketError");
  return ErrorKind::Undefined;
}

MarketConfig two_class(Matrix q, std::vector<double> w = {0.5, 0.5}) {
  Matrix a(q.rows(), 2, 1.0);
  std::vector<double> v(q.rows(), 1.0);
  return MarketConfig(std::move(w), a, std::move(q), v);
}

bool is_bijection(const Ranking& r) {
  std::vector<bool> seen(r.size(), false);
  for (std::size_t p : r.positions()) {
    if (p >= r.size() || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

}  // namespace

TEST_CASE("policy labels round-trip") {
  for (const auto& p : standard_policies()) CHECK(PolicySpec::parse(p.label()) == p);
  CHECK(PolicySpec::parse("SQSSI").kind == RankingKind::SegmentedQuality);
  CHECK(PolicySpec::parse("AQNSI").signal == SignalMode::None);
  CHECK(PolicySpec::parse("POPGSI").kind == RankingKind::Popularity);
  CHECK(PolicySpec::parse("PERFGSI:bruteforce").solver == PerformanceSolver::BruteForce);
  CHECK(kind_of([] { PolicySpec::parse("XYZGSI"); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { PolicySpec::parse("AQ"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("policy validation") {
  std::mt19937_64 rng(1);
  const auto k2 = random_market(rng, 4, 2);
  CHECK(kind_of([&] { PolicySpec::parse("SQGSI").validate(k2); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { PolicySpec::parse("PERFGSI:exact1").validate(k2); }) ==
        ErrorKind::UnsupportedSolver);
  const auto big = random_market(rng, 10, 1);
  CHECK(kind_of([&] { PolicySpec::parse("PERFGSI:bruteforce").validate(big); }) ==
        ErrorKind::SizeLimit);
  CHECK_NOTHROW(PolicySpec::parse("SQNSI").validate(k2));
}

TEST_CASE("popularity ranking") {
  CHECK(order_of(popularity_ranking(std::vector<Count>{0, 5, 2})) ==
        std::vector<std::size_t>{1, 2, 0});
  CHECK(order_of(popularity_ranking(std::vector<Count>{0, 0, 0})) ==
        std::vector<std::size_t>{0, 1, 2});
  CHECK(order_of(popularity_ranking(std::vector<Count>{7, 7, 1})) ==
        std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("activity ranking") {
  CHECK(order_of(activity_ranking(std::vector<std::int64_t>{-1, 10, 3})) ==
        std::vector<std::size_t>{1, 2, 0});
  CHECK(order_of(activity_ranking(std::vector<std::int64_t>{-1, -1})) ==
        std::vector<std::size_t>{0, 1});
  CHECK(order_of(activity_ranking(std::vector<std::int64_t>{0, 1, 2})) ==
        std::vector<std::size_t>{2, 1, 0});
}

TEST_CASE("average quality and its ranking") {
  CHECK(average_quality(two_class(Matrix::from_rows({{0.2, 0.8}})))[0] == doctest::Approx(0.5));
  CHECK(average_quality(two_class(Matrix::from_rows({{1.0, 0.0}}), {0.25, 0.75}))[0] ==
        doctest::Approx(0.25));
  const MarketConfig k1({1.0}, Matrix(3, 1, 1.0), Matrix::from_rows({{0.3}, {0.6}, {0.1}}),
                        {1, 1, 1});
  CHECK(average_quality(k1) == std::vector<double>{0.3, 0.6, 0.1});
  CHECK(order_of(average_quality_ranking(k1)) == std::vector<std::size_t>{1, 0, 2});

  const auto m = two_class(Matrix::from_rows({{0.1, 0.1}, {0.9, 0.9}, {0.5, 0.5}}));
  CHECK(order_of(average_quality_ranking(m)) == std::vector<std::size_t>{1, 2, 0});
  const auto flat = two_class(Matrix(4, 2, 0.5));
  CHECK(order_of(average_quality_ranking(flat)) == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("segmented quality rankings") {
  const auto m = two_class(Matrix::from_rows({{0.9, 0.1}, {0.1, 0.9}}));
  const auto r = segmented_quality_rankings(m);
  REQUIRE(r.size() == 2);
  CHECK(order_of(r[0]) == std::vector<std::size_t>{0, 1});
  CHECK(order_of(r[1]) == std::vector<std::size_t>{1, 0});

  const auto same = two_class(Matrix::from_rows({{0.2, 0.2}, {0.7, 0.7}, {0.4, 0.4}}));
  const auto rs = segmented_quality_rankings(same);
  CHECK(rs[0] == rs[1]);

  const MarketConfig k1({1.0}, Matrix(3, 1, 1.0), Matrix::from_rows({{0.3}, {0.6}, {0.1}}),
                        {1, 1, 1});
  const auto r1 = segmented_quality_rankings(k1);
  REQUIRE(r1.size() == 1);
  CHECK(r1[0] == average_quality_ranking(k1));
}

TEST_CASE("every policy output is a bijection") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rep % 7;
    const auto m = random_market(rng, n, 2);
    const auto d = random_counts(rng, n, 5);
    std::vector<std::int64_t> last(n);
    for (std::size_t i = 0; i < n; ++i) last[i] = static_cast<std::int64_t>(d[i]) - 2;
    CHECK(is_bijection(popularity_ranking(d)));
    CHECK(is_bijection(activity_ranking(last)));
    CHECK(is_bijection(average_quality_ranking(m)));
    for (const auto& r : segmented_quality_rankings(m)) CHECK(is_bijection(r));
    CHECK(is_bijection(performance_ranking_swap_heuristic(m, PopularitySignal::global(d), 50)
                           .ranking));
    CHECK(is_bijection(performance_ranking_bruteforce(m, PopularitySignal::global(d)).ranking));
  }
}

TEST_CASE("static rankings ignore the signal") {
  std::mt19937_64 rng(4);
  const auto m = random_market(rng, 6, 2);
  const auto aq = average_quality_ranking(m);
  const auto sq = segmented_quality_rankings(m);
  // These are pure functions of the config: the state never enters.
  CHECK(average_quality_ranking(m) == aq);
  CHECK(segmented_quality_rankings(m) == sq);
  CHECK(PolicySpec::parse("AQGSI").is_static());
  CHECK(PolicySpec::parse("SQSSI").is_static());
  CHECK_FALSE(PolicySpec::parse("POPGSI").is_static());
}

TEST_CASE("single-class performance ranking on small cases") {
  // Only the first slot is visible: the better item goes there.
  const MarketConfig m({1.0}, Matrix::from_rows({{1.0}, {3.0}}), Matrix::from_rows({{0.2}, {0.6}}),
                       {1, 0});
  const auto r = performance_ranking_k1(m, std::vector<Count>{0, 0});
  CHECK(r.ranking.item_at(0) == 1);
  CHECK(std::abs(r.objective - 0.6) < 1e-12);
  CHECK(r.exact);

  const MarketConfig flat({1.0}, Matrix::from_rows({{1.0}, {2.0}, {0.5}}), Matrix(3, 1, 0.4),
                          {1, 0.6, 0.3});
  const auto f = performance_ranking_k1(flat, std::vector<Count>{0, 0, 0});
  CHECK(std::abs(f.objective - 0.4) < 1e-12);

  std::mt19937_64 rng(3);
  CHECK(kind_of([&] {
          performance_ranking_k1(random_market(rng, 3, 2), std::vector<Count>{0, 0, 0});
        }) == ErrorKind::UnsupportedSolver);
}

TEST_CASE("single-class solver matches permutation enumeration") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 150; ++rep) {
    const std::size_t n = 1 + rep % 7;
    const double z = rep % 2 == 0 ? 0.0 : 1.0;
    const auto m = random_market(rng, n, 1, z);
    const auto d = random_counts(rng, n, rep % 3 == 0 ? 0 : 20);
    DinkelbachTrace trace;
    const auto r = performance_ranking_k1(m, d, &trace);
    const double oracle = naive_best_ranking_value(m, same_for_all_classes(d, 1));
    CHECK(std::abs(r.objective - oracle) < 1e-10);
    CHECK(std::abs(naive_purchase_probability(m, r.ranking.positions(),
                                              same_for_all_classes(d, 1)) -
                   r.objective) < 1e-12);
    CHECK(trace.final_gap <= 1e-12);
    for (std::size_t s = 1; s < trace.lambdas.size(); ++s) {
      CHECK(trace.lambdas[s] > trace.lambdas[s - 1]);
    }
  }
}

TEST_CASE("brute force is exhaustive") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 1 + rep % 6;
    const std::size_t k = 1 + rep % 3;
    const auto m = random_market(rng, n, k, rep % 2 ? 0.5 : 0.0);
    const auto d = random_counts(rng, n, 10);
    const auto r = performance_ranking_bruteforce(m, PopularitySignal::global(d));
    const double oracle = naive_best_ranking_value(m, same_for_all_classes(d, k));
    CHECK(std::abs(r.objective - oracle) < 1e-12);
    CHECK(r.exact);
    if (k == 1) {
      CHECK(std::abs(performance_ranking_k1(m, d).objective - r.objective) < 1e-10);
    }
  }

  // A single item: its weighted quality times its trial probability.
  const MarketConfig one({0.3, 0.7}, Matrix::from_rows({{2.0, 0.5}}),
                         Matrix::from_rows({{0.4, 0.9}}), {0.8}, 1.0);
  const double expected = 0.3 * 0.4 * (0.8 * 2.0) / (0.8 * 2.0 + 1.0) +
                          0.7 * 0.9 * (0.8 * 0.5) / (0.8 * 0.5 + 1.0);
  const auto single = performance_ranking_bruteforce(one, PopularitySignal::global({0}));
  CHECK(std::abs(single.objective - expected) < 1e-12);
  CHECK(single.ranking == Ranking::identity(1));

  CHECK(kind_of([&] {
          performance_ranking_bruteforce(random_market(rng, 10, 1),
                                         PopularitySignal::global(std::vector<Count>(10, 0)));
        }) == ErrorKind::SizeLimit);
}

TEST_CASE("swap heuristic never loses to the average-quality ranking") {
  std::mt19937_64 rng(29);
  double worst_gap = 0.0;
  for (int rep = 0; rep < 80; ++rep) {
    const std::size_t n = 2 + rep % 6;
    const auto m = random_market(rng, n, 2 + rep % 2);
    const auto d = random_counts(rng, n, 15);
    const auto signal = PopularitySignal::global(d);
    const auto h = performance_ranking_swap_heuristic(m, signal, 50);
    CHECK_FALSE(h.exact);
    const double aq = purchase_probability_next(m, average_quality_ranking(m), signal);
    CHECK(h.objective >= aq - 1e-15);
    const double best = performance_ranking_bruteforce(m, signal).objective;
    CHECK(h.objective <= best + 1e-12);
    worst_gap = std::max(worst_gap, best - h.objective);
  }
  MESSAGE("largest swap-heuristic gap: " << worst_gap);

  for (int rep = 0; rep < 100; ++rep) {
    const auto m = random_market(rng, 6, 1);
    const auto d = random_counts(rng, 6, 15);
    const auto h = performance_ranking_swap_heuristic(m, PopularitySignal::global(d), 50);
    CHECK(h.objective >=
          purchase_probability_next(m, average_quality_ranking(m), PopularitySignal::global(d)) -
              1e-15);
  }
}

TEST_CASE("solver dispatch") {
  std::mt19937_64 rng(31);
  const auto m = random_market(rng, 5, 1);
  const auto s = PopularitySignal::global({1, 2, 3, 0, 0});
  CHECK(performance_ranking(m, s, PerformanceSolver::Exact1Class).solver ==
        PerformanceSolver::Exact1Class);
  CHECK(performance_ranking(m, s, PerformanceSolver::BruteForce).solver ==
        PerformanceSolver::BruteForce);
  CHECK(to_string(PerformanceSolver::SwapHeuristic) == "swap");
  CHECK(to_string(SignalMode::Segmented) == "SSI");
}
