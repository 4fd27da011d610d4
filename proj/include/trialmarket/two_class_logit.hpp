#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "trialmarket/market.hpp"
#include "trialmarket/policies.hpp"

namespace trialmarket {

/// Assortment problem over a two-point mixture of logit models: with
/// probability alpha consumers follow utilities `v1`, otherwise `v2`.
struct TwoClassLogitInstance {
  std::vector<double> v1;
  std::vector<double> v2;
  std::vector<double> revenues;
  double alpha = 0.5;

  std::size_t size() const noexcept { return revenues.size(); }
  void validate() const;
};

/// Expected revenue of offering `assortment` (0-based item indices).
double assortment_revenue(const TwoClassLogitInstance& instance,
                          std::span<const std::size_t> assortment);

struct AssortmentResult {
  std::vector<std::size_t> assortment;  // sorted, 0-based
  double value = 0.0;
  bool exact = true;
  /// Best value per assortment size 1..N (reduction only).
  std::vector<double> value_by_size;
};

/// Solves an instance of the performance-ranking problem.
using PerformanceOracle =
    std::function<PerformanceResult(const MarketConfig&, const PopularitySignal&)>;

/// Qualities must lie in [0,1], so revenues enter the market as r / max r.
double reduction_revenue_scale(const TwoClassLogitInstance& instance);

/// Two-class market whose first `visible_positions` positions have visibility
/// one and the rest zero; appeals are the logit utilities, z = 1, no purchases.
MarketConfig reduction_market(const TwoClassLogitInstance& instance,
                              std::size_t visible_positions);

/// Solves the assortment problem with N calls to a performance-ranking
/// oracle. The result is flagged non-exact when the oracle is a heuristic.
AssortmentResult solve_two_class_logit(const TwoClassLogitInstance& instance,
                                       const PerformanceOracle& oracle, bool oracle_is_exact);

inline constexpr std::size_t kMaxAssortmentEnumerationItems = 20;

/// Exhaustive search over all 2^N assortments.
AssortmentResult brute_force_two_class_logit(const TwoClassLogitInstance& instance);

}  // namespace trialmarket
