#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trialmarket/market.hpp"

namespace trialmarket {

enum class RankingKind { Popularity, Activity, Performance, AverageQuality, SegmentedQuality };
enum class PerformanceSolver { Exact1Class, BruteForce, SwapHeuristic };

/// A ranking policy paired with the popularity signal consumers are shown.
struct PolicySpec {
  RankingKind kind = RankingKind::AverageQuality;
  SignalMode signal = SignalMode::Global;
  PerformanceSolver solver = PerformanceSolver::SwapHeuristic;
  int max_passes = 50;

  /// Parses labels such as "SQSSI", "AQNSI", "POPGSI", "ACTGSI" or
  /// "PERFGSI:bruteforce". Case-insensitive.
  static PolicySpec parse(const std::string& label);
  std::string label() const;

  bool is_static() const noexcept {
    return kind == RankingKind::AverageQuality || kind == RankingKind::SegmentedQuality;
  }
  /// Throws when the policy cannot run on `config`.
  void validate(const MarketConfig& config) const;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// The four policies compared in the segmentation experiments.
std::vector<PolicySpec> standard_policies();

// Sorting helpers. Ties always go to the lower item index.
Ranking popularity_ranking(std::span<const Count> purchases);
Ranking activity_ranking(std::span<const std::int64_t> last_purchase_step);

std::vector<double> average_quality(const MarketConfig& config);
Ranking average_quality_ranking(const MarketConfig& config);
std::vector<Ranking> segmented_quality_rankings(const MarketConfig& config);

struct PerformanceResult {
  Ranking ranking;
  double objective = 0.0;
  PerformanceSolver solver = PerformanceSolver::BruteForce;
  bool exact = false;
};

/// Iterates of the parametric (Dinkelbach) search, for diagnostics.
struct DinkelbachTrace {
  std::vector<double> lambdas;
  /// max over rankings of sum_j v_j (f - lambda g) - lambda z at the last lambda.
  double final_gap = 0.0;
  int iterations = 0;
};

/// Exact single-class performance ranking for counts `purchases`.
PerformanceResult performance_ranking_k1(const MarketConfig& config,
                                         std::span<const Count> purchases,
                                         DinkelbachTrace* trace = nullptr);

inline constexpr std::size_t kMaxBruteForceItems = 9;

/// Exhaustive search over all N! rankings (N <= 9). Among equal objectives the
/// lexicographically smallest position vector wins.
PerformanceResult performance_ranking_bruteforce(const MarketConfig& config,
                                                 const PopularitySignal& signal);

/// Best-improvement pairwise swap search started from the average quality
/// ranking.
PerformanceResult performance_ranking_swap_heuristic(const MarketConfig& config,
                                                     const PopularitySignal& signal,
                                                     int max_passes);

/// Dispatches on `solver`.
PerformanceResult performance_ranking(const MarketConfig& config, const PopularitySignal& signal,
                                      PerformanceSolver solver, int max_passes = 50);

std::string to_string(PerformanceSolver solver);
std::string to_string(SignalMode mode);

}  // namespace trialmarket
