#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "trialmarket/market.hpp"

namespace trialmarket {

/// Appeal of each item in the single-class market equivalent to the mixed
/// market at counts `purchases` under a shared ranking. Empty for items with
/// zero quality in every class.
std::vector<std::optional<double>> generalized_appeal(const MarketConfig& config,
                                                      const Ranking& ranking,
                                                      std::span<const Count> purchases);

/// Quality of each item in the same equivalent market. Items whose generalized
/// appeal is undefined enter the shared denominator with their class-weighted
/// mean appeal; the choice cancels out of every purchase probability.
std::vector<double> generalized_quality(const MarketConfig& config, const Ranking& ranking,
                                        std::span<const Count> purchases);

/// Probability that the next consumer buys item i, per item, evaluated
/// directly from the mixed market.
std::vector<double> item_purchase_probabilities(const MarketConfig& config,
                                                const Ranking& ranking,
                                                std::span<const Count> purchases);

struct LimitQuantities {
  std::vector<std::optional<double>> appeal;  // undefined for zero-quality items
  std::vector<double> quality;
};

LimitQuantities limit_quantities(const MarketConfig& config);

/// Item whose visibility-weighted average quality is strictly largest.
/// Throws TieBreakingViolation when the maximum is shared.
std::size_t monopoly_predictor(const MarketConfig& config, const Ranking& ranking);

struct TieBreaking {
  bool global = false;     // unique argmax of v * average quality under the ranking
  bool segmented = false;  // every class has a unique top-quality item
};

TieBreaking tie_breaking_check(const MarketConfig& config, const Ranking& ranking);
bool global_tie_breaking(const MarketConfig& config, const Ranking& ranking);
bool segmented_tie_breaking(const MarketConfig& config);

/// sum_j v_pos(j) max_k a_jk / sum_j v_pos(j) d_j, the relative width of the
/// band around the limit quality. Infinite when no visible item was bought.
double quality_band(const MarketConfig& config, const Ranking& ranking,
                    std::span<const Count> purchases);

struct ConvergenceDiagnostics {
  std::vector<std::optional<double>> appeal;  // generalized appeal
  std::vector<double> quality;                // generalized quality
  std::vector<double> scaled_quality;         // v_pos(i) * generalized quality
  LimitQuantities limits;
  std::vector<double> limit_scaled_quality;   // v_pos(i) * limit quality
  std::size_t leader = 0;                     // largest limit scaled quality
  std::size_t runner_up = 0;
  double limit_gap = 0.0;
  std::optional<double> purchase_threshold;
};

ConvergenceDiagnostics convergence_diagnostics(const MarketConfig& config,
                                               const Ranking& ranking,
                                               std::span<const Count> purchases);

/// Total purchases after which the leader's equivalent-market quality is
/// guaranteed to stay ahead. Needs every visibility positive, a tie-breaking
/// ranking and at least two items.
double dtot_threshold(const MarketConfig& config, const Ranking& ranking);

struct AsymptoticReport {
  std::optional<double> p_aqgsi;
  std::optional<double> p_aqnsi;
  std::optional<double> p_sqssi;
  std::optional<double> p_sqnsi;
  std::optional<double> ratio_sqssi_aqgsi;
  std::optional<double> ratio_aqnsi_aqgsi;
  std::optional<std::size_t> monopoly_aq;            // under average quality ranking
  std::vector<std::optional<std::size_t>> monopoly_sq;  // per class under segmented ranking
  bool global_tie_breaking = false;
  bool segmented_tie_breaking = false;
};

/// Long-run purchase probabilities of the four standard policies.
AsymptoticReport asymptotic_report(const MarketConfig& config);

/// No-signal purchase probability of class-specific rankings: each class k
/// sees `rankings[k]` (or a shared ranking) and launch counts.
double no_signal_purchase_probability(const MarketConfig& config,
                                      std::span<const Ranking> rankings);

enum class TightnessKind { Theorem3Upper, Theorem3Lower, Theorem4 };

/// Parametric instances on which the signal-free/global and segmented/global
/// ratios approach their bounds. K items and K classes with unit
/// visibilities. `weights` applies to Theorem4 only (default uniform) and its
/// first class must have the smallest weight.
MarketConfig tightness_instance(TightnessKind kind, std::size_t classes, double epsilon,
                                double epsilon_appeal = 1e-6,
                                std::optional<std::vector<double>> weights = std::nullopt);

}  // namespace trialmarket
