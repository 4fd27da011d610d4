#include "trialmarket/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trialmarket/error.hpp"
#include "trialmarket/policies.hpp"

namespace trialmarket {

namespace {

void check_dimensions(const MarketConfig& config, const Ranking& ranking,
                      std::span<const Count> purchases) {
  if (ranking.size() != config.num_items() || purchases.size() != config.num_items()) {
    fail(ErrorKind::InvalidArgument, "ranking/count dimension does not match the market");
  }
  for (Count c : purchases) {
    if (c < 0) fail(ErrorKind::InvalidArgument, "purchase counts must be non-negative");
  }
}

/// sum_j v_pos(j) (a_jk + d_j) + z for every class k.
std::vector<double> class_denominators(const MarketConfig& config, const Ranking& ranking,
                                       std::span<const Count> purchases) {
  std::vector<double> out(config.num_classes(), config.no_trial_mass());
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (std::size_t j = 0; j < config.num_items(); ++j) {
      out[k] += config.visibility(ranking.position(j)) *
                (config.appeal(j, k) + static_cast<double>(purchases[j]));
    }
    if (!(out[k] > 0.0)) fail(ErrorKind::DegenerateInstance, "trial distribution has zero mass");
  }
  return out;
}

double weighted_mean_appeal(const MarketConfig& config, std::size_t i) {
  double out = 0.0;
  for (std::size_t k = 0; k < config.num_classes(); ++k) {
    out += config.weight(k) * config.appeal(i, k);
  }
  return out;
}

double max_appeal(const MarketConfig& config, std::size_t i) {
  const auto row = config.appeals().row(i);
  return *std::max_element(row.begin(), row.end());
}

/// Unique argmax of `values`, or nothing on a tie at the top.
std::optional<std::size_t> unique_argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != best && values[i] == values[best]) return std::nullopt;
  }
  return best;
}

std::vector<double> scaled_average_quality(const MarketConfig& config, const Ranking& ranking) {
  std::vector<double> out = average_quality(config);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= config.visibility(ranking.position(i));
  return out;
}

}  // namespace

std::vector<std::optional<double>> generalized_appeal(const MarketConfig& config,
                                                      const Ranking& ranking,
                                                      std::span<const Count> purchases) {
  check_dimensions(config, ranking, purchases);
  const std::vector<double> den = class_denominators(config, ranking, purchases);
  std::vector<std::optional<double>> out(config.num_items());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double num = 0.0;
    double weight = 0.0;
    for (std::size_t k = 0; k < config.num_classes(); ++k) {
      const double c = config.weight(k) * config.quality(i, k) / den[k];
      num += c * config.appeal(i, k);
      weight += c;
    }
    if (weight > 0.0) out[i] = num / weight;
  }
  return out;
}

std::vector<double> generalized_quality(const MarketConfig& config, const Ranking& ranking,
                                        std::span<const Count> purchases) {
  const auto appeal = generalized_appeal(config, ranking, purchases);
  const std::vector<double> den = class_denominators(config, ranking, purchases);
  double shared = config.no_trial_mass();
  for (std::size_t j = 0; j < config.num_items(); ++j) {
    const double a = appeal[j].value_or(weighted_mean_appeal(config, j));
    shared += config.visibility(ranking.position(j)) * (a + static_cast<double>(purchases[j]));
  }
  std::vector<double> out(config.num_items(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double scale = 0.0;
    for (std::size_t k = 0; k < config.num_classes(); ++k) {
      scale += config.weight(k) * config.quality(i, k) / den[k];
    }
    out[i] = scale * shared;
  }
  return out;
}

std::vector<double> item_purchase_probabilities(const MarketConfig& config,
                                                const Ranking& ranking,
                                                std::span<const Count> purchases) {
  check_dimensions(config, ranking, purchases);
  std::vector<double> out(config.num_items(), 0.0);
  for (std::size_t k = 0; k < config.num_classes(); ++k) {
    const TrialDistribution dist = trial_probabilities(config, ranking, purchases, k);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += config.weight(k) * dist.trial[i] * config.quality(i, k);
    }
  }
  return out;
}

LimitQuantities limit_quantities(const MarketConfig& config) {
  LimitQuantities out;
  out.quality = average_quality(config);
  out.appeal.resize(config.num_items());
  for (std::size_t i = 0; i < config.num_items(); ++i) {
    if (out.quality[i] <= 0.0) continue;
    double num = 0.0;
    for (std::size_t k = 0; k < config.num_classes(); ++k) {
      num += config.weight(k) * config.appeal(i, k) * config.quality(i, k);
    }
    out.appeal[i] = num / out.quality[i];
  }
  return out;
}

std::size_t monopoly_predictor(const MarketConfig& config, const Ranking& ranking) {
  if (ranking.size() != config.num_items()) {
    fail(ErrorKind::InvalidArgument, "ranking dimension does not match the market");
  }
  const auto leader = unique_argmax(scaled_average_quality(config, ranking));
  if (!leader) {
    fail(ErrorKind::TieBreakingViolation,
         "ranking is not tie-breaking: several items share the top visibility-quality product");
  }
  return *leader;
}

bool global_tie_breaking(const MarketConfig& config, const Ranking& ranking) {
  return unique_argmax(scaled_average_quality(config, ranking)).has_value();
}

bool segmented_tie_breaking(const MarketConfig& config) {
  for (std::size_t k = 0; k < config.num_classes(); ++k) {
    if (!unique_argmax(config.qualities().column(k))) return false;
  }
  return true;
}

TieBreaking tie_breaking_check(const MarketConfig& config, const Ranking& ranking) {
  return {global_tie_breaking(config, ranking), segmented_tie_breaking(config)};
}

double quality_band(const MarketConfig& config, const Ranking& ranking,
                    std::span<const Count> purchases) {
  check_dimensions(config, ranking, purchases);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < config.num_items(); ++j) {
    const double v = config.visibility(ranking.position(j));
    num += v * max_appeal(config, j);
    den += v * static_cast<double>(purchases[j]);
  }
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

double dtot_threshold(const MarketConfig& config, const Ranking& ranking) {
  const auto& v = config.visibilities();
  const double v_min = *std::min_element(v.begin(), v.end());
  const double v_max = *std::max_element(v.begin(), v.end());
  if (!(v_min > 0.0)) {
    fail(ErrorKind::Undefined, "purchase threshold needs every position to be visible");
  }
  if (config.num_items() < 2) fail(ErrorKind::Undefined, "purchase threshold needs two items");
  const std::size_t leader = monopoly_predictor(config, ranking);
  const std::vector<double> scaled = scaled_average_quality(config, ranking);
  double runner_up = -1.0;
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    if (i != leader) runner_up = std::max(runner_up, scaled[i]);
  }
  double appeal_mass = 0.0;
  for (std::size_t j = 0; j < config.num_items(); ++j) appeal_mass += max_appeal(config, j);
  const double gap = scaled[leader] - runner_up;
  return (v_max / v_min) * (appeal_mass / gap) * (scaled[leader] + runner_up);
}

ConvergenceDiagnostics convergence_diagnostics(const MarketConfig& config,
                                               const Ranking& ranking,
                                               std::span<const Count> purchases) {
  ConvergenceDiagnostics out;
  out.appeal = generalized_appeal(config, ranking, purchases);
  out.quality = generalized_quality(config, ranking, purchases);
  out.limits = limit_quantities(config);
  const std::size_t n = config.num_items();
  out.scaled_quality.resize(n);
  out.limit_scaled_quality.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = config.visibility(ranking.position(i));
    out.scaled_quality[i] = v * out.quality[i];
    out.limit_scaled_quality[i] = v * out.limits.quality[i];
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return out.limit_scaled_quality[x] > out.limit_scaled_quality[y];
  });
  out.leader = order[0];
  out.runner_up = n > 1 ? order[1] : order[0];
  out.limit_gap = out.limit_scaled_quality[out.leader] - out.limit_scaled_quality[out.runner_up];
  try {
    out.purchase_threshold = dtot_threshold(config, ranking);
  } catch (const MarketError&) {
    out.purchase_threshold.reset();
  }
  return out;
}

double no_signal_purchase_probability(const MarketConfig& config,
                                      std::span<const Ranking> rankings) {
  return purchase_probability_next(config, rankings, PopularitySignal::none(config.num_items()));
}

AsymptoticReport asymptotic_report(const MarketConfig& config) {
  AsymptoticReport report;
  const Ranking aq = average_quality_ranking(config);
  const std::vector<Ranking> sq = segmented_quality_rankings(config);
  const std::vector<double> avg_q = average_quality(config);

  report.global_tie_breaking = global_tie_breaking(config, aq);
  report.segmented_tie_breaking = segmented_tie_breaking(config);

  if (report.global_tie_breaking) {
    report.monopoly_aq = monopoly_predictor(config, aq);
    report.p_aqgsi = *std::max_element(avg_q.begin(), avg_q.end());
  }
  report.p_aqnsi = no_signal_purchase_probability(config, std::span<const Ranking>(&aq, 1));
  report.p_sqnsi = no_signal_purchase_probability(config, sq);

  report.monopoly_sq.resize(config.num_classes());
  double segmented = 0.0;
  for (std::size_t k = 0; k < config.num_classes(); ++k) {
    const std::vector<double> column = config.qualities().column(k);
    report.monopoly_sq[k] = unique_argmax(column);
    segmented += config.weight(k) * *std::max_element(column.begin(), column.end());
  }
  if (report.segmented_tie_breaking) report.p_sqssi = segmented;

  if (report.p_aqgsi && *report.p_aqgsi > 0.0) {
    report.ratio_aqnsi_aqgsi = *report.p_aqnsi / *report.p_aqgsi;
    if (report.p_sqssi) report.ratio_sqssi_aqgsi = *report.p_sqssi / *report.p_aqgsi;
  }
  return report;
}

MarketConfig tightness_instance(TightnessKind kind, std::size_t classes, double epsilon,
                                double epsilon_appeal, std::optional<std::vector<double>> weights) {
  if (classes < 1) fail(ErrorKind::InvalidArgument, "need at least one class");
  if (!(epsilon > 0.0) || !(epsilon_appeal > 0.0)) {
    fail(ErrorKind::InvalidArgument, "epsilon parameters must be positive");
  }
  const std::size_t n = classes;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (weights) {
    if (kind != TightnessKind::Theorem4) {
      fail(ErrorKind::InvalidArgument, "custom weights only apply to the segmentation instance");
    }
    w = *weights;
    if (w.size() != n) fail(ErrorKind::InvalidArgument, "need one weight per class");
  }
  Matrix appeals(n, n, 1.0);
  Matrix qualities(n, n, 0.0);
  AppealCheck check = AppealCheck::Positive;

  switch (kind) {
    case TightnessKind::Theorem3Upper:
      // Identity appeals: class k only ever tries item k.
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) appeals(i, k) = i == k ? 1.0 : 0.0;
      }
      check = AppealCheck::NonNegative;
      [[fallthrough]];
    case TightnessKind::Theorem3Lower:
      for (std::size_t i = 0; i < n; ++i) {
        qualities(i, i) = i == 0 ? 1.0 : 1.0 - epsilon;
        if (kind == TightnessKind::Theorem3Lower) appeals(i, i) = epsilon_appeal;
      }
      break;
    case TightnessKind::Theorem4: {
      const double w_min = *std::min_element(w.begin(), w.end());
      if (w[0] != w_min) {
        fail(ErrorKind::InvalidArgument, "the first class must carry the smallest weight");
      }
      for (std::size_t k = 0; k < n; ++k) {
        qualities(k, k) = k == 0 ? 1.0 : w_min / w[k] - epsilon;
      }
      break;
    }
  }
  return MarketConfig(std::move(w), std::move(appeals), std::move(qualities),
                      std::vector<double>(n, 1.0), 0.0, check);
}

}  // namespace trialmarket
