#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trialmarket/matrix.hpp"

namespace trialmarket {

using Count = std::int64_t;

/// Appeals must be strictly positive for a market instance. Hardness
/// reductions and the tightness constructions use zero appeals, so they opt
/// into the relaxed check.
enum class AppealCheck { Positive, NonNegative };

/// Immutable trial-offer market instance: N items shown at N positions to K
/// consumer classes following a mixed multinomial logit.
class MarketConfig {
 public:
  MarketConfig(std::vector<double> class_weights, Matrix appeals, Matrix qualities,
               std::vector<double> visibilities, double no_trial_mass = 0.0,
               AppealCheck appeal_check = AppealCheck::Positive);

  static MarketConfig from_arrival_rates(std::vector<double> arrival_rates, Matrix appeals,
                                         Matrix qualities, std::vector<double> visibilities,
                                         double no_trial_mass = 0.0,
                                         AppealCheck appeal_check = AppealCheck::Positive);

  std::size_t num_items() const noexcept { return visibilities_.size(); }
  std::size_t num_classes() const noexcept { return weights_.size(); }

  const std::optional<std::vector<double>>& arrival_rates() const noexcept {
    return arrival_rates_;
  }
  const std::vector<double>& class_weights() const noexcept { return weights_; }
  double weight(std::size_t k) const { return weights_[k]; }

  const Matrix& appeals() const noexcept { return appeals_; }
  const Matrix& qualities() const noexcept { return qualities_; }
  double appeal(std::size_t item, std::size_t k) const { return appeals_(item, k); }
  double quality(std::size_t item, std::size_t k) const { return qualities_(item, k); }

  /// Visibility of display position j (0-based, non-increasing in j).
  const std::vector<double>& visibilities() const noexcept { return visibilities_; }
  double visibility(std::size_t position) const { return visibilities_[position]; }

  double no_trial_mass() const noexcept { return z_; }
  AppealCheck appeal_check() const noexcept { return appeal_check_; }

  /// Same market with a different position profile.
  MarketConfig with_visibilities(std::vector<double> visibilities) const;
  MarketConfig with_no_trial_mass(double z) const;

 private:
  void validate() const;

  std::optional<std::vector<double>> arrival_rates_;
  std::vector<double> weights_;
  Matrix appeals_;
  Matrix qualities_;
  std::vector<double> visibilities_;
  double z_ = 0.0;
  AppealCheck appeal_check_ = AppealCheck::Positive;
};

/// A permutation placing each item at one display position. Items and
/// positions are 0-based.
class Ranking {
 public:
  static Ranking identity(std::size_t n);
  /// position_of_item[i] = position held by item i.
  static Ranking from_positions(std::vector<std::size_t> position_of_item);
  /// items_by_position[j] = item shown at position j.
  static Ranking from_order(std::span<const std::size_t> items_by_position);

  std::size_t size() const noexcept { return position_of_item_.size(); }
  std::size_t position(std::size_t item) const { return position_of_item_[item]; }
  std::size_t item_at(std::size_t position) const { return item_at_position_[position]; }
  const std::vector<std::size_t>& positions() const noexcept { return position_of_item_; }
  const std::vector<std::size_t>& order() const noexcept { return item_at_position_; }

  friend bool operator==(const Ranking& a, const Ranking& b) {
    return a.position_of_item_ == b.position_of_item_;
  }

 private:
  explicit Ranking(std::vector<std::size_t> position_of_item);

  std::vector<std::size_t> position_of_item_;
  std::vector<std::size_t> item_at_position_;
};

enum class SignalMode { Global, Segmented, None };

/// Purchase counts shown to an arriving consumer.
class PopularitySignal {
 public:
  static PopularitySignal global(std::vector<Count> counts);
  /// class_counts is N x K row-major; the global vector is its row sum.
  static PopularitySignal segmented(std::size_t num_classes, std::vector<Count> class_counts);
  static PopularitySignal none(std::size_t num_items);

  SignalMode mode() const noexcept { return mode_; }
  std::size_t num_items() const noexcept { return global_.size(); }

  const std::vector<Count>& global_counts() const noexcept { return global_; }
  /// Counts a class-k consumer observes. All zeros when the signal is hidden.
  std::vector<Count> observed(std::size_t k) const;

 private:
  PopularitySignal(SignalMode mode, std::size_t num_classes, std::vector<Count> global,
                   std::vector<Count> per_class);

  SignalMode mode_;
  std::size_t num_classes_;
  std::vector<Count> global_;
  std::vector<Count> per_class_;
};

/// Purchase bookkeeping for one market run.
struct MarketState {
  MarketState(std::size_t num_items, std::size_t num_classes);

  std::int64_t step = 0;
  std::size_t num_classes;
  std::vector<Count> purchases;
  std::vector<Count> class_purchases;  // N x K row-major
  std::vector<std::int64_t> last_purchase_step;

  std::size_t num_items() const noexcept { return purchases.size(); }
  Count class_purchases_of(std::size_t item, std::size_t k) const {
    return class_purchases[item * num_classes + k];
  }
  Count total_purchases() const;

  void record_purchase(std::size_t item, std::size_t k);

  PopularitySignal signal(SignalMode mode) const;
};

struct TrialDistribution {
  std::vector<double> trial;
  double no_trial = 0.0;
};

std::vector<double> derive_class_weights(std::span<const double> arrival_rates);

/// Trial probabilities of a class-k consumer who sees `ranking` and counts
/// `observed`, including the probability of trying nothing.
TrialDistribution trial_probabilities(const MarketConfig& config, const Ranking& ranking,
                                      std::span<const Count> observed, std::size_t k);

/// Probability that the next consumer purchases something. `rankings` holds a
/// single ranking shared by all classes or one ranking per class.
double purchase_probability_next(const MarketConfig& config, std::span<const Ranking> rankings,
                                 const PopularitySignal& signal);
double purchase_probability_next(const MarketConfig& config, const Ranking& ranking,
                                 const PopularitySignal& signal);

std::vector<double> market_shares(std::span<const Count> purchases);

}  // namespace trialmarket
