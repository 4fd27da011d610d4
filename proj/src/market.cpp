#include "trialmarket/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "trialmarket/error.hpp"

namespace trialmarket {

namespace {

constexpr double kSimplexTolerance = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::InvalidInstance, what);
}

}  // namespace

MarketConfig::MarketConfig(std::vector<double> class_weights, Matrix appeals, Matrix qualities,
                           std::vector<double> visibilities, double no_trial_mass,
                           AppealCheck appeal_check)
    : weights_(std::move(class_weights)),
      appeals_(std::move(appeals)),
      qualities_(std::move(qualities)),
      visibilities_(std::move(visibilities)),
      z_(no_trial_mass),
      appeal_check_(appeal_check) {
  validate();
}

MarketConfig MarketConfig::from_arrival_rates(std::vector<double> arrival_rates, Matrix appeals,
                                              Matrix qualities, std::vector<double> visibilities,
                                              double no_trial_mass, AppealCheck appeal_check) {
  MarketConfig config(derive_class_weights(arrival_rates), std::move(appeals),
                      std::move(qualities), std::move(visibilities), no_trial_mass, appeal_check);
  config.arrival_rates_ = std::move(arrival_rates);
  return config;
}

MarketConfig MarketConfig::with_visibilities(std::vector<double> visibilities) const {
  MarketConfig copy = *this;
  copy.visibilities_ = std::move(visibilities);
  copy.validate();
  return copy;
}

MarketConfig MarketConfig::with_no_trial_mass(double z) const {
  MarketConfig copy = *this;
  copy.z_ = z;
  copy.validate();
  return copy;
}

void MarketConfig::validate() const {
  const std::size_t n = visibilities_.size();
  const std::size_t k = weights_.size();
  require(n > 0, "market needs at least one item");
  require(k > 0, "market needs at least one consumer class");
  require(appeals_.rows() == n && appeals_.cols() == k, "appeal matrix must be N x K");
  require(qualities_.rows() == n && qualities_.cols() == k, "quality matrix must be N x K");

  double total = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w) && w >= 0.0, "class weights must be non-negative");
    total += w;
  }
  require(std::abs(total - 1.0) <= kSimplexTolerance, "class weights must sum to 1");

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      const double a = appeals_(i, c);
      if (appeal_check_ == AppealCheck::Positive) {
        require(std::isfinite(a) && a > 0.0, "appeals must be strictly positive");
      } else {
        require(std::isfinite(a) && a >= 0.0, "appeals must be non-negative");
      }
      const double q = qualities_(i, c);
      require(q >= 0.0 && q <= 1.0, "qualities must lie in [0,1]");
    }
  }

  bool any_visible = false;
  for (std::size_t j = 0; j < n; ++j) {
    require(std::isfinite(visibilities_[j]) && visibilities_[j] >= 0.0,
            "visibilities must be non-negative");
    if (j > 0) {
      require(visibilities_[j] <= visibilities_[j - 1],
              "visibilities must be sorted non-increasingly by position");
    }
    any_visible = any_visible || visibilities_[j] > 0.0;
  }
  require(any_visible, "at least one position must be visible");
  require(std::isfinite(z_) && z_ >= 0.0, "no-trial mass z must be non-negative");
}

Ranking::Ranking(std::vector<std::size_t> position_of_item)
    : position_of_item_(std::move(position_of_item)),
      item_at_position_(position_of_item_.size(), position_of_item_.size()) {
  const std::size_t n = position_of_item_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = position_of_item_[i];
    if (j >= n || item_at_position_[j] != n) {
      fail(ErrorKind::InvalidArgument, "ranking is not a permutation");
    }
    item_at_position_[j] = i;
  }
}

Ranking Ranking::identity(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return Ranking(std::move(p));
}

Ranking Ranking::from_positions(std::vector<std::size_t> position_of_item) {
  return Ranking(std::move(position_of_item));
}

Ranking Ranking::from_order(std::span<const std::size_t> items_by_position) {
  const std::size_t n = items_by_position.size();
  std::vector<std::size_t> positions(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t item = items_by_position[j];
    if (item >= n || positions[item] != n) {
      fail(ErrorKind::InvalidArgument, "ranking is not a permutation");
    }
    positions[item] = j;
  }
  return Ranking(std::move(positions));
}

PopularitySignal::PopularitySignal(SignalMode mode, std::size_t num_classes,
                                   std::vector<Count> global, std::vector<Count> per_class)
    : mode_(mode),
      num_classes_(num_classes),
      global_(std::move(global)),
      per_class_(std::move(per_class)) {
  for (Count c : global_) {
    if (c < 0) fail(ErrorKind::InvalidArgument, "purchase counts must be non-negative");
  }
  for (Count c : per_class_) {
    if (c < 0) fail(ErrorKind::InvalidArgument, "purchase counts must be non-negative");
  }
}

PopularitySignal PopularitySignal::global(std::vector<Count> counts) {
  return PopularitySignal(SignalMode::Global, 0, std::move(counts), {});
}

PopularitySignal PopularitySignal::segmented(std::size_t num_classes,
                                             std::vector<Count> class_counts) {
  if (num_classes == 0 || class_counts.size() % num_classes != 0) {
    fail(ErrorKind::InvalidArgument, "segmented counts must be an N x K table");
  }
  const std::size_t n = class_counts.size() / num_classes;
  std::vector<Count> global(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < num_classes; ++k) global[i] += class_counts[i * num_classes + k];
  }
  return PopularitySignal(SignalMode::Segmented, num_classes, std::move(global),
                          std::move(class_counts));
}

PopularitySignal PopularitySignal::none(std::size_t num_items) {
  return PopularitySignal(SignalMode::None, 0, std::vector<Count>(num_items, 0), {});
}

std::vector<Count> PopularitySignal::observed(std::size_t k) const {
  switch (mode_) {
    case SignalMode::Global:
      return global_;
    case SignalMode::None:
      return std::vector<Count>(global_.size(), 0);
    case SignalMode::Segmented: {
      if (k >= num_classes_) fail(ErrorKind::InvalidArgument, "class index out of range");
      std::vector<Count> out(global_.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = per_class_[i * num_classes_ + k];
      return out;
    }
  }
  return {};
}

MarketState::MarketState(std::size_t num_items, std::size_t classes)
    : num_classes(classes),
      purchases(num_items, 0),
      class_purchases(num_items * classes, 0),
      last_purchase_step(num_items, -1) {}

Count MarketState::total_purchases() const {
  return std::accumulate(purchases.begin(), purchases.end(), Count{0});
}

void MarketState::record_purchase(std::size_t item, std::size_t k) {
  ++purchases[item];
  ++class_purchases[item * num_classes + k];
  last_purchase_step[item] = step;
}

PopularitySignal MarketState::signal(SignalMode mode) const {
  switch (mode) {
    case SignalMode::Global: return PopularitySignal::global(purchases);
    case SignalMode::Segmented: return PopularitySignal::segmented(num_classes, class_purchases);
    case SignalMode::None: return PopularitySignal::none(purchases.size());
  }
  return PopularitySignal::none(purchases.size());
}

std::vector<double> derive_class_weights(std::span<const double> arrival_rates) {
  if (arrival_rates.empty()) fail(ErrorKind::InvalidInstance, "no arrival rates given");
  double total = 0.0;
  for (double r : arrival_rates) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      fail(ErrorKind::InvalidInstance, "arrival rates must be strictly positive");
    }
    total += r;
  }
  std::vector<double> weights(arrival_rates.begin(), arrival_rates.end());
  for (double& w : weights) w /= total;
  return weights;
}

TrialDistribution trial_probabilities(const MarketConfig& config, const Ranking& ranking,
                                      std::span<const Count> observed, std::size_t k) {
  const std::size_t n = config.num_items();
  if (ranking.size() != n || observed.size() != n) {
    fail(ErrorKind::InvalidArgument, "ranking/count dimension does not match the market");
  }
  if (k >= config.num_classes()) fail(ErrorKind::InvalidArgument, "class index out of range");

  TrialDistribution out;
  out.trial.resize(n);
  double denominator = config.no_trial_mass();
  for (std::size_t i = 0; i < n; ++i) {
    if (observed[i] < 0) fail(ErrorKind::InvalidArgument, "purchase counts must be non-negative");
    const double weight = config.visibility(ranking.position(i)) *
                          (config.appeal(i, k) + static_cast<double>(observed[i]));
    out.trial[i] = weight;
    denominator += weight;
  }
  if (!(denominator > 0.0)) {
    fail(ErrorKind::DegenerateInstance, "trial distribution has zero mass");
  }
  for (double& p : out.trial) p /= denominator;
  out.no_trial = config.no_trial_mass() / denominator;
  return out;
}

double purchase_probability_next(const MarketConfig& config, std::span<const Ranking> rankings,
                                 const PopularitySignal& signal) {
  const std::size_t kc = config.num_classes();
  if (rankings.size() != 1 && rankings.size() != kc) {
    fail(ErrorKind::InvalidArgument, "expected one ranking or one ranking per class");
  }
  if (signal.num_items() != config.num_items()) {
    fail(ErrorKind::InvalidArgument, "signal dimension does not match the market");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < kc; ++k) {
    const Ranking& ranking = rankings.size() == 1 ? rankings[0] : rankings[k];
    const std::vector<Count> observed = signal.observed(k);
    const TrialDistribution dist = trial_probabilities(config, ranking, observed, k);
    double inner = 0.0;
    for (std::size_t i = 0; i < config.num_items(); ++i) {
      inner += dist.trial[i] * config.quality(i, k);
    }
    total += config.weight(k) * inner;
  }
  return total;
}

double purchase_probability_next(const MarketConfig& config, const Ranking& ranking,
                                 const PopularitySignal& signal) {
  return purchase_probability_next(config, std::span<const Ranking>(&ranking, 1), signal);
}

std::vector<double> market_shares(std::span<const Count> purchases) {
  Count total = 0;
  for (Count c : purchases) {
    if (c < 0) fail(ErrorKind::InvalidArgument, "purchase counts must be non-negative");
    total += c;
  }
  if (total == 0) fail(ErrorKind::UndefinedShare, "market shares undefined before any purchase");
  std::vector<double> shares(purchases.size());
  for (std::size_t i = 0; i < shares.size(); ++i) {
    shares[i] = static_cast<double>(purchases[i]) / static_cast<double>(total);
  }
  return shares;
}

}  // namespace trialmarket
