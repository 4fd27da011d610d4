#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trialmarket/market.hpp"
#include "trialmarket/policies.hpp"
#include "trialmarket/rng.hpp"

namespace trialmarket {

struct StepRecord {
  std::int64_t step = 0;
  std::size_t class_index = 0;
  std::optional<std::size_t> item;  // empty when nothing was tried
  bool purchased = false;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SimulationTrace {
  std::vector<StepRecord> records;
  MarketState final_state;
};

/// Ranking a class-k consumer sees under `policy` in `state`.
Ranking policy_ranking(const MarketConfig& config, const PolicySpec& policy,
                       const MarketState& state, std::size_t k);

/// Advances `state` by one consumer. Draws for step t come from counters
/// 4t, 4t+1 and 4t+2 of `rng`.
StepRecord simulate_step(const MarketConfig& config, const PolicySpec& policy,
                         MarketState& state, const CounterRng& rng);

/// Stateful runner that caches static rankings between steps.
class Simulator {
 public:
  Simulator(const MarketConfig& config, const PolicySpec& policy, std::uint64_t stream_key);

  StepRecord step();
  const MarketState& state() const noexcept { return state_; }

 private:
  const MarketConfig* config_;
  PolicySpec policy_;
  CounterRng rng_;
  MarketState state_;
  std::vector<Ranking> static_rankings_;
  std::vector<double> weights_;
  std::vector<Count> observed_;
};

SimulationTrace run_simulation(const MarketConfig& config, const PolicySpec& policy,
                               std::int64_t horizon, std::uint64_t stream_key);

struct EfficiencyCurve {
  std::string policy;
  std::size_t replications = 0;
  std::vector<std::int64_t> steps;
  std::vector<double> mean_cumulative_purchases;
  std::vector<double> standard_error;
};

struct PurchaseProfile {
  std::string policy;
  std::size_t replications = 0;
  std::vector<double> mean_purchases;  // per item
  Matrix mean_class_purchases;         // N x K
};

struct MonteCarloOptions {
  std::int64_t horizon = 5000;
  std::size_t replications = 1000;
  std::uint64_t base_seed = 1;
  std::vector<std::int64_t> checkpoints;  // empty: default grid
  unsigned threads = 1;
};

struct MonteCarloResult {
  std::vector<EfficiencyCurve> curves;
  std::vector<PurchaseProfile> profiles;
};

/// `count` evenly spaced steps ending at the horizon.
std::vector<std::int64_t> default_checkpoints(std::int64_t horizon, std::size_t count = 100);

/// Replication r of policy p runs on stream derive_key(base_seed, p, r).
/// Results do not depend on `threads`.
MonteCarloResult monte_carlo(const MarketConfig& config, std::span<const PolicySpec> policies,
                             const MonteCarloOptions& options);

/// CSV writers. Floats use 10 significant digits; items are 1-based.
void write_efficiency_csv(std::ostream& out, std::span<const EfficiencyCurve> curves);
void write_profile_csv(std::ostream& out, const MarketConfig& config,
                       std::span<const PurchaseProfile> profiles);

std::string format_real(double value);

}  // namespace trialmarket
