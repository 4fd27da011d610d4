#include "trialmarket/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "trialmarket/error.hpp"

namespace trialmarket {

namespace {

std::size_t draw_class(const MarketConfig& config, double u) {
  const auto& w = config.class_weights();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k];
    if (w[k] > 0.0) last_positive = k;
    if (u < acc) return k;
  }
  return last_positive;
}

void observed_counts(const MarketState& state, SignalMode mode, std::size_t k,
                     std::vector<Count>& out) {
  const std::size_t n = state.num_items();
  out.resize(n);
  switch (mode) {
    case SignalMode::Global:
      std::copy(state.purchases.begin(), state.purchases.end(), out.begin());
      break;
    case SignalMode::Segmented:
      for (std::size_t i = 0; i < n; ++i) out[i] = state.class_purchases_of(i, k);
      break;
    case SignalMode::None:
      std::fill(out.begin(), out.end(), Count{0});
      break;
  }
}

/// One consumer: class draw, trial draw, purchase draw. `ranking_for` maps the
/// drawn class to the ranking that consumer sees.
template <typename RankingFor>
StepRecord advance(const MarketConfig& config, SignalMode signal, MarketState& state,
                   const CounterRng& rng, RankingFor&& ranking_for, std::vector<double>& weights,
                   std::vector<Count>& observed) {
  const std::int64_t t = state.step + 1;
  const std::uint64_t counter = static_cast<std::uint64_t>(t) * 4;
  StepRecord record;
  record.step = t;
  record.class_index = draw_class(config, rng.uniform(counter));
  const std::size_t k = record.class_index;

  const Ranking& ranking = ranking_for(k);
  observed_counts(state, signal, k, observed);
  const std::size_t n = config.num_items();
  weights.resize(n);
  double total = config.no_trial_mass();
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = config.visibility(ranking.position(i)) *
                 (config.appeal(i, k) + static_cast<double>(observed[i]));
    total += weights[i];
  }
  if (!(total > 0.0)) fail(ErrorKind::DegenerateInstance, "trial distribution has zero mass");

  const double target = rng.uniform(counter + 1) * total;
  double acc = 0.0;
  std::optional<std::size_t> item;
  std::size_t last_positive = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] > 0.0) last_positive = i;
    acc += weights[i];
    if (target < acc) {
      item = i;
      break;
    }
  }
  if (!item && config.no_trial_mass() == 0.0) item = last_positive;

  state.step = t;
  record.item = item;
  if (item && rng.uniform(counter + 2) < config.quality(*item, k)) {
    record.purchased = true;
    state.record_purchase(*item, k);
  }
  return record;
}

}  // namespace

Ranking policy_ranking(const MarketConfig& config, const PolicySpec& policy,
                       const MarketState& state, std::size_t k) {
  switch (policy.kind) {
    case RankingKind::AverageQuality:
      return average_quality_ranking(config);
    case RankingKind::SegmentedQuality:
      return segmented_quality_rankings(config)[k];
    case RankingKind::Popularity: {
      std::vector<Count> observed;
      observed_counts(state, policy.signal, k, observed);
      return popularity_ranking(observed);
    }
    case RankingKind::Activity:
      return activity_ranking(state.last_purchase_step);
    case RankingKind::Performance:
      return performance_ranking(config, state.signal(policy.signal), policy.solver,
                                 policy.max_passes)
          .ranking;
  }
  fail(ErrorKind::InvalidArgument, "unknown ranking kind");
}

StepRecord simulate_step(const MarketConfig& config, const PolicySpec& policy,
                         MarketState& state, const CounterRng& rng) {
  policy.validate(config);
  if (state.num_items() != config.num_items() || state.num_classes != config.num_classes()) {
    fail(ErrorKind::InvalidArgument, "state dimension does not match the market");
  }
  std::optional<Ranking> ranking;
  std::vector<double> weights;
  std::vector<Count> observed;
  return advance(
      config, policy.signal, state, rng,
      [&](std::size_t k) -> const Ranking& {
        ranking = policy_ranking(config, policy, state, k);
        return *ranking;
      },
      weights, observed);
}

Simulator::Simulator(const MarketConfig& config, const PolicySpec& policy,
                     std::uint64_t stream_key)
    : config_(&config),
      policy_(policy),
      rng_(stream_key),
      state_(config.num_items(), config.num_classes()) {
  policy_.validate(config);
  if (policy_.kind == RankingKind::AverageQuality) {
    static_rankings_.push_back(average_quality_ranking(config));
  } else if (policy_.kind == RankingKind::SegmentedQuality) {
    static_rankings_ = segmented_quality_rankings(config);
  }
}

StepRecord Simulator::step() {
  if (!static_rankings_.empty()) {
    return advance(
        *config_, policy_.signal, state_, rng_,
        [&](std::size_t k) -> const Ranking& {
          return static_rankings_.size() == 1 ? static_rankings_[0] : static_rankings_[k];
        },
        weights_, observed_);
  }
  std::optional<Ranking> ranking;
  return advance(
      *config_, policy_.signal, state_, rng_,
      [&](std::size_t k) -> const Ranking& {
        ranking = policy_ranking(*config_, policy_, state_, k);
        return *ranking;
      },
      weights_, observed_);
}

SimulationTrace run_simulation(const MarketConfig& config, const PolicySpec& policy,
                               std::int64_t horizon, std::uint64_t stream_key) {
  if (horizon < 1) fail(ErrorKind::InvalidArgument, "horizon must be at least one step");
  Simulator sim(config, policy, stream_key);
  std::vector<StepRecord> records;
  records.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 0; t < horizon; ++t) records.push_back(sim.step());
  return {std::move(records), sim.state()};
}

std::vector<std::int64_t> default_checkpoints(std::int64_t horizon, std::size_t count) {
  if (horizon < 1) fail(ErrorKind::InvalidArgument, "horizon must be at least one step");
  std::vector<std::int64_t> out;
  for (std::size_t c = 1; c <= count; ++c) {
    const std::int64_t step = horizon * static_cast<std::int64_t>(c) /
                              static_cast<std::int64_t>(count);
    if (step >= 1 && (out.empty() || out.back() != step)) out.push_back(step);
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

MonteCarloResult monte_carlo(const MarketConfig& config, std::span<const PolicySpec> policies,
                             const MonteCarloOptions& options) {
  if (options.replications < 1) fail(ErrorKind::InvalidArgument, "need at least one replication");
  if (options.horizon < 1) fail(ErrorKind::InvalidArgument, "horizon must be at least one step");
  std::vector<std::int64_t> checkpoints = options.checkpoints.empty()
                                              ? default_checkpoints(options.horizon)
                                              : options.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.front() < 1 || checkpoints.back() > options.horizon) {
    fail(ErrorKind::InvalidArgument, "checkpoints must lie within [1, horizon]");
  }
  for (const PolicySpec& p : policies) p.validate(config);

  const std::size_t n = config.num_items();
  const std::size_t kc = config.num_classes();
  const std::size_t reps = options.replications;
  const std::size_t cps = checkpoints.size();

  MonteCarloResult result;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    std::vector<double> cumulative(reps * cps);
    std::vector<double> finals(reps * n * kc);

    auto run_one = [&](std::size_t r) {
      Simulator sim(config, policies[p], CounterRng::derive_key(options.base_seed, p, r));
      std::size_t next = 0;
      Count bought = 0;
      for (std::int64_t t = 1; t <= options.horizon; ++t) {
        if (sim.step().purchased) ++bought;
        while (next < cps && checkpoints[next] == t) {
          cumulative[r * cps + next] = static_cast<double>(bought);
          ++next;
        }
      }
      const auto& counts = sim.state().class_purchases;
      for (std::size_t x = 0; x < n * kc; ++x) {
        finals[r * n * kc + x] = static_cast<double>(counts[x]);
      }
    };

    const unsigned threads =
        std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(reps)));
    if (threads == 1) {
      for (std::size_t r = 0; r < reps; ++r) run_one(r);
    } else {
      std::atomic<std::size_t> next_rep{0};
      std::vector<std::exception_ptr> errors(threads);
      std::vector<std::thread> workers;
      for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
          try {
            for (std::size_t r = next_rep++; r < reps; r = next_rep++) run_one(r);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& worker : workers) worker.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    // Sums run in replication order so the result is schedule independent.
    EfficiencyCurve curve;
    curve.policy = policies[p].label();
    curve.replications = reps;
    curve.steps = checkpoints;
    curve.mean_cumulative_purchases.resize(cps);
    curve.standard_error.resize(cps);
    for (std::size_t c = 0; c < cps; ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) sum += cumulative[r * cps + c];
      const double mean = sum / static_cast<double>(reps);
      double sq = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double dev = cumulative[r * cps + c] - mean;
        sq += dev * dev;
      }
      curve.mean_cumulative_purchases[c] = mean;
      curve.standard_error[c] =
          reps > 1 ? std::sqrt(sq / static_cast<double>(reps - 1) / static_cast<double>(reps))
                   : 0.0;
    }

    PurchaseProfile profile;
    profile.policy = curve.policy;
    profile.replications = reps;
    profile.mean_purchases.assign(n, 0.0);
    profile.mean_class_purchases = Matrix(n, kc);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < kc; ++k) {
        double sum = 0.0;
        for (std::size_t r = 0; r < reps; ++r) sum += finals[r * n * kc + i * kc + k];
        profile.mean_class_purchases(i, k) = sum / static_cast<double>(reps);
      }
      double sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t k = 0; k < kc; ++k) sum += finals[r * n * kc + i * kc + k];
      }
      profile.mean_purchases[i] = sum / static_cast<double>(reps);
    }

    result.curves.push_back(std::move(curve));
    result.profiles.push_back(std::move(profile));
  }
  return result;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void write_efficiency_csv(std::ostream& out, std::span<const EfficiencyCurve> curves) {
  out << "policy,step,mean_cum_purchases,stderr\n";
  for (const EfficiencyCurve& curve : curves) {
    for (std::size_t c = 0; c < curve.steps.size(); ++c) {
      out << curve.policy << ',' << curve.steps[c] << ','
          << format_real(curve.mean_cumulative_purchases[c]) << ','
          << format_real(curve.standard_error[c]) << '\n';
    }
  }
}

void write_profile_csv(std::ostream& out, const MarketConfig& config,
                       std::span<const PurchaseProfile> profiles) {
  const std::size_t n = config.num_items();
  const std::size_t kc = config.num_classes();
  const std::vector<double> avg_q = average_quality(config);
  const Ranking avg_rank = average_quality_ranking(config);
  std::vector<double> avg_a(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < kc; ++k) avg_a[i] += config.weight(k) * config.appeal(i, k);
  }

  out << "policy,item,class_or_total,mean_purchases,quality,appeal,avg_quality_rank\n";
  for (const PurchaseProfile& profile : profiles) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t rank = avg_rank.position(i) + 1;
      for (std::size_t k = 0; k < kc; ++k) {
        out << profile.policy << ',' << i + 1 << ',' << k + 1 << ','
            << format_real(profile.mean_class_purchases(i, k)) << ','
            << format_real(config.quality(i, k)) << ',' << format_real(config.appeal(i, k))
            << ',' << rank << '\n';
      }
      out << profile.policy << ',' << i + 1 << ",total," << format_real(profile.mean_purchases[i])
          << ',' << format_real(avg_q[i]) << ',' << format_real(avg_a[i]) << ',' << rank << '\n';
    }
  }
}

}  // namespace trialmarket
