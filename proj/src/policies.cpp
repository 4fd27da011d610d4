#include "trialmarket/policies.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "trialmarket/error.hpp"

namespace trialmarket {

namespace {

constexpr double kImprovementTolerance = 1e-12;
constexpr int kDinkelbachIterationCap = 200;

/// Sorts item indices by decreasing key with ties going to the lower index.
std::vector<std::size_t> order_by_decreasing(std::span<const double> key) {
  std::vector<std::size_t> order(key.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return key[x] > key[y]; });
  return order;
}

/// Per-class numerators f = (a + d) q and trial weights g = a + d, flattened
/// N x K, so a ranking's next-step purchase probability is
///   sum_k w_k * sum_i v_pos(i) f_ik / (sum_i v_pos(i) g_ik + z).
class ObjectiveTable {
 public:
  ObjectiveTable(const MarketConfig& config, const PopularitySignal& signal)
      : n_(config.num_items()),
        k_(config.num_classes()),
        f_(n_ * k_),
        g_(n_ * k_),
        weights_(config.class_weights()),
        v_(config.visibilities()),
        z_(config.no_trial_mass()) {
    if (signal.num_items() != n_) {
      fail(ErrorKind::InvalidArgument, "signal dimension does not match the market");
    }
    for (std::size_t k = 0; k < k_; ++k) {
      const std::vector<Count> d = signal.observed(k);
      for (std::size_t i = 0; i < n_; ++i) {
        const double g = config.appeal(i, k) + static_cast<double>(d[i]);
        g_[i * k_ + k] = g;
        f_[i * k_ + k] = g * config.quality(i, k);
      }
    }
  }

  double evaluate(std::span<const std::size_t> position_of_item) const {
    double total = 0.0;
    for (std::size_t k = 0; k < k_; ++k) {
      double num = 0.0;
      double den = z_;
      for (std::size_t i = 0; i < n_; ++i) {
        const double v = v_[position_of_item[i]];
        num += v * f_[i * k_ + k];
        den += v * g_[i * k_ + k];
      }
      if (!(den > 0.0)) fail(ErrorKind::DegenerateInstance, "trial distribution has zero mass");
      total += weights_[k] * num / den;
    }
    return total;
  }

  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<double> f_;
  std::vector<double> g_;
  std::vector<double> weights_;
  std::vector<double> v_;
  double z_;
};

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string to_string(PerformanceSolver solver) {
  switch (solver) {
    case PerformanceSolver::Exact1Class: return "exact1";
    case PerformanceSolver::BruteForce: return "bruteforce";
    case PerformanceSolver::SwapHeuristic: return "swap";
  }
  return "unknown";
}

std::string to_string(SignalMode mode) {
  switch (mode) {
    case SignalMode::Global: return "GSI";
    case SignalMode::Segmented: return "SSI";
    case SignalMode::None: return "NSI";
  }
  return "?";
}

PolicySpec PolicySpec::parse(const std::string& raw) {
  std::string label = upper(raw);
  PolicySpec spec;
  std::string solver;
  if (auto colon = label.find(':'); colon != std::string::npos) {
    solver = label.substr(colon + 1);
    label = label.substr(0, colon);
  }
  if (label.size() < 4) fail(ErrorKind::InvalidArgument, "unknown policy label '" + raw + "'");
  const std::string signal = label.substr(label.size() - 3);
  const std::string kind = label.substr(0, label.size() - 3);
  if (signal == "GSI") {
    spec.signal = SignalMode::Global;
  } else if (signal == "SSI") {
    spec.signal = SignalMode::Segmented;
  } else if (signal == "NSI") {
    spec.signal = SignalMode::None;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown signal in policy label '" + raw + "'");
  }
  if (kind == "SQ") {
    spec.kind = RankingKind::SegmentedQuality;
  } else if (kind == "AQ") {
    spec.kind = RankingKind::AverageQuality;
  } else if (kind == "POP") {
    spec.kind = RankingKind::Popularity;
  } else if (kind == "ACT") {
    spec.kind = RankingKind::Activity;
  } else if (kind == "PERF") {
    spec.kind = RankingKind::Performance;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown ranking in policy label '" + raw + "'");
  }
  if (!solver.empty()) {
    if (spec.kind != RankingKind::Performance) {
      fail(ErrorKind::InvalidArgument, "only performance policies take a solver");
    }
    if (solver == "EXACT1") {
      spec.solver = PerformanceSolver::Exact1Class;
    } else if (solver == "BRUTEFORCE") {
      spec.solver = PerformanceSolver::BruteForce;
    } else if (solver == "SWAP") {
      spec.solver = PerformanceSolver::SwapHeuristic;
    } else {
      fail(ErrorKind::InvalidArgument, "unknown solver '" + solver + "'");
    }
  }
  if (spec.kind == RankingKind::SegmentedQuality && spec.signal == SignalMode::Global) {
    fail(ErrorKind::InvalidArgument, "segmented quality ranking cannot use the global signal");
  }
  return spec;
}

std::string PolicySpec::label() const {
  std::string out;
  switch (kind) {
    case RankingKind::SegmentedQuality: out = "SQ"; break;
    case RankingKind::AverageQuality: out = "AQ"; break;
    case RankingKind::Popularity: out = "POP"; break;
    case RankingKind::Activity: out = "ACT"; break;
    case RankingKind::Performance: out = "PERF"; break;
  }
  out += to_string(signal);
  if (kind == RankingKind::Performance && solver != PerformanceSolver::SwapHeuristic) {
    out += ":" + to_string(solver);
  }
  return out;
}

void PolicySpec::validate(const MarketConfig& config) const {
  if (kind == RankingKind::SegmentedQuality && signal == SignalMode::Global) {
    fail(ErrorKind::InvalidArgument, "segmented quality ranking cannot use the global signal");
  }
  if (kind == RankingKind::Performance && solver == PerformanceSolver::Exact1Class &&
      config.num_classes() != 1) {
    fail(ErrorKind::UnsupportedSolver, "the exact performance solver needs a single class");
  }
  if (kind == RankingKind::Performance && solver == PerformanceSolver::BruteForce &&
      config.num_items() > kMaxBruteForceItems) {
    fail(ErrorKind::SizeLimit, "brute-force performance ranking limited to 9 items");
  }
}

std::vector<PolicySpec> standard_policies() {
  return {PolicySpec::parse("SQSSI"), PolicySpec::parse("SQNSI"), PolicySpec::parse("AQGSI"),
          PolicySpec::parse("AQNSI")};
}

Ranking popularity_ranking(std::span<const Count> purchases) {
  std::vector<std::size_t> order(purchases.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return purchases[x] > purchases[y]; });
  return Ranking::from_order(order);
}

Ranking activity_ranking(std::span<const std::int64_t> last_purchase_step) {
  // Never-purchased items carry -1 and therefore sort after every purchase.
  std::vector<std::size_t> order(last_purchase_step.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return last_purchase_step[x] > last_purchase_step[y];
  });
  return Ranking::from_order(order);
}

std::vector<double> average_quality(const MarketConfig& config) {
  std::vector<double> out(config.num_items(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = 0; k < config.num_classes(); ++k) {
      out[i] += config.weight(k) * config.quality(i, k);
    }
  }
  return out;
}

Ranking average_quality_ranking(const MarketConfig& config) {
  return Ranking::from_order(order_by_decreasing(average_quality(config)));
}

std::vector<Ranking> segmented_quality_rankings(const MarketConfig& config) {
  std::vector<Ranking> out;
  out.reserve(config.num_classes());
  for (std::size_t k = 0; k < config.num_classes(); ++k) {
    out.push_back(Ranking::from_order(order_by_decreasing(config.qualities().column(k))));
  }
  return out;
}

PerformanceResult performance_ranking_k1(const MarketConfig& config,
                                         std::span<const Count> purchases,
                                         DinkelbachTrace* trace) {
  if (config.num_classes() != 1) {
    fail(ErrorKind::UnsupportedSolver, "the exact performance solver needs a single class");
  }
  const std::size_t n = config.num_items();
  if (purchases.size() != n) fail(ErrorKind::InvalidArgument, "count dimension mismatch");

  std::vector<double> f(n);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (purchases[i] < 0) fail(ErrorKind::InvalidArgument, "purchase counts must be non-negative");
    g[i] = config.appeal(i, 0) + static_cast<double>(purchases[i]);
    f[i] = g[i] * config.quality(i, 0);
  }
  const auto& v = config.visibilities();
  const double z = config.no_trial_mass();

  auto ratio = [&](const std::vector<std::size_t>& order) {
    double num = 0.0;
    double den = z;
    for (std::size_t j = 0; j < n; ++j) {
      num += v[j] * f[order[j]];
      den += v[j] * g[order[j]];
    }
    return num / den;
  };

  // Dinkelbach: for fixed lambda the linear objective sum_j v_j (f - lambda g)
  // is maximised by the rearrangement pairing large v with large f - lambda g.
  std::vector<std::size_t> best = order_by_decreasing(config.qualities().column(0));
  double lambda = ratio(best);
  DinkelbachTrace local;
  local.lambdas.push_back(lambda);

  std::vector<double> key(n);
  for (int iter = 0; iter < kDinkelbachIterationCap; ++iter) {
    ++local.iterations;
    for (std::size_t i = 0; i < n; ++i) key[i] = f[i] - lambda * g[i];
    std::vector<std::size_t> candidate = order_by_decreasing(key);
    double gap = -lambda * z;
    for (std::size_t j = 0; j < n; ++j) gap += v[j] * key[candidate[j]];
    local.final_gap = gap;
    if (gap <= kImprovementTolerance) break;
    const double next = ratio(candidate);
    if (!(next > lambda)) break;
    lambda = next;
    best = std::move(candidate);
    local.lambdas.push_back(lambda);
  }
  if (trace != nullptr) *trace = std::move(local);
  return {Ranking::from_order(best), lambda, PerformanceSolver::Exact1Class, true};
}

PerformanceResult performance_ranking_bruteforce(const MarketConfig& config,
                                                 const PopularitySignal& signal) {
  const std::size_t n = config.num_items();
  if (n > kMaxBruteForceItems) {
    fail(ErrorKind::SizeLimit, "brute-force performance ranking limited to 9 items");
  }
  const ObjectiveTable table(config, signal);
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  std::vector<std::size_t> best = positions;
  double best_value = table.evaluate(positions);
  while (std::next_permutation(positions.begin(), positions.end())) {
    const double value = table.evaluate(positions);
    if (value > best_value) {
      best_value = value;
      best = positions;
    }
  }
  return {Ranking::from_positions(std::move(best)), best_value, PerformanceSolver::BruteForce,
          true};
}

PerformanceResult performance_ranking_swap_heuristic(const MarketConfig& config,
                                                     const PopularitySignal& signal,
                                                     int max_passes) {
  const ObjectiveTable table(config, signal);
  const std::size_t n = config.num_items();
  std::vector<std::size_t> positions = average_quality_ranking(config).positions();
  double current = table.evaluate(positions);

  for (int pass = 0; pass < max_passes; ++pass) {
    double best_gain = kImprovementTolerance;
    std::size_t best_x = n;
    std::size_t best_y = n;
    for (std::size_t x = 0; x + 1 < n; ++x) {
      for (std::size_t y = x + 1; y < n; ++y) {
        std::swap(positions[x], positions[y]);
        const double gain = table.evaluate(positions) - current;
        std::swap(positions[x], positions[y]);
        if (gain > best_gain) {
          best_gain = gain;
          best_x = x;
          best_y = y;
        }
      }
    }
    if (best_x == n) break;
    std::swap(positions[best_x], positions[best_y]);
    current = table.evaluate(positions);
  }
  return {Ranking::from_positions(std::move(positions)), current,
          PerformanceSolver::SwapHeuristic, false};
}

PerformanceResult performance_ranking(const MarketConfig& config, const PopularitySignal& signal,
                                      PerformanceSolver solver, int max_passes) {
  switch (solver) {
    case PerformanceSolver::Exact1Class:
      return performance_ranking_k1(config, signal.observed(0));
    case PerformanceSolver::BruteForce:
      return performance_ranking_bruteforce(config, signal);
    case PerformanceSolver::SwapHeuristic:
      return performance_ranking_swap_heuristic(config, signal, max_passes);
  }
  fail(ErrorKind::InvalidArgument, "unknown solver");
}

}  // namespace trialmarket
