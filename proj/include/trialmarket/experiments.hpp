#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trialmarket/engine.hpp"
#include "trialmarket/market.hpp"
#include "trialmarket/policies.hpp"

namespace trialmarket {

/// How appeals are perturbed in the appeal-follows-quality schemes (2 and 4).
enum class AppealNoise {
  Multiplicative,  // a = q (0.8 + 0.4 u)
  Additive,        // a = 0.8 q + u', u' uniform on [-0.4, 0.4]
};

/// Visibility of position j (1-based) is (1/j)^exponent unless explicit values
/// are given.
struct VisibilityProfile {
  double exponent = 0.8;
  std::vector<double> values;

  std::vector<double> resolve(std::size_t num_items) const;
};

std::vector<double> power_visibilities(std::size_t num_items, double exponent);

/// Two equally weighted classes:
///   1  independent uniform qualities, appeal 1 - q
///   2  scheme-1 qualities, appeal tracks quality with noise
///   3  opposite tastes q2 = 1 - q1 + 0.01 u, appeal 1 - q
///   4  scheme-3 qualities, appeal tracks quality with noise
struct SchemeSpec {
  int scheme = 1;
  std::size_t num_items = 50;
  std::uint64_t seed = 1;
  AppealNoise appeal_noise = AppealNoise::Multiplicative;
  VisibilityProfile visibility;
  double z = 0.0;
};

inline constexpr double kMinimumAppeal = 1e-9;

MarketConfig generate_scheme(const SchemeSpec& spec);

struct ExperimentScale {
  std::size_t items = 20;
  std::int64_t horizon = 5000;
  std::size_t replications = 10000;
};

struct FigureRequest {
  std::string figure = "me-scheme1";
  ExperimentScale scale;
  std::uint64_t seed = 1;
  double z = 0.0;
  VisibilityProfile visibility;
  AppealNoise appeal_noise = AppealNoise::Multiplicative;
  std::size_t checkpoints = 100;
  unsigned threads = 1;
};

struct FigurePlan {
  int scheme = 1;
  std::vector<PolicySpec> policies;
};

/// Figure ids: "me-scheme<S>" runs the four standard policies on scheme S;
/// "profiles-scheme<S>-<policy>" runs one policy for its purchase profile.
FigurePlan plan_figure(const std::string& figure);

struct FigureOutput {
  FigurePlan plan;
  MarketConfig config;
  MonteCarloResult result;
};

FigureOutput run_figure_experiment(const FigureRequest& request);

struct ArtifactPaths {
  std::filesystem::path efficiency;
  std::filesystem::path profile;
  std::filesystem::path manifest;
};

/// Writes <figure>_efficiency.csv, <figure>_profile.csv and manifest.json
/// into `directory`.
ArtifactPaths write_figure_artifacts(const std::filesystem::path& directory,
                                     const FigureRequest& request, const FigureOutput& output);

}  // namespace trialmarket
