#include "trialmarket/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>

#include "trialmarket/error.hpp"
#include "trialmarket/io.hpp"
#include "trialmarket/rng.hpp"

namespace trialmarket {

namespace {

// Stream tags for scheme generation.
constexpr std::uint64_t kQualityStream = 11;
constexpr std::uint64_t kAppealNoiseStream = 12;
constexpr std::uint64_t kOppositeNoiseStream = 13;

std::vector<double> uniform_vector(std::uint64_t seed, std::uint64_t tag, std::uint64_t index,
                                   std::size_t n) {
  CounterStream stream(CounterRng::derive_key(seed, tag, index));
  std::vector<double> out(n);
  for (double& x : out) x = stream.uniform();
  return out;
}

}  // namespace

std::vector<double> power_visibilities(std::size_t num_items, double exponent) {
  std::vector<double> out(num_items);
  for (std::size_t j = 0; j < num_items; ++j) {
    out[j] = std::pow(1.0 / static_cast<double>(j + 1), exponent);
  }
  return out;
}

std::vector<double> VisibilityProfile::resolve(std::size_t num_items) const {
  if (values.empty()) return power_visibilities(num_items, exponent);
  if (values.size() != num_items) {
    fail(ErrorKind::InvalidInstance, "visibility profile length does not match the item count");
  }
  return values;
}

MarketConfig generate_scheme(const SchemeSpec& spec) {
  if (spec.scheme < 1 || spec.scheme > 4) fail(ErrorKind::InvalidArgument, "unknown scheme");
  const std::size_t n = spec.num_items;
  if (n < 1) fail(ErrorKind::InvalidArgument, "scheme needs at least one item");

  Matrix q(n, 2);
  const bool opposite = spec.scheme >= 3;
  const auto q1 = uniform_vector(spec.seed, kQualityStream, 0, n);
  const auto q2 = uniform_vector(spec.seed, kQualityStream, 1, n);
  const auto flip = uniform_vector(spec.seed, kOppositeNoiseStream, 0, n);
  for (std::size_t i = 0; i < n; ++i) {
    q(i, 0) = q1[i];
    q(i, 1) = opposite ? std::clamp(1.0 - q1[i] + 0.01 * flip[i], 0.0, 1.0) : q2[i];
  }

  Matrix a(n, 2);
  const bool appeal_tracks_quality = spec.scheme == 2 || spec.scheme == 4;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto noise = uniform_vector(spec.seed, kAppealNoiseStream, k, n);
    for (std::size_t i = 0; i < n; ++i) {
      double value = 1.0 - q(i, k);
      if (appeal_tracks_quality) {
        value = spec.appeal_noise == AppealNoise::Multiplicative
                    ? q(i, k) * (0.8 + 0.4 * noise[i])
                    : 0.8 * q(i, k) + (0.8 * noise[i] - 0.4);
      }
      a(i, k) = std::max(value, kMinimumAppeal);
    }
  }
  return MarketConfig({0.5, 0.5}, std::move(a), std::move(q), spec.visibility.resolve(n), spec.z);
}

FigurePlan plan_figure(const std::string& figure) {
  static const std::regex efficiency(R"(me-scheme([1-4]))");
  static const std::regex profile(R"(profiles-scheme([1-4])-([a-zA-Z]+(:[a-zA-Z0-9]+)?))");
  std::smatch m;
  FigurePlan plan;
  if (std::regex_match(figure, m, efficiency)) {
    plan.scheme = std::stoi(m[1]);
    plan.policies = standard_policies();
    return plan;
  }
  if (std::regex_match(figure, m, profile)) {
    plan.scheme = std::stoi(m[1]);
    plan.policies = {PolicySpec::parse(m[2])};
    return plan;
  }
  fail(ErrorKind::InvalidArgument, "unknown figure id '" + figure + "'");
}

FigureOutput run_figure_experiment(const FigureRequest& request) {
  if (request.scale.items < 1 || request.scale.horizon < 1 || request.scale.replications < 1) {
    fail(ErrorKind::InvalidArgument, "experiment scale fields must be at least 1");
  }
  FigurePlan plan = plan_figure(request.figure);
  SchemeSpec spec;
  spec.scheme = plan.scheme;
  spec.num_items = request.scale.items;
  spec.seed = request.seed;
  spec.appeal_noise = request.appeal_noise;
  spec.visibility = request.visibility;
  spec.z = request.z;
  MarketConfig config = generate_scheme(spec);

  MonteCarloOptions options;
  options.horizon = request.scale.horizon;
  options.replications = request.scale.replications;
  options.base_seed = request.seed;
  options.checkpoints = default_checkpoints(request.scale.horizon, request.checkpoints);
  options.threads = request.threads;
  MonteCarloResult result = monte_carlo(config, plan.policies, options);
  return {std::move(plan), std::move(config), std::move(result)};
}

ArtifactPaths write_figure_artifacts(const std::filesystem::path& directory,
                                     const FigureRequest& request, const FigureOutput& output) {
  std::filesystem::create_directories(directory);
  ArtifactPaths paths{directory / (request.figure + "_efficiency.csv"),
                      directory / (request.figure + "_profile.csv"),
                      directory / "manifest.json"};
  {
    std::ofstream out(paths.efficiency, std::ios::binary);
    write_efficiency_csv(out, output.result.curves);
  }
  {
    std::ofstream out(paths.profile, std::ios::binary);
    write_profile_csv(out, output.config, output.result.profiles);
  }
  nlohmann::json manifest =
      manifest_json(request.seed, output.config, {paths.efficiency, paths.profile});
  manifest["mode"] = "figure";
  manifest["request"] = request_to_json(request);
  std::ofstream out(paths.manifest, std::ios::binary);
  out << manifest.dump(2) << '\n';
  return paths;
}

}  // namespace trialmarket
