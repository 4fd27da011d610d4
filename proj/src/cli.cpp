#include "trialmarket/cli.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "trialmarket/analysis.hpp"
#include "trialmarket/engine.hpp"
#include "trialmarket/error.hpp"
#include "trialmarket/experiments.hpp"
#include "trialmarket/io.hpp"
#include "trialmarket/policies.hpp"
#include "trialmarket/two_class_logit.hpp"

namespace trialmarket::cli {

using nlohmann::json;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInstance:
    case ErrorKind::InvalidArgument:
    case ErrorKind::UndefinedShare:
    case ErrorKind::TieBreakingViolation:
    case ErrorKind::Undefined:
      return kInvalidConfig;
    case ErrorKind::DegenerateInstance: return kDegenerate;
    case ErrorKind::UnsupportedSolver: return kUnsupportedSolver;
    case ErrorKind::SizeLimit: return kOversize;
  }
  return kFailure;
}

json one_based(const std::vector<std::size_t>& items) {
  json out = json::array();
  for (std::size_t i : items) out.push_back(i + 1);
  return out;
}

AppealNoise parse_noise(const std::string& name) {
  if (name == "multiplicative") return AppealNoise::Multiplicative;
  if (name == "additive") return AppealNoise::Additive;
  fail(ErrorKind::InvalidArgument, "appeal noise must be multiplicative or additive");
}

PerformanceSolver parse_solver(const std::string& name, const MarketConfig& config) {
  if (name == "exact1") return PerformanceSolver::Exact1Class;
  if (name == "bruteforce") return PerformanceSolver::BruteForce;
  if (name == "swap") return PerformanceSolver::SwapHeuristic;
  if (name != "auto") fail(ErrorKind::InvalidArgument, "unknown solver '" + name + "'");
  if (config.num_classes() == 1) return PerformanceSolver::Exact1Class;
  if (config.num_items() <= kMaxBruteForceItems) return PerformanceSolver::BruteForce;
  return PerformanceSolver::SwapHeuristic;
}

TightnessKind parse_tightness(const std::string& name) {
  if (name == "theorem3-upper") return TightnessKind::Theorem3Upper;
  if (name == "theorem3-lower") return TightnessKind::Theorem3Lower;
  if (name == "theorem4") return TightnessKind::Theorem4;
  fail(ErrorKind::InvalidArgument, "unknown tightness construction '" + name + "'");
}

PopularitySignal load_signal(const std::string& path, const MarketConfig& config,
                             const std::string& mode) {
  const std::size_t n = config.num_items();
  if (mode == "none") return PopularitySignal::none(n);
  if (path.empty()) {
    if (mode == "segmented") {
      return PopularitySignal::segmented(config.num_classes(),
                                         std::vector<Count>(n * config.num_classes(), 0));
    }
    return PopularitySignal::global(std::vector<Count>(n, 0));
  }
  const json doc = read_json_file(path);
  if (mode == "segmented") {
    const auto rows = doc.at("class_counts").get<std::vector<std::vector<Count>>>();
    if (rows.size() != n) fail(ErrorKind::InvalidInstance, "class_counts must have N rows");
    std::vector<Count> flat;
    for (const auto& row : rows) {
      if (row.size() != config.num_classes()) {
        fail(ErrorKind::InvalidInstance, "class_counts rows must have K entries");
      }
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return PopularitySignal::segmented(config.num_classes(), std::move(flat));
  }
  if (mode != "global") fail(ErrorKind::InvalidArgument, "signal must be global, segmented or none");
  auto counts = doc.at("counts").get<std::vector<Count>>();
  if (counts.size() != n) fail(ErrorKind::InvalidInstance, "counts must have N entries");
  return PopularitySignal::global(std::move(counts));
}

struct SimulateArgs {
  std::string experiment;
  std::string manifest;
  std::string config;
  std::string figure;
  std::string policies;
  int scheme = 1;
  std::size_t items = 20;
  std::int64_t horizon = 5000;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  double z = 0.0;
  std::size_t checkpoints = 100;
  double visibility_exponent = 0.8;
  std::string appeal_noise = "multiplicative";
  unsigned threads = 1;
  std::string out_dir = ".";
};

int simulate_custom_market(const SimulateArgs& args, std::ostream& err) {
  const MarketConfig config = config_from_json(read_json_file(args.config));
  std::vector<PolicySpec> policies;
  if (args.policies.empty()) {
    policies = standard_policies();
  } else {
    std::stringstream list(args.policies);
    for (std::string label; std::getline(list, label, ',');) {
      policies.push_back(PolicySpec::parse(label));
    }
  }
  MonteCarloOptions options;
  options.horizon = args.horizon;
  options.replications = args.reps;
  options.base_seed = args.seed;
  options.checkpoints = default_checkpoints(args.horizon, args.checkpoints);
  options.threads = args.threads;
  const MonteCarloResult result = monte_carlo(config, policies, options);

  const std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  const auto efficiency = dir / "custom_efficiency.csv";
  const auto profile = dir / "custom_profile.csv";
  {
    std::ofstream out(efficiency, std::ios::binary);
    write_efficiency_csv(out, result.curves);
  }
  {
    std::ofstream out(profile, std::ios::binary);
    write_profile_csv(out, config, result.profiles);
  }
  json manifest = manifest_json(args.seed, config, {efficiency, profile});
  manifest["mode"] = "config";
  manifest["horizon"] = args.horizon;
  manifest["replications"] = args.reps;
  manifest["checkpoints"] = args.checkpoints;
  json labels = json::array();
  for (const auto& p : policies) labels.push_back(p.label());
  manifest["policies"] = labels;
  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  err << "wrote " << efficiency.string() << " and " << profile.string() << '\n';
  return kOk;
}

int cmd_simulate(SimulateArgs args, CLI::App& cmd, std::ostream& err) {
  if (!args.manifest.empty()) {
    const json manifest = read_json_file(args.manifest);
    if (manifest.value("mode", "figure") == "config") {
      const std::filesystem::path replay_config =
          std::filesystem::path(args.out_dir) / "replayed_config.json";
      std::filesystem::create_directories(args.out_dir);
      std::ofstream(replay_config) << manifest.at("config").dump(2) << '\n';
      args.config = replay_config.string();
      args.horizon = manifest.at("horizon").get<std::int64_t>();
      args.reps = manifest.at("replications").get<std::size_t>();
      args.checkpoints = manifest.at("checkpoints").get<std::size_t>();
      args.seed = manifest.at("seed").get<std::uint64_t>();
      std::string labels;
      for (const auto& label : manifest.at("policies")) {
        if (!labels.empty()) labels += ',';
        labels += label.get<std::string>();
      }
      args.policies = labels;
      return simulate_custom_market(args, err);
    }
    FigureRequest request = request_from_json(manifest.at("request"));
    request.threads = args.threads;
    const FigureOutput output = run_figure_experiment(request);
    const ArtifactPaths paths = write_figure_artifacts(args.out_dir, request, output);
    err << "replayed manifest into " << paths.manifest.parent_path().string() << '\n';
    return kOk;
  }
  if (!args.config.empty()) return simulate_custom_market(args, err);

  FigureRequest request;
  if (!args.experiment.empty()) request = request_from_json(read_json_file(args.experiment));
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  if (given("--figure")) {
    request.figure = args.figure;
  } else if (given("--scheme") || args.experiment.empty()) {
    request.figure = "me-scheme" + std::to_string(args.scheme);
  }
  if (given("--items") || args.experiment.empty()) request.scale.items = args.items;
  if (given("--horizon") || args.experiment.empty()) request.scale.horizon = args.horizon;
  if (given("--reps") || args.experiment.empty()) request.scale.replications = args.reps;
  if (given("--seed") || args.experiment.empty()) request.seed = args.seed;
  if (given("--z") || args.experiment.empty()) request.z = args.z;
  if (given("--checkpoints") || args.experiment.empty()) request.checkpoints = args.checkpoints;
  if (given("--visibility-exponent")) {
    request.visibility.exponent = args.visibility_exponent;
    request.visibility.values.clear();
  }
  if (given("--appeal-noise")) request.appeal_noise = parse_noise(args.appeal_noise);
  request.threads = args.threads;

  const FigureOutput output = run_figure_experiment(request);
  const ArtifactPaths paths = write_figure_artifacts(args.out_dir, request, output);
  err << "wrote " << paths.efficiency.string() << ", " << paths.profile.string() << ", "
      << paths.manifest.string() << '\n';
  return kOk;
}

int cmd_optimize(const std::string& config_path, const std::string& state_path,
                 const std::string& signal_mode, const std::string& solver_name, int max_passes,
                 const std::string& out_path, std::ostream& out) {
  const MarketConfig config = config_from_json(read_json_file(config_path));
  const PopularitySignal signal = load_signal(state_path, config, signal_mode);
  const PerformanceSolver solver = parse_solver(solver_name, config);
  const PerformanceResult result = performance_ranking(config, signal, solver, max_passes);

  json doc;
  doc["ranking"] = one_based(result.ranking.order());
  doc["objective"] = result.objective;
  doc["solver"] = to_string(result.solver);
  doc["label"] = result.exact ? "exact" : "heuristic";
  if (config.num_items() <= kMaxBruteForceItems) {
    const double optimum = result.solver == PerformanceSolver::BruteForce
                               ? result.objective
                               : performance_ranking_bruteforce(config, signal).objective;
    doc["bruteforce_objective"] = optimum;
    doc["optimality_gap"] = std::max(0.0, optimum - result.objective);
  } else {
    doc["bruteforce_objective"] = nullptr;
    doc["optimality_gap"] = nullptr;
  }
  out << doc.dump(2) << '\n';

  if (!out_path.empty()) {
    std::ofstream csv(out_path, std::ios::binary);
    csv << "item,position\n";
    for (std::size_t i = 0; i < config.num_items(); ++i) {
      csv << i + 1 << ',' << result.ranking.position(i) + 1 << '\n';
    }
    csv << "# objective," << format_real(result.objective) << '\n';
  }
  return kOk;
}

int cmd_reduce2cl(const std::string& instance_path, const std::string& mode, std::ostream& out) {
  const TwoClassLogitInstance instance = instance_from_json(read_json_file(instance_path));
  const bool exact = mode == "exact";
  if (!exact && mode != "heuristic") {
    fail(ErrorKind::InvalidArgument, "mode must be exact or heuristic");
  }
  if (exact && instance.size() > kMaxBruteForceItems) {
    fail(ErrorKind::SizeLimit, "exact reduction limited to 9 products");
  }
  PerformanceOracle oracle = [exact](const MarketConfig& config, const PopularitySignal& signal) {
    return exact ? performance_ranking_bruteforce(config, signal)
                 : performance_ranking_swap_heuristic(config, signal, 100);
  };
  const AssortmentResult reduced = solve_two_class_logit(instance, oracle, exact);

  json doc;
  doc["assortment"] = one_based(reduced.assortment);
  doc["value"] = reduced.value;
  doc["label"] = reduced.exact ? "exact" : "heuristic";
  doc["value_by_size"] = reduced.value_by_size;
  if (instance.size() <= kMaxAssortmentEnumerationItems) {
    const AssortmentResult direct = brute_force_two_class_logit(instance);
    doc["enumeration"] = {{"assortment", one_based(direct.assortment)},
                          {"value", direct.value}};
    doc["values_match"] = std::abs(direct.value - reduced.value) <= 1e-10;
  }
  out << doc.dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trial-offer market simulator and ranking optimizer", "trialmarket"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo runs of ranking policies");
  simulate->add_option("--experiment", sim.experiment, "Experiment description (JSON)");
  simulate->add_option("--manifest", sim.manifest, "Replay a previous run's manifest");
  simulate->add_option("--config", sim.config, "Simulate a custom market config (JSON)");
  simulate->add_option("--policies", sim.policies, "Comma-separated policy labels (custom market)");
  simulate->add_option("--figure", sim.figure, "Figure id, e.g. me-scheme3");
  simulate->add_option("--scheme", sim.scheme, "Scheme 1-4")->check(CLI::Range(1, 4));
  simulate->add_option("--items", sim.items, "Number of items");
  simulate->add_option("--horizon", sim.horizon, "Steps per replication");
  simulate->add_option("--reps", sim.reps, "Replications per policy");
  simulate->add_option("--seed", sim.seed, "Base seed");
  simulate->add_option("--z", sim.z, "No-trial mass");
  simulate->add_option("--checkpoints", sim.checkpoints, "Efficiency checkpoints");
  simulate->add_option("--visibility-exponent", sim.visibility_exponent,
                       "Position visibility (1/j)^exponent");
  simulate->add_option("--appeal-noise", sim.appeal_noise, "multiplicative or additive");
  simulate->add_option("--threads", sim.threads, "Worker threads");
  simulate->add_option("--out", sim.out_dir, "Output directory");

  std::string config_path, state_path, signal_mode = "global", solver = "auto", csv_out;
  int max_passes = 100;
  CLI::App* optimize = app.add_subcommand("optimize", "Performance ranking of a market state");
  optimize->add_option("--config", config_path, "Market config (JSON)")->required();
  optimize->add_option("--state", state_path,
                       "Purchase counts (JSON with counts or class_counts)");
  optimize->add_option("--signal", signal_mode, "global, segmented or none");
  optimize->add_option("--solver", solver, "auto, exact1, bruteforce or swap");
  optimize->add_option("--max-passes", max_passes, "Swap heuristic pass limit");
  optimize->add_option("--out", csv_out, "Write the ranking as CSV");

  std::string asym_config, tightness;
  std::size_t classes = 2;
  double eps = 1e-3, eps_a = 1e-6;
  CLI::App* asymptotics = app.add_subcommand("asymptotics", "Long-run purchase probabilities");
  asymptotics->add_option("--config", asym_config, "Market config (JSON)");
  asymptotics->add_option("--tightness", tightness,
                          "theorem3-upper, theorem3-lower or theorem4 construction");
  asymptotics->add_option("--classes", classes, "Classes (and items) of the construction");
  asymptotics->add_option("--eps", eps, "Quality perturbation");
  asymptotics->add_option("--eps-a", eps_a, "Diagonal appeal of the lower construction");

  std::string instance_path, mode = "exact";
  CLI::App* reduce = app.add_subcommand("reduce2cl", "Two-class logit assortment via rankings");
  reduce->add_option("--instance", instance_path, "Instance (JSON)")->required();
  reduce->add_option("--mode", mode, "exact or heuristic");

  SchemeSpec scheme_spec;
  std::string scheme_out, scheme_noise = "multiplicative";
  CLI::App* scheme = app.add_subcommand("scheme", "Emit a generated market config");
  scheme->add_option("--scheme", scheme_spec.scheme, "Scheme 1-4")->check(CLI::Range(1, 4));
  scheme->add_option("--items", scheme_spec.num_items, "Number of items");
  scheme->add_option("--seed", scheme_spec.seed, "Seed");
  scheme->add_option("--z", scheme_spec.z, "No-trial mass");
  scheme->add_option("--visibility-exponent", scheme_spec.visibility.exponent,
                     "Position visibility (1/j)^exponent");
  scheme->add_option("--appeal-noise", scheme_noise, "multiplicative or additive");
  scheme->add_option("--out", scheme_out, "Output file (default stdout)");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, *simulate, err);
    if (optimize->parsed()) {
      return cmd_optimize(config_path, state_path, signal_mode, solver, max_passes, csv_out, out);
    }
    if (asymptotics->parsed()) {
      if (asym_config.empty() == tightness.empty()) {
        fail(ErrorKind::InvalidArgument, "give exactly one of --config or --tightness");
      }
      const MarketConfig config =
          asym_config.empty()
              ? tightness_instance(parse_tightness(tightness), classes, eps, eps_a)
              : config_from_json(read_json_file(asym_config));
      out << report_to_json(asymptotic_report(config)).dump(2) << '\n';
      return kOk;
    }
    if (reduce->parsed()) return cmd_reduce2cl(instance_path, mode, out);
    if (scheme->parsed()) {
      scheme_spec.appeal_noise = parse_noise(scheme_noise);
      const std::string text = config_to_json(generate_scheme(scheme_spec)).dump(2) + "\n";
      if (scheme_out.empty()) {
        out << text;
      } else {
        std::ofstream(scheme_out, std::ios::binary) << text;
      }
      return kOk;
    }
  } catch (const MarketError& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    err << "error (invalid-instance): " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace trialmarket::cli
