// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <atomic>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "trialmarket/analysis.hpp"
#include "trialmarket/engine.hpp"
#include "trialmarket/experiments.hpp"
#include "trialmarket/io.hpp"
#include "trialmarket/policies.hpp"
#include "trialmarket/two_class_logit.hpp"

using namespace trialmarket;
namespace fs = std::filesystem;

namespace {

struct Options {
  unsigned threads = 1;
  std::string cli;
  std::string workdir = "acceptance_work";
  std::string only;
};

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail, double seconds) {
  std::printf("%s %s: %s [%.1fs]\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename Fn>
void criterion(const Options& opt, const std::string& name, Fn&& fn) {
  if (!opt.only.empty() && name.find(opt.only) == std::string::npos) return;
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  report(name, pass, detail, took.count());
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

MarketConfig random_market(std::mt19937_64& rng, std::size_t n, std::size_t k, double z) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix a(n, k), q(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      a(i, c) = std::max(u(rng), 1e-9);
      q(i, c) = u(rng);
    }
  }
  std::vector<double> w(k);
  for (double& x : w) x = 0.05 + u(rng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
  std::vector<double> v(n);
  for (double& x : v) x = std::max(u(rng), 1e-9);
  std::sort(v.begin(), v.end(), std::greater<>());
  return MarketConfig(std::move(w), std::move(a), std::move(q), std::move(v), z);
}

bool solver_correctness(std::string& detail) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 1 + rep % 7;
    const double z = rep % 2 == 0 ? 0.0 : 1.0;
    const auto m = random_market(rng, n, 1, z);
    std::uniform_int_distribution<Count> count(0, rep % 3 == 0 ? 0 : 50);
    std::vector<Count> d(n);
    for (Count& c : d) c = count(rng);
    const double exact = performance_ranking_k1(m, d).objective;
    const double brute = performance_ranking_bruteforce(m, PopularitySignal::global(d)).objective;
    worst = std::max(worst, std::abs(exact - brute));
  }
  detail = fmt("500 instances, max |exact - bruteforce| = %.3g (tol 1e-10)", worst);
  return worst <= 1e-10;
}

bool reduction_correctness(std::string& detail) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> util(0.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> rev(1, 20);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rep % 8;
    TwoClassLogitInstance inst;
    inst.alpha = unit(rng);
    for (std::size_t i = 0; i < n; ++i) {
      inst.v1.push_back(util(rng));
      inst.v2.push_back(util(rng));
      inst.revenues.push_back(rev(rng));
    }
    const auto reduced = solve_two_class_logit(
        inst,
        [](const MarketConfig& m, const PopularitySignal& s) {
          return performance_ranking_bruteforce(m, s);
        },
        true);
    worst = std::max(worst, std::abs(reduced.value - brute_force_two_class_logit(inst).value));
  }
  detail = fmt("200 instances, max |reduction - enumeration| = %.3g (tol 1e-10)", worst);
  return worst <= 1e-10;
}

bool monopoly_convergence(const Options& opt, std::string& detail) {
  std::mt19937_64 rng(99);
  const auto policy = PolicySpec::parse("AQGSI");
  const std::vector<double> v = power_visibilities(10, 0.8);
  constexpr std::int64_t kHorizon = 200000;
  constexpr std::size_t kReps = 50;
  std::vector<double> shares;
  std::size_t leader_wins = 0;
  std::size_t instances = 0;
  while (instances < 20) {
    auto m = random_market(rng, 10, 2, 0.0).with_visibilities(v);
    m = MarketConfig({0.5, 0.5}, m.appeals(), m.qualities(), v);
    const Ranking aq = average_quality_ranking(m);
    if (!global_tie_breaking(m, aq)) continue;
    ++instances;
    const std::size_t predicted = monopoly_predictor(m, aq);
    MonteCarloOptions mc;
    mc.horizon = kHorizon;
    mc.replications = kReps;
    mc.base_seed = 1000 + instances;
    mc.checkpoints = {kHorizon};
    mc.threads = opt.threads;
    // Per-replication final counts are needed, so run the traces directly.
    std::vector<std::vector<Count>> finals(kReps);
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    const unsigned threads = std::max(1u, opt.threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t r = next++; r < kReps; r = next++) {
          Simulator sim(m, policy, CounterRng::derive_key(mc.base_seed, 0, r));
          for (std::int64_t s = 0; s < kHorizon; ++s) sim.step();
          finals[r] = sim.state().purchases;
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& d : finals) {
      const auto total = std::accumulate(d.begin(), d.end(), Count{0});
      shares.push_back(total > 0 ? static_cast<double>(d[predicted]) / total : 0.0);
      bool top = true;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (i != predicted && d[i] >= d[predicted]) top = false;
      }
      leader_wins += top ? 1 : 0;
    }
  }
  std::vector<double> sorted = shares;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double win_rate = static_cast<double>(leader_wins) / static_cast<double>(shares.size());
  detail = fmt("median predicted-item share %.4f (need > 0.9), leads in %.1f%% of %zu runs "
               "(need >= 95%%), min share %.4f",
               median, 100.0 * win_rate, shares.size(), sorted.front());
  return median > 0.9 && win_rate >= 0.95;
}

bool asymptotic_formulas(const Options& opt, std::string& detail) {
  SchemeSpec spec;
  spec.scheme = 1;
  spec.num_items = 20;
  spec.seed = 1;
  const MarketConfig m = generate_scheme(spec);
  const auto report = asymptotic_report(m);
  const std::vector<PolicySpec> policies{PolicySpec::parse("SQSSI"), PolicySpec::parse("AQGSI")};
  MonteCarloOptions mc;
  mc.horizon = 20000;
  mc.replications = 2000;
  mc.base_seed = 1;
  mc.checkpoints = {18000, 20000};
  mc.threads = opt.threads;
  const auto result = monte_carlo(m, policies, mc);
  const auto rate = [&](std::size_t p) {
    const auto& c = result.curves[p].mean_cumulative_purchases;
    return (c[1] - c[0]) / 2000.0;
  };
  const double sq = rate(0);
  const double aq = rate(1);
  const double sq_err = std::abs(sq - *report.p_sqssi);
  const double aq_err = std::abs(aq - *report.p_aqgsi);
  detail = fmt("SQSSI empirical %.4f vs %.4f (diff %.4f); AQGSI empirical %.4f vs %.4f "
               "(diff %.4f); tol 0.02",
               sq, *report.p_sqssi, sq_err, aq, *report.p_aqgsi, aq_err);
  return sq_err <= 0.02 && aq_err <= 0.02;
}

bool theorem3_tightness(std::string& detail) {
  const auto upper = asymptotic_report(tightness_instance(TightnessKind::Theorem3Upper, 4, 1e-3));
  const auto lower =
      asymptotic_report(tightness_instance(TightnessKind::Theorem3Lower, 4, 1e-3, 1e-6));
  const double u = *upper.ratio_aqnsi_aqgsi;
  const double l = *lower.ratio_aqnsi_aqgsi;
  detail = fmt("upper construction ratio %.6f (need >= 3.99), lower construction ratio %.3g "
               "(need <= 1e-4)",
               u, l);
  return u >= 3.99 && l <= 1e-4;
}

bool theorem4_bound(std::string& detail) {
  std::mt19937_64 rng(404);
  std::size_t checked = 0;
  double low = 1e300, high_slack = -1e300;
  bool ok = true;
  while (checked < 1000) {
    const std::size_t k = 1 + checked % 5;
    const std::size_t n = 2 + (checked / 5) % 9;
    const auto m = random_market(rng, n, k, checked % 3 == 0 ? 0.5 : 0.0);
    const auto r = asymptotic_report(m);
    if (!r.ratio_sqssi_aqgsi) continue;
    ++checked;
    const double ratio = *r.ratio_sqssi_aqgsi;
    low = std::min(low, ratio);
    high_slack = std::max(high_slack, ratio - static_cast<double>(k));
    ok = ok && ratio >= 1.0 - 1e-12 && ratio <= static_cast<double>(k) + 1e-12;
  }
  const double tight =
      *asymptotic_report(tightness_instance(TightnessKind::Theorem4, 3, 1e-3)).ratio_sqssi_aqgsi;
  detail = fmt("1000 instances: min ratio %.6f, max (ratio - K) %.6f; construction K=3 ratio "
               "%.6f (need >= 2.99)",
               low, high_slack, tight);
  return ok && tight >= 2.99;
}

bool diagnostics_identity(std::string& detail) {
  std::mt19937_64 rng(55);
  double worst = 0.0;
  bool bounds = true;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 9;
    const std::size_t k = 1 + rep % 4;
    const auto m = random_market(rng, n, k, rep % 2 ? 0.3 : 0.0);
    std::vector<std::size_t> pos(n);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::shuffle(pos.begin(), pos.end(), rng);
    const auto sigma = Ranking::from_positions(pos);
    std::uniform_int_distribution<Count> count(0, rep % 3 == 0 ? 1000000 : 100);
    std::vector<Count> d(n);
    for (Count& c : d) c = count(rng);

    const auto a = generalized_appeal(m, sigma, d);
    const auto q = generalized_quality(m, sigma, d);
    double shared = m.no_trial_mass();
    for (std::size_t j = 0; j < n; ++j) {
      shared += m.visibility(sigma.position(j)) * (a[j].value_or(0.0) + static_cast<double>(d[j]));
    }
    const auto limits = limit_quantities(m);
    const double band = quality_band(m, sigma, d);
    for (std::size_t i = 0; i < n; ++i) {
      double direct = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        direct += m.weight(c) * trial_probabilities(m, sigma, d, c).trial[i] * m.quality(i, c);
      }
      const double rebuilt = m.visibility(sigma.position(i)) *
                             (a[i].value_or(0.0) + static_cast<double>(d[i])) * q[i] / shared;
      worst = std::max(worst, std::abs(rebuilt - direct));
      const auto row = m.appeals().row(i);
      if (a[i]) {
        bounds = bounds && *a[i] >= *std::min_element(row.begin(), row.end()) - 1e-12 &&
                 *a[i] <= *std::max_element(row.begin(), row.end()) + 1e-12;
      }
      if (std::isfinite(band)) {
        bounds = bounds && q[i] >= (1 - band) * limits.quality[i] - 1e-12 &&
                 q[i] <= (1 + band) * limits.quality[i] + 1e-12;
      }
    }
  }
  detail = fmt("100 states: max |decomposition - direct| = %.3g (tol 1e-12), sandwich bounds %s",
               worst, bounds ? "hold" : "VIOLATED");
  return worst <= 1e-12 && bounds;
}

// Desk-scale scheme experiments shared by the ordering, gain and crossover criteria.
struct SchemeRun {
  int scheme;
  std::uint64_t seed;
  MonteCarloResult result;
};

const EfficiencyCurve& curve(const SchemeRun& run, const std::string& label) {
  for (const auto& c : run.result.curves) {
    if (c.policy == label) return c;
  }
  throw std::runtime_error("missing policy " + label);
}

double pooled(const EfficiencyCurve& a, const EfficiencyCurve& b, std::size_t i) {
  return std::sqrt(a.standard_error[i] * a.standard_error[i] +
                   b.standard_error[i] * b.standard_error[i]);
}

std::vector<SchemeRun> run_schemes(const Options& opt) {
  std::vector<std::int64_t> checkpoints;
  for (std::int64_t s = 1; s <= 100; ++s) checkpoints.push_back(s);
  for (std::int64_t s : default_checkpoints(5000)) checkpoints.push_back(s);
  std::vector<SchemeRun> runs;
  for (int scheme = 1; scheme <= 4; ++scheme) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SchemeSpec spec;
      spec.scheme = scheme;
      spec.num_items = 20;
      spec.seed = seed;
      const MarketConfig m = generate_scheme(spec);
      MonteCarloOptions mc;
      mc.horizon = 5000;
      mc.replications = 10000;
      mc.base_seed = seed;
      mc.checkpoints = checkpoints;
      mc.threads = opt.threads;
      const auto policies = standard_policies();
      runs.push_back({scheme, seed, monte_carlo(m, policies, mc)});
    }
  }
  return runs;
}

bool figure_ordering(const std::vector<SchemeRun>& runs, std::string& detail) {
  bool ok = true;
  std::ostringstream text;
  for (const auto& run : runs) {
    const auto& sq = curve(run, "SQSSI");
    const std::size_t h = sq.steps.size() - 1;
    text << "scheme" << run.scheme << "/seed" << run.seed << ":";
    if (run.scheme != 3) {
      double min_z = 1e300;
      for (const char* other : {"SQNSI", "AQGSI", "AQNSI"}) {
        const auto& o = curve(run, other);
        min_z = std::min(min_z, (sq.mean_cumulative_purchases[h] - o.mean_cumulative_purchases[h]) /
                                    pooled(sq, o, h));
      }
      text << fmt(" SQSSI min lead %.1f SE; ", min_z);
      ok = ok && min_z > 3.0;
    } else {
      const auto& gsi = curve(run, "AQGSI");
      double min_z = 1e300;
      for (const char* other : {"SQSSI", "SQNSI", "AQNSI"}) {
        const auto& o = curve(run, other);
        min_z = std::min(min_z, (o.mean_cumulative_purchases[h] -
                                 gsi.mean_cumulative_purchases[h]) /
                                    pooled(gsi, o, h));
      }
      const auto& nsi = curve(run, "AQNSI");
      const double z_nsi =
          (nsi.mean_cumulative_purchases[h] - gsi.mean_cumulative_purchases[h]) /
          pooled(gsi, nsi, h);
      text << fmt(" others minus AQGSI min %.1f SE, AQNSI minus AQGSI %.1f SE; ", min_z, z_nsi);
      ok = ok && min_z > 3.0 && z_nsi > 3.0;
    }
  }
  detail = text.str();
  return ok;
}

bool scheme4_gain(const std::vector<SchemeRun>& runs, std::string& detail) {
  bool ok = true;
  std::ostringstream text;
  for (const auto& run : runs) {
    if (run.scheme != 4) continue;
    const auto& sq = curve(run, "SQSSI");
    const auto& aq = curve(run, "AQGSI");
    const double ratio =
        sq.mean_cumulative_purchases.back() / aq.mean_cumulative_purchases.back();
    text << fmt("seed%llu ratio %.3f; ", static_cast<unsigned long long>(run.seed), ratio);
    ok = ok && ratio >= 1.4 && ratio <= 2.0;
  }
  detail = text.str() + "need [1.4, 2.0]";
  return ok;
}

bool early_crossover(const std::vector<SchemeRun>& runs, std::string& detail) {
  bool ok = true;
  std::ostringstream text;
  for (const auto& run : runs) {
    if (run.scheme != 2) continue;
    const auto& sq = curve(run, "SQSSI");
    const auto& aq = curve(run, "AQGSI");
    std::optional<std::size_t> ahead;
    std::optional<std::size_t> overtaken;
    double best_early = -1e300;
    for (std::size_t i = 0; i < sq.steps.size(); ++i) {
      const double z = (aq.mean_cumulative_purchases[i] - sq.mean_cumulative_purchases[i]) /
                       std::max(pooled(sq, aq, i), 1e-300);
      best_early = std::max(best_early, z);
      if (!ahead && z > 2.0) ahead = i;
      if (ahead && !overtaken && z < -2.0) overtaken = i;
    }
    const auto step_of = [&](std::optional<std::size_t> i) {
      return i ? "step " + std::to_string(sq.steps[*i]) : std::string("never");
    };
    text << fmt("seed%llu: AQGSI ahead > 2 SE at %s (max %.1f SE), then SQSSI ahead > 2 SE at %s; ",
                static_cast<unsigned long long>(run.seed), step_of(ahead).c_str(), best_early,
                step_of(overtaken).c_str());
    ok = ok && ahead && overtaken;
  }
  detail = text.str();
  return ok;
}

int run_command(const std::string& cmd) {
  const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(raw);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool determinism(const Options& opt, std::string& detail) {
  if (opt.cli.empty()) {
    detail = "no --cli executable given";
    return false;
  }
  const fs::path root = fs::absolute(opt.workdir) / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string exe = "\"" + opt.cli + "\"";
  std::size_t compared = 0;
  bool same = true;

  for (int scheme : {1, 3}) {
    std::vector<std::string> outs;
    for (const char* threads : {"1", "8", "1"}) {
      const fs::path dir = root / fmt("scheme%d_t%s_%zu", scheme, threads, outs.size());
      const std::string cmd = exe + fmt(" simulate --scheme %d --items 20 --horizon 2000 --reps 200"
                                        " --seed 7 --threads %s --out ",
                                        scheme, threads) +
                              "\"" + dir.string() + "\"";
      if (run_command(cmd) != 0) {
        detail = "simulate failed: " + cmd;
        return false;
      }
      outs.push_back(slurp(dir / fmt("me-scheme%d_efficiency.csv", scheme)) +
                     slurp(dir / fmt("me-scheme%d_profile.csv", scheme)));
    }
    for (const auto& o : outs) same = same && o == outs[0] && !o.empty();
    compared += outs.size();
  }

  // Optimize writes its ranking CSV; repeat it and compare bytes too.
  SchemeSpec spec;
  spec.scheme = 4;
  spec.num_items = 12;
  std::ofstream(root / "market.json") << config_to_json(generate_scheme(spec)).dump(2);
  std::vector<std::string> rankings;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path out = root / fmt("ranking_%d.csv", rep);
    const std::string cmd = exe + " optimize --config \"" + (root / "market.json").string() +
                            "\" --out \"" + out.string() + "\"";
    if (run_command(cmd) != 0) {
      detail = "optimize failed: " + cmd;
      return false;
    }
    rankings.push_back(slurp(out));
  }
  same = same && rankings[0] == rankings[1] && !rankings[0].empty();
  detail = fmt("%zu simulate runs at 1/8 threads and 2 optimize runs byte-identical: %s",
               compared, same ? "yes" : "NO");
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Acceptance criteria"};
  app.add_option("--threads", opt.threads, "Worker threads for Monte Carlo criteria");
  app.add_option("--cli", opt.cli, "Path to the command-line executable");
  app.add_option("--workdir", opt.workdir, "Scratch directory");
  app.add_option("--only", opt.only, "Run only criteria whose name contains this text");
  CLI11_PARSE(app, argc, argv);

  criterion(opt, "solver-correctness", solver_correctness);
  criterion(opt, "reduction-correctness", reduction_correctness);
  criterion(opt, "monopoly-convergence",
            [&](std::string& d) { return monopoly_convergence(opt, d); });
  criterion(opt, "asymptotic-formulas",
            [&](std::string& d) { return asymptotic_formulas(opt, d); });
  criterion(opt, "theorem3-tightness", theorem3_tightness);
  criterion(opt, "theorem4-bound-and-tightness", theorem4_bound);

  const bool want_schemes = opt.only.empty() || std::string("figure-ordering scheme4-gain "
                                                            "early-crossover")
                                                        .find(opt.only) != std::string::npos;
  if (want_schemes) {
    const auto start = std::chrono::steady_clock::now();
    const auto runs = run_schemes(opt);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    std::printf("(scheme experiments: 4 schemes x 3 seeds x 4 policies, 10000 x 5000 steps, "
                "%.1fs)\n",
                took.count());
    criterion(opt, "figure-ordering", [&](std::string& d) { return figure_ordering(runs, d); });
    criterion(opt, "scheme4-gain", [&](std::string& d) { return scheme4_gain(runs, d); });
    criterion(opt, "early-crossover", [&](std::string& d) { return early_crossover(runs, d); });
  }
  criterion(opt, "determinism", [&](std::string& d) { return determinism(opt, d); });
  criterion(opt, "diagnostics-identity", diagnostics_identity);

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
