#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "trialmarket/analysis.hpp"
#include "trialmarket/engine.hpp"
#include "trialmarket/error.hpp"
#include "trialmarket/experiments.hpp"
#include "trialmarket/io.hpp"
#include "trialmarket/policies.hpp"
#include "trialmarket/two_class_logit.hpp"

namespace py = pybind11;
using namespace trialmarket;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) { return Matrix::from_rows(rows); }

PerformanceSolver solver_from(const std::string& name) {
  if (name == "exact1") return PerformanceSolver::Exact1Class;
  if (name == "bruteforce") return PerformanceSolver::BruteForce;
  if (name == "swap") return PerformanceSolver::SwapHeuristic;
  fail(ErrorKind::InvalidArgument, "solver must be exact1, bruteforce or swap");
}

TightnessKind tightness_from(const std::string& name) {
  if (name == "theorem3-upper") return TightnessKind::Theorem3Upper;
  if (name == "theorem3-lower") return TightnessKind::Theorem3Lower;
  if (name == "theorem4") return TightnessKind::Theorem4;
  fail(ErrorKind::InvalidArgument, "unknown tightness construction '" + name + "'");
}

std::vector<std::size_t> order_of(const Ranking& r) {
  return {r.order().begin(), r.order().end()};
}

py::dict result_dict(const PerformanceResult& r) {
  py::dict d;
  d["ranking"] = order_of(r.ranking);
  d["objective"] = r.objective;
  d["solver"] = to_string(r.solver);
  d["exact"] = r.exact;
  return d;
}

py::dict assortment_dict(const AssortmentResult& r) {
  py::dict d;
  d["assortment"] = r.assortment;
  d["value"] = r.value;
  d["exact"] = r.exact;
  d["value_by_size"] = r.value_by_size;
  return d;
}

}  // namespace

PYBIND11_MODULE(_trialmarket, m) {
  m.doc() = "Trial-offer market simulator with social influence and position bias";
  m.attr("__version__") = kToolVersion;

  py::register_exception<MarketError>(m, "MarketError", PyExc_ValueError);

  py::class_<MarketConfig>(m, "MarketConfig")
      .def(py::init([](std::vector<double> weights, const std::vector<std::vector<double>>& a,
                       const std::vector<std::vector<double>>& q, std::vector<double> v, double z) {
             return MarketConfig(std::move(weights), to_matrix(a), to_matrix(q), std::move(v), z);
           }),
           py::arg("class_weights"), py::arg("appeals"), py::arg("qualities"),
           py::arg("visibilities"), py::arg("z") = 0.0)
      .def_static("from_json", [](const std::string& text) {
        return config_from_json(nlohmann::json::parse(text));
      })
      .def("to_json", [](const MarketConfig& c) { return config_to_json(c).dump(); })
      .def_property_readonly("num_items", &MarketConfig::num_items)
      .def_property_readonly("num_classes", &MarketConfig::num_classes)
      .def_property_readonly("class_weights", &MarketConfig::class_weights)
      .def_property_readonly("appeals", [](const MarketConfig& c) { return c.appeals().to_rows(); })
      .def_property_readonly("qualities",
                             [](const MarketConfig& c) { return c.qualities().to_rows(); })
      .def_property_readonly("visibilities", &MarketConfig::visibilities)
      .def_property_readonly("z", &MarketConfig::no_trial_mass);

  m.def("derive_class_weights", [](const std::vector<double>& rates) {
    return derive_class_weights(rates);
  });
  m.def(
      "trial_probabilities",
      [](const MarketConfig& c, const std::vector<std::size_t>& order,
         const std::vector<Count>& counts, std::size_t k) {
        const auto t = trial_probabilities(c, Ranking::from_order(order), counts, k);
        return py::make_tuple(t.trial, t.no_trial);
      },
      py::arg("config"), py::arg("order"), py::arg("counts"), py::arg("class_index") = 0,
      "Trial probabilities for a ranking given as items by position.");
  m.def(
      "purchase_probability",
      [](const MarketConfig& c, const std::vector<std::size_t>& order,
         const std::vector<Count>& counts) {
        return purchase_probability_next(c, Ranking::from_order(order),
                                         PopularitySignal::global(counts));
      },
      py::arg("config"), py::arg("order"), py::arg("counts"));
  m.def("market_shares", [](const std::vector<Count>& d) { return market_shares(d); });

  m.def("popularity_ranking",
        [](const std::vector<Count>& d) { return order_of(popularity_ranking(d)); });
  m.def("average_quality", &average_quality);
  m.def("average_quality_ranking",
        [](const MarketConfig& c) { return order_of(average_quality_ranking(c)); });
  m.def("segmented_quality_rankings", [](const MarketConfig& c) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& r : segmented_quality_rankings(c)) out.push_back(order_of(r));
    return out;
  });
  m.def(
      "performance_ranking",
      [](const MarketConfig& c, const std::vector<Count>& counts, const std::string& solver,
         int max_passes) {
        return result_dict(performance_ranking(c, PopularitySignal::global(counts),
                                               solver_from(solver), max_passes));
      },
      py::arg("config"), py::arg("counts"), py::arg("solver") = "swap",
      py::arg("max_passes") = 50);

  m.def(
      "solve_two_class_logit",
      [](std::vector<double> v1, std::vector<double> v2, std::vector<double> revenues,
         double alpha, bool exact) {
        const TwoClassLogitInstance inst{std::move(v1), std::move(v2), std::move(revenues), alpha};
        PerformanceOracle oracle = [exact](const MarketConfig& c, const PopularitySignal& s) {
          return exact ? performance_ranking_bruteforce(c, s)
                       : performance_ranking_swap_heuristic(c, s, 50);
        };
        return assortment_dict(solve_two_class_logit(inst, oracle, exact));
      },
      py::arg("v1"), py::arg("v2"), py::arg("revenues"), py::arg("alpha"),
      py::arg("exact") = true);
  m.def(
      "brute_force_two_class_logit",
      [](std::vector<double> v1, std::vector<double> v2, std::vector<double> revenues,
         double alpha) {
        return assortment_dict(brute_force_two_class_logit(
            {std::move(v1), std::move(v2), std::move(revenues), alpha}));
      },
      py::arg("v1"), py::arg("v2"), py::arg("revenues"), py::arg("alpha"));

  m.def(
      "generate_scheme",
      [](int scheme, std::size_t items, std::uint64_t seed, double z, double exponent,
         const std::string& noise) {
        SchemeSpec spec;
        spec.scheme = scheme;
        spec.num_items = items;
        spec.seed = seed;
        spec.z = z;
        spec.visibility.exponent = exponent;
        if (noise == "additive") {
          spec.appeal_noise = AppealNoise::Additive;
        } else if (noise != "multiplicative") {
          fail(ErrorKind::InvalidArgument, "appeal noise must be multiplicative or additive");
        }
        return generate_scheme(spec);
      },
      py::arg("scheme"), py::arg("items") = 50, py::arg("seed") = 1, py::arg("z") = 0.0,
      py::arg("visibility_exponent") = 0.8, py::arg("appeal_noise") = "multiplicative");

  m.def("asymptotic_report", [](const MarketConfig& c) {
    return py::module_::import("json").attr("loads")(report_to_json(asymptotic_report(c)).dump());
  });
  m.def(
      "tightness_instance",
      [](const std::string& kind, std::size_t classes, double eps, double eps_a) {
        return tightness_instance(tightness_from(kind), classes, eps, eps_a);
      },
      py::arg("kind"), py::arg("classes"), py::arg("eps"), py::arg("eps_a") = 1e-6);

  m.def(
      "run_simulation",
      [](const MarketConfig& c, const std::string& policy, std::int64_t horizon,
         std::uint64_t seed) {
        std::optional<SimulationTrace> run;
        {
          py::gil_scoped_release release;
          run = run_simulation(c, PolicySpec::parse(policy), horizon,
                                 CounterRng::derive_key(seed, 0, 0));
        }
        const SimulationTrace& trace = *run;
        py::dict d;
        d["purchases"] = trace.final_state.purchases;
        d["total"] = trace.final_state.total_purchases();
        std::vector<int> bought;
        bought.reserve(trace.records.size());
        for (const auto& r : trace.records) bought.push_back(r.purchased ? 1 : 0);
        d["purchased"] = bought;
        return d;
      },
      py::arg("config"), py::arg("policy"), py::arg("horizon"), py::arg("seed") = 1);

  m.def(
      "monte_carlo",
      [](const MarketConfig& c, const std::vector<std::string>& labels, std::int64_t horizon,
         std::size_t replications, std::uint64_t seed, std::vector<std::int64_t> checkpoints,
         unsigned threads) {
        std::vector<PolicySpec> policies;
        for (const auto& l : labels) policies.push_back(PolicySpec::parse(l));
        MonteCarloOptions opt;
        opt.horizon = horizon;
        opt.replications = replications;
        opt.base_seed = seed;
        opt.checkpoints = std::move(checkpoints);
        opt.threads = threads;
        MonteCarloResult result;
        {
          py::gil_scoped_release release;
          result = monte_carlo(c, policies, opt);
        }
        py::dict out;
        for (std::size_t p = 0; p < result.curves.size(); ++p) {
          py::dict entry;
          entry["steps"] = result.curves[p].steps;
          entry["mean"] = result.curves[p].mean_cumulative_purchases;
          entry["stderr"] = result.curves[p].standard_error;
          entry["mean_purchases"] = result.profiles[p].mean_purchases;
          out[py::str(result.curves[p].policy)] = entry;
        }
        return out;
      },
      py::arg("config"), py::arg("policies"), py::arg("horizon"), py::arg("replications"),
      py::arg("seed") = 1, py::arg("checkpoints") = std::vector<std::int64_t>{},
      py::arg("threads") = 1);
}
