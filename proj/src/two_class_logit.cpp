#include "trialmarket/two_class_logit.hpp"

#include <algorithm>
#include <cmath>

#include "trialmarket/error.hpp"

namespace trialmarket {

void TwoClassLogitInstance::validate() const {
  const std::size_t n = revenues.size();
  if (n == 0) fail(ErrorKind::InvalidInstance, "two-class logit instance has no products");
  if (v1.size() != n || v2.size() != n) {
    fail(ErrorKind::InvalidInstance, "utility and revenue vectors must have equal length");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidInstance, "alpha must be in [0,1]");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(v1[i] >= 0.0) || !(v2[i] >= 0.0) || !std::isfinite(v1[i]) || !std::isfinite(v2[i])) {
      fail(ErrorKind::InvalidInstance, "utilities must be non-negative");
    }
    if (!(revenues[i] >= 0.0) || !std::isfinite(revenues[i])) {
      fail(ErrorKind::InvalidInstance, "revenues must be non-negative");
    }
  }
}

double assortment_revenue(const TwoClassLogitInstance& instance,
                          std::span<const std::size_t> assortment) {
  double num1 = 0.0, den1 = 1.0, num2 = 0.0, den2 = 1.0;
  for (std::size_t i : assortment) {
    if (i >= instance.size()) fail(ErrorKind::InvalidArgument, "assortment item out of range");
    num1 += instance.revenues[i] * instance.v1[i];
    den1 += instance.v1[i];
    num2 += instance.revenues[i] * instance.v2[i];
    den2 += instance.v2[i];
  }
  return instance.alpha * num1 / den1 + (1.0 - instance.alpha) * num2 / den2;
}

double reduction_revenue_scale(const TwoClassLogitInstance& instance) {
  const double top = *std::max_element(instance.revenues.begin(), instance.revenues.end());
  return top > 0.0 ? top : 1.0;
}

MarketConfig reduction_market(const TwoClassLogitInstance& instance,
                              std::size_t visible_positions) {
  instance.validate();
  const std::size_t n = instance.size();
  if (visible_positions < 1 || visible_positions > n) {
    fail(ErrorKind::InvalidArgument, "visible prefix must hold between 1 and N positions");
  }
  const double scale = reduction_revenue_scale(instance);
  Matrix appeals(n, 2);
  Matrix qualities(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    appeals(i, 0) = instance.v1[i];
    appeals(i, 1) = instance.v2[i];
    qualities(i, 0) = qualities(i, 1) = instance.revenues[i] / scale;
  }
  std::vector<double> visibilities(n, 0.0);
  std::fill_n(visibilities.begin(), visible_positions, 1.0);
  return MarketConfig({instance.alpha, 1.0 - instance.alpha}, std::move(appeals),
                      std::move(qualities), std::move(visibilities), 1.0,
                      AppealCheck::NonNegative);
}

AssortmentResult solve_two_class_logit(const TwoClassLogitInstance& instance,
                                       const PerformanceOracle& oracle, bool oracle_is_exact) {
  instance.validate();
  const std::size_t n = instance.size();
  const double scale = reduction_revenue_scale(instance);
  const PopularitySignal launch = PopularitySignal::global(std::vector<Count>(n, 0));

  AssortmentResult result;
  result.exact = oracle_is_exact;
  result.value_by_size.reserve(n);
  for (std::size_t size = 1; size <= n; ++size) {
    const MarketConfig market = reduction_market(instance, size);
    const PerformanceResult best = oracle(market, launch);
    const double value = best.objective * scale;
    result.value_by_size.push_back(value);
    if (value > result.value) {
      result.value = value;
      result.assortment.assign(best.ranking.order().begin(),
                               best.ranking.order().begin() + static_cast<std::ptrdiff_t>(size));
      std::sort(result.assortment.begin(), result.assortment.end());
    }
  }
  return result;
}

AssortmentResult brute_force_two_class_logit(const TwoClassLogitInstance& instance) {
  instance.validate();
  const std::size_t n = instance.size();
  if (n > kMaxAssortmentEnumerationItems) {
    fail(ErrorKind::SizeLimit, "assortment enumeration limited to 20 products");
  }
  AssortmentResult result;
  std::vector<std::size_t> subset;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    subset.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) subset.push_back(i);
    }
    const double value = assortment_revenue(instance, subset);
    if (value > result.value ||
        (value == result.value && !result.assortment.empty() &&
         std::lexicographical_compare(subset.begin(), subset.end(), result.assortment.begin(),
                                      result.assortment.end()))) {
      result.value = value;
      result.assortment = subset;
    }
  }
  return result;
}

}  // namespace trialmarket
