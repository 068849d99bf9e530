#pragma once

// Independent reference computations the library is checked against.

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "crossrate/eval.hpp"
#include "crossrate/models.hpp"

namespace crossrate::testing {

/// MAE by direct summation in long double.
inline double oracle_mae(const std::vector<int>& p, const std::vector<int>& t) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(static_cast<long double>(p[i]) - t[i]);
  return static_cast<double>(s / p.size());
}

inline double oracle_rmse(const std::vector<int>& p, const std::vector<int>& t) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    long double d = static_cast<long double>(p[i]) - t[i];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s / p.size()));
}

/// Objective recomputed from scratch: log-sum-exp cross-entropy plus (l2 / 2) ||W||^2.
inline double oracle_objective(const SoftmaxParams& p, const std::vector<double>& X, const std::vector<std::size_t>& y,
                               double l2) {
  const std::size_t F = p.num_features, n = y.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(kNumClasses);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      s[c] = p.bias[c];
      for (std::size_t j = 0; j < F; ++j) s[c] += p.weights[c * F + j] * X[i * F + j];
    }
    double m = s[0];
    for (double v : s) m = std::max(m, v);
    double z = 0.0;
    for (double v : s) z += std::exp(v - m);
    loss += m + std::log(z) - s[y[i]];
  }
  double sq = 0.0;
  for (double w : p.weights) sq += w * w;
  return loss / static_cast<double>(n) + 0.5 * l2 * sq;
}

struct GradientCheck {
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  std::size_t features = 0;
  std::size_t examples = 0;
};

/// One random instance: analytic gradient against central differences of oracle_objective.
inline GradientCheck check_gradient_once(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> fdist(1, 20), ndist(1, 50), ydist(0, kNumClasses - 1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> l2dist(0.0, 0.1);
  const std::size_t F = fdist(rng), n = ndist(rng);
  SoftmaxParams p(F);
  for (auto& w : p.weights) w = g(rng);
  for (auto& b : p.bias) b = g(rng);
  std::vector<double> X(n * F);
  for (auto& x : X) x = g(rng);
  std::vector<std::size_t> y(n), rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = ydist(rng);
    rows[i] = i;
  }
  const double l2 = l2dist(rng);
  auto analytic = softmax_loss_and_gradient(p, X, y, rows, l2);

  const double h = 1e-5;
  double diff = 0.0, na = 0.0, nn = 0.0;
  auto accumulate = [&](double a, double num) {
    diff += (a - num) * (a - num);
    na += a * a;
    nn += num * num;
  };
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    SoftmaxParams up = p, down = p;
    up.weights[k] += h;
    down.weights[k] -= h;
    accumulate(analytic.grad.weights[k], (oracle_objective(up, X, y, l2) - oracle_objective(down, X, y, l2)) / (2 * h));
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    SoftmaxParams up = p, down = p;
    up.bias[c] += h;
    down.bias[c] -= h;
    accumulate(analytic.grad.bias[c], (oracle_objective(up, X, y, l2) - oracle_objective(down, X, y, l2)) / (2 * h));
  }
  const double scale = std::max(std::sqrt(na), std::sqrt(nn));
  return {scale > 0.0 ? std::sqrt(diff) / scale : 0.0, F, n};
}

/// Problems with the (i, j) splits of a plan, judged from its id -> (domain, fold) assignment
/// alone. Empty when every split invariant holds.
inline std::vector<std::string> split_violations(const FoldPlan& plan, std::size_t i, std::size_t j) {
  std::vector<std::string> bad;
  const auto& where = plan.assignment();
  auto in_domain = in_domain_split(plan, i, j);
  auto cross = cross_domain_split(plan, i, j);

  std::set<std::string> test(in_domain.test.begin(), in_domain.test.end());
  std::size_t expected_test = 0;
  for (const auto& [id, cell] : where) expected_test += cell.domain == i && cell.fold == j;
  if (test.size() != in_domain.test.size() || test.size() != expected_test) bad.push_back("test fold is not fold (i, j)");
  for (const auto& id : test)
    if (where.at(id).domain != i || where.at(id).fold != j) bad.push_back("test id from another cell: " + id);
  if (cross.test != in_domain.test) bad.push_back("settings disagree on the test fold");

  // in-domain: all other folds of domain i, nothing else
  std::set<std::size_t> folds_seen;
  std::size_t expected_train = 0;
  for (const auto& [id, cell] : where) expected_train += cell.domain == i && cell.fold != j;
  std::set<std::string> train(in_domain.train.begin(), in_domain.train.end());
  if (train.size() != in_domain.train.size()) bad.push_back("in-domain train has duplicates");
  if (train.size() != expected_train) bad.push_back("in-domain train misses reviews of domain i");
  for (const auto& id : train) {
    const auto& cell = where.at(id);
    if (cell.domain != i) bad.push_back("in-domain train leaves domain i: " + id);
    if (cell.fold == j || test.contains(id)) bad.push_back("in-domain train overlaps test: " + id);
    folds_seen.insert(cell.fold);
  }
  if (folds_seen.size() != plan.k() - 1) bad.push_back("in-domain train does not span k-1 folds");

  // cross-domain: fold j of every other domain, nothing from domain i
  std::set<std::size_t> domains_seen;
  expected_train = 0;
  for (const auto& [id, cell] : where) expected_train += cell.domain != i && cell.fold == j;
  std::set<std::string> ctrain(cross.train.begin(), cross.train.end());
  if (ctrain.size() != cross.train.size()) bad.push_back("cross-domain train has duplicates");
  if (ctrain.size() != expected_train) bad.push_back("cross-domain train misses folds");
  for (const auto& id : ctrain) {
    const auto& cell = where.at(id);
    if (cell.domain == i) bad.push_back("cross-domain train contains domain i: " + id);
    if (cell.fold != j) bad.push_back("cross-domain train uses a fold other than j: " + id);
    domains_seen.insert(cell.domain);
  }
  if (domains_seen.size() != plan.domains().size() - 1) bad.push_back("cross-domain train lacks a domain");
  return bad;
}

/// Largest difference between fold sizes within any domain.
inline std::size_t max_fold_skew(const FoldPlan& plan) {
  std::size_t skew = 0;
  for (std::size_t d = 0; d < plan.domains().size(); ++d) {
    std::size_t lo = SIZE_MAX, hi = 0;
    for (std::size_t f = 0; f < plan.k(); ++f) {
      lo = std::min(lo, plan.fold(d, f).size());
      hi = std::max(hi, plan.fold(d, f).size());
    }
    skew = std::max(skew, hi - lo);
  }
  return skew;
}

}  // namespace crossrate::testing
