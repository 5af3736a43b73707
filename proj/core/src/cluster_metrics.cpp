#include "fyvi/cluster_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace fyvi {

namespace {

std::vector<std::size_t> dense_codes(std::span<const int> labels, std::size_t& count) {
  std::map<int, std::size_t> index;
  for (int l : labels) index.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, code] : index) code = next++;
  count = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = index[labels[i]];
  return out;
}

double choose2(double n) { return 0.5 * n * (n - 1.0); }

double entropy(const std::vector<double>& sums, double total) {
  double h = 0.0;
  for (double s : sums) {
    if (s > 0.0) h -= (s / total) * std::log(s / total);
  }
  return h;
}

}  // namespace

Contingency contingency(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
  if (pred.empty()) throw std::invalid_argument("label vectors are empty");
  std::size_t np = 0;
  std::size_t nt = 0;
  const auto cp = dense_codes(pred, np);
  const auto ct = dense_codes(truth, nt);
  Contingency t;
  t.counts.assign(np, std::vector<double>(nt, 0.0));
  t.row_sums.assign(np, 0.0);
  t.col_sums.assign(nt, 0.0);
  for (std::size_t i = 0; i < cp.size(); ++i) {
    t.counts[cp[i]][ct[i]] += 1.0;
    t.row_sums[cp[i]] += 1.0;
    t.col_sums[ct[i]] += 1.0;
  }
  t.total = static_cast<double>(pred.size());
  return t;
}

bool degenerate_partition(std::span<const int> pred, std::span<const int> truth) {
  const Contingency t = contingency(pred, truth);
  return t.row_sums.size() < 2 || t.col_sums.size() < 2;
}

double adjusted_rand_index(std::span<const int> pred, std::span<const int> truth) {
  const Contingency t = contingency(pred, truth);
  if (t.row_sums.size() < 2 || t.col_sums.size() < 2) return 0.0;
  double index = 0.0;
  for (const auto& row : t.counts) {
    for (double n : row) index += choose2(n);
  }
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (double a : t.row_sums) sum_a += choose2(a);
  for (double b : t.col_sums) sum_b += choose2(b);
  const double expected = sum_a * sum_b / choose2(t.total);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 0.0;
  return (index - expected) / (max_index - expected);
}

double mutual_information(std::span<const int> pred, std::span<const int> truth) {
  const Contingency t = contingency(pred, truth);
  double mi = 0.0;
  for (std::size_t i = 0; i < t.row_sums.size(); ++i) {
    for (std::size_t j = 0; j < t.col_sums.size(); ++j) {
      const double n = t.counts[i][j];
      if (n > 0.0) mi += (n / t.total) * std::log(t.total * n / (t.row_sums[i] * t.col_sums[j]));
    }
  }
  return std::max(mi, 0.0);
}

double expected_mutual_information(const Contingency& t) {
  const double N = t.total;
  const double lg_n = std::lgamma(N + 1.0);
  double emi = 0.0;
  for (double a : t.row_sums) {
    for (double b : t.col_sums) {
      const double start = std::max(1.0, a + b - N);
      const double stop = std::min(a, b);
      // log of a! b! (N-a)! (N-b)! / N!, shared by every n_ij term.
      const double lg_fixed = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) + std::lgamma(N - a + 1.0) +
                              std::lgamma(N - b + 1.0) - lg_n;
      for (double n = start; n <= stop; n += 1.0) {
        const double lg_var = std::lgamma(n + 1.0) + std::lgamma(a - n + 1.0) + std::lgamma(b - n + 1.0) +
                              std::lgamma(N - a - b + n + 1.0);
        emi += (n / N) * std::log(N * n / (a * b)) * std::exp(lg_fixed - lg_var);
      }
    }
  }
  return emi;
}

double adjusted_mutual_information(std::span<const int> pred, std::span<const int> truth) {
  const Contingency t = contingency(pred, truth);
  if (t.row_sums.size() < 2 || t.col_sums.size() < 2) return 0.0;
  const double mi = mutual_information(pred, truth);
  const double emi = expected_mutual_information(t);
  const double norm = 0.5 * (entropy(t.row_sums, t.total) + entropy(t.col_sums, t.total));
  double denom = norm - emi;
  // Guard against a vanishing denominator the same way for both signs.
  const double tiny = std::numeric_limits<double>::epsilon();
  if (std::abs(denom) < tiny) denom = denom < 0.0 ? -tiny : tiny;
  return (mi - emi) / denom;
}

double silhouette_score(const Eigen::MatrixXd& x, std::span<const int> pred) {
  if (static_cast<std::size_t>(x.rows()) != pred.size()) throw std::invalid_argument("silhouette: size mismatch");
  std::size_t k = 0;
  const auto codes = dense_codes(pred, k);
  if (k < 2) throw std::invalid_argument("silhouette needs at least two clusters");
  std::vector<double> sizes(k, 0.0);
  for (std::size_t c : codes) sizes[c] += 1.0;

  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> dist_sum(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist_sum[codes[j]] += (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
    }
    const std::size_t own = codes[i];
    if (sizes[own] <= 1.0) continue;
    const double a = dist_sum[own] / (sizes[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own && sizes[c] > 0.0) b = std::min(b, dist_sum[c] / sizes[c]);
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

}  // namespace fyvi
