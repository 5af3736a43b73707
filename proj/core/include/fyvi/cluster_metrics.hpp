#ifndef FYVI_CLUSTER_METRICS_HPP
#define FYVI_CLUSTER_METRICS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fyvi {

/// Dense contingency table between two labelings (labels may be any ints).
struct Contingency {
  std::vector<std::vector<double>> counts;  ///< rows: pred clusters, cols: truth clusters
  std::vector<double> row_sums;
  std::vector<double> col_sums;
  double total = 0.0;
};

Contingency contingency(std::span<const int> pred, std::span<const int> truth);

/// True when either labeling has a single cluster; the adjusted indices are
/// then reported as 0.
bool degenerate_partition(std::span<const int> pred, std::span<const int> truth);

/// Adjusted Rand index (pair-counting form with expected-index correction).
double adjusted_rand_index(std::span<const int> pred, std::span<const int> truth);

/// Mutual information in nats.
double mutual_information(std::span<const int> pred, std::span<const int> truth);

/// Expected mutual information under the hypergeometric permutation model.
double expected_mutual_information(const Contingency& table);

/// Adjusted mutual information, arithmetic-mean normalization:
/// (MI - E[MI]) / (mean(H(pred), H(truth)) - E[MI]).
double adjusted_mutual_information(std::span<const int> pred, std::span<const int> truth);

/// Mean silhouette with Euclidean distances over the rows of `x`. Points in
/// singleton clusters score 0. Throws std::invalid_argument with fewer than
/// two clusters.
double silhouette_score(const Eigen::MatrixXd& x, std::span<const int> pred);

}  // namespace fyvi

#endif  // FYVI_CLUSTER_METRICS_HPP
