#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "json.hpp"
#include "matd/mrp.hpp"

namespace matd {

/// Linear-approximation feature matrix. Rows are per-state feature vectors
/// with Euclidean norm <= 1; columns span the approximation subspace and are
/// linearly independent.
struct FeatureMatrix {
  Eigen::MatrixXd phi;  // n x m

  int n() const { return static_cast<int>(phi.rows()); }
  int m() const { return static_cast<int>(phi.cols()); }
  auto row(int s) const { return phi.row(s); }
};

/// QR-orthonormalizes an n x m Gaussian draw, then scales the whole matrix by
/// 1/max row norm so every row norm <= 1 while the columns stay mutually
/// orthogonal. Deterministic in seed; retries up to 3 derived seeds on a
/// near-zero QR diagonal before throwing SingularSystem.
FeatureMatrix build_orthonormal_features(int n, int m, std::uint64_t seed);

/// Tabular features, Phi = I_n.
FeatureMatrix identity_features(int n);

/// Checks column rank (smallest singular value > 1e-10) and the row-norm
/// bound max_s ||phi_s|| <= 1 + 1e-12.
ValidationReport validate(const FeatureMatrix& phi);

/// Returns Phi * theta.
Eigen::VectorXd approximate_value(const FeatureMatrix& phi, const Eigen::VectorXd& theta);

nlohmann::ordered_json to_json(const FeatureMatrix& phi);
FeatureMatrix features_from_json(const nlohmann::json& j);

}  // namespace matd
