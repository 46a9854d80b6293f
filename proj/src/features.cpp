#include "matd/features.hpp"

#include <cmath>

#include "matd/errors.hpp"
#include "matd/rng.hpp"

namespace matd {

FeatureMatrix build_orthonormal_features(int n, int m, std::uint64_t seed) {
  if (m < 1 || m > n)
    throw PreconditionViolation("build_orthonormal_features: need 1 <= m <= n");

  for (int attempt = 0; attempt < 3; ++attempt) {
    Rng rng(derive_seed(seed, seed_tag::attempt + attempt));
    Eigen::MatrixXd draw(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) draw(i, j) = rng.normal();

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(draw);
    const Eigen::VectorXd diag = qr.matrixQR().diagonal().head(m);
    if (diag.cwiseAbs().minCoeff() <= 1e-10 * std::sqrt(static_cast<double>(n)))
      continue;

    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    const double max_row_norm = q.rowwise().norm().maxCoeff();
    return {q / max_row_norm};
  }
  throw SingularSystem("build_orthonormal_features: rank-deficient QR after 3 attempts");
}

FeatureMatrix identity_features(int n) {
  return {Eigen::MatrixXd::Identity(n, n)};
}

ValidationReport validate(const FeatureMatrix& phi) {
  if (phi.n() < 1 || phi.m() < 1) return {false, "empty feature matrix"};
  if (phi.m() > phi.n()) return {false, "feature dimension exceeds state count"};
  const double max_row_norm = phi.phi.rowwise().norm().maxCoeff();
  if (max_row_norm > 1.0 + 1e-12) return {false, "row norm exceeds 1"};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi.phi);
  if (svd.singularValues()(phi.m() - 1) <= 1e-10)
    return {false, "columns are not full rank"};
  return {};
}

Eigen::VectorXd approximate_value(const FeatureMatrix& phi, const Eigen::VectorXd& theta) {
  if (theta.size() != phi.m())
    throw DimensionMismatch("approximate_value: theta dimension != m");
  return phi.phi * theta;
}

nlohmann::ordered_json to_json(const FeatureMatrix& phi) {
  nlohmann::ordered_json j;
  j["n"] = phi.n();
  j["m"] = phi.m();
  auto rows = nlohmann::ordered_json::array();
  for (int s = 0; s < phi.n(); ++s) {
    auto row = nlohmann::ordered_json::array();
    for (int k = 0; k < phi.m(); ++k) row.push_back(phi.phi(s, k));
    rows.push_back(std::move(row));
  }
  j["phi"] = std::move(rows);
  return j;
}

FeatureMatrix features_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    const auto& rows = j.at("phi");
    if (static_cast<int>(rows.size()) != n) throw ConfigError("features json: row count != n");
    FeatureMatrix phi;
    phi.phi.resize(n, m);
    for (int s = 0; s < n; ++s) {
      if (static_cast<int>(rows[s].size()) != m)
        throw ConfigError("features json: column count != m");
      for (int k = 0; k < m; ++k) phi.phi(s, k) = rows[s][k].get<double>();
    }
    return phi;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("features json: ") + e.what());
  }
}

}  // namespace matd
