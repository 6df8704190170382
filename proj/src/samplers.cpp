#include "hivdyn/samplers.hpp"

#include <cmath>

#include "hivdyn/errors.hpp"

namespace hivdyn {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

std::uint64_t stream_key(std::string_view id) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : id) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

double sample_error_precision(double residual_ss, double total_obs, const Hyperpriors& priors,
                              Rng& rng) {
  if (residual_ss < 0.0) throw DomainError("residual sum of squares must be nonnegative");
  const double shape = priors.a + 0.5 * total_obs;
  const double scale = 1.0 / (1.0 / priors.b + 0.5 * residual_ss);
  std::gamma_distribution<double> gamma(shape, scale);
  double draw = 0.0;
  while (!(draw > 0.0)) draw = gamma(rng);
  return draw;
}

Eigen::VectorXd sample_mvn_from_precision(const Eigen::VectorXd& mean,
                                          const Eigen::MatrixXd& precision, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw LinearAlgebraError("precision matrix is not positive definite");
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  // precision = L L'  =>  L'^{-1} z has covariance precision^{-1}
  return mean + llt.matrixU().solve(z);
}

Eigen::MatrixXd sample_wishart(const Eigen::MatrixXd& scale, double df, Rng& rng) {
  const Eigen::Index p = scale.rows();
  if (!(df > static_cast<double>(p - 1))) throw DomainError("Wishart degrees of freedom too small");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw LinearAlgebraError("Wishart scale matrix is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi2(df - static_cast<double>(i));
    A(i, i) = std::sqrt(chi2(rng));
    for (Eigen::Index j = 0; j < i; ++j) A(i, j) = normal(rng);
  }
  const Eigen::MatrixXd LA = L * A;
  Eigen::MatrixXd W = LA * LA.transpose();
  return 0.5 * (W + W.transpose());
}

ParamVector sample_population_mean(std::span<const ParamVector> thetas,
                                   const ParamMatrix& sigma_inv, const Hyperpriors& priors,
                                   Rng& rng) {
  if (thetas.empty()) throw InsufficientDataError("population mean needs at least one subject");
  const ParamMatrix lambda_inv = priors.lambda.inverse();
  ParamVector sum = ParamVector::Zero();
  for (const auto& t : thetas) sum += t;
  const ParamMatrix precision = static_cast<double>(thetas.size()) * sigma_inv + lambda_inv;
  Eigen::LLT<ParamMatrix> llt(precision);
  if (llt.info() != Eigen::Success)
    throw LinearAlgebraError("conditional covariance of mu is not positive definite");
  const ParamVector mean = llt.solve(sigma_inv * sum + lambda_inv * priors.eta);
  return sample_mvn_from_precision(mean, precision, rng);
}

ParamMatrix sample_population_precision(std::span<const ParamVector> thetas,
                                        const ParamVector& mu, const Hyperpriors& priors,
                                        Rng& rng) {
  ParamMatrix s = priors.omega.inverse();
  for (const auto& t : thetas) {
    const ParamVector d = t - mu;
    s += d * d.transpose();
  }
  Eigen::LLT<ParamMatrix> llt(s);
  if (llt.info() != Eigen::Success)
    throw LinearAlgebraError("Wishart scatter matrix is singular");
  const ParamMatrix scale = llt.solve(ParamMatrix::Identity());
  return sample_wishart(0.5 * (scale + scale.transpose()),
                        static_cast<double>(thetas.size()) + priors.nu, rng);
}

}  // namespace hivdyn
