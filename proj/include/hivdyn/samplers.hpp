#pragma once

// Conjugate full-conditional samplers for the population-level blocks.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>

#include "hivdyn/model.hpp"

namespace hivdyn {

using Rng = std::mt19937_64;

// Deterministic engine for a (seed, stream key) pair.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);
std::uint64_t stream_key(std::string_view id);

// sigma^{-2} ~ Ga(a + total_obs/2, {1/b + residual_ss/2}^{-1}), shape-scale.
double sample_error_precision(double residual_ss, double total_obs, const Hyperpriors& priors,
                              Rng& rng);

// mu ~ N(V (Sigma^{-1} sum theta_i + Lambda^{-1} eta), V),  V = (n Sigma^{-1} + Lambda^{-1})^{-1}
ParamVector sample_population_mean(std::span<const ParamVector> thetas,
                                   const ParamMatrix& sigma_inv, const Hyperpriors& priors,
                                   Rng& rng);

// Sigma^{-1} ~ Wi([Omega^{-1} + sum (theta_i - mu)(theta_i - mu)']^{-1}, n + nu)
ParamMatrix sample_population_precision(std::span<const ParamVector> thetas,
                                        const ParamVector& mu, const Hyperpriors& priors,
                                        Rng& rng);

// Draw from N(mean, precision^{-1}) using the Cholesky factor of the precision.
Eigen::VectorXd sample_mvn_from_precision(const Eigen::VectorXd& mean,
                                          const Eigen::MatrixXd& precision, Rng& rng);

// Bartlett decomposition; mean is df * scale.
Eigen::MatrixXd sample_wishart(const Eigen::MatrixXd& scale, double df, Rng& rng);

}  // namespace hivdyn
