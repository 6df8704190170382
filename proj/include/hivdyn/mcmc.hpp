#pragma once

// Gibbs-within-Metropolis sampler for the hierarchical viral-dynamics model.
//
// One sweep draws sigma^{-2}, mu and Sigma^{-1} from their conjugate full
// conditionals and then updates every theta_i with a random-walk
// Metropolis-Hastings step on the log scale. Subject updates are
// conditionally independent given the population block, so they may run on
// several workers. Each subject owns an RNG stream keyed by its id, which
// makes the chain independent of worker count and of subject order.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hivdyn/errors.hpp"
#include "hivdyn/model.hpp"
#include "hivdyn/samplers.hpp"

namespace hivdyn {

struct MCMCConfig {
  long burn_in = 30000;
  long post_iterations = 120000;
  long thin = 5;
  std::uint64_t seed = 20080101;
  bool adapt_during_burn_in = true;
  double target_acceptance = 0.30;
  double initial_step = 0.05;
  unsigned workers = 1;
  // Ignore the data: residuals are treated as empty, so the chain samples
  // the prior.
  bool prior_only = false;
  // Starting values keyed by subject id; subjects not listed start at eta.
  std::map<std::string, ParamVector> initial_thetas;
  std::optional<PopulationState> initial_population;

  void validate() const;
  long retained_draws() const { return post_iterations / thin; }
};

struct SubjectState {
  ParamVector theta = ParamVector::Zero();
  double ssr = 0.0;  // residual sum of squares at theta; +inf if not evaluable
  ParamVector step_scales = ParamVector::Constant(0.05);
  long proposals = 0;
  long accepts = 0;
  long non_evaluable = 0;  // proposals whose target was -inf
};

// Random-walk M-H update of one subject. Returns true on acceptance.
bool mh_step_theta(SubjectState& state, const SubjectLikelihood& subject,
                   const PopulationState& pop, Rng& rng);

struct PopulationDraw {
  long iteration = 0;  // 1-based index after burn-in
  ParamVector mu = ParamVector::Zero();
  ParamMatrix sigma_inv = ParamMatrix::Identity();
  double error_prec = 1.0;
};

struct ChainOutput {
  std::uint64_t seed = 0;
  long burn_in = 0;
  long post_iterations = 0;
  long thin = 1;
  std::vector<std::string> subject_ids;            // sorted
  std::vector<PopulationDraw> population_draws;
  std::vector<std::vector<ParamVector>> subject_draws;  // [subject][draw]
  // Post-burn-in acceptance per subject. The 6-vector is proposed jointly,
  // so one rate applies to every coordinate of a subject.
  std::vector<double> acceptance_rates;
  std::vector<ParamVector> step_scales;            // frozen after burn-in
  long non_evaluable_proposals = 0;
  long iterations_completed = 0;
};

class ChainAbortedError : public ChainAbort {
 public:
  ChainAbortedError(long iteration, const std::string& what,
                    std::shared_ptr<const ChainOutput> partial)
      : ChainAbort(iteration, what), partial_(std::move(partial)) {}
  const ChainOutput& partial() const { return *partial_; }

 private:
  std::shared_ptr<const ChainOutput> partial_;
};

using ProgressCallback = std::function<void(long iteration, long total)>;

ChainOutput run_chain(const std::vector<SubjectLikelihood>& subjects, const Hyperpriors& priors,
                      const MCMCConfig& config, const ProgressCallback& progress = {});

ChainOutput run_chain(const std::vector<SubjectRecord>& dataset, const Hyperpriors& priors,
                      const MCMCConfig& config, const ProgressCallback& progress = {});

}  // namespace hivdyn
