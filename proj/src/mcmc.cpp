#include "hivdyn/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

namespace hivdyn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Robbins-Monro scale adaptation plus a running estimate of each
// coordinate's spread, used only during burn-in.
struct Adaptation {
  double log_lambda = 0.0;
  ParamVector base;
  ParamVector mean = ParamVector::Zero();
  ParamVector m2 = ParamVector::Zero();
  long count = 0;

  void observe(const ParamVector& x) {
    ++count;
    const ParamVector d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d.cwiseProduct(x - mean);
  }
};

void for_each_subject(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const unsigned w = std::min<unsigned>(workers, static_cast<unsigned>(n));
  std::vector<std::jthread> pool;
  pool.reserve(w);
  for (unsigned k = 0; k < w; ++k)
    pool.emplace_back([&, k] {
      for (std::size_t i = k; i < n; i += w) f(i);
    });
}

}  // namespace

void MCMCConfig::validate() const {
  if (burn_in < 0 || post_iterations <= 0) throw DomainError("iteration counts must be positive");
  if (thin < 1) throw DomainError("thinning interval must be at least 1");
  if (workers < 1) throw DomainError("worker count must be at least 1");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw DomainError("target acceptance must lie in (0, 1)");
  if (!(initial_step >= 0.0)) throw DomainError("initial step must be nonnegative");
}

bool mh_step_theta(SubjectState& state, const SubjectLikelihood& subject,
                   const PopulationState& pop, Rng& rng) {
  std::normal_distribution<double> normal;
  ParamVector proposal = state.theta;
  for (int j = 0; j < kParamCount; ++j) proposal[j] += state.step_scales[j] * normal(rng);
  std::uniform_real_distribution<double> uniform;
  const double log_u = std::log(uniform(rng));
  ++state.proposals;

  const double ssr_new = proposal == state.theta ? state.ssr : subject.residual_ss(proposal);
  const double next = log_target_from_ssr(ssr_new, proposal, pop);
  if (next == kNegInf) {
    ++state.non_evaluable;
    return false;
  }
  const double current = log_target_from_ssr(state.ssr, state.theta, pop);
  if (current == kNegInf || log_u < next - current) {
    state.theta = proposal;
    state.ssr = ssr_new;
    ++state.accepts;
    return true;
  }
  return false;
}

ChainOutput run_chain(const std::vector<SubjectLikelihood>& input, const Hyperpriors& priors,
                      const MCMCConfig& config, const ProgressCallback& progress) {
  config.validate();
  priors.validate();
  if (input.empty()) throw InsufficientDataError("dataset has no subjects");

  std::vector<SubjectLikelihood> subjects = input;
  std::sort(subjects.begin(), subjects.end(),
            [](const auto& x, const auto& y) { return x.id < y.id; });
  for (std::size_t i = 1; i < subjects.size(); ++i)
    if (subjects[i].id == subjects[i - 1].id)
      throw DomainError("duplicate subject id " + subjects[i].id);
  if (config.prior_only) {
    for (auto& s : subjects) {
      s.observation_count = 0;
      s.residual_ss = [](const ParamVector&) { return 0.0; };
    }
  }
  const std::size_t n = subjects.size();
  double total_obs = 0.0;
  for (const auto& s : subjects) total_obs += static_cast<double>(s.observation_count);

  auto out = std::make_shared<ChainOutput>();
  out->seed = config.seed;
  out->burn_in = config.burn_in;
  out->post_iterations = config.post_iterations;
  out->thin = config.thin;
  out->subject_draws.resize(n);
  for (const auto& s : subjects) out->subject_ids.push_back(s.id);
  out->population_draws.reserve(static_cast<std::size_t>(config.retained_draws()));
  for (auto& d : out->subject_draws) d.reserve(static_cast<std::size_t>(config.retained_draws()));

  PopulationState pop;
  if (config.initial_population) {
    pop = *config.initial_population;
  } else {
    pop.mu = priors.eta;
    pop.sigma_inv = priors.nu * priors.omega;
    pop.error_prec = priors.a * priors.b;
  }
  pop.validate();

  Rng pop_rng = make_rng(config.seed, 0x9e3779b97f4a7c15ULL);
  std::vector<Rng> rngs;
  std::vector<SubjectState> states(n);
  std::vector<Adaptation> adapt(n);
  rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    rngs.push_back(make_rng(config.seed, stream_key(subjects[i].id)));
    const auto it = config.initial_thetas.find(subjects[i].id);
    states[i].theta = it != config.initial_thetas.end() ? it->second : priors.eta;
    states[i].ssr = subjects[i].residual_ss(states[i].theta);
    states[i].step_scales = ParamVector::Constant(config.initial_step);
    adapt[i].base = states[i].step_scales;
  }

  const long total = config.burn_in + config.post_iterations;
  const long adapt_start = config.burn_in / 4;
  std::vector<char> accepted(n, 0);
  std::vector<ParamVector> thetas(n);
  long it = 0;
  try {
    for (it = 1; it <= total; ++it) {
      double ssr_total = 0.0;
      for (const auto& s : states) ssr_total += s.ssr;
      if (std::isfinite(ssr_total))
        pop.error_prec = sample_error_precision(ssr_total, total_obs, priors, pop_rng);
      for (std::size_t i = 0; i < n; ++i) thetas[i] = states[i].theta;
      pop.mu = sample_population_mean(thetas, pop.sigma_inv, priors, pop_rng);
      pop.sigma_inv = sample_population_precision(thetas, pop.mu, priors, pop_rng);

      const PopulationState snapshot = pop;
      for_each_subject(n, config.workers, [&](std::size_t i) {
        accepted[i] = mh_step_theta(states[i], subjects[i], snapshot, rngs[i]) ? 1 : 0;
      });

      const bool burning = it <= config.burn_in;
      if (burning && config.adapt_during_burn_in) {
        const double gain = std::pow(static_cast<double>(it), -0.6);
        for (std::size_t i = 0; i < n; ++i) {
          auto& a = adapt[i];
          a.log_lambda += gain * (static_cast<double>(accepted[i]) - config.target_acceptance);
          a.log_lambda = std::clamp(a.log_lambda, -12.0, 4.0);
          if (it > adapt_start) a.observe(states[i].theta);
          if (a.count >= 200 && it % 100 == 0) {
            const ParamVector sd = (a.m2 / static_cast<double>(a.count - 1)).cwiseSqrt();
            a.base = sd.cwiseMax(1e-3) * (2.38 / std::sqrt(static_cast<double>(kParamCount)));
          }
          states[i].step_scales = std::exp(a.log_lambda) * a.base;
        }
      }
      if (it == config.burn_in) {
        for (auto& s : states) s.proposals = s.accepts = s.non_evaluable = 0;
      }
      if (!burning) {
        const long k = it - config.burn_in;
        if (k % config.thin == 0) {
          out->population_draws.push_back({k, pop.mu, pop.sigma_inv, pop.error_prec});
          for (std::size_t i = 0; i < n; ++i) out->subject_draws[i].push_back(states[i].theta);
        }
      }
      out->iterations_completed = it;
      if (progress && it % 1000 == 0) progress(it, total);
    }
  } catch (const LinearAlgebraError& e) {
    throw ChainAbortedError(it, e.what(), out);
  } catch (const DomainError& e) {
    throw ChainAbortedError(it, e.what(), out);
  }

  for (const auto& s : states) {
    out->acceptance_rates.push_back(
        s.proposals > 0 ? static_cast<double>(s.accepts) / static_cast<double>(s.proposals) : 0.0);
    out->step_scales.push_back(s.step_scales);
    out->non_evaluable_proposals += s.non_evaluable;
  }
  return std::move(*out);
}

ChainOutput run_chain(const std::vector<SubjectRecord>& dataset, const Hyperpriors& priors,
                      const MCMCConfig& config, const ProgressCallback& progress) {
  if (dataset.empty()) throw InsufficientDataError("dataset has no subjects");
  std::vector<SubjectLikelihood> subjects;
  subjects.reserve(dataset.size());
  for (const auto& s : dataset) {
    s.validate();
    if (s.observations.size() < 2)
      throw InsufficientDataError("subject " + s.id + " needs at least two observations");
    subjects.push_back(make_subject_likelihood(s));
  }
  return run_chain(subjects, priors, config, progress);
}

}  // namespace hivdyn
