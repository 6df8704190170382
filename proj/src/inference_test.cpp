#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hivdyn/cohort.hpp"
#include "hivdyn/errors.hpp"
#include "hivdyn/mcmc.hpp"
#include "hivdyn/model.hpp"
#include "hivdyn/samplers.hpp"
#include "hivdyn/summary.hpp"
#include "oracles.hpp"

using namespace hivdyn;

namespace {

EfficacyInputs steady_inputs() {
  EfficacyInputs in;
  in.drugs[0] = {80.0, {8.0, 8.0, std::nullopt}, AdherenceProfile::full(168.0)};
  in.drugs[1] = {50.0, {5.0, 20.0, 84.0}, AdherenceProfile::full(168.0)};
  return in;
}

// A subject whose observations are exact model predictions plus offsets.
SubjectRecord exact_subject(const DynamicParams& theta, const std::vector<double>& days,
                            const std::vector<double>& offsets, double baseline_vl = 5e4) {
  SubjectRecord s;
  s.id = "X";
  s.efficacy = steady_inputs();
  const auto pred = predict_log10_viral_load(theta, s.efficacy, baseline_vl, days);
  for (std::size_t j = 0; j < days.size(); ++j)
    s.observations.push_back({days[j], pred[j] + (j < offsets.size() ? offsets[j] : 0.0)});
  return s;
}

DynamicParams eta_params() { return to_params(Hyperpriors::defaults().eta); }

// Subject whose residuals are those of a linear model y_j = theta_0 + e_j.
SubjectLikelihood linear_subject(std::string id, std::vector<double> y) {
  const std::size_t m = y.size();
  return {std::move(id), m, [y = std::move(y)](const ParamVector& th) {
            double s = 0.0;
            for (double v : y) s += (v - th[0]) * (v - th[0]);
            return s;
          }};
}

}  // namespace

TEST_SUITE("likelihood") {
  TEST_CASE("zero residuals") {
    const auto theta = eta_params();
    const auto s = exact_subject(theta, {0, 7, 14, 28, 56}, {});
    CHECK(informative_observation_count(s) == 4);
    CHECK(residual_sum_of_squares(theta, s) < 1e-20);
    const double prec = 3.0;
    CHECK(log_likelihood_subject(theta, s, prec) ==
          doctest::Approx(4 * 0.5 * std::log(prec / (2 * std::numbers::pi))).epsilon(1e-12));
  }

  TEST_CASE("single residual of 2 at unit precision") {
    const auto theta = eta_params();
    const auto s = exact_subject(theta, {0, 7}, {0.0, 2.0});
    CHECK(log_likelihood_subject(theta, s, 1.0) ==
          doctest::Approx(-0.5 * std::log(2 * std::numbers::pi) - 2.0).epsilon(1e-12));
  }

  TEST_CASE("matches a Gaussian density oracle") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 5; ++rep) {
      ParamVector v = Hyperpriors::defaults().eta;
      for (int k = 0; k < kParamCount; ++k) v[k] += 0.2 * n01(rng);
      const auto theta = to_params(v);
      const std::vector<double> days = {0, 7, 14, 28, 56, 84, 112, 140, 168};
      std::vector<double> noise = {0.0};
      for (std::size_t j = 1; j < days.size(); ++j) noise.push_back(0.3 * n01(rng));
      const auto s = exact_subject(theta, days, noise);
      const double prec = 0.5 + std::abs(n01(rng)) * 10;
      const auto pred = predict_log10_viral_load(theta, s.efficacy,
                                                 std::pow(10.0, s.baseline_log10_vl()), days);
      double ref = 0.0;
      for (std::size_t j = 1; j < days.size(); ++j) {
        const double sd = 1.0 / std::sqrt(prec);
        const double z = (s.observations[j].log10_vl - pred[j]) / sd;
        ref += -0.5 * z * z - std::log(sd * std::sqrt(2 * std::numbers::pi));
      }
      CHECK(std::abs(log_likelihood_subject(theta, s, prec) - ref) < 1e-10);
    }
  }

  TEST_CASE("log target terms") {
    const auto theta = eta_params();
    const auto s = exact_subject(theta, {0, 7, 14}, {});
    PopulationState pop{to_vector(theta), ParamMatrix::Identity(), 2.0};
    CHECK(std::abs(log_target_theta(theta, s, pop)) < 1e-12);
    pop.mu[0] -= 1.0;
    CHECK(log_target_theta(theta, s, pop) == doctest::Approx(-0.5).epsilon(1e-10));
  }

  TEST_CASE("log target equals likelihood plus prior quadratic") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 5; ++rep) {
      const auto theta = eta_params();
      const auto s = exact_subject(theta, {0, 7, 14, 28}, {0.0, 0.2, -0.1, 0.3});
      ParamMatrix a = ParamMatrix::Random();
      PopulationState pop;
      pop.sigma_inv = a * a.transpose() + ParamMatrix::Identity();
      pop.mu = to_vector(theta);
      for (int k = 0; k < kParamCount; ++k) pop.mu[k] += n01(rng);
      pop.error_prec = 1.0 + std::abs(n01(rng));
      const ParamVector d = to_vector(theta) - pop.mu;
      const double m = 3.0;
      const double expected = log_likelihood_subject(theta, s, pop.error_prec) -
                              m * 0.5 * std::log(pop.error_prec / (2 * std::numbers::pi)) -
                              0.5 * d.dot(pop.sigma_inv * d);
      CHECK(log_target_theta(theta, s, pop) == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  TEST_CASE("non-evaluable parameters give minus infinity") {
    const auto s = exact_subject(eta_params(), {0, 7}, {});
    const PopulationState pop{Hyperpriors::defaults().eta, ParamMatrix::Identity(), 1.0};
    CHECK(log_target_from_ssr(std::numeric_limits<double>::infinity(), pop.mu, pop) ==
          -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(log_likelihood_subject(eta_params(), s, 0.0), DomainError);
  }
}

TEST_SUITE("gibbs samplers") {
  TEST_CASE("error precision moments") {
    const auto pri = Hyperpriors::defaults();
    struct Case {
      double ssr, m;
    };
    for (const auto& c : {Case{50.0, 378.0}, Case{0.0, 0.0}}) {
      auto rng = make_rng(1, static_cast<std::uint64_t>(c.m) + 1);
      std::vector<double> x(1000000);
      for (auto& v : x) v = sample_error_precision(c.ssr, c.m, pri, rng);
      const double shape = pri.a + c.m / 2, scale = 1.0 / (1.0 / pri.b + c.ssr / 2);
      const auto mo = oracle::moments(x);
      CHECK(std::abs(mo.mean - shape * scale) < 4 * mo.mcse_mean);
      CHECK(std::abs(mo.var - shape * scale * scale) < 4 * mo.mcse_var);
      CHECK(*std::min_element(x.begin(), x.end()) > 0.0);
    }
  }

  TEST_CASE("population mean, single subject") {
    Hyperpriors pri = Hyperpriors::defaults();
    pri.eta = ParamVector::Zero();
    pri.lambda = ParamMatrix::Identity();
    ParamVector theta;
    theta << 1.0, -2.0, 0.5, 3.0, 0.0, -1.0;
    const std::vector<ParamVector> thetas = {theta};
    auto rng = make_rng(2, 0);
    const int n = 100000;
    std::vector<std::vector<double>> draws(kParamCount, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
      const auto mu = sample_population_mean(thetas, ParamMatrix::Identity(), pri, rng);
      for (int k = 0; k < kParamCount; ++k) draws[k][i] = mu[k];
    }
    for (int k = 0; k < kParamCount; ++k) {
      const auto mo = oracle::moments(draws[k]);
      CHECK(std::abs(mo.mean - theta[k] / 2) < 4 * mo.mcse_mean);
      CHECK(std::abs(mo.var - 0.5) < 4 * mo.mcse_var);
    }
  }

  TEST_CASE("population mean covariance entries") {
    const auto pri = Hyperpriors::defaults();
    auto rng = make_rng(3, 0);
    std::normal_distribution<double> n01;
    std::vector<ParamVector> thetas(20);
    for (auto& t : thetas)
      for (int k = 0; k < kParamCount; ++k) t[k] = n01(rng);
    ParamMatrix a = ParamMatrix::Random() * 0.5;
    const ParamMatrix sigma_inv = a * a.transpose() + ParamMatrix::Identity() * 2.0;
    const ParamMatrix cov =
        (20.0 * sigma_inv + pri.lambda.inverse()).inverse();
    const ParamVector mean =
        cov * (sigma_inv * std::accumulate(thetas.begin(), thetas.end(), ParamVector::Zero().eval()) +
               pri.lambda.inverse() * pri.eta);
    const int n = 100000;
    std::vector<ParamVector> d(n);
    for (auto& v : d) v = sample_population_mean(thetas, sigma_inv, pri, rng);
    for (int r = 0; r < kParamCount; ++r)
      for (int c = r; c < kParamCount; ++c) {
        std::vector<double> prod(n);
        for (int i = 0; i < n; ++i) prod[i] = (d[i][r] - mean[r]) * (d[i][c] - mean[c]);
        const auto mo = oracle::moments(prod);
        CAPTURE(r);
        CAPTURE(c);
        CHECK(std::abs(mo.mean - cov(r, c)) < 4 * mo.mcse_mean);
      }
  }

  TEST_CASE("flat prior mean approaches the sample mean") {
    const auto pri = Hyperpriors::defaults();
    auto rng = make_rng(4, 0);
    std::normal_distribution<double> n01;
    std::vector<ParamVector> thetas(500);
    ParamVector sum = ParamVector::Zero();
    for (auto& t : thetas) {
      for (int k = 0; k < kParamCount; ++k) t[k] = 2.0 + n01(rng);
      sum += t;
    }
    const ParamVector xbar = sum / 500.0;
    ParamVector acc = ParamVector::Zero();
    const int n = 20000;
    for (int i = 0; i < n; ++i)
      acc += sample_population_mean(thetas, ParamMatrix::Identity(), pri, rng);
    // draw SD is 1/sqrt(500); the mean of n draws has SD 1/sqrt(500 n)
    for (int k = 0; k < kParamCount; ++k)
      CHECK(std::abs(acc[k] / n - xbar[k]) < 4.0 / std::sqrt(500.0 * n) + 1e-4);
  }

  TEST_CASE("population precision is Wishart") {
    const auto pri = Hyperpriors::defaults();
    auto rng = make_rng(5, 0);
    const ParamVector mu = pri.eta;
    const std::vector<ParamVector> thetas(10, mu);
    const double df = 10.0 + pri.nu;
    const int n = 100000;
    std::vector<ParamMatrix> d(n);
    for (auto& w : d) {
      w = sample_population_precision(thetas, mu, pri, rng);
      Eigen::LLT<ParamMatrix> llt(w);
      REQUIRE(llt.info() == Eigen::Success);
      REQUIRE(w.isApprox(w.transpose(), 0.0));
    }
    for (int r = 0; r < kParamCount; ++r)
      for (int c = r; c < kParamCount; ++c) {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = d[i](r, c);
        const auto mo = oracle::moments(x);
        CHECK(std::abs(mo.mean - df * pri.omega(r, c)) < 4 * mo.mcse_mean);
      }
  }

  TEST_CASE("wishart with general scale") {
    auto rng = make_rng(6, 0);
    Eigen::MatrixXd s(3, 3);
    s << 2.0, 0.3, -0.2, 0.3, 1.0, 0.1, -0.2, 0.1, 0.5;
    const double df = 7.0;
    const int n = 100000;
    std::vector<Eigen::MatrixXd> d(n);
    for (auto& w : d) w = sample_wishart(s, df, rng);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = d[i](r, c);
        const auto mo = oracle::moments(x);
        CHECK(std::abs(mo.mean - df * s(r, c)) < 4 * mo.mcse_mean);
        // Var W_rc = df (s_rc^2 + s_rr s_cc)
        CHECK(std::abs(mo.var - df * (s(r, c) * s(r, c) + s(r, r) * s(c, c))) < 4 * mo.mcse_var);
      }
    CHECK_THROWS_AS(sample_wishart(-s, df, rng), LinearAlgebraError);
    CHECK_THROWS_AS(sample_wishart(s, 1.0, rng), DomainError);
  }

  TEST_CASE("mvn from precision rejects indefinite input") {
    auto rng = make_rng(7, 0);
    Eigen::MatrixXd p = -Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(sample_mvn_from_precision(Eigen::VectorXd::Zero(2), p, rng),
                    LinearAlgebraError);
  }

  TEST_CASE("rng streams") {
    auto a = make_rng(1, stream_key("S001"));
    auto b = make_rng(1, stream_key("S001"));
    auto c = make_rng(1, stream_key("S002"));
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(stream_key("S001") != stream_key("S002"));
  }
}

TEST_SUITE("metropolis-hastings") {
  TEST_CASE("non-evaluable proposals are rejected") {
    SubjectLikelihood bad{"B", 3, [](const ParamVector& th) {
                            return th[0] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
                          }};
    const PopulationState pop{ParamVector::Zero(), ParamMatrix::Identity(), 1.0};
    SubjectState st;
    st.theta = ParamVector::Constant(-10.0);
    st.theta[0] = 1e-9;  // every proposal with theta_0 > 0 is non-evaluable
    st.ssr = 0.0;
    st.step_scales = ParamVector::Zero();
    st.step_scales[0] = 1e-12;
    auto rng = make_rng(1, 1);
    st.theta[0] = 1.0;
    for (int i = 0; i < 200; ++i) CHECK_FALSE(mh_step_theta(st, bad, pop, rng));
    CHECK(st.non_evaluable == 200);
    CHECK(st.accepts == 0);
    CHECK(st.theta[0] == 1.0);
  }

  TEST_CASE("zero-width proposals are accepted without change") {
    const auto lik = linear_subject("L", {0.5, 1.5});
    const PopulationState pop{ParamVector::Zero(), ParamMatrix::Identity(), 1.0};
    SubjectState st;
    st.theta = ParamVector::Constant(0.3);
    st.ssr = lik.residual_ss(st.theta);
    st.step_scales = ParamVector::Zero();
    auto rng = make_rng(2, 1);
    for (int i = 0; i < 100; ++i) CHECK(mh_step_theta(st, lik, pop, rng));
    CHECK(st.theta == ParamVector::Constant(0.3));
  }

  TEST_CASE("conjugate surrogate marginal") {
    // y_j = theta_0 + e, prior theta_0 ~ N(mu_0, 1/s0): posterior is normal.
    const std::vector<double> y = {1.2, 0.7, 1.9, 1.4};
    const auto lik = linear_subject("C", y);
    PopulationState pop{ParamVector::Zero(), ParamMatrix::Identity() * 2.0, 3.0};
    pop.mu[0] = 0.4;
    const double post_prec = 4 * pop.error_prec + 2.0;
    const double post_mean = (pop.error_prec * (1.2 + 0.7 + 1.9 + 1.4) + 2.0 * 0.4) / post_prec;
    SubjectState st;
    st.theta = pop.mu;
    st.ssr = lik.residual_ss(st.theta);
    st.step_scales = ParamVector::Constant(0.6);
    auto rng = make_rng(3, 1);
    for (int i = 0; i < 5000; ++i) mh_step_theta(st, lik, pop, rng);
    std::vector<double> draws;
    for (int i = 0; i < 1000000; ++i) {
      mh_step_theta(st, lik, pop, rng);
      if (i % 10 == 0) draws.push_back(st.theta[0]);
    }
    const double ks = oracle::ks_distance(draws, [&](double x) {
      return oracle::normal_cdf(x, post_mean, 1.0 / std::sqrt(post_prec));
    });
    CHECK(ks < 0.02);
  }
}

TEST_SUITE("run_chain") {
  std::vector<SubjectLikelihood> linear_cohort() {
    std::vector<SubjectLikelihood> s;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 8; ++i) {
      std::vector<double> y;
      const double t = 4.0 + 0.3 * n01(rng);
      for (int j = 0; j < 6; ++j) y.push_back(t + 0.2 * n01(rng));
      s.push_back(linear_subject("L" + std::to_string(i), y));
    }
    return s;
  }

  MCMCConfig short_config(unsigned workers = 1) {
    MCMCConfig c;
    c.burn_in = 400;
    c.post_iterations = 600;
    c.thin = 3;
    c.seed = 99;
    c.workers = workers;
    return c;
  }

  bool same(const ChainOutput& a, const ChainOutput& b) {
    if (a.population_draws.size() != b.population_draws.size()) return false;
    for (std::size_t k = 0; k < a.population_draws.size(); ++k) {
      const auto &x = a.population_draws[k], &y = b.population_draws[k];
      if (x.mu != y.mu || x.sigma_inv != y.sigma_inv || x.error_prec != y.error_prec) return false;
    }
    return a.subject_ids == b.subject_ids && a.subject_draws == b.subject_draws &&
           a.acceptance_rates == b.acceptance_rates;
  }

  TEST_CASE("schedule and retained draws") {
    const auto out = run_chain(linear_cohort(), Hyperpriors::defaults(), short_config());
    CHECK(out.population_draws.size() == 200);
    CHECK(out.subject_draws.front().size() == 200);
    CHECK(out.iterations_completed == 1000);
    for (double r : out.acceptance_rates) {
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
    MCMCConfig d;
    CHECK(d.retained_draws() == 24000);
  }

  TEST_CASE("determinism across runs, workers and subject order") {
    const auto pri = Hyperpriors::defaults();
    const auto base = run_chain(linear_cohort(), pri, short_config(1));
    CHECK(same(base, run_chain(linear_cohort(), pri, short_config(1))));
    CHECK(same(base, run_chain(linear_cohort(), pri, short_config(3))));
    auto shuffled = linear_cohort();
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(same(base, run_chain(shuffled, pri, short_config(2))));
    auto other = short_config();
    other.seed = 100;
    CHECK_FALSE(same(base, run_chain(linear_cohort(), pri, other)));
  }

  TEST_CASE("prior-only error precision recovers the Gamma prior") {
    auto c = short_config();
    c.burn_in = 100;
    c.post_iterations = 200000;
    c.thin = 2;
    c.prior_only = true;
    const auto pri = Hyperpriors::defaults();
    const auto out = run_chain(linear_cohort(), pri, c);
    std::vector<double> prec;
    for (const auto& d : out.population_draws) prec.push_back(d.error_prec);
    const auto mo = oracle::moments(prec);
    CHECK(std::abs(mo.mean - pri.a * pri.b) < 4 * mo.mcse_mean);
    CHECK(std::abs(mo.var - pri.a * pri.b * pri.b) < 4 * mo.mcse_var);
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(run_chain(std::vector<SubjectLikelihood>{}, Hyperpriors::defaults(), short_config()),
                    InsufficientDataError);
    auto dup = linear_cohort();
    dup[1].id = dup[0].id;
    CHECK_THROWS_AS(run_chain(dup, Hyperpriors::defaults(), short_config()), DomainError);
    auto c = short_config();
    c.thin = 0;
    CHECK_THROWS_AS(run_chain(linear_cohort(), Hyperpriors::defaults(), c), DomainError);
    SubjectRecord one;
    one.id = "A";
    one.efficacy = steady_inputs();
    one.observations = {{0.0, 4.0}};
    CHECK_THROWS_AS(run_chain(std::vector<SubjectRecord>{one}, Hyperpriors::defaults(), c),
                    Error);
  }

  TEST_CASE("noise-free data started at truth stays near truth") {
    CohortDesign d;
    d.n_subjects = 4;
    d.sigma_error = 0.0;
    d.observation_days.clear();
    for (int day = 0; day <= 168; day += 2) d.observation_days.push_back(day);
    const auto cohort = simulate_cohort(d, 17);
    MCMCConfig c;
    c.burn_in = 3000;
    c.post_iterations = 1000;
    c.thin = 2;
    for (std::size_t i = 0; i < cohort.subjects.size(); ++i)
      c.initial_thetas[cohort.subjects[i].id] = to_vector(cohort.truth[i]);
    const auto out = run_chain(cohort.subjects, Hyperpriors::defaults(), c);
    for (std::size_t i = 0; i < out.subject_ids.size(); ++i) {
      const auto truth = to_vector(cohort.truth[i]);
      ParamVector med;
      for (int k = 0; k < kParamCount; ++k) {
        std::vector<double> x;
        for (const auto& v : out.subject_draws[i]) x.push_back(v[k]);
        med[k] = quantile(x, 0.5);
        CAPTURE(i);
        CAPTURE(k);
        CHECK(std::abs(med[k] - truth[k]) < 0.2);
      }
      const auto& subj = cohort.subjects[i];
      const double rms = std::sqrt(residual_sum_of_squares(to_params(med), subj) /
                                   static_cast<double>(informative_observation_count(subj)));
      CHECK(rms < 0.05);
      CHECK(out.acceptance_rates[i] >= 0.15);
      CHECK(out.acceptance_rates[i] <= 0.50);
    }
  }
}

TEST_SUITE("summary") {
  TEST_CASE("constant chain") {
    const std::vector<double> x(100, 2.5);
    const auto s = summarize_sample(x);
    CHECK(s.mean == 2.5);
    CHECK(s.lower == 2.5);
    CHECK(s.upper == 2.5);
  }

  TEST_CASE("coefficient of variation") {
    // values with mean 4.827 and SD 0.878
    const double m = 4.827, sd = 0.878;
    const std::vector<double> x = {m - sd / std::sqrt(2.0) * std::sqrt(2.0), m, m + sd};
    const auto d = describe(x);
    CHECK(d.mean == doctest::Approx(m));
    CHECK(d.sd == doctest::Approx(sd));
    CHECK(d.cv_percent == doctest::Approx(18.19).epsilon(1e-3));
    CHECK(std::round(d.cv_percent * 10) / 10 == doctest::Approx(18.2));
    CHECK(d.min == doctest::Approx(m - sd));
    CHECK(d.median == m);
    CHECK(d.max == doctest::Approx(m + sd));
  }

  TEST_CASE("normal quantiles") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n01;
    std::vector<double> x(1000000);
    for (auto& v : x) v = n01(rng);
    const auto s = summarize_sample(x);
    CHECK(std::abs(s.lower + 1.96) < 0.01);
    CHECK(std::abs(s.upper - 1.96) < 0.01);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.0) == 1.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 1.0) == 4.0);
  }

  TEST_CASE("chain summary uses the natural scale") {
    ChainOutput c;
    c.subject_ids = {"A", "B"};
    ParamVector v = ParamVector::Constant(std::log(2.0));
    c.population_draws = {{1, v, ParamMatrix::Identity(), 4.0}, {2, v, ParamMatrix::Identity(), 4.0}};
    c.subject_draws = {{v, v}, {v * 2.0, v * 2.0}};
    const auto s = summarize(c);
    CHECK(s.draws == 2);
    CHECK(s.population[0].mean == doctest::Approx(2.0));
    CHECK(s.error_sd.mean == doctest::Approx(0.5));
    CHECK(s.subjects[1].params[3].mean == doctest::Approx(4.0));
    CHECK(s.across_subjects[0].max == doctest::Approx(4.0));
    CHECK(s.across_subjects[0].min == doctest::Approx(2.0));
  }
}
