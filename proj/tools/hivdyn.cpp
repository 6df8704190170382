// hivdyn command-line driver: simulate, fit, summarize, analyze, efficacy.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "hivdyn/analysis.hpp"
#include "hivdyn/cohort.hpp"
#include "hivdyn/data_io.hpp"
#include "hivdyn/errors.hpp"
#include "hivdyn/mcmc.hpp"
#include "hivdyn/summary.hpp"

namespace {

using namespace hivdyn;

struct Options {
  std::uint64_t seed = MCMCConfig{}.seed;
  long burn_in = MCMCConfig{}.burn_in;
  long iterations = MCMCConfig{}.post_iterations;
  long thin = MCMCConfig{}.thin;
  unsigned workers = 1;
  std::string out_dir = "hivdyn_out";
  std::string data_dir;
  std::string chain_dir;
  std::string subject_table;
  bool raw_copies = false;

  // simulate
  std::size_t subjects = CohortDesign{}.n_subjects;
  double sigma_error = CohortDesign{}.sigma_error;
  double re_variance = 0.04;
  std::vector<double> mu_true;

  // fit
  double hyper_a = Hyperpriors::defaults().a;
  double hyper_b = Hyperpriors::defaults().b;
  double hyper_nu = Hyperpriors::defaults().nu;
  std::vector<double> eta;
  double lambda_diag = 1000.0;
  double omega_diag = 2.0;
  bool prior_only = false;
  double grid_step = 1.0;

  // efficacy
  std::string subject;
  double phi = std::exp(Hyperpriors::defaults().eta[0]);
  double horizon = kStudyEndDay;
};

ParamVector vector_from(const std::vector<double>& v, const char* flag) {
  if (v.size() != static_cast<std::size_t>(kParamCount))
    throw DomainError(std::string(flag) + " needs " + std::to_string(kParamCount) + " values");
  ParamVector out;
  for (int k = 0; k < kParamCount; ++k) out[k] = v[static_cast<std::size_t>(k)];
  return out;
}

Hyperpriors hyperpriors(const Options& o) {
  Hyperpriors h = Hyperpriors::defaults();
  h.a = o.hyper_a;
  h.b = o.hyper_b;
  h.nu = o.hyper_nu;
  if (!o.eta.empty()) h.eta = vector_from(o.eta, "--eta");
  h.lambda = ParamMatrix::Identity() * o.lambda_diag;
  h.omega = ParamMatrix::Identity() * o.omega_diag;
  h.validate();
  return h;
}

MCMCConfig mcmc_config(const Options& o) {
  MCMCConfig c;
  c.seed = o.seed;
  c.burn_in = o.burn_in;
  c.post_iterations = o.iterations;
  c.thin = o.thin;
  c.workers = o.workers;
  c.prior_only = o.prior_only;
  c.validate();
  return c;
}

std::vector<double> day_grid(double end, double step) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor(end / step + 1e-9));
  for (long k = 0; k <= n; ++k) grid.push_back(static_cast<double>(k) * step);
  if (grid.back() < end) grid.push_back(end);
  return grid;
}

LoadedDataset load(const Options& o) {
  if (o.data_dir.empty()) throw DomainError("--data-dir is required");
  auto data = load_dataset(DatasetPaths::in_directory(o.data_dir), {o.raw_copies});
  for (const auto& r : data.rejections)
    std::cerr << "rejected " << r.subject_id << ": " << r.reason << '\n';
  return data;
}

void write_fit_summary(const Options& o, const Hyperpriors& h, const MCMCConfig& c,
                       const ChainOutput& chain, const ChainSummary& s, const fs::path& path) {
  std::ofstream out(path);
  out << "seed = " << c.seed << "\nburn_in = " << c.burn_in
      << "\npost_iterations = " << c.post_iterations << "\nthin = " << c.thin
      << "\nworkers = " << c.workers << "\nretained_draws = " << s.draws
      << "\nsubjects = " << chain.subject_ids.size() << "\nhyper_a = " << format_double(h.a)
      << "\nhyper_b = " << format_double(h.b) << "\nhyper_nu = " << format_double(h.nu)
      << "\neta =";
  for (int k = 0; k < kParamCount; ++k) out << ' ' << format_double(h.eta[k]);
  out << "\nlambda_diag = " << format_double(o.lambda_diag)
      << "\nomega_diag = " << format_double(o.omega_diag)
      << "\nprior_only = " << (c.prior_only ? "true" : "false")
      << "\nerror_sd_mean = " << format_double(s.error_sd.mean)
      << "\nerror_sd_lower = " << format_double(s.error_sd.lower)
      << "\nerror_sd_upper = " << format_double(s.error_sd.upper);
  double acc = 0.0;
  for (double a : chain.acceptance_rates) acc += a;
  if (!chain.acceptance_rates.empty())
    out << "\nmean_acceptance = "
        << format_double(acc / static_cast<double>(chain.acceptance_rates.size()));
  out << "\nnon_evaluable_proposals = " << chain.non_evaluable_proposals << '\n';
}

void write_tables(const ChainOutput& chain, const fs::path& dir) {
  const auto s = summarize(chain);
  write_population_table(s, dir / "table_population.csv");
  write_cohort_table(s, dir / "table_cohort.csv");
  write_subject_table(s, dir / "subject_summary.csv");
}

void write_trajectories(const ChainOutput& chain, const std::vector<SubjectRecord>& subjects,
                        double step, const fs::path& dir) {
  const auto means = posterior_mean_params(chain);
  for (const auto& subj : subjects) {
    const auto it = means.find(subj.id);
    if (it == means.end()) continue;
    const double end = std::max(kStudyEndDay, subj.observations.back().day);
    write_trajectory(subj, it->second, day_grid(end, step), dir / "trajectories" / (subj.id + ".csv"));
  }
}

int cmd_simulate(const Options& o) {
  CohortDesign d;
  d.n_subjects = o.subjects;
  d.sigma_error = o.sigma_error;
  d.sigma_true = ParamMatrix::Identity() * o.re_variance;
  if (!o.mu_true.empty()) d.mu_true = vector_from(o.mu_true, "--mu-true");
  const auto cohort = simulate_cohort(d, o.seed);
  const fs::path dir = o.out_dir;
  auto paths = DatasetPaths::in_directory(dir);
  paths.baseline = dir / "baseline.csv";
  write_dataset(cohort.subjects, paths);
  write_truth(cohort.subjects, cohort.truth, dir / "truth.csv");
  std::ofstream meta(dir / "simulate.txt");
  meta << "seed = " << o.seed << "\nsubjects = " << d.n_subjects
       << "\nsigma_error = " << format_double(d.sigma_error)
       << "\nre_variance = " << format_double(o.re_variance) << "\nmu_true =";
  for (int k = 0; k < kParamCount; ++k) meta << ' ' << format_double(d.mu_true[k]);
  meta << '\n';
  std::cout << "simulated " << cohort.subjects.size() << " subjects into " << dir.string() << '\n';
  return 0;
}

int cmd_fit(const Options& o) {
  const auto data = load(o);
  if (data.subjects.empty()) throw InsufficientDataError("no usable subjects in dataset");
  const auto h = hyperpriors(o);
  const auto c = mcmc_config(o);
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  const auto progress = [](long it, long total) {
    std::cerr << "iteration " << it << " / " << total << '\n';
  };
  ChainOutput chain;
  try {
    chain = run_chain(data.subjects, h, c, progress);
  } catch (const ChainAbortedError& e) {
    std::cerr << "chain aborted at iteration " << e.iteration() << ": " << e.what() << '\n';
    std::ofstream(dir / "aborted.txt") << "iteration = " << e.iteration() << "\nreason = "
                                       << e.what() << '\n';
    if (!e.partial().population_draws.empty()) write_chain(e.partial(), dir / "chain");
    return 3;
  }
  write_chain(chain, dir / "chain");
  write_tables(chain, dir);
  write_fit_summary(o, h, c, chain, summarize(chain), dir / "fit_summary.txt");
  write_trajectories(chain, data.subjects, o.grid_step, dir);
  std::cout << "retained " << chain.population_draws.size() << " draws into " << dir.string()
            << '\n';
  return 0;
}

int cmd_summarize(const Options& o) {
  const fs::path dir = o.out_dir;
  const fs::path chain_dir = o.chain_dir.empty() ? dir / "chain" : fs::path(o.chain_dir);
  const auto chain = read_chain(chain_dir);
  fs::create_directories(dir);
  write_tables(chain, dir);
  if (!o.data_dir.empty()) write_trajectories(chain, load(o).subjects, o.grid_step, dir);
  std::cout << "summarized " << chain.population_draws.size() << " draws\n";
  return 0;
}

int cmd_analyze(const Options& o) {
  const auto data = load(o);
  const fs::path dir = o.out_dir;
  const fs::path table =
      o.subject_table.empty() ? dir / "subject_summary.csv" : fs::path(o.subject_table);
  const auto fitted = read_subject_table(table);
  std::vector<BaselineFactors> baselines;
  std::map<std::string, ResponseStatus> statuses;
  for (const auto& s : data.subjects) {
    baselines.push_back(baseline_factors(s));
    statuses[s.id] = classify_response(s);
  }
  fs::create_directories(dir);
  write_correlations(correlate_baseline(fitted, baselines), dir / "correlations.csv");
  write_statuses(data.subjects, dir / "statuses.csv");
  const auto cmp = compare_groups(fitted, statuses);
  write_group_comparison(cmp, dir / "group_comparison.csv");
  std::cout << "success " << cmp.n_success << ", failure " << cmp.n_failure
            << ", excluded missing " << cmp.excluded_missing << '\n';
  return 0;
}

int cmd_efficacy(const Options& o) {
  const auto data = load(o);
  const fs::path dir = fs::path(o.out_dir) / "efficacy";
  const auto grid = day_grid(o.horizon, o.grid_step);
  std::size_t written = 0;
  for (const auto& s : data.subjects) {
    if (!o.subject.empty() && s.id != o.subject) continue;
    write_efficacy_series(s.efficacy, o.phi, grid, dir / (s.id + ".csv"));
    ++written;
  }
  if (!o.subject.empty() && written == 0) throw JoinError("unknown subject " + o.subject);
  std::cout << "wrote " << written << " efficacy series\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viral dynamics simulation and hierarchical Bayesian fitting"};
  app.set_config("--config", "", "Key-value configuration file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--burn-in", o.burn_in, "Burn-in iterations")->capture_default_str();
  app.add_option("--iterations", o.iterations, "Post-burn-in iterations")->capture_default_str();
  app.add_option("--thin", o.thin, "Thinning interval")->capture_default_str();
  app.add_option("--workers", o.workers, "Worker threads for subject updates")
      ->capture_default_str();
  app.add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  app.add_option("--data-dir", o.data_dir, "Directory holding the input CSV files");
  app.add_flag("--raw-copies", o.raw_copies, "Viral-load file holds copies/mL");
  app.add_option("--grid-step", o.grid_step, "Day spacing of output series")
      ->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Simulate a synthetic cohort");
  sim->add_option("--subjects", o.subjects, "Number of subjects")->capture_default_str();
  sim->add_option("--sigma-error", o.sigma_error, "Measurement SD on log10 scale")
      ->capture_default_str();
  sim->add_option("--re-variance", o.re_variance, "Random-effect variance (diagonal)")
      ->capture_default_str();
  sim->add_option("--mu-true", o.mu_true, "Population mean of log parameters (6 values)")
      ->expected(kParamCount);

  auto* fit = app.add_subcommand("fit", "Fit the hierarchical model by MCMC");
  fit->add_option("--hyper-a", o.hyper_a, "Gamma shape of error precision")
      ->capture_default_str();
  fit->add_option("--hyper-b", o.hyper_b, "Gamma scale of error precision")
      ->capture_default_str();
  fit->add_option("--hyper-nu", o.hyper_nu, "Wishart degrees of freedom")->capture_default_str();
  fit->add_option("--eta", o.eta, "Prior mean of mu (6 values)")->expected(kParamCount);
  fit->add_option("--lambda-diag", o.lambda_diag, "Prior covariance diagonal of mu")
      ->capture_default_str();
  fit->add_option("--omega-diag", o.omega_diag, "Wishart scale diagonal")->capture_default_str();
  fit->add_flag("--prior-only", o.prior_only, "Ignore the data and sample the prior");

  auto* sum = app.add_subcommand("summarize", "Rebuild summary tables from a saved chain");
  sum->add_option("--chain-dir", o.chain_dir, "Chain directory (default <out-dir>/chain)");

  auto* ana = app.add_subcommand("analyze", "Baseline correlations and response-group tests");
  ana->add_option("--subject-table", o.subject_table,
                  "Subject summary table (default <out-dir>/subject_summary.csv)");

  auto* eff = app.add_subcommand("efficacy", "Drug efficacy time courses");
  eff->add_option("--subject", o.subject, "Only this subject");
  eff->add_option("--phi", o.phi, "Efficacy scaling phi")->capture_default_str();
  eff->add_option("--horizon", o.horizon, "Last day of the series")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(o);
    if (*fit) return cmd_fit(o);
    if (*sum) return cmd_summarize(o);
    if (*ana) return cmd_analyze(o);
    if (*eff) return cmd_efficacy(o);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
