#pragma once

// Comma-delimited study files, chain persistence and plot-ready outputs.
//
// Input schemas (one header row; '#' lines are comments; empty field means
// missing):
//   viral load   subject_id,day,log10_vl        (or copies_per_ml with raw_copies)
//   pk           subject_id,drug,cmin
//   adherence    subject_id,drug,interval_start_day,interval_end_day,rate
//   ic50         subject_id,drug,i0,ir,tr
//   baseline     subject_id,cd4,age,weight      (optional file)
// Drugs are numbered 1 and 2. The pk and ic50 files may declare their
// concentration unit with a "# unit: <name>" comment; declared units must
// agree. An empty interval_end_day marks a trailing open-ended interval.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hivdyn/analysis.hpp"
#include "hivdyn/cohort.hpp"
#include "hivdyn/mcmc.hpp"
#include "hivdyn/subject.hpp"
#include "hivdyn/summary.hpp"

namespace hivdyn {

namespace fs = std::filesystem;

struct DatasetPaths {
  fs::path viral_load;
  fs::path pk;
  fs::path adherence;
  fs::path ic50;
  std::optional<fs::path> baseline;

  // Standard file names inside a directory; baseline.csv is used if present.
  static DatasetPaths in_directory(const fs::path& dir);
};

struct LoadOptions {
  bool raw_copies = false;  // viral-load column holds copies/mL
};

struct Rejection {
  std::string subject_id;
  std::string reason;
};

struct LoadedDataset {
  std::vector<SubjectRecord> subjects;
  std::vector<Rejection> rejections;
  std::string concentration_unit;  // empty when undeclared
};

LoadedDataset load_dataset(const DatasetPaths& paths, const LoadOptions& options = {});

void write_dataset(const std::vector<SubjectRecord>& subjects, const DatasetPaths& paths,
                   const std::string& concentration_unit = "ng/mL");

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Chain layout inside `dir`:
//   population.csv         one retained draw per row
//   subjects/<id>.csv      per-subject draws
//   sampler.csv            acceptance rates and frozen step scales
void write_chain(const ChainOutput& chain, const fs::path& dir);
ChainOutput read_chain(const fs::path& dir);

void write_truth(const std::vector<SubjectRecord>& subjects,
                 const std::vector<DynamicParams>& truth, const fs::path& path);

// Columns day,fitted_log10_vl,gamma,e_c for one subject. A failed model
// evaluation leaves the fitted column empty instead of aborting.
void write_trajectory(const SubjectRecord& subject, const DynamicParams& theta,
                      const std::vector<double>& grid, const fs::path& path);

// Log-scale posterior mean of each subject's parameters, keyed by id.
std::map<std::string, DynamicParams> posterior_mean_params(const ChainOutput& chain);

void write_population_table(const ChainSummary& summary, const fs::path& path);
void write_cohort_table(const ChainSummary& summary, const fs::path& path);
void write_subject_table(const ChainSummary& summary, const fs::path& path);
std::vector<FittedSubject> read_subject_table(const fs::path& path);

void write_correlations(const std::vector<CorrelationRow>& rows, const fs::path& path);
void write_group_comparison(const GroupComparison& cmp, const fs::path& path);
void write_statuses(const std::vector<SubjectRecord>& subjects, const fs::path& path);

// Columns day, ic50_1, ic50_2, adherence_1, adherence_2, iq_1, iq_2, gamma.
void write_efficacy_series(const EfficacyInputs& inputs, double phi,
                           const std::vector<double>& grid, const fs::path& path);

}  // namespace hivdyn
