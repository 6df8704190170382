#include "hivdyn/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hivdyn/errors.hpp"
#include "hivdyn/ode_core.hpp"

namespace hivdyn {

namespace {

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
  std::map<std::string, std::string> meta;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(file, 1, "missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// "# key: value" or "# key=value"
void parse_meta(const std::string& comment, std::map<std::string, std::string>& meta) {
  const std::string body = trim(comment.substr(1));
  const auto pos = body.find_first_of(":=");
  if (pos == std::string::npos) return;
  meta[trim(body.substr(0, pos))] = trim(body.substr(pos + 1));
}

CsvTable read_csv(const fs::path& path, const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CsvTable t;
  t.file = path.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      parse_meta(s, t.meta);
      continue;
    }
    auto fields = split(s);
    if (t.header.empty()) {
      t.header = std::move(fields);
      for (const auto& r : required)
        if (std::find(t.header.begin(), t.header.end(), r) == t.header.end())
          throw ParseError(t.file, lineno, "header lacks column " + r);
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError(t.file, lineno,
                       "expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    t.rows.push_back({lineno, std::move(fields)});
  }
  return t;
}

std::optional<double> parse_optional(const CsvTable& t, const CsvRow& row, std::size_t col) {
  const std::string& s = row.fields[col];
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(t.file, row.line, "not a number: '" + s + "'");
  return v;
}

double parse_required(const CsvTable& t, const CsvRow& row, std::size_t col) {
  const auto v = parse_optional(t, row, col);
  if (!v) throw ParseError(t.file, row.line, "missing value in column " + t.header[col]);
  return *v;
}

int parse_drug(const CsvTable& t, const CsvRow& row, std::size_t col) {
  const std::string& s = row.fields[col];
  if (s == "1") return 0;
  if (s == "2") return 1;
  throw ParseError(t.file, row.line, "drug must be 1 or 2, found '" + s + "'");
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

struct AdherenceRow {
  double start;
  std::optional<double> end;
  double rate;
  std::size_t line;
};

AdherenceProfile build_adherence(const CsvTable& t, std::vector<AdherenceRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  AdherenceProfile p;
  if (rows.front().start != 0.0)
    throw ParseError(t.file, rows.front().line, "adherence intervals must start at day 0");
  p.visit_times.push_back(0.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (k > 0 && r.start != p.visit_times.back())
      throw ParseError(t.file, r.line, "adherence intervals are not contiguous");
    p.rates.push_back(r.rate);
    if (r.end) {
      if (!(*r.end > r.start)) throw ParseError(t.file, r.line, "empty adherence interval");
      p.visit_times.push_back(*r.end);
    } else if (k + 1 != rows.size()) {
      throw ParseError(t.file, r.line, "only the last adherence interval may be open-ended");
    }
  }
  return p;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

DatasetPaths DatasetPaths::in_directory(const fs::path& dir) {
  DatasetPaths p{dir / "viral_load.csv", dir / "pk.csv", dir / "adherence.csv", dir / "ic50.csv",
                 std::nullopt};
  if (fs::exists(dir / "baseline.csv")) p.baseline = dir / "baseline.csv";
  return p;
}

LoadedDataset load_dataset(const DatasetPaths& paths, const LoadOptions& options) {
  LoadedDataset out;
  const std::string vl_col = options.raw_copies ? "copies_per_ml" : "log10_vl";

  const auto vl = read_csv(paths.viral_load, {"subject_id", "day", vl_col});
  std::vector<SubjectRecord> subjects;
  std::map<std::string, std::size_t> index;
  {
    const auto c_id = vl.header.empty() ? 0 : vl.column("subject_id");
    const auto c_day = vl.header.empty() ? 0 : vl.column("day");
    const auto c_val = vl.header.empty() ? 0 : vl.column(vl_col);
    for (const auto& row : vl.rows) {
      const std::string& id = row.fields[c_id];
      if (id.empty()) throw ParseError(vl.file, row.line, "empty subject id");
      auto [it, inserted] = index.emplace(id, subjects.size());
      if (inserted) subjects.push_back(SubjectRecord{id, {}, {}, {}});
      const double day = parse_required(vl, row, c_day);
      const auto value = parse_optional(vl, row, c_val);
      if (!value) continue;  // missing at random: dropped
      double y = *value;
      if (options.raw_copies) {
        if (!(y > 0.0)) throw ParseError(vl.file, row.line, "copies/mL must be positive");
        y = std::log10(y);
      }
      subjects[it->second].observations.push_back({day, y});
    }
  }
  for (auto& s : subjects)
    std::stable_sort(s.observations.begin(), s.observations.end(),
                     [](const auto& a, const auto& b) { return a.day < b.day; });

  auto lookup = [&](const CsvTable& t, const CsvRow& row, std::size_t col) -> std::size_t {
    const auto it = index.find(row.fields[col]);
    if (it == index.end())
      throw JoinError(t.file + ":" + std::to_string(row.line) + ": unknown subject '" +
                      row.fields[col] + "'");
    return it->second;
  };

  using Seen = std::vector<std::array<bool, kDrugCount>>;
  Seen has_pk(subjects.size(), {false, false});
  Seen has_ic50(subjects.size(), {false, false});

  const auto pk = read_csv(paths.pk, {"subject_id", "drug", "cmin"});
  if (!pk.rows.empty()) {
    const auto c_id = pk.column("subject_id"), c_drug = pk.column("drug"),
               c_cmin = pk.column("cmin");
    for (const auto& row : pk.rows) {
      const auto i = lookup(pk, row, c_id);
      const int d = parse_drug(pk, row, c_drug);
      if (has_pk[i][d]) throw ParseError(pk.file, row.line, "duplicate pk row");
      subjects[i].efficacy.drugs[d].cmin = parse_required(pk, row, c_cmin);
      has_pk[i][d] = true;
    }
  }

  const auto ic = read_csv(paths.ic50, {"subject_id", "drug", "i0", "ir", "tr"});
  if (!ic.rows.empty()) {
    const auto c_id = ic.column("subject_id"), c_drug = ic.column("drug"),
               c_i0 = ic.column("i0"), c_ir = ic.column("ir"), c_tr = ic.column("tr");
    for (const auto& row : ic.rows) {
      const auto i = lookup(ic, row, c_id);
      const int d = parse_drug(ic, row, c_drug);
      if (has_ic50[i][d]) throw ParseError(ic.file, row.line, "duplicate ic50 row");
      auto& p = subjects[i].efficacy.drugs[d].ic50;
      p.i0 = parse_required(ic, row, c_i0);
      p.ir = parse_required(ic, row, c_ir);
      p.tr = parse_optional(ic, row, c_tr);
      has_ic50[i][d] = true;
    }
  }

  const auto pk_unit = pk.meta.count("unit") ? pk.meta.at("unit") : std::string();
  const auto ic_unit = ic.meta.count("unit") ? ic.meta.at("unit") : std::string();
  if (!pk_unit.empty() && !ic_unit.empty() && pk_unit != ic_unit)
    throw ParseError(ic.file, 1, "concentration unit '" + ic_unit + "' differs from pk unit '" +
                                     pk_unit + "'");
  out.concentration_unit = pk_unit.empty() ? ic_unit : pk_unit;

  const auto ad = read_csv(
      paths.adherence, {"subject_id", "drug", "interval_start_day", "interval_end_day", "rate"});
  std::vector<std::array<std::vector<AdherenceRow>, kDrugCount>> ad_rows(subjects.size());
  if (!ad.rows.empty()) {
    const auto c_id = ad.column("subject_id"), c_drug = ad.column("drug"),
               c_start = ad.column("interval_start_day"), c_end = ad.column("interval_end_day"),
               c_rate = ad.column("rate");
    for (const auto& row : ad.rows) {
      const auto i = lookup(ad, row, c_id);
      const int d = parse_drug(ad, row, c_drug);
      const double rate = parse_required(ad, row, c_rate);
      if (!(rate >= 0.0 && rate <= 1.0))
        throw ParseError(ad.file, row.line, "adherence rate outside [0, 1]");
      ad_rows[i][d].push_back(
          {parse_required(ad, row, c_start), parse_optional(ad, row, c_end), rate, row.line});
    }
  }

  if (paths.baseline) {
    const auto bl = read_csv(*paths.baseline, {"subject_id", "cd4", "age", "weight"});
    if (!bl.rows.empty()) {
      const auto c_id = bl.column("subject_id"), c_cd4 = bl.column("cd4"),
                 c_age = bl.column("age"), c_w = bl.column("weight");
      for (const auto& row : bl.rows) {
        auto& b = subjects[lookup(bl, row, c_id)].baselines;
        b.cd4 = parse_optional(bl, row, c_cd4);
        b.age = parse_optional(bl, row, c_age);
        b.weight = parse_optional(bl, row, c_w);
      }
    }
  }

  for (std::size_t i = 0; i < subjects.size(); ++i) {
    auto& s = subjects[i];
    std::vector<std::string> missing;
    for (int d = 0; d < kDrugCount; ++d) {
      const std::string tag = " (drug " + std::to_string(d + 1) + ")";
      if (!has_pk[i][d]) missing.push_back("pk" + tag);
      if (!has_ic50[i][d]) missing.push_back("ic50" + tag);
      if (ad_rows[i][d].empty()) missing.push_back("adherence" + tag);
    }
    if (!missing.empty()) {
      std::string reason = "missing";
      for (std::size_t k = 0; k < missing.size(); ++k) reason += (k ? ", " : " ") + missing[k];
      out.rejections.push_back({s.id, reason});
      continue;
    }
    for (int d = 0; d < kDrugCount; ++d)
      s.efficacy.drugs[d].adherence = build_adherence(ad, ad_rows[i][d]);
    try {
      s.validate();
    } catch (const Error& e) {
      out.rejections.push_back({s.id, e.what()});
      continue;
    }
    out.subjects.push_back(std::move(s));
  }
  return out;
}

void write_dataset(const std::vector<SubjectRecord>& subjects, const DatasetPaths& paths,
                   const std::string& unit) {
  {
    auto out = open_out(paths.viral_load);
    out << "subject_id,day,log10_vl\n";
    for (const auto& s : subjects)
      for (const auto& o : s.observations)
        out << s.id << ',' << format_double(o.day) << ',' << format_double(o.log10_vl) << '\n';
    finish(out, paths.viral_load);
  }
  {
    auto out = open_out(paths.pk);
    out << "# unit: " << unit << "\nsubject_id,drug,cmin\n";
    for (const auto& s : subjects)
      for (int d = 0; d < kDrugCount; ++d)
        out << s.id << ',' << d + 1 << ',' << format_double(s.efficacy.drugs[d].cmin) << '\n';
    finish(out, paths.pk);
  }
  {
    auto out = open_out(paths.ic50);
    out << "# unit: " << unit << "\nsubject_id,drug,i0,ir,tr\n";
    for (const auto& s : subjects)
      for (int d = 0; d < kDrugCount; ++d) {
        const auto& p = s.efficacy.drugs[d].ic50;
        out << s.id << ',' << d + 1 << ',' << format_double(p.i0) << ',' << format_double(p.ir)
            << ',' << opt(p.tr) << '\n';
      }
    finish(out, paths.ic50);
  }
  {
    auto out = open_out(paths.adherence);
    out << "subject_id,drug,interval_start_day,interval_end_day,rate\n";
    for (const auto& s : subjects)
      for (int d = 0; d < kDrugCount; ++d) {
        const auto& a = s.efficacy.drugs[d].adherence;
        for (std::size_t k = 0; k < a.rates.size(); ++k) {
          out << s.id << ',' << d + 1 << ',' << format_double(a.visit_times[k]) << ','
              << (k + 1 < a.visit_times.size() ? format_double(a.visit_times[k + 1]) : "") << ','
              << format_double(a.rates[k]) << '\n';
        }
      }
    finish(out, paths.adherence);
  }
  if (paths.baseline) {
    auto out = open_out(*paths.baseline);
    out << "subject_id,cd4,age,weight\n";
    for (const auto& s : subjects)
      out << s.id << ',' << opt(s.baselines.cd4) << ',' << opt(s.baselines.age) << ','
          << opt(s.baselines.weight) << '\n';
    finish(out, *paths.baseline);
  }
}

namespace {

const std::array<std::string, kParamCount> kLogColumns = {"log_phi", "log_c",   "log_delta",
                                                          "log_d_T", "log_rho", "log_R0"};

std::string sigma_inv_column(int r, int c) {
  return "sigma_inv_" + std::to_string(r + 1) + "_" + std::to_string(c + 1);
}

void write_param_header(std::ostream& out) {
  for (const auto& c : kLogColumns) out << ',' << c;
  for (const auto& n : kParamNames) out << ',' << n;
}

void write_param_values(std::ostream& out, const ParamVector& v) {
  for (int k = 0; k < kParamCount; ++k) out << ',' << format_double(v[k]);
  for (int k = 0; k < kParamCount; ++k) out << ',' << format_double(std::exp(v[k]));
}

long meta_long(const CsvTable& t, const std::string& key) {
  const auto it = t.meta.find(key);
  if (it == t.meta.end()) throw ParseError(t.file, 1, "missing header field " + key);
  return std::stol(it->second);
}

}  // namespace

void write_chain(const ChainOutput& chain, const fs::path& dir) {
  if (chain.population_draws.empty()) throw InsufficientDataError("chain has no retained draws");
  fs::create_directories(dir / "subjects");
  const std::string seed_line = "# seed=" + std::to_string(chain.seed) + "\n";
  {
    const auto path = dir / "population.csv";
    auto out = open_out(path);
    out << seed_line << "# burn_in=" << chain.burn_in
        << "\n# post_iterations=" << chain.post_iterations << "\n# thin=" << chain.thin << "\n";
    out << "iteration";
    write_param_header(out);
    out << ",error_prec,sigma";
    for (int r = 0; r < kParamCount; ++r)
      for (int c = r; c < kParamCount; ++c) out << ',' << sigma_inv_column(r, c);
    out << '\n';
    for (const auto& d : chain.population_draws) {
      out << d.iteration;
      write_param_values(out, d.mu);
      out << ',' << format_double(d.error_prec) << ',' << format_double(1.0 / std::sqrt(d.error_prec));
      for (int r = 0; r < kParamCount; ++r)
        for (int c = r; c < kParamCount; ++c) out << ',' << format_double(d.sigma_inv(r, c));
      out << '\n';
    }
    finish(out, path);
  }
  for (std::size_t i = 0; i < chain.subject_ids.size(); ++i) {
    const auto path = dir / "subjects" / (chain.subject_ids[i] + ".csv");
    auto out = open_out(path);
    out << seed_line << "# subject_id=" << chain.subject_ids[i] << "\niteration";
    write_param_header(out);
    out << '\n';
    for (std::size_t k = 0; k < chain.subject_draws[i].size(); ++k) {
      out << chain.population_draws[k].iteration;
      write_param_values(out, chain.subject_draws[i][k]);
      out << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "sampler.csv";
    auto out = open_out(path);
    out << seed_line << "# iterations_completed=" << chain.iterations_completed
        << "\n# non_evaluable_proposals=" << chain.non_evaluable_proposals
        << "\nsubject_id,acceptance_rate";
    for (const auto& c : kLogColumns) out << ",step_" << c;
    out << '\n';
    for (std::size_t i = 0; i < chain.subject_ids.size(); ++i) {
      out << chain.subject_ids[i] << ','
          << (i < chain.acceptance_rates.size() ? format_double(chain.acceptance_rates[i]) : "");
      for (int k = 0; k < kParamCount; ++k)
        out << ','
            << (i < chain.step_scales.size() ? format_double(chain.step_scales[i][k]) : "");
      out << '\n';
    }
    finish(out, path);
  }
}

ChainOutput read_chain(const fs::path& dir) {
  ChainOutput chain;
  const auto pop = read_csv(dir / "population.csv", {"iteration", "error_prec"});
  chain.seed = std::stoull(pop.meta.at("seed"));
  chain.burn_in = meta_long(pop, "burn_in");
  chain.post_iterations = meta_long(pop, "post_iterations");
  chain.thin = meta_long(pop, "thin");
  std::array<std::size_t, kParamCount> mu_cols;
  for (int k = 0; k < kParamCount; ++k) mu_cols[k] = pop.column(kLogColumns[k]);
  const auto c_it = pop.column("iteration"), c_prec = pop.column("error_prec");
  for (const auto& row : pop.rows) {
    PopulationDraw d;
    d.iteration = std::lround(parse_required(pop, row, c_it));
    for (int k = 0; k < kParamCount; ++k) d.mu[k] = parse_required(pop, row, mu_cols[k]);
    d.error_prec = parse_required(pop, row, c_prec);
    for (int r = 0; r < kParamCount; ++r)
      for (int c = r; c < kParamCount; ++c)
        d.sigma_inv(r, c) = d.sigma_inv(c, r) =
            parse_required(pop, row, pop.column(sigma_inv_column(r, c)));
    chain.population_draws.push_back(d);
  }

  const auto sampler = read_csv(dir / "sampler.csv", {"subject_id", "acceptance_rate"});
  chain.iterations_completed = meta_long(sampler, "iterations_completed");
  chain.non_evaluable_proposals = meta_long(sampler, "non_evaluable_proposals");
  const auto c_id = sampler.column("subject_id"), c_acc = sampler.column("acceptance_rate");
  for (const auto& row : sampler.rows) {
    chain.subject_ids.push_back(row.fields[c_id]);
    if (const auto a = parse_optional(sampler, row, c_acc)) chain.acceptance_rates.push_back(*a);
    ParamVector steps;
    bool have_steps = true;
    for (int k = 0; k < kParamCount; ++k) {
      const auto v = parse_optional(sampler, row, sampler.column("step_" + kLogColumns[k]));
      have_steps = have_steps && v.has_value();
      steps[k] = v.value_or(0.0);
    }
    if (have_steps) chain.step_scales.push_back(steps);
  }

  for (const auto& id : chain.subject_ids) {
    const auto t = read_csv(dir / "subjects" / (id + ".csv"), {"iteration"});
    std::array<std::size_t, kParamCount> cols;
    for (int k = 0; k < kParamCount; ++k) cols[k] = t.column(kLogColumns[k]);
    std::vector<ParamVector> draws;
    for (const auto& row : t.rows) {
      ParamVector v;
      for (int k = 0; k < kParamCount; ++k) v[k] = parse_required(t, row, cols[k]);
      draws.push_back(v);
    }
    chain.subject_draws.push_back(std::move(draws));
  }
  return chain;
}

void write_truth(const std::vector<SubjectRecord>& subjects,
                 const std::vector<DynamicParams>& truth, const fs::path& path) {
  auto out = open_out(path);
  out << "subject_id";
  write_param_header(out);
  out << '\n';
  for (std::size_t i = 0; i < subjects.size() && i < truth.size(); ++i) {
    out << subjects[i].id;
    write_param_values(out, to_vector(truth[i]));
    out << '\n';
  }
  finish(out, path);
}

void write_trajectory(const SubjectRecord& subject, const DynamicParams& theta,
                      const std::vector<double>& grid, const fs::path& path) {
  if (grid.empty()) throw DomainError("trajectory grid is empty");
  std::vector<double> fitted;
  try {
    fitted = predict_log10_viral_load(theta, subject.efficacy,
                                      std::pow(10.0, subject.baseline_log10_vl()), grid);
  } catch (const Error&) {
    fitted.clear();
  }
  const double phi = theta.phi();
  const double ec = efficacy_threshold(theta.R0());
  auto out = open_out(path);
  out << "# subject_id=" << subject.id << "\nday,fitted_log10_vl,gamma,e_c\n";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out << format_double(grid[j]) << ',' << (fitted.empty() ? "" : format_double(fitted[j]))
        << ',' << format_double(gamma_at(subject.efficacy, phi, grid[j])) << ','
        << format_double(ec) << '\n';
  }
  finish(out, path);
}

std::map<std::string, DynamicParams> posterior_mean_params(const ChainOutput& chain) {
  std::map<std::string, DynamicParams> out;
  for (std::size_t i = 0; i < chain.subject_ids.size(); ++i) {
    const auto& draws = chain.subject_draws[i];
    if (draws.empty()) continue;
    ParamVector m = ParamVector::Zero();
    for (const auto& d : draws) m += d;
    out[chain.subject_ids[i]] = to_params(m / static_cast<double>(draws.size()));
  }
  return out;
}

void write_population_table(const ChainSummary& summary, const fs::path& path) {
  auto out = open_out(path);
  out << "statistic";
  for (const auto& n : kParamNames) out << ',' << n;
  out << '\n';
  const std::array<std::pair<const char*, double ParamSummary::*>, 3> rows = {
      {{"PM", &ParamSummary::mean}, {"L_CI", &ParamSummary::lower}, {"R_CI", &ParamSummary::upper}}};
  for (const auto& [label, field] : rows) {
    out << label;
    for (const auto& p : summary.population) out << ',' << format_double(p.*field);
    out << '\n';
  }
  finish(out, path);
}

void write_cohort_table(const ChainSummary& summary, const fs::path& path) {
  auto out = open_out(path);
  out << "statistic";
  for (const auto& n : kParamNames) out << ',' << n;
  out << '\n';
  const std::array<std::pair<const char*, double CohortSpread::*>, 6> rows = {{
      {"Minimum", &CohortSpread::min},
      {"Median", &CohortSpread::median},
      {"Maximum", &CohortSpread::max},
      {"Mean", &CohortSpread::mean},
      {"SD", &CohortSpread::sd},
      {"CV(%)", &CohortSpread::cv_percent},
  }};
  for (const auto& [label, field] : rows) {
    out << label;
    for (const auto& s : summary.across_subjects) out << ',' << format_double(s.*field);
    out << '\n';
  }
  finish(out, path);
}

void write_subject_table(const ChainSummary& summary, const fs::path& path) {
  auto out = open_out(path);
  out << "subject_id";
  for (const auto& n : kParamNames) out << ',' << n << "_mean," << n << "_lower," << n << "_upper";
  out << '\n';
  for (const auto& s : summary.subjects) {
    out << s.id;
    for (const auto& p : s.params)
      out << ',' << format_double(p.mean) << ',' << format_double(p.lower) << ','
          << format_double(p.upper);
    out << '\n';
  }
  finish(out, path);
}

std::vector<FittedSubject> read_subject_table(const fs::path& path) {
  const auto t = read_csv(path, {"subject_id"});
  std::vector<FittedSubject> out;
  if (t.rows.empty()) return out;
  const auto c_id = t.column("subject_id");
  std::array<std::size_t, kParamCount> cols;
  for (int k = 0; k < kParamCount; ++k) cols[k] = t.column(std::string(kParamNames[k]) + "_mean");
  for (const auto& row : t.rows) {
    FittedSubject f;
    f.id = row.fields[c_id];
    for (int k = 0; k < kParamCount; ++k) f.estimates[k] = parse_required(t, row, cols[k]);
    out.push_back(f);
  }
  return out;
}

void write_correlations(const std::vector<CorrelationRow>& rows, const fs::path& path) {
  auto out = open_out(path);
  out << "factor,parameter,n,rho,p_value\n";
  for (const auto& r : rows)
    out << r.factor << ',' << r.parameter << ',' << r.result.n << ','
        << format_double(r.result.rho) << ',' << format_double(r.result.p_value) << '\n';
  finish(out, path);
}

void write_group_comparison(const GroupComparison& cmp, const fs::path& path) {
  auto out = open_out(path);
  out << "# n_success=" << cmp.n_success << "\n# n_failure=" << cmp.n_failure
      << "\n# excluded_missing=" << cmp.excluded_missing << "\n";
  out << "parameter,median_success,median_failure,rank_sum_success,expected,p_value,exact\n";
  for (const auto& r : cmp.rows)
    out << r.parameter << ',' << format_double(r.median_success) << ','
        << format_double(r.median_failure) << ',' << format_double(r.result.statistic) << ','
        << format_double(r.result.expected) << ',' << format_double(r.result.p_value) << ','
        << (r.result.exact ? "true" : "false") << '\n';
  finish(out, path);
}

void write_statuses(const std::vector<SubjectRecord>& subjects, const fs::path& path) {
  auto out = open_out(path);
  out << "subject_id,status\n";
  for (const auto& s : subjects) out << s.id << ',' << to_string(classify_response(s)) << '\n';
  finish(out, path);
}

void write_efficacy_series(const EfficacyInputs& inputs, double phi,
                           const std::vector<double>& grid, const fs::path& path) {
  auto out = open_out(path);
  out << "day,ic50_1,ic50_2,adherence_1,adherence_2,iq_1,iq_2,gamma\n";
  for (double t : grid) {
    const auto e = efficacy_components(inputs, phi, t);
    out << format_double(t);
    for (double v : e.ic50) out << ',' << format_double(v);
    for (double v : e.adherence) out << ',' << format_double(v);
    for (double v : e.iq) out << ',' << format_double(v);
    out << ',' << format_double(e.gamma) << '\n';
  }
  finish(out, path);
}

}  // namespace hivdyn
