#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "hivdyn/data_io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kBinary = HIVDYN_CLI_PATH;

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = kBinary.string() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++n;
  }
  return n;
}

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / ("hivdyn_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string at(const std::string& rel) const { return (root / rel).string(); }
};

}  // namespace

TEST_CASE("help lists every flag and unknown flags fail") {
  const auto help = run("--help");
  CHECK(help.status == 0);
  for (const char* flag : {"--config", "--seed", "--burn-in", "--iterations", "--thin", "--workers",
                           "--out-dir", "simulate", "fit", "summarize", "analyze", "efficacy"})
    CHECK(help.out.find(flag) != std::string::npos);
  CHECK(run("simulate --no-such-flag").status != 0);
  CHECK(run("").status != 0);
}

TEST_CASE("simulate, fit, summarize, analyze and efficacy") {
  Workspace w;
  const auto sim = run("simulate --subjects 12 --seed 3 --out-dir " + w.at("data"));
  REQUIRE(sim.status == 0);
  CHECK(data_rows(w.root / "data" / "viral_load.csv") == 12 * 9);
  CHECK(slurp(w.root / "data" / "simulate.txt").find("seed = 3") != std::string::npos);

  const auto again = run("simulate --subjects 12 --seed 3 --out-dir " + w.at("data2"));
  REQUIRE(again.status == 0);
  for (const char* f : {"viral_load.csv", "pk.csv", "ic50.csv", "adherence.csv", "truth.csv"})
    CHECK(slurp(w.root / "data" / f) == slurp(w.root / "data2" / f));

  // config file supplies the schedule; the seed flag overrides the file
  std::ofstream(w.root / "fit.ini") << "burn-in = 300\niterations = 400\nthin = 4\nseed = 1\n";
  const std::string fit_args = "fit --config " + w.at("fit.ini") + " --seed 11 --data-dir " +
                               w.at("data") + " --out-dir ";
  const auto fit = run(fit_args + w.at("fit"));
  REQUIRE(fit.status == 0);
  CHECK(fit.out.find("iteration 700 / 700") == std::string::npos);  // progress every 1000 only
  CHECK(data_rows(w.root / "fit" / "chain" / "population.csv") == 100);
  const auto summary = slurp(w.root / "fit" / "fit_summary.txt");
  for (const char* key : {"seed = 11", "burn_in = 300", "hyper_a = 4.5", "hyper_b = 9",
                          "hyper_nu = 8", "eta = 4 1.1 -1 -2.5 1.4 0.28", "lambda_diag = 1000",
                          "omega_diag = 2"})
    CHECK(summary.find(key) != std::string::npos);

  const auto table = slurp(w.root / "fit" / "table_population.csv");
  CHECK(table.rfind("statistic,phi,c,delta,d_T,rho,R0\nPM,", 0) == 0);
  CHECK(table.find("\nL_CI,") != std::string::npos);
  CHECK(table.find("\nR_CI,") != std::string::npos);
  CHECK(data_rows(w.root / "fit" / "table_cohort.csv") == 6);
  CHECK(fs::exists(w.root / "fit" / "trajectories" / "S001.csv"));

  // same seed on two workers gives identical chain files
  const auto fit2 = run(fit_args + w.at("fit2") + " --workers 2");
  REQUIRE(fit2.status == 0);
  CHECK(slurp(w.root / "fit" / "chain" / "population.csv") ==
        slurp(w.root / "fit2" / "chain" / "population.csv"));
  CHECK(slurp(w.root / "fit" / "chain" / "subjects" / "S005.csv") ==
        slurp(w.root / "fit2" / "chain" / "subjects" / "S005.csv"));

  const auto sum = run("summarize --chain-dir " + w.at("fit/chain") + " --out-dir " + w.at("sum"));
  REQUIRE(sum.status == 0);
  CHECK(slurp(w.root / "sum" / "table_population.csv") == table);

  const auto ana = run("analyze --data-dir " + w.at("data") + " --out-dir " + w.at("fit"));
  CHECK((ana.status == 0 || ana.out.find("both success and failure") != std::string::npos));
  if (ana.status == 0) {
    CHECK(data_rows(w.root / "fit" / "correlations.csv") == 2 * 6);
    CHECK(slurp(w.root / "fit" / "group_comparison.csv").find("excluded_missing") !=
          std::string::npos);
    CHECK(data_rows(w.root / "fit" / "statuses.csv") == 12);
  }

  const auto eff = run("efficacy --data-dir " + w.at("data") + " --subject S002 --out-dir " +
                       w.at("eff") + " --grid-step 7");
  REQUIRE(eff.status == 0);
  CHECK(data_rows(w.root / "eff" / "efficacy" / "S002.csv") == 25);
}

TEST_CASE("missing inputs give a nonzero exit with a message") {
  Workspace w;
  const auto r = run("fit --data-dir " + w.at("nowhere") + " --out-dir " + w.at("o"));
  CHECK(r.status != 0);
  CHECK(r.out.find("error") != std::string::npos);
  std::ofstream(w.root / "viral_load.csv") << "subject_id,day,log10_vl\nA,zero,4\n";
  std::ofstream(w.root / "pk.csv") << "";
  std::ofstream(w.root / "ic50.csv") << "";
  std::ofstream(w.root / "adherence.csv") << "";
  const auto bad = run("fit --data-dir " + w.at("") + " --out-dir " + w.at("o"));
  CHECK(bad.status == 2);
  CHECK(bad.out.find("viral_load.csv:2") != std::string::npos);
}
