#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rds/cli.hpp"
#include "rds/config.hpp"
#include "rds/error.hpp"
#include "rds/experiments.hpp"
#include "rds/report.hpp"

using namespace rds;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

ExperimentConfig small_config(Mode mode) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.n = 2000;
  cfg.trials = 300;
  cfg.k = 1024;
  cfg.k_fiber = 256;
  cfg.master_seed = 7;
  return cfg;
}

const CsvTable& table_named(const ExperimentReport& rep, const std::string& name) {
  for (const auto& [n, t] : rep.tables()) {
    if (n == name) return t;
  }
  throw std::runtime_error("no table " + name);
}

// Column `col` of a CSV text, header skipped.
std::vector<std::string> csv_column(const std::string& text, std::size_t col) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(row, cell, ',');
    out.push_back(cell);
  }
  return out;
}

// E_h |x - x0|^(-q) for a piecewise-constant h, q < 1, by the antiderivative on each cell.
double mean_phi_oracle(std::span<const double> h, double x0, double q) {
  const double k = static_cast<double>(h.size());
  auto F = [&](double d) { return std::pow(d, 1.0 - q) / (1.0 - q); };  // integral of d^-q on [0, d]
  double total = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double a = static_cast<double>(i) / k, b = static_cast<double>(i + 1) / k;
    double piece;
    if (x0 <= a) {
      piece = F(b - x0) - F(a - x0);
    } else if (x0 >= b) {
      piece = F(x0 - a) - F(x0 - b);
    } else {
      piece = F(x0 - a) + F(b - x0);
    }
    total += h[i] * piece;
  }
  return total;
}

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) {
    if (const char* old = std::getenv("RDS_THREADS")) saved_ = old;
    setenv("RDS_THREADS", value, 1);
  }
  ~ThreadsEnv() {
    if (saved_.empty()) {
      unsetenv("RDS_THREADS");
    } else {
      setenv("RDS_THREADS", saved_.c_str(), 1);
    }
  }

 private:
  std::string saved_;
};

}  // namespace

TEST_CASE("config text round trip") {
  ExperimentConfig cfg;
  cfg.family = {"lsv:0.2", "lsv:0.25"};
  cfg.alpha = 0.5;
  cfg.x0.reset();
  cfg.t_grid = {0.25, 0.5, 1.0};
  cfg.J = {{0.5, 2.0}, {3.0, kInf}};
  cfg.start_measure = StartMeasure::Lebesgue;
  cfg.tol.ks = 0.07;
  std::string text = "# generated\n";
  for (const auto& [k, v] : config_entries(cfg)) text += k + " = " + v + "\n";
  const auto back = parse_config_text(text);
  CHECK(config_entries(back) == config_entries(cfg));
  CHECK_FALSE(back.x0.has_value());
  CHECK(back.tol.ks == 0.07);

  // keys are order-insensitive
  const auto a = parse_config_text("alpha = 0.5\nn = 1e4\n");
  const auto b = parse_config_text("n = 10000\n  alpha=0.5  # trailing comment\n");
  CHECK(config_entries(a) == config_entries(b));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config_text("bogus_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("alpha = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("alpha = 2.5\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config_text("n = 0\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config_text("t_grid = 0.5, 0.25\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config_text("family = beta:2.1\nprobs = 0.5, 0.5\n").validate(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/rds.cfg"), ConfigError);
  CHECK(parse_mode("transfer") == Mode::TransferReport);
  CHECK_THROWS_AS(parse_mode("nope"), ConfigError);
}

TEST_CASE("cli exit codes") {
  SUBCASE("selftest quick") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_cli({"selftest", "--quick"});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.code == 0);
    CHECK(secs < 60.0);
    CHECK(r.err.find("FAIL") == std::string::npos);
  }
  SUBCASE("missing config") { CHECK(run_cli({"stable", "--config", "/nonexistent/x.cfg"}).code == 2); }
  SUBCASE("alpha out of range") { CHECK(run_cli({"stable", "--alpha", "2.5"}).code == 2); }
  SUBCASE("alpha out of range in law mode") {
    CHECK(run_cli({"stable", "--alpha", "2.5", "--cf-grid", "0:1:3"}).code == 2);
  }
  SUBCASE("unknown flag") {
    const auto r = run_cli({"stable", "--bogus"});
    CHECK(r.code == 2);
    CHECK(r.err.find("stable") != std::string::npos);
  }
  SUBCASE("no subcommand") { CHECK(run_cli({}).code == 2); }
  SUBCASE("bad --set") {
    CHECK(run_cli({"hitting", "--set", "nope=1"}).code == 2);
    CHECK(run_cli({"hitting", "--set", "alpha"}).code == 2);
  }
  SUBCASE("binary on the command line") {
    const std::string cmd = std::string(RDS_CLI_PATH) + " selftest --quick > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    const std::string bad = std::string(RDS_CLI_PATH) + " stable --alpha 2.5 > /dev/null 2>&1";
    const int bad_status = std::system(bad.c_str());
    REQUIRE(WIFEXITED(bad_status));
    CHECK(WEXITSTATUS(bad_status) == 2);
  }
}

TEST_CASE("cli characteristic function grid") {
  const auto r = run_cli({"stable", "--alpha", "0.75", "--cf-grid", "0:2:5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# cf.csv\nt,re_cf,im_cf\n") != std::string::npos);
  const auto body = r.out.substr(r.out.find("t,re_cf"));
  const auto re = csv_column(body, 1);
  REQUIRE(re.size() == 5);
  CHECK(std::stod(re[0]) == 1.0);
  for (const auto& v : re) CHECK(std::abs(std::stod(v)) <= 1.0);
}

TEST_CASE("cli writes an output directory") {
  const auto dir = std::filesystem::temp_directory_path() / "rds_harness_out";
  std::filesystem::remove_all(dir);
  const auto r = run_cli({"hitting", "--n", "2000", "--trials", "200", "--set", "k=1024",
                          "--set", "k_fiber=256", "--output", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "survival.csv"));
  std::ifstream in(dir / "summary.json");
  const auto j = Json::parse(in);
  CHECK(j["schema"] == 1);
  CHECK(j["mode"] == "hitting");
  CHECK(r.err.find("runtime_seconds") != std::string::npos);
  std::ifstream s(dir / "summary.json");
  std::stringstream text;
  text << s.rdbuf();
  CHECK(text.str().find("runtime") == std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("functional at t = 1 equals the quenched run") {
  auto cfg = small_config(Mode::Stable);
  cfg.omega_replicas = 1;
  const auto q = run_quenched_stable(cfg);
  cfg.mode = Mode::Functional;
  cfg.t_grid = {1.0};
  const auto f = run_functional_marginals(cfg);
  const auto qs = csv_column(table_named(q, "samples.csv").str(), 1);
  const auto fs = csv_column(table_named(f, "marginals.csv").str(), 1);
  REQUIRE(qs.size() == cfg.trials);
  CHECK(qs == fs);
  CHECK(q.statistic("ks_vs_iid_omega0").value == f.statistic("marginal_ks_t=1").value);
}

TEST_CASE("one map: annealed equals quenched") {
  auto cfg = small_config(Mode::Annealed);
  cfg.family = {"beta:2.5"};
  cfg.probs = {1.0};
  const auto rep = run_annealed(cfg);
  const auto text = table_named(rep, "samples.csv").str();
  CHECK(csv_column(text, 1) == csv_column(text, 2));
  CHECK(rep.statistic("ks_annealed_vs_quenched").value == 0.0);
}

TEST_CASE("a single trial") {
  auto cfg = small_config(Mode::Stable);
  cfg.trials = 1;
  cfg.omega_replicas = 1;
  const auto rep = run_quenched_stable(cfg);
  const auto col = csv_column(table_named(rep, "samples.csv").str(), 1);
  REQUIRE(col.size() == 1);
  CHECK(std::isfinite(std::stod(col[0])));
}

TEST_CASE("doubling map with a periodic pole") {
  auto cfg = small_config(Mode::Stable);
  cfg.family = {"beta:2"};
  cfg.probs = {1.0};
  cfg.x0 = 0.0;
  cfg.omega_replicas = 1;
  const auto rep = run_quenched_stable(cfg);
  CHECK_FALSE(rep.statistic("x0_periodic").pass);
  CHECK_FALSE(rep.all_pass());
  CHECK(rep.summary()["info"]["x0_periodic"] == true);
}

TEST_CASE("centering constant for alpha in (1,2)") {
  auto cfg = small_config(Mode::Stable);
  cfg.alpha = 1.5;
  const System sys = build_system(cfg);
  const double mean = mean_phi_oracle(sys.stationary.density.values(), sys.x0, 1.0 / cfg.alpha);
  const double want = static_cast<double>(cfg.n) / sys.bn * mean;
  CHECK(std::abs(sys.cn - want) <= 1e-9 * std::abs(want));
  CHECK(sys.bn == doctest::Approx(std::pow(sys.b.value * cfg.n, 1.0 / cfg.alpha)).epsilon(1e-14));

  cfg.alpha = 0.75;
  CHECK(build_system(cfg).cn == 0.0);
  const auto rep = run_quenched_stable(cfg);
  CHECK(rep.statistic("c_n_abs").pass);
}

TEST_CASE("reports name targets and echo x0 and omega") {
  auto cfg = small_config(Mode::Functional);
  cfg.x0.reset();
  cfg.t_grid = {0.5, 1.0};
  const auto rep = run_functional_marginals(cfg);
  const auto j = rep.summary();
  CHECK(j["schema"] == 1);
  CHECK(j["mode"] == "functional");
  CHECK(j["info"]["x0"].get<double>() == draw_x0(cfg.master_seed));
  CHECK(j["info"]["x0_drawn"] == true);
  CHECK(j["info"]["omega_prefix"].get<std::string>().size() == 64);
  CHECK(j["config"].is_object());
  for (const auto& s : j["statistics"]) {
    CHECK(s.contains("name"));
    CHECK(s.contains("target"));
    CHECK(s.contains("tolerance"));
    CHECK(s.contains("rule"));
    CHECK(s.contains("pass"));
  }
}

TEST_CASE("outputs do not depend on the worker count") {
  auto check_mode = [](ExperimentConfig cfg) {
    std::string one, many;
    {
      ThreadsEnv env("1");
      const auto rep = run_experiment(cfg);
      one = rep.summary_text();
      for (const auto& [n, t] : rep.tables()) one += n + "\n" + t.str();
    }
    {
      ThreadsEnv env("4");
      const auto rep = run_experiment(cfg);
      many = rep.summary_text();
      for (const auto& [n, t] : rep.tables()) many += n + "\n" + t.str();
    }
    CHECK(one == many);
  };
  check_mode(small_config(Mode::Poisson));
  check_mode(small_config(Mode::Hitting));
  auto f = small_config(Mode::Functional);
  f.t_grid = {0.5, 1.0};
  check_mode(f);
  check_mode(small_config(Mode::Annealed));
}

TEST_CASE("csv and number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(kInf) == "inf");
  CHECK(format_double(-kInf) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(json_number(kInf) == "inf");
  CsvTable t({"a", "b"});
  t.add_numbers({1.0, 2.5});
  t.add_row({"x", "y"});
  CHECK(t.str() == "a,b\n1,2.5\nx,y\n");
  CHECK(t.rows() == 2);
}

TEST_CASE("statistic rules") {
  CHECK(Statistic::within("a", 1.05, 1.0, 0.1).pass);
  CHECK_FALSE(Statistic::within("a", 1.2, 1.0, 0.1).pass);
  CHECK(Statistic::at_most("b", 0.01, 0.05).pass);
  CHECK_FALSE(Statistic::at_most("b", std::nan(""), 0.05).pass);
  CHECK(Statistic::at_least("c", 0.99, 0.98).pass);
  CHECK(Statistic::info("d", 3.0).pass);
  ExperimentReport rep("demo");
  rep.add(Statistic::info("d", 3.0));
  CHECK(rep.all_pass());
  rep.add(Statistic::at_most("b", 1.0, 0.5));
  CHECK_FALSE(rep.all_pass());
  CHECK(rep.summary()["pass"] == false);
  CHECK_THROWS(rep.statistic("missing"));
}
