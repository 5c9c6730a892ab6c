#include "naimark_lab/commands.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>

using namespace naimark_lab;
namespace fs = std::filesystem;

namespace {

std::string sample(const std::string& name) { return std::string(NAIMARK_LAB_SAMPLES) + "/" + name; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("naimark_lab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  std::ostringstream out, err;
  fs::path dir_;
};

double trine_exact() { return trine_cost_exact(); }

}  // namespace

TEST_F(Cli, ValidateExitCodes) {
  EXPECT_EQ(cli::cmd_validate(sample("trine.json"), kPovmInputTol, out, err), 0);
  EXPECT_NE(out.str().find("valid"), std::string::npos);
  EXPECT_EQ(cli::cmd_validate(sample("scaled_trine.json"), kPovmInputTol, out, err), 1);
  EXPECT_EQ(cli::cmd_validate(sample("malformed.json"), kPovmInputTol, out, err), 2);
  EXPECT_EQ(cli::cmd_validate(tmp("missing.json"), kPovmInputTol, out, err), 2);
}

TEST_F(Cli, CostJsonRoundTrip) {
  cli::CostOptions opt;
  opt.path = sample("trine.json");
  opt.e = 2;
  opt.restarts = 8;
  opt.json = true;
  opt.extension_out = tmp("ext.json");
  ASSERT_EQ(cli::cmd_cost(opt, out, err), 0) << err.str();

  const io::json doc = io::json::parse(out.str());
  for (const char* key : {"best_cost", "e_used", "e_range", "normalized_cost", "per_outcome_entanglement", "weights",
                          "best_bound", "best_bound_witness", "restarts_run", "converged", "history", "method",
                          "best_extension"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  const double cost = doc["best_cost"].get<double>();
  EXPECT_GE(cost, trine_exact() - 1e-9);
  EXPECT_LE(cost, trine_exact() + 1e-3);
  EXPECT_EQ(doc["e_used"].get<int>(), 2);
  EXPECT_EQ(doc["history"].size(), 8u);
  EXPECT_EQ(doc["best_bound_witness"].get<std::string>(), "zeta=k_1");

  const auto weights = doc["weights"].get<std::vector<double>>();
  const auto ents = doc["per_outcome_entanglement"].get<std::vector<double>>();
  ASSERT_EQ(weights.size(), 3u);
  double total = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) total += weights[i] * ents[i];
  EXPECT_NEAR(total, cost, 1e-12);

  const NaimarkExtension n = io::extension_from_json(doc["best_extension"]);
  const Povm t = trine();
  EXPECT_TRUE(validate_extension(n, t, 1e-9).ok);
  EXPECT_NEAR(extension_cost(n, canonical_distribution(t)).total, cost, 1e-12);

  std::ostringstream out2;
  EXPECT_EQ(cli::cmd_check_extension(sample("trine.json"), opt.extension_out, 1e-9, out2, err), 0) << err.str();
  EXPECT_NE(out2.str().find("valid, cost"), std::string::npos);
}

TEST_F(Cli, CostTextAndSweep) {
  cli::CostOptions opt;
  opt.path = sample("kpom.json");
  opt.restarts = 4;
  ASSERT_EQ(cli::cmd_cost(opt, out, err), 0) << err.str();
  const std::string text = out.str();
  EXPECT_NE(text.find("best_cost 0.000"), std::string::npos) << text;
  EXPECT_NE(text.find("(searched e = 2..5)"), std::string::npos) << text;
  EXPECT_NE(text.find("not searched"), std::string::npos);
}

TEST_F(Cli, CostErrors) {
  cli::CostOptions opt;
  opt.path = sample("trine.json");
  opt.e = 1;
  EXPECT_EQ(cli::cmd_cost(opt, out, err), 2);
  opt.e = 2;
  opt.e_max = 7;
  EXPECT_EQ(cli::cmd_cost(opt, out, err), 2);
  opt.e_max = 0;
  opt.path = sample("scaled_trine.json");
  EXPECT_EQ(cli::cmd_cost(opt, out, err), 1);
  opt.path = sample("malformed.json");
  EXPECT_EQ(cli::cmd_cost(opt, out, err), 2);
}

TEST_F(Cli, CostIsReproducible) {
  cli::CostOptions opt;
  opt.path = sample("n_d3.json");
  opt.e = 2;
  opt.restarts = 4;
  opt.seed = 9;
  opt.json = true;
  std::ostringstream a, b;
  ASSERT_EQ(cli::cmd_cost(opt, a, err), 0);
  opt.threads = 3;
  ASSERT_EQ(cli::cmd_cost(opt, b, err), 0);
  EXPECT_EQ(a.str(), b.str());
}

TEST_F(Cli, BoundsTable) {
  cli::BoundsOptions opt;
  opt.path = sample("trine.json");
  opt.copies = 10;
  ASSERT_EQ(cli::cmd_bounds(opt, out, err), 0);
  const std::string text = out.str();
  for (const char* v : {"0.666667", "0.600876", "0.496005", "zeta=k_1", "0.099930"}) {
    EXPECT_NE(text.find(v), std::string::npos) << v;
  }
}

TEST_F(Cli, ZeroCert) {
  cli::ZeroCertOptions opt;
  opt.path = sample("trine.json");
  EXPECT_EQ(cli::cmd_zero_cert(opt, out, err), 0);
  EXPECT_NE(out.str().find("-0.666667"), std::string::npos);
  EXPECT_NE(out.str().find("decision NONZERO"), std::string::npos);
  opt.expect_zero = true;
  EXPECT_EQ(cli::cmd_zero_cert(opt, out, err), 1);

  std::ostringstream k;
  opt.path = sample("kpom.json");
  EXPECT_EQ(cli::cmd_zero_cert(opt, k, err), 0);
  EXPECT_NE(k.str().find("pairing (1,2) (3,4)"), std::string::npos) << k.str();

  std::ostringstream n;
  opt.path = sample("n_d3.json");
  opt.expect_zero = false;
  EXPECT_EQ(cli::cmd_zero_cert(opt, n, err), 0);
  EXPECT_NE(n.str().find("decision INCONCLUSIVE"), std::string::npos) << n.str();
}

TEST_F(Cli, TrineCsv) {
  cli::TrineOptions opt;
  opt.grid = 100;
  opt.restarts = 4;
  opt.csv = tmp("curve.csv");
  ASSERT_EQ(cli::cmd_trine(opt, out, err), 0) << err.str();
  EXPECT_NE(out.str().find("0.496005034"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("nondecreasing"), std::string::npos);

  const std::string csv = slurp(opt.csv);
  EXPECT_EQ(csv.rfind("theta,E\n", 0), 0u);
  EXPECT_EQ(csv.back(), '\n');
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 102);

  opt.grid = 50;
  EXPECT_EQ(cli::cmd_trine(opt, out, err), 1);
}

TEST_F(Cli, RandomScanCsv) {
  cli::RandomScanOptions opt;
  opt.count = 5;
  opt.restarts = 4;
  opt.seed = 100;
  opt.out_path = tmp("scan.csv");
  ASSERT_EQ(cli::cmd_random_scan(opt, out, err), 0) << err.str();
  const std::string csv = slurp(opt.out_path);
  EXPECT_EQ(csv.rfind("seed_index,cost,bound_m,bound_d,best_bound\n", 0), 0u);
  EXPECT_EQ(csv.back(), '\n');
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_NE(err.str().find("e=2"), std::string::npos);

  // Row i is the POVM generated from seed + i.
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  const double cost = std::stod(line.substr(line.find(',') + 1));
  OptimizerConfig cfg;
  cfg.restarts = 4;
  cfg.seed = 100;
  EXPECT_NEAR(cost, minimize(random_haar(2, 3, 100), 2, cfg).best_cost, 1e-11);

  EXPECT_EQ(cli::default_scan_ancilla(2, 4), 3);
  EXPECT_EQ(cli::default_scan_ancilla(3, 4), 2);
  opt.m = 1;
  EXPECT_EQ(cli::cmd_random_scan(opt, out, err), 1);
}

TEST_F(Cli, TensorWritesValidPovm) {
  const std::string dest = tmp("tt.json");
  ASSERT_EQ(cli::cmd_tensor(sample("trine.json"), sample("kpom.json"), dest, out, err), 0) << err.str();
  const Povm t = io::read_povm(dest);
  EXPECT_EQ(t.dim(), 4);
  EXPECT_EQ(t.size(), 12);
  EXPECT_TRUE(validate(t, 1e-12).ok);
  const Povm expected = tensor(trine(), io::read_povm(sample("kpom.json")));
  EXPECT_LE((t.rows() - expected.rows()).norm(), 1e-15);
  EXPECT_EQ(cli::cmd_tensor(sample("trine.json"), sample("scaled_trine.json"), dest, out, err), 1);
  EXPECT_EQ(cli::cmd_tensor(sample("trine.json"), sample("malformed.json"), dest, out, err), 2);
}

TEST_F(Cli, PovmFileRoundTrip) {
  const Povm p = random_haar(3, 5, 77);
  io::write_povm(tmp("p.json"), p);
  const Povm q = io::read_povm(tmp("p.json"));
  EXPECT_EQ(p.rows(), q.rows());
}

TEST_F(Cli, CheckExtensionSample) {
  EXPECT_EQ(cli::cmd_check_extension(sample("kpom.json"), sample("kpom_extension.json"), 1e-9, out, err), 0)
      << err.str();
  EXPECT_NE(out.str().find("valid, cost 0.000000"), std::string::npos) << out.str();
  EXPECT_EQ(cli::cmd_check_extension(sample("trine.json"), sample("kpom_extension.json"), 1e-9, out, err), 1);
}
