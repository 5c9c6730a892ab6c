#include "naimark_lab/commands.hpp"

#include <CLI11.hpp>

#include <cerrno>
#include <cstdlib>

namespace cli = naimark_lab::cli;

namespace {

// --seed, else NAIMARK_LAB_SEED, else 0.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t given) {
  if (flag->count() > 0) return given;
  const char* env = std::getenv("NAIMARK_LAB_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || env[0] == '-') {
    throw naimark_lab::io::ParseError(std::string("NAIMARK_LAB_SEED is not an unsigned integer: ") + env);
  }
  return v;
}

naimark_lab::LocalMethod parse_method(const std::string& name) {
  if (name == "nelder-mead") return naimark_lab::LocalMethod::nelder_mead;
  if (name == "gradient") return naimark_lab::LocalMethod::finite_diff_gradient_descent;
  return naimark_lab::LocalMethod::automatic;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement cost of rank-1 POVMs via Naimark extensions"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  auto add_seed = [&seed](CLI::App* sub) {
    return sub->add_option("--seed", seed, "Base seed (default: $NAIMARK_LAB_SEED or 0)");
  };

  std::string path;
  double tol = naimark_lab::kPovmInputTol;

  auto* validate = app.add_subcommand("validate", "Check that a POVM file sums to the identity");
  validate->add_option("path", path, "POVM file")->required();
  validate->add_option("--tol", tol, "Residual tolerance")->capture_default_str();

  cli::CostOptions cost;
  std::string method = "auto";
  auto* cost_cmd = app.add_subcommand("cost", "Estimate the minimal entanglement cost");
  cost_cmd->add_option("path", cost.path, "POVM file")->required();
  cost_cmd->add_option("--e", cost.e, "Ancilla dimension (default: sweep)")->check(CLI::PositiveNumber);
  cost_cmd->add_option("--e-max", cost.e_max, "Upper end of the ancilla sweep (default m+1)")
      ->check(CLI::PositiveNumber);
  cost_cmd->add_option("--restarts", cost.restarts, "Local searches per ancilla dimension")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cost_cmd->add_option("--max-iters", cost.max_iters, "Iteration cap per local search")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cost_cmd->add_option("--method", method, "Local method")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "nelder-mead", "gradient"}));
  cost_cmd->add_option("--threads", cost.threads, "Worker threads (0: hardware)")->capture_default_str();
  cost_cmd->add_option("--tol", cost.tol, "POVM validation tolerance")->capture_default_str();
  cost_cmd->add_option("--extension-out", cost.extension_out, "Write the best extension as JSON");
  cost_cmd->add_flag("--json", cost.json, "Emit a JSON report");
  auto* cost_seed = add_seed(cost_cmd);

  cli::BoundsOptions bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Closed-form upper bounds");
  bounds_cmd->add_option("path", bounds.path, "POVM file")->required();
  bounds_cmd->add_option("--zeta-samples", bounds.zeta_samples, "Random zeta candidates")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  bounds_cmd->add_option("--copies", bounds.copies, "Print the per-copy bound for up to this many copies")
      ->check(CLI::NonNegativeNumber);
  auto* bounds_seed = add_seed(bounds_cmd);

  cli::ZeroCertOptions zero;
  auto* zero_cmd = app.add_subcommand("zero-cert", "Decide or test zero entanglement cost");
  zero_cmd->add_option("path", zero.path, "POVM file")->required();
  zero_cmd->add_option("--tol", zero.tol, "Orthogonality and margin tolerance")->capture_default_str();
  zero_cmd->add_flag("--expect-zero", zero.expect_zero, "Exit 1 unless the decision is ZERO");

  cli::TrineOptions trine;
  auto* trine_cmd = app.add_subcommand("trine", "Analytic trine report and E(theta) curve");
  trine_cmd->add_option("--grid", trine.grid, "Curve intervals on [0, pi/3]")->capture_default_str();
  trine_cmd->add_option("--csv", trine.csv, "Curve output")->capture_default_str();
  trine_cmd->add_option("--restarts", trine.restarts, "Optimizer restarts for the cross-check")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* trine_seed = add_seed(trine_cmd);

  cli::RandomScanOptions scan;
  auto* scan_cmd = app.add_subcommand("random-scan", "Optimizer cost against bounds on Haar-random POVMs");
  scan_cmd->add_option("--d", scan.d, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  scan_cmd->add_option("--m", scan.m, "Number of outcomes")->capture_default_str()->check(CLI::PositiveNumber);
  scan_cmd->add_option("--count", scan.count, "Number of POVMs")->capture_default_str();
  scan_cmd->add_option("--restarts", scan.restarts, "Local searches per POVM")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  scan_cmd->add_option("--e", scan.e, "Ancilla dimension (default max(ceil(m/d), 1+m-d))")
      ->check(CLI::PositiveNumber);
  scan_cmd->add_option("--out", scan.out_path, "CSV output (default stdout)");
  auto* scan_seed = add_seed(scan_cmd);

  std::string path_b;
  std::string path_out;
  auto* tensor_cmd = app.add_subcommand("tensor", "Tensor product of two POVM files");
  tensor_cmd->add_option("a", path, "First POVM file")->required();
  tensor_cmd->add_option("b", path_b, "Second POVM file")->required();
  tensor_cmd->add_option("out", path_out, "Output POVM file")->required();

  std::string ext_path;
  double ext_tol = 1e-9;
  auto* check_cmd = app.add_subcommand("check-extension", "Validate a Naimark extension file against a POVM");
  check_cmd->add_option("povm", path, "POVM file")->required();
  check_cmd->add_option("extension", ext_path, "Extension file")->required();
  check_cmd->add_option("--tol", ext_tol, "Residual tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  try {
    if (*validate) return cli::cmd_validate(path, tol, std::cout, std::cerr);
    if (*cost_cmd) {
      cost.seed = resolve_seed(cost_seed, seed);
      cost.method = parse_method(method);
      return cli::cmd_cost(cost, std::cout, std::cerr);
    }
    if (*bounds_cmd) {
      bounds.seed = resolve_seed(bounds_seed, seed);
      return cli::cmd_bounds(bounds, std::cout, std::cerr);
    }
    if (*zero_cmd) return cli::cmd_zero_cert(zero, std::cout, std::cerr);
    if (*trine_cmd) {
      trine.seed = resolve_seed(trine_seed, seed);
      return cli::cmd_trine(trine, std::cout, std::cerr);
    }
    if (*scan_cmd) {
      scan.seed = resolve_seed(scan_seed, seed);
      return cli::cmd_random_scan(scan, std::cout, std::cerr);
    }
    if (*tensor_cmd) return cli::cmd_tensor(path, path_b, path_out, std::cout, std::cerr);
    if (*check_cmd) return cli::cmd_check_extension(path, ext_path, ext_tol, std::cout, std::cerr);
  } catch (const naimark_lab::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kInputError;
  }
  return cli::kFailure;
}
