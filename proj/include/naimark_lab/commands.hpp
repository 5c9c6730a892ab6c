#pragma once

// Subcommands behind the naimark_lab executable. Each returns the process
// exit code and writes to the given streams:
//   0  success
//   1  semantic failure (invalid POVM, failed check, unmet --expect-zero)
//   2  I/O, parse or capacity error

#include "naimark_lab/bounds_zero.hpp"
#include "naimark_lab/cost_opt.hpp"
#include "naimark_lab/io.hpp"
#include "naimark_lab/trine_analytic.hpp"

#include <iomanip>
#include <iostream>
#include <optional>

namespace naimark_lab::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kInputError = 2 };

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string general(double v, int digits = 12) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

namespace detail {

// Maps exceptions onto exit codes; anything not an input problem is a
// semantic failure.
template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const io::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  } catch (const CapacityError& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kFailure;
  }
}

inline bool require_valid(const Povm& p, double tol, const std::string& path, std::ostream& err) {
  const PovmValidation v = validate(p, tol);
  if (v.ok) return true;
  err << "error: " << path << " is not a valid POVM (residual " << general(v.max_residual, 6);
  if (p.size() < p.dim()) err << ", fewer elements than d";
  err << ")\n";
  return false;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// validate

inline int cmd_validate(const std::string& path, double tol, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Povm p = io::read_povm(path);
    const PovmValidation v = validate(p, tol);
    out << "d " << p.dim() << "\n";
    out << "m " << p.size() << "\n";
    out << "residual " << general(v.max_residual, 6) << "\n";
    if (v.zero_norm_elements > 0) out << "zero-norm elements " << v.zero_norm_elements << "\n";
    if (p.size() < p.dim()) out << "fewer elements than d\n";
    out << (v.ok ? "valid" : "invalid") << " (tol " << general(tol, 3) << ")\n";
    return v.ok ? kSuccess : kFailure;
  });
}

// ----------------------------------------------------------------------------
// cost

struct CostOptions {
  std::string path;
  int e = 0;      // 0: sweep
  int e_max = 0;  // 0: m + 1 (capped at m·d)
  int restarts = 20;
  int max_iters = 2000;
  std::uint64_t seed = 0;
  double tol = kPovmInputTol;
  LocalMethod method = LocalMethod::automatic;
  unsigned threads = 0;
  int zeta_samples = 64;
  bool json = false;
  std::string extension_out;  // write the best extension here when non-empty
};

inline int cmd_cost(const CostOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Povm p = io::read_povm(opt.path);
    if (!detail::require_valid(p, opt.tol, opt.path, err)) return static_cast<int>(kFailure);
    const int d = p.dim();
    const int m = p.size();

    int e_lo = opt.e;
    int e_hi = opt.e;
    if (opt.e == 0) {
      e_lo = std::max(1, (m + d - 1) / d);
      e_hi = opt.e_max > 0 ? opt.e_max : std::min(m + 1, m * d);
      e_hi = std::max(e_hi, e_lo);
    } else if (opt.e_max > 0) {
      e_hi = opt.e_max;
    }
    if (static_cast<long>(d) * e_lo < m) {
      throw CapacityError("d*e = " + std::to_string(d * e_lo) + " cannot hold " + std::to_string(m) +
                          " outcomes");
    }
    if (e_hi < e_lo || e_hi > m * d) {
      throw CapacityError("ancilla range must satisfy e <= e-max <= m*d = " + std::to_string(m * d));
    }

    OptimizerConfig cfg;
    cfg.restarts = opt.restarts;
    cfg.max_iters = opt.max_iters;
    cfg.seed = opt.seed;
    cfg.method = opt.method;
    cfg.threads = opt.threads;
    const CostReport report = minimize_over_e(p, e_lo, e_hi, cfg);
    const BoundResult bound = best_bound(p, opt.zeta_samples, opt.seed);
    const bool capped = opt.e == 0 && e_hi < m * d;

    if (!opt.extension_out.empty()) {
      io::write_text_file(opt.extension_out, io::extension_to_json(report.best_extension).dump(2) + "\n");
    }

    if (opt.json) {
      io::json doc;
      doc["best_cost"] = report.best_cost;
      doc["e_used"] = report.e_used;
      doc["e_range"] = {e_lo, e_hi};
      doc["normalized_cost"] = d >= 2 ? io::json(normalized_cost(report, d)) : io::json(nullptr);
      doc["per_outcome_entanglement"] = report.breakdown.per_outcome_entanglement;
      doc["weights"] = report.breakdown.weights.probs;
      doc["best_bound"] = bound.value;
      doc["best_bound_witness"] = bound.witness;
      doc["restarts_run"] = report.restarts_run;
      doc["converged"] = report.converged;
      doc["history"] = report.history;
      doc["method"] = to_string(report.method);
      doc["best_extension"] = io::extension_to_json(report.best_extension);
      out << doc.dump(2) << "\n";
      return static_cast<int>(kSuccess);
    }

    out << "best_cost " << fixed(report.best_cost) << " ebits (upper estimate)\n";
    out << "e_used " << report.e_used << "  (searched e = " << e_lo << ".." << e_hi << ")\n";
    if (capped) {
      out << "note: extensions with e up to m*d = " << m * d << " exist but were not searched\n";
    }
    out << "normalized F " << (d >= 2 ? fixed(normalized_cost(report, d)) : std::string("n/a")) << "\n";
    out << "outcome  q         E\n";
    for (int nu = 0; nu < m; ++nu) {
      out << std::setw(7) << nu + 1 << "  " << fixed(report.breakdown.weights[static_cast<size_t>(nu)]) << "  "
          << fixed(report.breakdown.per_outcome_entanglement[static_cast<size_t>(nu)]) << "\n";
    }
    out << "best_bound " << fixed(bound.value) << " (" << bound.witness << ")\n";
    out << "restarts " << report.restarts_run << ", method " << to_string(report.method) << ", "
        << (report.converged ? "converged" : "not converged") << "\n";
    return static_cast<int>(kSuccess);
  });
}

// ----------------------------------------------------------------------------
// bounds

struct BoundsOptions {
  std::string path;
  int zeta_samples = 64;
  std::uint64_t seed = 0;
  int copies = 0;  // print the per-copy curve up to this many copies
  double tol = kPovmInputTol;
};

inline int cmd_bounds(const BoundsOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Povm p = io::read_povm(opt.path);
    if (!detail::require_valid(p, opt.tol, opt.path, err)) return static_cast<int>(kFailure);
    const BoundResult b = best_bound(p, opt.zeta_samples, opt.seed);
    out << "1-1/m              " << fixed(b.element_count) << "\n";
    out << "H[(1-1/sqrt d)/2]  " << (p.dim() >= 2 ? fixed(b.dimension) : std::string("n/a")) << "\n";
    out << "zeta search        " << fixed(b.best_zeta) << "  " << b.best_zeta_witness << "\n";
    out << "minimum            " << fixed(b.value) << "  " << b.witness << "\n";
    if (opt.copies > 0) {
      if (p.dim() < 2) throw DimensionError("--copies needs d >= 2");
      out << "copies  per-copy dimension bound\n";
      for (const auto& [n, v] : asymptotic_bound_curve(p, opt.copies)) {
        out << std::setw(6) << n << "  " << fixed(v) << "\n";
      }
    }
    return static_cast<int>(kSuccess);
  });
}

// ----------------------------------------------------------------------------
// zero-cert

struct ZeroCertOptions {
  std::string path;
  double tol = 1e-9;
  bool expect_zero = false;
};

inline int cmd_zero_cert(const ZeroCertOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Povm p = io::read_povm(opt.path);
    if (!detail::require_valid(p, kPovmInputTol, opt.path, err)) return static_cast<int>(kFailure);
    const bool qubit = p.dim() == 2;
    const ZeroCostCertificate cert = qubit ? zero_cost_decide_d2(p, opt.tol) : zero_cost_necessary(p, opt.tol);
    if (cert.examined.size() != p.size()) {
      out << "examined " << cert.examined.size() << " elements after merging parallel and dropping zero ones\n";
    }
    out << "element  margin\n";
    for (size_t mu = 0; mu < cert.per_element_margins.size(); ++mu) {
      out << std::setw(7) << mu + 1 << "  " << fixed(cert.per_element_margins[mu]) << "\n";
    }
    out << "decision " << to_string(cert.decision) << "\n";
    if (cert.pairing) {
      out << "pairing";
      for (const auto& [a, b] : *cert.pairing) out << " (" << a + 1 << "," << b + 1 << ")";
      out << "\n";
    }
    out << "note " << cert.note;
    if (!qubit && cert.decision == ZeroCostDecision::inconclusive) out << " (complete decision only for d = 2)";
    out << "\n";
    if (opt.expect_zero && cert.decision != ZeroCostDecision::zero) {
      err << "error: zero cost expected, decision is " << to_string(cert.decision) << "\n";
      return static_cast<int>(kFailure);
    }
    return static_cast<int>(kSuccess);
  });
}

// ----------------------------------------------------------------------------
// trine

struct TrineOptions {
  int grid = 10000;
  std::string csv = "trine_curve.csv";
  int restarts = 20;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

inline int cmd_trine(const TrineOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (opt.grid < 100) throw ValidationError("--grid must be at least 100");
    const double exact = trine_cost_exact();
    OptimizerConfig cfg;
    cfg.restarts = opt.restarts;
    cfg.seed = opt.seed;
    cfg.threads = opt.threads;
    const CostReport report = minimize(trine(), 2, cfg);
    const double gap = report.best_cost - exact;

    out << "exact    " << fixed(exact, 9) << " ebits  (2/3)H((1-1/sqrt3)/2)\n";
    out << "E(0)     " << fixed(trine_E_theta(0.0), 9) << "\n";
    out << "optimizer e=2, " << report.restarts_run << " restarts: " << fixed(report.best_cost, 9) << "  (gap "
        << general(gap, 3) << ", " << (gap >= -1e-9 && gap <= 1e-3 ? "within" : "outside") << " [-1e-9, 1e-3])\n";

    const DerivativeScan scan = derivative_sign_scan(opt.grid);
    out << "scan over [0, pi/3], " << opt.grid + 1 << " points\n";
    out << "  E'(theta) range [" << general(scan.min_derivative, 4) << ", " << general(scan.max_derivative, 4)
        << "]\n";
    out << "  " << (scan.nondecreasing ? "nondecreasing" : scan.nonincreasing ? "nonincreasing" : "not monotone")
        << ", minimum " << fixed(scan.min_value, 9) << " at theta = " << general(scan.min_at, 6) << "\n";
    if (scan.nondecreasing) {
      out << "  note: E' >= 0 here, so the minimum sits at theta = 0; the often quoted E' <= 0 has the sign "
             "reversed\n";
    }

    const TrineCurve curve = trine_curve(opt.grid);
    std::ostringstream csv;
    csv << std::setprecision(12) << "theta,E\n";
    for (size_t i = 0; i < curve.thetas.size(); ++i) csv << curve.thetas[i] << "," << curve.values[i] << "\n";
    io::write_text_file(opt.csv, csv.str());
    out << "curve written to " << opt.csv << "\n";
    return static_cast<int>(kSuccess);
  });
}

// ----------------------------------------------------------------------------
// random-scan

struct RandomScanOptions {
  int d = 2;
  int m = 3;
  int count = 100;
  std::uint64_t seed = 0;
  int restarts = 20;
  int e = 0;  // 0: max(ceil(m/d), 1 + m − d)
  int zeta_samples = 16;
  unsigned threads = 0;
  std::string out_path;  // empty: CSV to `out`
};

inline int default_scan_ancilla(int d, int m) { return std::max((m + d - 1) / d, 1 + m - d); }

inline int cmd_random_scan(const RandomScanOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (opt.d < 1 || opt.m < opt.d) throw ValidationError("random-scan: need 1 <= d <= m");
    if (opt.count < 0) throw ValidationError("random-scan: --count must be non-negative");
    const int e = opt.e > 0 ? opt.e : default_scan_ancilla(opt.d, opt.m);
    if (static_cast<long>(opt.d) * e < opt.m) {
      throw CapacityError("random-scan: d*e cannot hold m outcomes");
    }
    OptimizerConfig cfg;
    cfg.restarts = opt.restarts;
    cfg.threads = opt.threads;

    std::ostringstream csv;
    csv << std::setprecision(12) << "seed_index,cost,bound_m,bound_d,best_bound\n";
    int violations = 0;
    double max_cost = 0.0;
    int argmax = -1;
    for (int i = 0; i < opt.count; ++i) {
      const std::uint64_t s = opt.seed + static_cast<std::uint64_t>(i);
      const Povm p = random_haar(opt.d, opt.m, s);
      cfg.seed = s;
      const double cost = minimize(p, e, cfg).best_cost;
      const BoundResult b = best_bound(p, opt.zeta_samples, s);
      if (cost > b.value + 1e-6) ++violations;
      if (argmax < 0 || cost > max_cost) {
        max_cost = cost;
        argmax = i;
      }
      csv << i << "," << cost << "," << b.element_count << ",";
      if (opt.d >= 2) csv << b.dimension;
      csv << "," << b.value << "\n";
    }
    if (opt.out_path.empty()) {
      out << csv.str();
    } else {
      io::write_text_file(opt.out_path, csv.str());
    }

    err << "scanned " << opt.count << " POVMs, d=" << opt.d << " m=" << opt.m << " e=" << e << "\n";
    if (opt.count > 0) {
      err << "max cost " << fixed(max_cost) << " at seed_index " << argmax << "\n";
      if (opt.d == 2) {
        const double ceiling = 0.4960 + 1e-3;
        err << "finding: " << (max_cost <= ceiling ? "no" : "some") << " cost exceeds the trine value ("
            << fixed(trine_cost_exact()) << ")\n";
      }
    }
    if (violations > 0) {
      err << "error: " << violations << " rows exceed best_bound + 1e-6\n";
      return static_cast<int>(kFailure);
    }
    return static_cast<int>(kSuccess);
  });
}

// ----------------------------------------------------------------------------
// tensor

inline int cmd_tensor(const std::string& path_a, const std::string& path_b, const std::string& path_out,
                      std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Povm a = io::read_povm(path_a);
    const Povm b = io::read_povm(path_b);
    if (!detail::require_valid(a, kPovmInputTol, path_a, err)) return static_cast<int>(kFailure);
    if (!detail::require_valid(b, kPovmInputTol, path_b, err)) return static_cast<int>(kFailure);
    if (a.dim() < 2 || b.dim() < 2) {
      err << "error: tensor factors need d >= 2\n";
      return static_cast<int>(kFailure);
    }
    const Povm t = tensor(a, b);
    io::write_povm(path_out, t);
    out << "wrote " << path_out << ": d=" << t.dim() << " m=" << t.size() << "\n";
    return static_cast<int>(kSuccess);
  });
}

// ----------------------------------------------------------------------------
// check-extension

inline int cmd_check_extension(const std::string& povm_path, const std::string& ext_path, double tol,
                               std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Povm p = io::read_povm(povm_path);
    if (!detail::require_valid(p, kPovmInputTol, povm_path, err)) return static_cast<int>(kFailure);
    const NaimarkExtension n = io::extension_from_json(io::read_json_file(ext_path));
    const ExtensionValidation v = validate_extension(n, p, tol);
    out << "unitarity residual " << general(v.unitarity_residual, 6) << "\n";
    out << "form residual " << general(v.form_residual, 6) << "\n";
    if (!v.ok) {
      out << "invalid\n";
      return static_cast<int>(kFailure);
    }
    const ExtensionCostBreakdown c = extension_cost(n, canonical_distribution(p));
    out << "valid, cost " << fixed(c.total) << " ebits at e = " << n.e() << "\n";
    return static_cast<int>(kSuccess);
  });
}

}  // namespace naimark_lab::cli
