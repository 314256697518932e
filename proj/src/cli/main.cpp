// Command-line front end: sweep orchestration and artifact emission for the
// variational, compatibility, Bell-scan, conversion, and probe pipelines.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "symqmp/basis.hpp"
#include "symqmp/bell.hpp"
#include "symqmp/compat.hpp"
#include "symqmp/io.hpp"
#include "symqmp/mps.hpp"
#include "symqmp/rng.hpp"
#include "symqmp/selftest.hpp"
#include "symqmp/variational.hpp"

namespace {

using namespace symqmp;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// small helpers
// ---------------------------------------------------------------------------

double parse_number(const std::string& s, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw std::invalid_argument(what + ": not a number: '" + s + "'");
  return v;
}

// "v" for a single value, "start..end:count" for an inclusive linear grid
// (count >= 1; count == 1 keeps just the start).
std::vector<double> parse_grid(const std::string& s, const std::string& what) {
  std::size_t dots = s.find("..");
  if (dots == std::string::npos) return {parse_number(s, what)};
  std::size_t colon = s.find(':', dots + 2);
  if (colon == std::string::npos)
    throw std::invalid_argument(what + ": grid spec must look like start..end:count");
  double a = parse_number(s.substr(0, dots), what);
  double b = parse_number(s.substr(dots + 2, colon - dots - 2), what);
  double kd = parse_number(s.substr(colon + 1), what);
  int k = static_cast<int>(kd);
  if (kd != k || k < 1) throw std::invalid_argument(what + ": grid count must be an integer >= 1");
  std::vector<double> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i)
    out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
  return out;
}

std::vector<int> parse_int_grid(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (double v : parse_grid(s, what)) {
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
      throw std::invalid_argument(what + ": grid value " + format_double(v) + " is not an integer");
    out.push_back(static_cast<int>(r));
  }
  return out;
}

std::string now_iso8601() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Output paths are validated before any compute starts.
void check_writable(const std::string& path) {
  if (path.empty()) return;
  try {
    std::string probe = path + ".probe";
    write_text_file(probe, "");
    fs::remove(probe);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("output path is not writable: ") + e.what());
  }
}

// Artifact plus sidecar; an empty path streams the artifact to stdout and
// skips the sidecar (the timestamp never enters the artifact itself).
void emit_artifact(const std::string& path, const std::string& content, RunMetadata meta) {
  if (path.empty()) {
    std::fputs(content.c_str(), stdout);
    return;
  }
  meta.timestamp = now_iso8601();
  write_text_file(path, content);
  write_text_file(path + ".meta.json", metadata_json(meta));
}

struct Checkpoint {
  std::string path;   // empty disables checkpointing
  std::string header; // expected first line, with trailing newline
};

// Number of complete data rows recoverable from an existing checkpoint; the
// recovered rows are appended to `body`.
int load_checkpoint(const Checkpoint& cp, std::string& body, int rows_per_unit) {
  if (cp.path.empty() || !fs::exists(cp.path)) return 0;
  std::string text = read_text_file(cp.path);
  if (text.rfind(cp.header, 0) != 0) return 0;  // stale layout; recompute
  std::string rest = text.substr(cp.header.size());
  int lines = 0;
  std::size_t last_complete = 0;
  for (std::size_t i = 0; i < rest.size(); ++i)
    if (rest[i] == '\n') {
      ++lines;
      last_complete = i + 1;
    }
  int units = lines / rows_per_unit;
  if (units == 0) return 0;
  std::size_t keep = 0;
  int counted = 0;
  for (std::size_t i = 0; i < last_complete && counted < units * rows_per_unit; ++i)
    if (rest[i] == '\n') {
      ++counted;
      keep = i + 1;
    }
  body += rest.substr(0, keep);
  return units;
}

void store_checkpoint(const Checkpoint& cp, const std::string& body) {
  if (cp.path.empty()) return;
  write_text_file(cp.path, cp.header + body);
}

void clear_checkpoint(const Checkpoint& cp) {
  if (cp.path.empty()) return;
  std::error_code ec;
  fs::remove(cp.path, ec);
}

std::string opt_double(const std::optional<double>& v) {
  return format_double(v ? *v : std::numeric_limits<double>::quiet_NaN());
}

// ---------------------------------------------------------------------------
// vm: variational ground-state sweeps
// ---------------------------------------------------------------------------

struct VmArgs {
  std::string model = "lmg", out, cache_dir;
  int n = 2, m = 2, threads = 0;
  std::vector<int> entropy_m;
  bool with_ed = false, resume = false;
  double tol_gap = 1e-9;
  std::uint64_t seed = 0;
  // per-parameter grid specs; empty string means the model default
  std::string lambda_c, gamma, h, alpha, theta, jz, j, delta, jx, b, a;
};

struct ParamAxis {
  std::string name;
  std::vector<double> values;
};

std::vector<ParamAxis> vm_axes(const VmArgs& va) {
  auto axis = [](const std::string& name, const std::string& spec,
                 double fallback) -> ParamAxis {
    if (spec.empty()) return {name, {fallback}};
    return {name, parse_grid(spec, "--" + name)};
  };
  if (va.model == "lmg")
    return {axis("lambda_c", va.lambda_c, 1.0), axis("gamma", va.gamma, 1.0),
            axis("h", va.h, 0.0)};
  if (va.model == "powerlaw")
    return {axis("alpha", va.alpha, 0.0), axis("theta", va.theta, 0.0)};
  if (va.model == "isingnn") return {axis("jz", va.jz, 1.0), axis("h", va.h, 0.0)};
  if (va.model == "xxz")
    return {axis("j", va.j, 1.0), axis("delta", va.delta, 1.0), axis("h", va.h, 0.0)};
  if (va.model == "ferroxxz")
    return {axis("jx", va.jx, 1.0), axis("jz", va.jz, 0.0), axis("b", va.b, 0.0)};
  if (va.model == "lipkin3") return {axis("a", va.a, 1.0), axis("b", va.b, 0.0)};
  throw std::invalid_argument("unknown model: " + va.model +
                              " (expected lmg, powerlaw, isingnn, xxz, ferroxxz, lipkin3)");
}

ModelSpec vm_spec(const VmArgs& va, const std::vector<double>& v) {
  ModelSpec spec;
  spec.n = va.n;
  if (va.model == "lmg")
    spec.model = Lmg{v[0], v[1], v[2]};
  else if (va.model == "powerlaw")
    spec.model = IsingPowerLaw{v[0], v[1]};
  else if (va.model == "isingnn")
    spec.model = IsingNn{v[0], v[1]};
  else if (va.model == "xxz")
    spec.model = XxzTransverse{v[0], v[1], v[2]};
  else if (va.model == "ferroxxz")
    spec.model = XxzPeriodic{v[0], v[1], v[2]};
  else
    spec.model = Lipkin3{v[0], v[1]};
  return spec;
}

int run_vm(const VmArgs& va) {
  check_writable(va.out);
  auto t0 = std::chrono::steady_clock::now();
  std::vector<ParamAxis> axes = vm_axes(va);

  std::vector<std::vector<double>> points{{}};
  for (const ParamAxis& ax : axes) {
    std::vector<std::vector<double>> next;
    next.reserve(points.size() * ax.values.size());
    for (const auto& p : points)
      for (double v : ax.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }

  std::vector<int> entropy_m = va.entropy_m.empty() ? std::vector<int>{va.m} : va.entropy_m;
  for (int em : entropy_m)
    if (em < 1 || em > va.n)
      throw std::invalid_argument("--entropy-m values must lie in [1, n]");

  std::string header;
  for (const ParamAxis& ax : axes) header += ax.name + ",";
  header += "energy,gap";
  for (int em : entropy_m) header += ",entropy_m" + std::to_string(em);
  if (va.with_ed) header += ",ed_energy,ratio,diff,fidelity";
  header += "\n";

  Checkpoint cp{va.out.empty() ? "" : va.out + ".checkpoint", header};
  std::string body;
  int done = va.resume ? load_checkpoint(cp, body, 1) : 0;

  SweepOptions so;
  so.entropy_m = entropy_m;
  so.with_ed = va.with_ed;
  so.threads = va.threads;
  so.tol_gap = va.tol_gap;

  bool any_failed = false;
  const int chunk = 100;
  for (int start = done; start < static_cast<int>(points.size()); start += chunk) {
    int stop = std::min<int>(start + chunk, points.size());
    std::vector<ModelSpec> grid;
    grid.reserve(stop - start);
    for (int i = start; i < stop; ++i) grid.push_back(vm_spec(va, points[i]));
    std::vector<SweepRow> rows = sweep(grid, so);
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      const SweepRow& row = rows[i];
      std::string line;
      for (double v : points[start + i]) line += format_double(v) + ",";
      if (row.error.empty()) {
        line += format_double(row.energy) + "," + format_double(row.solver_gap);
        for (double s : row.entropies) line += "," + format_double(s);
        if (va.with_ed)
          line += "," + opt_double(row.ed_energy) + "," + opt_double(row.energy_ratio) + "," +
                  opt_double(row.energy_diff) + "," + opt_double(row.ed_fidelity);
      } else {
        any_failed = true;
        std::fprintf(stderr, "point %d failed: %s\n", start + i, row.error.c_str());
        line += "nan,nan";
        for (std::size_t s = 0; s < entropy_m.size(); ++s) line += ",nan";
        if (va.with_ed) line += ",nan,nan,nan,nan";
      }
      body += line + "\n";
    }
    if (stop < static_cast<int>(points.size())) store_checkpoint(cp, body);
  }

  RunMetadata meta;
  meta.seed = va.seed;
  meta.tolerances = {{"tol_gap", va.tol_gap}};
  meta.extra = {{"command", "vm"}, {"model", va.model}, {"n", std::to_string(va.n)},
                {"m", std::to_string(va.m)}};
  for (const ParamAxis& ax : axes)
    meta.extra[ax.name + "_points"] = std::to_string(ax.values.size());
  meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_artifact(va.out, header + body, meta);
  clear_checkpoint(cp);
  return any_failed ? 1 : 0;
}

// ---------------------------------------------------------------------------
// compat: marginal feasibility verdicts
// ---------------------------------------------------------------------------

struct CompatArgs {
  std::string sigma_path, out, cache_dir, dump_sdp;
  int n = 0, threads = 0;
  double tol_gap = 1e-9, slack = 0.0;
};

int run_compat(const CompatArgs& ca) {
  check_writable(ca.out);
  check_writable(ca.dump_sdp);
  auto t0 = std::chrono::steady_clock::now();
  SymmetricOperator sigma = operator_from_json(read_text_file(ca.sigma_path));
  int m = sigma.basis().n(), d = sigma.basis().local_dim();
  if (ca.n <= m) throw std::invalid_argument("--n must exceed the marginal's party count");

  // Warm (or populate) the on-disk cache so repeated verdicts skip the build.
  CompatibilityMap map = cached_constraints(ca.cache_dir, ca.n, m, d, ca.threads);

  if (!ca.dump_sdp.empty()) {
    MarginalConstraintRows mc = marginal_constraint_rows(map, sigma.matrix());
    SdpProblem p;
    p.block_dims = {mc.block_dim};
    p.cost = {Mat::Zero(mc.block_dim, mc.block_dim)};
    p.constraints = mc.rows;
    p.rhs = mc.rhs;
    write_text_file(ca.dump_sdp, sdp_problem_dump(p));
  }

  FeasibilityOptions fo;
  fo.slack = ca.slack;
  fo.tol_gap = ca.tol_gap;
  fo.threads = ca.threads;
  FeasibilityReport rep = feasibility_check(sigma, ca.n, fo);

  const char* verdict = rep.status == FeasibilityReport::Status::Feasible     ? "feasible"
                        : rep.status == FeasibilityReport::Status::Infeasible ? "infeasible"
                                                                              : "inconclusive";
  nlohmann::ordered_json j;
  j["status"] = verdict;
  j["n"] = ca.n;
  j["m"] = m;
  j["d"] = d;
  j["t_star"] = rep.t_star;
  j["residual"] = rep.residual;
  j["solver_gap"] = rep.solver_gap;
  j["certificate_value"] = rep.certificate_value;
  j["certificate_psd_defect"] = rep.certificate_psd_defect;
  if (!rep.detail.empty()) j["detail"] = rep.detail;
  std::string report = j.dump();
  report += "\n";

  RunMetadata meta;
  meta.tolerances = {{"tol_gap", ca.tol_gap}, {"feasibility_slack", ca.slack}};
  meta.extra = {{"command", "compat"}, {"sigma", ca.sigma_path}, {"n", std::to_string(ca.n)}};
  meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_artifact(ca.out, report, meta);
  return rep.status == FeasibilityReport::Status::Inconclusive ? 1 : 0;
}

// ---------------------------------------------------------------------------
// bell: violation scans over measurement settings
// ---------------------------------------------------------------------------

struct BellArgs {
  std::string ineq = "dicke", out, state_path;
  int n = 2, grid = 64, threads = 0;
  double tol_gap = 1e-9;
};

int run_bell(const BellArgs& ba) {
  check_writable(ba.out);
  auto t0 = std::chrono::steady_clock::now();
  BellTag tag;
  if (ba.ineq == "6")
    tag = BellTag::Ineq6;
  else if (ba.ineq == "dicke")
    tag = BellTag::IneqDicke;
  else
    throw std::invalid_argument("unknown inequality: " + ba.ineq + " (expected 6 or dicke)");
  BellInequality ineq = make_inequality(tag, ba.n);

  ScanOptions so;
  so.grid = ba.grid;
  so.threads = ba.threads;
  so.vm.tol_gap = ba.tol_gap;
  so.vm.threads = ba.threads;
  bool fixed = !ba.state_path.empty();
  if (fixed) so.fixed_state = operator_from_json(read_text_file(ba.state_path));
  ScanResult scan = violation_scan(ineq, so);

  std::string csv = fixed ? "theta0,theta1,bell_value,classical_bound,Q\n"
                          : "delta_theta,bell_value,classical_bound,Q\n";
  for (const ScanRow& row : scan.rows) {
    if (fixed) csv += format_double(row.theta0) + ",";
    csv += format_double(fixed ? row.theta1 : row.theta1 - row.theta0) + "," +
           format_double(row.bell_value) + "," + format_double(ineq.classical_bound) + "," +
           format_double(row.q) + "\n";
  }
  for (const std::string& err : scan.errors)
    std::fprintf(stderr, "scan point failed: %s\n", err.c_str());

  RunMetadata meta;
  meta.tolerances = {{"tol_gap", ba.tol_gap}};
  meta.extra = {{"command", "bell"},
                {"ineq", ba.ineq},
                {"n", std::to_string(ba.n)},
                {"best_theta0", format_double(scan.best.theta0)},
                {"best_theta1", format_double(scan.best.theta1)},
                {"best_value", format_double(scan.best_value)},
                {"best_q", format_double(scan.best_q)}};
  meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_artifact(ba.out, csv, meta);
  std::fprintf(stderr, "best value %.12g (Q = %.6g) at theta0 = %.9g, theta1 = %.9g\n",
               scan.best_value, scan.best_q, scan.best.theta0, scan.best.theta1);
  return scan.errors.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// mps: amplitude-file conversion
// ---------------------------------------------------------------------------

struct MpsArgs {
  std::string amps_path, out;
  bool dense = false;
};

int run_mps(const MpsArgs& ma) {
  check_writable(ma.out);
  if (ma.dense && ma.out.empty())
    throw std::invalid_argument("--dense needs --out for the tensor file name");
  auto t0 = std::chrono::steady_clock::now();
  DickeAmplitudes amps = amplitudes_from_json(read_text_file(ma.amps_path));
  TIDiagonalMPS mps = dicke_to_mps(amps);
  std::string text = mps_to_json(mps);
  text += "\n";

  RunMetadata meta;
  meta.extra = {{"command", "mps"},
                {"amps", ma.amps_path},
                {"n", std::to_string(mps.n)},
                {"residual", format_double(mps.residual)},
                {"perturbation", format_double(mps.perturbation)}};
  meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_artifact(ma.out, text, meta);
  if (ma.dense) write_text_file(ma.out + ".tensors.json", mps_dense_tensors_json(mps) + "\n");
  std::fprintf(stderr, "bond dimension %d, reconstruction residual %.3g, perturbation %.3g\n",
               mps.bond_dim(), mps.residual, mps.perturbation);
  return 0;
}

// ---------------------------------------------------------------------------
// selftest: rank-versus-marginal uniqueness grids
// ---------------------------------------------------------------------------

struct SelftestArgs {
  std::string rank_spec, m_spec, out;
  int n = 0, d = 2, trials = 100, threads = 0;
  std::uint64_t seed = 0;
  double fidelity_threshold = 0.9999, tol_gap = 1e-9;
  bool resume = false;
};

int run_selftest(const SelftestArgs& sa) {
  check_writable(sa.out);
  auto t0 = std::chrono::steady_clock::now();
  std::vector<int> m_values = parse_int_grid(sa.m_spec, "--m");
  std::vector<int> rank_values = parse_int_grid(sa.rank_spec, "--rank");
  if (m_values.empty() || rank_values.empty())
    throw std::invalid_argument("--m and --rank must each list at least one value");

  RankSweepOptions ro;
  ro.trials = sa.trials;
  ro.fidelity_threshold = sa.fidelity_threshold;
  ro.tol_gap = sa.tol_gap;
  ro.threads = sa.threads;

  std::string header = "n,m,rank,trials,discarded,min_fidelity,unique\n";
  Checkpoint cp{sa.out.empty() ? "" : sa.out + ".checkpoint", header};
  std::string body;
  int done_rows = sa.resume ? load_checkpoint(cp, body, static_cast<int>(rank_values.size())) : 0;

  bool any_failed = false;
  for (int row = done_rows; row < static_cast<int>(m_values.size()); ++row) {
    // Rows are independent restart units; each derives its own seed stream.
    std::vector<RankSweepCell> cells = rank_sweep(
        sa.n, sa.d, {m_values[static_cast<std::size_t>(row)]}, rank_values,
        Rng::stream_seed(sa.seed, static_cast<std::uint64_t>(row)), ro);
    for (const RankSweepCell& cell : cells)
      if (!cell.error.empty()) {
        any_failed = true;
        std::fprintf(stderr, "cell m=%d rank=%d failed: %s\n", cell.m, cell.rank,
                     cell.error.c_str());
      }
    std::string csv = rank_sweep_csv(sa.n, cells);
    body += csv.substr(header.size());  // drop the repeated header line
    if (row + 1 < static_cast<int>(m_values.size())) store_checkpoint(cp, body);
  }

  RunMetadata meta;
  meta.seed = sa.seed;
  meta.tolerances = {{"tol_gap", sa.tol_gap}, {"fidelity_threshold", sa.fidelity_threshold}};
  meta.extra = {{"command", "selftest"}, {"n", std::to_string(sa.n)},
                {"d", std::to_string(sa.d)}, {"trials", std::to_string(sa.trials)},
                {"m", sa.m_spec},           {"rank", sa.rank_spec}};
  meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_artifact(sa.out, header + body, meta);
  clear_checkpoint(cp);
  return any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric-sector quantum marginal toolkit"};
  app.require_subcommand(1);

  VmArgs va;
  CLI::App* vm = app.add_subcommand("vm", "Variational ground-state sweep over a model grid");
  vm->set_help_flag("--help", "Print this help message and exit");  // frees -h for the field grid
  vm->add_option("--model", va.model,
                 "Model: lmg, powerlaw, isingnn, xxz, ferroxxz, lipkin3")
      ->capture_default_str();
  vm->add_option("--n", va.n, "Particle count (>= 2)")->required();
  vm->add_option("--m", va.m, "Reduction size the SDP couples through (sites)")
      ->capture_default_str();
  vm->add_option("--lambda-c", va.lambda_c, "Pair coupling grid (lmg; default 1)");
  vm->add_option("--gamma", va.gamma, "Anisotropy grid (lmg; default 1)");
  vm->add_option("--h", va.h, "Field grid (lmg/isingnn/xxz; default 0)");
  vm->add_option("--alpha", va.alpha, "Interaction-range exponent grid (powerlaw; default 0)");
  vm->add_option("--theta", va.theta,
                 "Interaction/field mixing angle grid, radians (powerlaw; default 0)");
  vm->add_option("--jz", va.jz, "z-coupling grid (isingnn default 1; ferroxxz default 0)");
  vm->add_option("--j", va.j, "Coupling sign/scale grid (xxz; default 1)");
  vm->add_option("--delta", va.delta, "Anisotropy grid (xxz; default 1)");
  vm->add_option("--jx", va.jx, "xy-coupling grid (ferroxxz; default 1)");
  vm->add_option("--b", va.b, "Longitudinal field grid (ferroxxz/lipkin3; default 0)");
  vm->add_option("--a", va.a, "Orbital splitting grid (lipkin3; default 1)");
  vm->add_option("--entropy-m", va.entropy_m,
                 "Reduction sizes whose entropy (bits) each row reports; default: the SDP m")
      ->delimiter(',');
  vm->add_flag("--with-ed", va.with_ed,
               "Attach exact-diagonalization reference energy, ratio, and fidelity columns");
  vm->add_option("--out", va.out, "CSV output path (stdout when omitted)");
  vm->add_option("--cache-dir", va.cache_dir, "Constraint cache directory (unused by vm)");
  vm->add_option("--seed", va.seed, "Seed recorded in the sidecar (vm itself is deterministic)")
      ->capture_default_str();
  vm->add_option("--threads", va.threads, "Worker threads; 0 means all cores")
      ->capture_default_str();
  vm->add_option("--tol-gap", va.tol_gap, "Solver duality-gap tolerance")->capture_default_str();
  vm->add_flag("--resume", va.resume, "Continue from <out>.checkpoint when present");

  CompatArgs ca;
  CLI::App* compat =
      app.add_subcommand("compat", "Decide whether a symmetric marginal extends to n parties");
  compat->add_option("--sigma", ca.sigma_path, "Marginal operator JSON file")->required();
  compat->add_option("--n", ca.n, "Total party count of the sought extension")->required();
  compat->add_option("--feasibility-slack", ca.slack,
                     "Extra tolerance added to the feasibility threshold")
      ->capture_default_str();
  compat->add_option("--tol-gap", ca.tol_gap, "Solver duality-gap tolerance")
      ->capture_default_str();
  compat->add_option("--cache-dir", ca.cache_dir, "Constraint cache directory");
  compat->add_option("--dump-sdp", ca.dump_sdp,
                     "Write the marginal equality system as a sparse text dump to this path");
  compat->add_option("--out", ca.out, "JSON report path (stdout when omitted)");
  compat->add_option("--threads", ca.threads, "Worker threads; 0 means all cores")
      ->capture_default_str();

  BellArgs ba;
  CLI::App* bell = app.add_subcommand("bell", "Scan measurement settings for Bell violations");
  bell->add_option("--ineq", ba.ineq, "Inequality family: 6 or dicke")->capture_default_str();
  bell->add_option("--n", ba.n, "Party count")->required();
  bell->add_option("--grid", ba.grid, "Coarse scan points per angle")->capture_default_str();
  bell->add_option("--state", ba.state_path,
                   "Operator JSON of a fixed state to evaluate (otherwise the state is optimized)");
  bell->add_option("--out", ba.out, "CSV output path (stdout when omitted)");
  bell->add_option("--threads", ba.threads, "Worker threads; 0 means all cores")
      ->capture_default_str();
  bell->add_option("--tol-gap", ba.tol_gap, "Solver duality-gap tolerance")
      ->capture_default_str();

  MpsArgs ma;
  CLI::App* mps =
      app.add_subcommand("mps", "Convert weight amplitudes to the diagonal matrix-product form");
  mps->add_option("--amps", ma.amps_path, "Amplitude JSON file {n, amplitudes}")->required();
  mps->add_option("--out", ma.out, "MPS JSON output path (stdout when omitted)");
  mps->add_flag("--dense", ma.dense, "Also write dense site tensors to <out>.tensors.json");

  SelftestArgs sa;
  CLI::App* selftest =
      app.add_subcommand("selftest", "Probe uniqueness of random states over a rank/m grid");
  selftest->add_option("--n", sa.n, "Party count")->required();
  selftest->add_option("--d", sa.d, "Local dimension")->capture_default_str();
  selftest->add_option("--rank", sa.rank_spec, "State rank grid, e.g. 1..15:15")->required();
  selftest->add_option("--m", sa.m_spec, "Marginal size grid, e.g. 1..14:14")->required();
  selftest->add_option("--trials", sa.trials, "Probe directions per grid cell")
      ->capture_default_str();
  selftest->add_option("--seed", sa.seed, "Master seed; rows derive independent streams")
      ->capture_default_str();
  selftest->add_option("--fidelity-threshold", sa.fidelity_threshold,
                       "Minimum-fidelity cutoff for the uniqueness verdict")
      ->capture_default_str();
  selftest->add_option("--tol-gap", sa.tol_gap, "Solver duality-gap tolerance")
      ->capture_default_str();
  selftest->add_option("--out", sa.out, "CSV output path (stdout when omitted)");
  selftest->add_option("--threads", sa.threads, "Worker threads; 0 means all cores")
      ->capture_default_str();
  selftest->add_flag("--resume", sa.resume, "Continue from <out>.checkpoint when present");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (vm->parsed()) return run_vm(va);
    if (compat->parsed()) return run_compat(ca);
    if (bell->parsed()) return run_bell(ba);
    if (mps->parsed()) return run_mps(ma);
    if (selftest->parsed()) return run_selftest(sa);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;  // unreachable: require_subcommand guarantees a branch above
}
