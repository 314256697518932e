#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symqmp/basis.hpp"
#include "symqmp/variational.hpp"

namespace symqmp {

// Two-setting qubit measurements in the xz plane:
// M_k = sin(theta_k) sigma_x + cos(theta_k) sigma_z.
struct MeasurementSettings {
  double theta0 = 0.0;
  double theta1 = 0.0;
};

// Angle folded into [0, 2 pi).
double reduce_angle(double theta);

CxMat measurement_operator(double theta);

enum class BellTag { Ineq6, IneqDicke };

// A two-body permutation-invariant Bell expression.  The classical bound is
// the exact minimum over deterministic local strategies; quantum values below
// it certify nonlocal correlations.
struct BellInequality {
  BellTag tag = BellTag::Ineq6;
  int n = 2;
  double classical_bound = 0.0;
};

BellInequality make_inequality(BellTag tag, int n);

// Exact minimum of the expression over deterministic local strategies,
// enumerated over outcome-assignment classes (the value depends only on how
// many parties share each of the four per-party assignments).
double lhv_minimum(const BellInequality& ineq);

// Two-qubit operator whose expectation on the pair reduction of a symmetric
// state equals the expression's left-hand side when every party measures with
// the same settings.
EffectiveHamiltonian bell_operator(const BellInequality& ineq, const MeasurementSettings& settings);

struct ScanRow {
  double theta0 = 0.0;
  double theta1 = 0.0;
  double bell_value = 0.0;
  double q = 0.0;  // (bell_value - classical_bound) / |classical_bound|
};

struct ScanOptions {
  int grid = 64;
  // When present, the scan evaluates this state instead of optimizing one.
  // A 2-party operator is taken as the pair reduction itself; an n-party
  // operator is reduced first.
  std::optional<SymmetricOperator> fixed_state;
  VmOptions vm;
  int threads = 0;
};

struct ScanResult {
  BellInequality ineq;
  std::vector<ScanRow> rows;  // coarse grid, in scan order
  MeasurementSettings best;   // after golden-section refinement
  double best_value = 0.0;
  double best_q = 0.0;
  std::optional<VmResult> best_state;  // state-optimizing mode only
  std::vector<std::string> errors;     // failed grid points, scan continued
};

// Minimizes the Bell value over measurement angles.  Without a fixed state
// the inner problem optimizes the symmetric state as well, and a common
// rotation of both settings is factored out, leaving a one-angle scan over
// the setting difference in [0, pi); with a fixed state both angles are
// scanned over [0, 2 pi)^2.  Ties in the argmin break toward smaller angles.
ScanResult violation_scan(const BellInequality& ineq, const ScanOptions& opts = {});

// Per-party measurement directions on the Bloch sphere for the free-settings
// evaluation; directions are normalized on use.
struct BlochSettings {
  std::vector<Eigen::Vector3d> m0;
  std::vector<Eigen::Vector3d> m1;
};

// Evaluates the expression on externally supplied reductions: one 4x4 matrix
// per party pair (keys (i, j) with i < j) and one 2x2 matrix per party.
// Pair reductions whose single-party marginals disagree with the supplied
// ones by more than 1e-6 draw a warning on stderr.
double evaluate_free_settings(const BellInequality& ineq,
                              const std::map<std::pair<int, int>, CxMat>& pair_rdms,
                              const std::map<int, CxMat>& single_rdms,
                              const BlochSettings& settings);

}  // namespace symqmp
