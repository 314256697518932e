#pragma once

#include <vector>

#include "symqmp/basis.hpp"

namespace symqmp {

// One nonzero of a block-diagonal symmetric matrix; row <= col, the mirrored
// entry is implicit.
struct SdpEntry {
  int block, row, col;
  double value;
};

// min <C,X> + free_cost.u  s.t.  <A_i,X> + (free_coeffs u)_i = rhs_i,
// X block-diagonal PSD, u unconstrained.
struct SdpProblem {
  std::vector<int> block_dims;
  std::vector<Mat> cost;                           // dense, one per block
  std::vector<std::vector<SdpEntry>> constraints;  // sparse, upper triangle
  std::vector<double> rhs;
  int free_vars = 0;
  Mat free_coeffs;  // rows() == #constraints when free_vars > 0
  Vec free_cost;

  void validate() const;  // throws on shape mismatch, asymmetry, NaN
};

enum class SdpStatus { Optimal, PrimalInfeasible, DualInfeasible, IterLimit };

const char* to_string(SdpStatus s);

struct SdpSolution {
  std::vector<Mat> X, S;
  Vec y;            // full length; presolve-dropped rows carry 0
  Vec free_values;
  SdpStatus status = SdpStatus::IterLimit;
  double primal_objective = 0.0, dual_objective = 0.0;
  double gap = 0.0;  // |p - d| / (1 + |p| + |d|)
  double primal_residual = 0.0, dual_residual = 0.0;
  int iterations = 0;
  std::vector<int> dropped_rows;
};

struct SdpOptions {
  double tol_gap = 1e-9;
  double tol_feas = 1e-9;
  int max_iter = 200;
  double step_scale = 0.98;  // fraction to the cone boundary
  int threads = 0;           // 0: leave the OpenMP default alone
  bool verbose = false;
};

// Primal-dual path following, HKM scaling, Mehrotra predictor-corrector,
// dense Cholesky of the Schur complement.  Deterministic for any thread
// count: parallel loops assign whole output slots and each slot is summed in
// a fixed serial order.
SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {});

struct ConeFeasibility {
  bool feasible = false;
  double t_star = 0.0;  // min t with X + t I >= 0 meeting the constraints
  SdpSolution solution; // solution.X is the shifted PSD variable
};

// min t s.t. <A_i, X> - t tr(A_i) = rhs_i, X >= 0 over a single dim x dim
// block.  Empty constraint sets short-circuit to Feasible with X = I/dim.
ConeFeasibility solve_feasibility(const std::vector<std::vector<SdpEntry>>& constraints,
                                  const std::vector<double>& rhs, int dim,
                                  const SdpOptions& opts = {}, double threshold = 1e-8);

// [[X, -Y], [Y, X]] for h = X + iY
Mat realify(const CxMat& h);
// (Z11+Z22)/2 + i(Z21-Z12)/2, PSD whenever z is
CxMat unrealify(const Mat& z);

// <A, M> honoring the implicit mirror; M need not be symmetric
double sparse_inner(const std::vector<SdpEntry>& a, const std::vector<Mat>& m);
void add_scaled(std::vector<Mat>& acc, const std::vector<SdpEntry>& a, double scale);

// Schur complement B_ij = <A_i, X A_j S^{-1}>; exposed for tests/benchmarks
Mat schur_complement(const std::vector<std::vector<SdpEntry>>& constraints,
                     const std::vector<Mat>& X, const std::vector<Mat>& Sinv, int threads);
Mat schur_complement_serial(const std::vector<std::vector<SdpEntry>>& constraints,
                            const std::vector<Mat>& X, const std::vector<Mat>& Sinv);

}  // namespace symqmp
