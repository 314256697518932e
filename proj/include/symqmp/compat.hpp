#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symqmp/basis.hpp"
#include "symqmp/sdp.hpp"

namespace symqmp {

struct CompatEntry {
  int row, col;  // indices into the n-party Dicke basis
  double value;
};

// For every ordered pair (alpha, beta) of m-party occupations, the sparse
// n-party matrix A^alpha_beta with <A^alpha_beta, rho> = sigma^alpha_beta.
// Entry (lambda, mu) is nonzero only when lambda-alpha = mu-beta is a valid
// occupation of n-m parties; each matrix has at most dim(n-m) nonzeros and
// (A^alpha_beta)^T = A^beta_alpha.
class CompatibilityMap {
 public:
  CompatibilityMap(int n, int m, int d, int threads = 0);
  // deserialization path
  CompatibilityMap(int n, int m, int d, std::vector<std::vector<CompatEntry>> mats);

  int n() const { return n_; }
  int m() const { return m_; }
  int local_dim() const { return d_; }
  const DickeBasis& full_basis() const { return bn_; }
  const DickeBasis& reduced_basis() const { return bm_; }
  int reduced_dim() const { return bm_.dim(); }
  const std::vector<CompatEntry>& entries(int alpha, int beta) const {
    return mats_[static_cast<std::size_t>(alpha) * bm_.dim() + beta];
  }
  const std::vector<std::vector<CompatEntry>>& all() const { return mats_; }

  // sigma[alpha,beta] = sum over entries of value * rho[row,col]
  CxMat apply(const CxMat& rho) const;

 private:
  int n_, m_, d_;
  DickeBasis bn_, bm_;
  std::vector<std::vector<CompatEntry>> mats_;
};

// Parallel over (alpha, beta) slots; each slot is accumulated in a fixed
// serial order, so the result is bitwise-identical for any thread count.
CompatibilityMap build_constraints(int n, int m, int d, int threads = 0);
// straight-loop twin kept for testing and benchmarks
CompatibilityMap build_constraints_serial(int n, int m, int d);

SymmetricOperator partial_trace_symmetric(const SymmetricOperator& rho, int m);

// Reduced state of a symmetric rho written in the d^m computational basis,
// i.e. Pi_m sigma Pi_m^dagger.
CxMat partial_trace_computational(const SymmetricOperator& rho, int m);

// Marginal-matching equalities as sparse rows over the realified embedding
// Z = [[X,-Y],[Y,X]] of an extension candidate rho = X + iY: a PSD Z meeting
// every row is exactly a symmetric extension of sigma (read rho back with
// unrealify).  Building block for any SDP that optimizes over the extensions
// of a fixed marginal.
struct MarginalConstraintRows {
  std::vector<std::vector<SdpEntry>> rows;
  std::vector<double> rhs;
  int block_dim = 0;  // 2 * dim of the n-party symmetric sector
};

MarginalConstraintRows marginal_constraint_rows(const CompatibilityMap& map, const CxMat& sigma);

struct FeasibilityOptions {
  double slack = 0.0;        // tolerance added to the feasibility threshold
  double tol_gap = 1e-9;     // solver tolerances
  int max_iter = 200;
  int threads = 0;
};

struct FeasibilityReport {
  enum class Status { Feasible, Infeasible, Inconclusive };
  Status status = Status::Inconclusive;
  std::optional<SymmetricOperator> witness;  // extension rho when Feasible
  double residual = 0.0;                     // max constraint violation of the witness
  double t_star = 0.0;                       // minimal eigenvalue shift
  double solver_gap = 0.0;
  std::vector<double> farkas_certificate;    // dual vector when Infeasible
  double certificate_value = 0.0;            // sigma^T y > 0 for a separating dual
  double certificate_psd_defect = 0.0;       // max eigenvalue of sum_i y_i A_i (<= 0 ideally)
  double discarded_weight = 0.0;             // projection loss for computational inputs
  std::string detail;
};

FeasibilityReport feasibility_check(const SymmetricOperator& sigma, int n,
                                    const FeasibilityOptions& opts = {});

// General d^m input: project into the symmetric sector first; a projection that
// loses trace weight beyond the slack is Infeasible outright (the constraints
// force tr(rho) = tr(sigma), so no density-matrix extension exists).
FeasibilityReport feasibility_check_computational(const CxMat& sigma_full, int m, int n, int d,
                                                  const FeasibilityOptions& opts = {});

}  // namespace symqmp
