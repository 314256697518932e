#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symqmp/basis.hpp"

namespace symqmp {

// Screening for marginal uniqueness: a symmetric state whose m-party
// reduction admits more than one symmetric extension cannot be identified
// from that reduction alone.  The probe explores the extension set of a
// fixed marginal by repeatedly optimizing random linear functionals over it
// and watching the fidelity with the original state; the Dicke-diagonal
// linear system decides the question exactly for excitation basis states.

// rho = G G^dagger / tr(G G^dagger) with G a dim x rank matrix of standard
// complex Gaussians drawn from the seeded deterministic generator (entries
// filled row-major).  The numerical rank (eigenvalues above 1e-12 times the
// largest) equals the requested rank.
SymmetricOperator random_symmetric_state(int n, int d, int rank, std::uint64_t seed);

struct ProbeOptions {
  int trials = 100;
  double fidelity_threshold = 0.9999;  // uniqueness verdict cutoff
  double tol_gap = 1e-9;               // solver tolerances
  int max_iter = 200;
  int threads = 0;                     // parallelism across trials
  // When nonempty (size == trials), these Hermitian matrices replace the
  // random directions; each is symmetrized and scaled to unit Frobenius norm.
  std::vector<CxMat> directions;
};

struct UniquenessReport {
  int n = 0, m = 0;
  int rank = 0;              // numerical rank of the probed state
  int trials = 0;
  int discarded = 0;         // trials the solver could not close
  double min_fidelity = 1.0; // worst fidelity among kept trials
  bool unique = false;       // min_fidelity > threshold
  std::uint64_t seed = 0;    // master seed
  std::vector<std::uint64_t> trial_seeds;  // derived per-trial seeds, for replay
  std::vector<double> fidelities;          // per trial; NaN marks a discarded trial
  std::vector<int> solution_ranks;         // per trial; -1 marks a discarded trial
  double max_constraint_residual = 0.0;    // worst marginal mismatch of any recovered state
  // When every kept trial's recovered state has the same numerical rank, the
  // extension set is a strong candidate for being a single point; recorded
  // for cross-checking against the fidelity verdict.
  bool solution_ranks_equal = false;
  int shared_solution_rank = -1;

  void validate() const;  // throws on out-of-range fields
};

// For each trial, draws a random Hermitian direction A (Gaussian Hermitian
// ensemble, unit Frobenius norm), minimizes -<A, rho'> over the symmetric
// extensions rho' of the m-party reduction of rho, and records the fidelity
// F(rho, rho').  min over trials decides uniqueness at the threshold.
// Throws when more than 10% of trials are discarded as inconclusive.
UniquenessReport uniqueness_probe(const SymmetricOperator& rho, int m, std::uint64_t seed,
                                  const ProbeOptions& opts = {});

// The diagonal marginal-matching equations for a qubit excitation basis
// state |k> of n parties reduced to m parties, in the scaled variables
// x_p = rho^p_p * C(n,k) / C(n,p):
//   sum_p C(n-m, p-i) x_p = C(n-m, k-i),  i = 0..m
// (binomials vanish outside their range).  x = e_k always solves.
struct DickeTraceSystem {
  int n = 0, k = 0, m = 0;
  Mat matrix;  // (m+1) x (n+1), entry (i,j) = C(n-m, j-i)
  Vec rhs;     // length m+1
};

struct DickeTraceAnalysis {
  DickeTraceSystem system;
  // Columns pinned to zero: every zero-rhs row has nonnegative coefficients,
  // so nonnegativity forces its whole support to vanish.
  std::vector<int> forced_zero;
  bool zero_rows_present = false;
  // m > n/2: zero-rhs rows exist for every k, so the forcing argument always
  // has material to work with.
  bool cascade_applicable = false;
  // Certified: after forcing, the surviving columns are uniquely determined
  // and equal e_k, so x = e_k is the only nonnegative solution.  false means
  // "not certified by this argument", not a disproof of uniqueness.
  bool unique = false;
  Vec solution;  // the certified solution (== e_k) when unique; empty otherwise
};

DickeTraceAnalysis dicke_trace_lp(int n, int k, int m);

struct RankSweepOptions {
  int trials = 100;
  double fidelity_threshold = 0.9999;
  double tol_gap = 1e-9;
  int max_iter = 200;
  int threads = 0;  // parallelism across grid cells
};

struct RankSweepCell {
  int m = 0, rank = 0;
  UniquenessReport report;
  std::string error;  // nonempty when this cell failed; report is then default
};

// For every (m, rank) pair, draws a fresh random symmetric state of that
// rank and probes it.  Cells are independent jobs seeded from the master by
// cell index (row-major over m_values x rank_values) and come back in that
// order regardless of thread count.
std::vector<RankSweepCell> rank_sweep(int n, int d, const std::vector<int>& m_values,
                                      const std::vector<int>& rank_values, std::uint64_t seed,
                                      const RankSweepOptions& opts = {});

// CSV with header n,m,rank,trials,discarded,min_fidelity,unique; failed
// cells carry nan fidelity and unique = 0.
std::string rank_sweep_csv(int n, const std::vector<RankSweepCell>& cells);

}  // namespace symqmp
