#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "symqmp/basis.hpp"
#include "symqmp/sdp.hpp"

namespace symqmp {

// Model parameter sets.  All couplings follow the defining Hamiltonians in
// the module sources; local dimension is 3 for Lipkin3 and 2 otherwise.
struct Lmg {
  double lambda_c = 1.0;  // pair coupling (>0 ferromagnetic)
  double gamma = 1.0;     // anisotropy
  double h = 0.0;         // transverse field
};
struct IsingPowerLaw {
  double alpha = 0.0;  // interaction-range exponent (>= 0)
  double theta = 0.0;  // interaction/field mixing angle, radians
};
struct IsingNn {
  double jz = 1.0;  // bond coupling (>0 ferromagnetic)
  double h = 0.0;   // transverse field
};
struct XxzTransverse {
  double j = 1.0;      // +1 ferro, -1 antiferro
  double delta = 1.0;  // anisotropy
  double h = 0.0;      // field along x
};
struct XxzPeriodic {
  double jx = 1.0;  // xy coupling (>= 0)
  double jz = 0.0;  // z coupling (>= 0)
  double b = 0.0;   // field along z
};
struct Lipkin3 {
  double a = 1.0;  // orbital splitting
  double b = 0.0;  // pair interaction
};

using ModelParams = std::variant<Lmg, IsingPowerLaw, IsingNn, XxzTransverse, XxzPeriodic, Lipkin3>;

struct ModelSpec {
  ModelParams model;
  int n = 2;  // particle count, >= 2

  int local_dim() const { return std::holds_alternative<Lipkin3>(model) ? 3 : 2; }
  const char* name() const;
  void validate() const;
};

// Sum of |i-j|^-alpha over pairs of an n-site chain.
double power_law_coupling_sum(int n, double alpha);

// Two-site reduction of a permutation-invariant model: `matrix` acts on two
// sites (d^2 x d^2) and carries all n-dependent prefactors, so that the model
// energy of a symmetric state equals <matrix, pair RDM>.
struct EffectiveHamiltonian {
  int m = 2;
  CxMat matrix;                           // d^m x d^m, Hermitian
  SymmetricOperator symmetric_projection; // same operator compressed to the symmetric sector
};

EffectiveHamiltonian effective_hamiltonian(const ModelSpec& spec);

// Lifts an m-site operator (given in the symmetric basis) to the n-site
// symmetric sector: the result C satisfies <C, rho> = <op, trace_down(rho, m)>
// for every n-site symmetric rho.
Mat lift_to_full(const SymmetricOperator& op, int n, int threads = 0);

struct VmOptions {
  double tol_gap = 1e-9;
  int max_iter = 200;
  int threads = 0;
};

struct VmResult {
  double energy = 0.0;            // variational ground-state energy
  SymmetricOperator rho;          // optimizing n-party symmetric state
  SymmetricOperator sigma;        // its m-party reduction
  double solver_gap = 0.0;        // relative duality gap at termination
  SdpStatus solver_status = SdpStatus::Optimal;
};

// Minimum of the model energy over symmetric n-party states, computed as a
// semidefinite program over the full symmetric-sector density matrix.
VmResult ground_state_vm(const ModelSpec& spec, int m = 2, const VmOptions& opts = {});

// Same optimization for an arbitrary few-site cost operator (given in the
// symmetric basis of its own site count): minimizes <op, trace_down(rho)>
// over symmetric n-party states.  The returned reduction has m parties.
VmResult minimize_pair_operator(const SymmetricOperator& op, int n, int m = 2,
                                const VmOptions& opts = {});

// Entropy (bits) of the m-party reduction of rho; eigenvalues below 1e-12
// are clipped to zero.
double entanglement_entropy(const SymmetricOperator& rho, int m);

// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 for density matrices of
// equal dimension.
double fidelity(const CxMat& a, const CxMat& b);
double fidelity(const SymmetricOperator& a, const SymmetricOperator& b);

// Ground-state label k for the periodic XXZ chain as a function of the field:
// the window -((n-2k+1)/(n-1)) dj < b < -((n-2k-1)/(n-1)) dj with
// dj = jx - jz > 0 selects the k-excitation Dicke state.
int xxz_periodic_ground_k(double b, double jx, double jz, int n);

struct SweepOptions {
  std::vector<int> entropy_m;  // reductions whose entropy each row reports
  bool with_ed = false;        // attach exact-diagonalization reference data
  int threads = 0;             // parallelism across grid points
  double tol_gap = 1e-9;
  int max_iter = 200;
};

struct SweepRow {
  int index = 0;
  ModelSpec spec;
  double energy = 0.0;
  double solver_gap = 0.0;
  std::vector<double> entropies;
  std::optional<double> ed_energy;    // with_ed only
  std::optional<double> energy_ratio; // vm/ed, absent when |ed| < 1e-9
  std::optional<double> energy_diff;  // vm-ed fallback when the ratio is unstable
  std::optional<double> ed_fidelity;  // overlap of the ED ground state with rho
  std::string error;                  // nonempty when this point failed
};

// Runs ground_state_vm over a parameter grid; points are independent jobs and
// rows come back ordered by grid index.  Per-point failures are recorded in
// the row and do not abort the sweep.
std::vector<SweepRow> sweep(const std::vector<ModelSpec>& grid, const SweepOptions& opts = {});

}  // namespace symqmp
