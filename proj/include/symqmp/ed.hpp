#pragma once

#include <vector>

#include "symqmp/basis.hpp"
#include "symqmp/variational.hpp"

namespace symqmp {

// A pure state of n qudits in the computational basis; site 0 is the most
// significant digit of the basis index.
struct FullState {
  int n = 0;
  int d = 2;
  CxVec amplitudes;
};

struct EdResult {
  double energy = 0.0;
  FullState state;
  double gap = 0.0;        // distance to the next eigenvalue
  bool degenerate = false; // gap below 1e-10
};

// Literal sum of the model's site and pair terms on the full d^n space.
// All implemented models are real in the computational basis.
// Requires d^n <= 16384.
Mat build_full_hamiltonian(const ModelSpec& spec);

// Dense ground-state eigensolve of build_full_hamiltonian.
EdResult ground_state_ed(const ModelSpec& spec);

// Reduced density matrix on the given (0-based, distinct) sites, indexed in
// the order they are listed.  Requires d^|keep| <= 4096.
CxMat reduced_density(const FullState& psi, const std::vector<int>& keep);

// Overlap <psi| P rho P* |psi> of a pure computational-basis state with a
// symmetric-sector density matrix (P embeds the symmetric sector).
double fidelity_with_symmetric(const FullState& psi, const SymmetricOperator& rho);

}  // namespace symqmp
