#pragma once

#include <stdexcept>
#include <vector>

#include "symqmp/basis.hpp"

namespace symqmp {

// Translationally invariant diagonal matrix-product representation of
// permutation-symmetric qubit states.
//
// A symmetric n-qubit state is fixed by its weight amplitudes d_0..d_n (the
// coefficients on the normalized fixed-weight basis states).  With diagonal
// site tensors A_0 = diag(a0), A_1 = diag(a1) of bond dimension D, the
// amplitude of any single computational string of weight k is
//     sum_a a0[a]^(n-k) * a1[a]^k
// independent of where the ones sit, so the represented state is symmetric by
// construction and d_k = sqrt(C(n,k)) times that string amplitude.
//
// The canonical construction uses D = n with A_0 = y*I:
//     y   = (d_0 / n)^(1/n)                     (principal branch)
//     z_k = d_k / (y^(n-k) * sqrt(C(n,k))),     k = 1..n
// and recovers a1 as the n roots of the monic degree-n polynomial whose root
// power sums are z_1..z_n (Newton's identities give the coefficients, a
// companion matrix plus Newton polishing gives the roots).

// Weight-basis amplitudes d_k, k = 0..n.  Not necessarily normalized; the
// conversion entry point requires unit norm.
struct DickeAmplitudes {
  int n = 0;
  CxVec d;  // length n+1

  double norm_error() const;  // | sum_k |d_k|^2 - 1 |
  void validate() const;      // throws std::invalid_argument on bad shape
};

// The scalar y and the power-sum targets z_k extracted from an amplitude
// vector.  A vanishing d_0 is nudged by a small recorded perturbation so that
// y stays finite; all downstream residuals are measured against the nudged
// target amplitudes.
struct PowerSums {
  int n = 0;
  cxd y{0.0, 0.0};
  CxVec z;                    // length n; z[k-1] holds z_k
  double perturbation = 0.0;  // nudge added to d_0 (0 when none was needed)
  CxVec target_d;             // amplitudes actually encoded (post-nudge)
};

// Monic polynomial sum_k c[k] X^k, highest coefficient c[degree()] == 1.
struct CharPolyCoeffs {
  CxVec c;  // length degree+1
  int degree() const { return static_cast<int>(c.size()) - 1; }
};

// Diagonal TI matrix-product state: site tensors A_0 = diag(a0),
// A_1 = diag(a1) shared by all n sites.
//
// a1_lo holds optional second-word corrections to a1.  The conversion solves
// for the roots in compensated (double-double) arithmetic; states whose roots
// span many orders of magnitude are only reproduced to the contracted 1e-8
// residual if those extra bits survive, so the reconstruction reads a1 + a1_lo
// pairwise.  Direct constructions leave it empty (treated as zero).
struct TIDiagonalMPS {
  int n = 0;
  CxVec a0;     // length D
  CxVec a1;     // length D
  CxVec a1_lo;  // empty, or length D

  double perturbation = 0.0;  // copied from the conversion's PowerSums
  double residual = 0.0;      // reconstruction residual reported on conversion

  // Canonical form A_0 = y*I, A_1 = diag(roots); D = roots.size().
  static TIDiagonalMPS from_roots(int n, cxd y, CxVec roots);

  int bond_dim() const { return static_cast<int>(a0.size()); }
  bool uniform_a0(double tol = 1e-12) const;
  // The uniform diagonal value of A_0; throws std::logic_error unless
  // uniform_a0().
  cxd y() const;
  // Diagonal of A_1 (the polynomial roots in the canonical form).
  const CxVec& roots() const { return a1; }

  // sum_a a0[a]^(n-k) a1[a]^k: amplitude of one weight-k string.
  cxd weight_amplitude(int k) const;
  // Trace of the ordered site-tensor product for an explicit bit string
  // (entries 0/1, length n).  Equal to weight_amplitude(weight) up to
  // summation order.
  cxd string_amplitude(const std::vector<int>& bits) const;

  void validate() const;  // shape checks, throws std::invalid_argument
};

// Thrown when a conversion's reconstruction residual exceeds 1e-6: the state
// has no accurate bond-n diagonal representation at working precision (the
// single-excitation state is the canonical example).
struct ConversionDegenerate : std::runtime_error {
  double residual;
  explicit ConversionDegenerate(double r);
};

// y and z_k from the amplitude system above.  A d_0 below 1e-13 * max|d_k| is
// nudged up by 1e-8 * max|d_k| (recorded in the result).  Throws
// std::invalid_argument for an all-zero amplitude vector.
PowerSums power_sums_from_amplitudes(const DickeAmplitudes& d);

// Coefficients of the monic polynomial whose root power sums are z, via the
// Newton-identity recurrence m*c[n-m] = -sum_{i=1..m} z_i*c[n-m+i] evaluated
// in compensated arithmetic.  For m <= 6 and moderate |z| the result is
// cross-checked against the determinant formula below; disagreement beyond
// 1e-9 throws std::logic_error.
CharPolyCoeffs char_poly_from_power_sums(const CxVec& z);
CharPolyCoeffs char_poly_from_power_sums(const PowerSums& p);

// Independent determinant route to the same coefficient: c[n-m] equals
// (-1)^m/m! times the determinant of the m x m lower-Hessenberg matrix with
// first column z_1..z_m, constant superdiagonal m-1, m-2, ..., 1, and
// z-valued lower bands.  Exposed for cross-checking; O(m^3) per coefficient.
cxd char_poly_coeff_determinant(const CxVec& z, int m);

// All degree() roots of a monic polynomial: companion-matrix eigenvalues
// refined by compensated Newton iterations.  Requires |c_top - 1| <= 1e-12.
CxVec roots(const CharPolyCoeffs& coeffs);

// Full conversion: amplitudes -> canonical bond-n diagonal representation.
// Requires unit norm (1e-8).  The result reports the reconstruction residual
//     || reconstruct - target ||_2 / || target ||_2
// against the (possibly nudged) target amplitudes; a residual above 1e-6
// throws ConversionDegenerate instead.
TIDiagonalMPS dicke_to_mps(const DickeAmplitudes& d);

// Weight amplitudes realized by a diagonal representation:
// d_k = sqrt(C(n,k)) * weight_amplitude(k).
DickeAmplitudes reconstruct_dicke(const TIDiagonalMPS& mps);

// Explicit bond-2 family converging to the single-excitation state as
// eps -> 0: reconstructed weight-k string amplitudes are 0 for even k and
// eps^((k-1)/(n-1)) for odd k.  Requires n >= 2, eps > 0.
TIDiagonalMPS w_state_mps(int n, double eps);

// Partition-indexed coefficient polynomial: m! times the X^(deg-m)
// coefficient of the monic polynomial with root power sums z, evaluated as a
// sum over partitions of m with exact integer weights.  The absolute weights
// sum to m! (signed count of permutations by cycle type); that identity is
// verified on every call.  Requires 0 <= m <= 12 and z.size() >= m.
cxd q_polynomial(int m, const CxVec& z);

// |Q_4(z)| for degree-4 power sums z_1..z_4: zero exactly when the power sums
// are realizable with three values x_1..x_3, i.e. when the corresponding
// state admits a bond-3 diagonal representation.  Requires z.size() == 4.
double bond_compat_residual_n4_D3(const CxVec& z);

}  // namespace symqmp
