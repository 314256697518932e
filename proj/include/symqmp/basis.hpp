#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace symqmp {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CxVec = Eigen::VectorXcd;
using CxMat = Eigen::MatrixXcd;

// Occupation vector: d nonnegative parts summing to n.
using Partition = std::vector<int>;

// All d-part compositions of n in lexicographically descending order:
// (n,0,...,0) first, (0,...,0,n) last.  For d=2, index k holds (n-k, k),
// i.e. the index equals the excitation count.  This order is frozen; every
// matrix in the package is written against it.
std::vector<Partition> enumerate_partitions(int n, int d);

// log n! / (p_0! ... p_{d-1}!)
double log_multinomial(const Partition& parts);
double log_binomial(int n, int k);
double binomial(int n, int k);

struct PartitionHash {
  std::size_t operator()(const Partition& p) const {
    std::size_t h = 1469598103934665603ull;
    for (int v : p) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

class DickeBasis {
 public:
  DickeBasis(int n, int d);

  int n() const { return n_; }
  int local_dim() const { return d_; }
  int dim() const { return static_cast<int>(parts_.size()); }
  const Partition& partition(int idx) const { return parts_[idx]; }
  const std::vector<Partition>& partitions() const { return parts_; }
  // -1 when p is not a d-part composition of n
  int index(const Partition& p) const;
  // log C(n; partition(idx)) = log of the number of strings with that occupation
  double log_multiplicity(int idx) const { return logm_[idx]; }

 private:
  int n_, d_;
  std::vector<Partition> parts_;
  std::vector<double> logm_;
  std::unordered_map<Partition, int, PartitionHash> index_;
};

// Occupation counts of the computational basis state s, base-d digits,
// site 0 = most significant digit.
Partition weight_vector(std::uint64_t s, int n, int d);

// Hermitian matrix expressed in a Dicke basis.  The constructor symmetrizes
// (M + M^dagger)/2 and records the pre-symmetrization defect; a defect above
// 1e-10 prints a warning to stderr.
class SymmetricOperator {
 public:
  SymmetricOperator(DickeBasis basis, CxMat m);

  const DickeBasis& basis() const { return basis_; }
  const CxMat& matrix() const { return m_; }
  CxMat& matrix() { return m_; }
  double hermiticity_defect() const { return defect_; }
  double trace_error() const;  // |tr - 1|
  double min_eigenvalue() const;
  bool is_real(double tol = 1e-14) const;

 private:
  DickeBasis basis_;
  CxMat m_;
  double defect_ = 0.0;
};

// Columns are normalized Dicke states in the d^n computational space.
// Guarded: d^n must stay at or below 2^14.
CxMat embedding_isometry(const DickeBasis& basis);

// Pi rho Pi^dagger as a d^n x d^n matrix.
CxMat embed_to_computational(const SymmetricOperator& op);

// v = Pi^dagger psi
CxVec project_to_symmetric(const CxVec& psi, const DickeBasis& basis);

// Pi^dagger M Pi plus the trace weight lost by the projection.
struct ProjectedOperator {
  CxMat sym;
  double discarded_weight;
};
ProjectedOperator project_operator(const CxMat& m, const DickeBasis& basis);

}  // namespace symqmp
