#include "symqmp/basis.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace symqmp {

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(log_binomial(n, k)));
}

double log_multinomial(const Partition& parts) {
  int n = 0;
  for (int p : parts) n += p;
  double lg = std::lgamma(n + 1.0);
  for (int p : parts) lg -= std::lgamma(p + 1.0);
  return lg;
}

static void enumerate_rec(int n, int d, Partition& cur, std::vector<Partition>& out) {
  if (d == 1) {
    cur.push_back(n);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int p = n; p >= 0; --p) {
    cur.push_back(p);
    enumerate_rec(n - p, d - 1, cur, out);
    cur.pop_back();
  }
}

std::vector<Partition> enumerate_partitions(int n, int d) {
  if (n < 0 || d < 1) throw std::invalid_argument("enumerate_partitions: need n >= 0, d >= 1");
  double dim = binomial(n + d - 1, d - 1);
  if (dim > 1e6) throw std::invalid_argument("enumerate_partitions: dimension exceeds 1e6 cap");
  std::vector<Partition> out;
  out.reserve(static_cast<std::size_t>(dim));
  Partition cur;
  enumerate_rec(n, d, cur, out);
  return out;
}

DickeBasis::DickeBasis(int n, int d) : n_(n), d_(d), parts_(enumerate_partitions(n, d)) {
  logm_.reserve(parts_.size());
  index_.reserve(parts_.size() * 2);
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    logm_.push_back(log_multinomial(parts_[i]));
    index_.emplace(parts_[i], static_cast<int>(i));
  }
}

int DickeBasis::index(const Partition& p) const {
  auto it = index_.find(p);
  return it == index_.end() ? -1 : it->second;
}

Partition weight_vector(std::uint64_t s, int n, int d) {
  Partition w(d, 0);
  for (int j = 0; j < n; ++j) {
    w[s % d] += 1;
    s /= d;
  }
  return w;
}

SymmetricOperator::SymmetricOperator(DickeBasis basis, CxMat m) : basis_(std::move(basis)), m_(std::move(m)) {
  int dim = basis_.dim();
  if (m_.rows() != dim || m_.cols() != dim)
    throw std::invalid_argument("SymmetricOperator: matrix does not match basis dimension");
  CxMat herm = 0.5 * (m_ + m_.adjoint());
  defect_ = (m_ - herm).norm();
  if (defect_ > 1e-10)
    std::fprintf(stderr, "warning: operator symmetrized, hermiticity defect %.3e\n", defect_);
  m_ = std::move(herm);
}

double SymmetricOperator::trace_error() const { return std::abs(m_.trace() - cxd(1.0, 0.0)); }

double SymmetricOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CxMat> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool SymmetricOperator::is_real(double tol) const {
  return m_.imag().cwiseAbs().maxCoeff() <= tol;
}

static std::uint64_t checked_power(int d, int n) {
  std::uint64_t t = 1;
  for (int j = 0; j < n; ++j) {
    t *= static_cast<std::uint64_t>(d);
    if (t > (1ull << 14)) throw std::invalid_argument("computational-space dimension exceeds 2^14 cap");
  }
  return t;
}

CxMat embedding_isometry(const DickeBasis& basis) {
  std::uint64_t full = checked_power(basis.local_dim(), basis.n());
  CxMat pi = CxMat::Zero(static_cast<Eigen::Index>(full), basis.dim());
  for (std::uint64_t s = 0; s < full; ++s) {
    int idx = basis.index(weight_vector(s, basis.n(), basis.local_dim()));
    pi(static_cast<Eigen::Index>(s), idx) = std::exp(-0.5 * basis.log_multiplicity(idx));
  }
  return pi;
}

CxMat embed_to_computational(const SymmetricOperator& op) {
  CxMat pi = embedding_isometry(op.basis());
  return pi * op.matrix() * pi.adjoint();
}

CxVec project_to_symmetric(const CxVec& psi, const DickeBasis& basis) {
  std::uint64_t full = checked_power(basis.local_dim(), basis.n());
  if (psi.size() != static_cast<Eigen::Index>(full))
    throw std::invalid_argument("project_to_symmetric: state size mismatch");
  CxVec v = CxVec::Zero(basis.dim());
  for (std::uint64_t s = 0; s < full; ++s) {
    int idx = basis.index(weight_vector(s, basis.n(), basis.local_dim()));
    v(idx) += std::exp(-0.5 * basis.log_multiplicity(idx)) * psi(static_cast<Eigen::Index>(s));
  }
  return v;
}

ProjectedOperator project_operator(const CxMat& m, const DickeBasis& basis) {
  CxMat pi = embedding_isometry(basis);
  CxMat sym = pi.adjoint() * m * pi;
  double discarded = std::real(m.trace()) - std::real(sym.trace());
  return {std::move(sym), discarded};
}

}  // namespace symqmp
