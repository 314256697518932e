#include "symqmp/ed.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace symqmp {

namespace {

constexpr long kFullCap = 16384;   // d^n bound for dense work
constexpr long kReducedCap = 4096; // d^|keep| bound for reduced densities

long checked_dim(int d, int n, const char* who) {
  long dim = 1;
  for (int i = 0; i < n; ++i) {
    dim *= d;
    if (dim > kFullCap) throw std::invalid_argument(std::string(who) + ": d^n exceeds cap");
  }
  return dim;
}

Mat rkron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat sx() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Mat sz() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
// sigma_y x sigma_y is real even though sigma_y is not
Mat syy() {
  Mat m = Mat::Zero(4, 4);
  m(0, 3) = -1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 0) = -1;
  return m;
}
Mat unit3(int i, int j) {
  Mat m = Mat::Zero(3, 3);
  m(i, j) = 1;
  return m;
}

struct Terms {
  std::vector<std::tuple<int, int, Mat>> pairs; // (site p, site q, d^2 x d^2)
  Mat single;                                   // d x d, applied on every site
};

Terms model_terms(const ModelSpec& spec) {
  Terms t;
  int n = spec.n;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Lmg>) {
          Mat h2 = -(m.lambda_c / n) * (rkron(sx(), sx()) + m.gamma * syy());
          for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) t.pairs.emplace_back(p, q, h2);
          t.single = -m.h * sz();
        } else if constexpr (std::is_same_v<T, IsingPowerLaw>) {
          Mat zz = rkron(sz(), sz());
          for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
              t.pairs.emplace_back(p, q, Mat(std::sin(m.theta) * std::pow(q - p, -m.alpha) * zz));
          t.single = std::cos(m.theta) * sx();
        } else if constexpr (std::is_same_v<T, IsingNn>) {
          Mat h2 = -m.jz * rkron(sz(), sz());
          for (int p = 0; p + 1 < n; ++p) t.pairs.emplace_back(p, p + 1, h2);
          t.single = -m.h * sx();
        } else if constexpr (std::is_same_v<T, XxzTransverse>) {
          Mat h2 = -m.j * (rkron(sx(), sx()) + syy() + m.delta * rkron(sz(), sz()));
          for (int p = 0; p + 1 < n; ++p) t.pairs.emplace_back(p, p + 1, h2);
          t.single = m.h * sx();
        } else if constexpr (std::is_same_v<T, XxzPeriodic>) {
          Mat h2 = -m.jx * (rkron(sx(), sx()) + syy()) - m.jz * rkron(sz(), sz());
          // one bond per site including the wrap-around; for n = 2 the two
          // bonds coincide and the coupling legitimately doubles
          for (int p = 0; p < n; ++p) t.pairs.emplace_back(p, (p + 1) % n, h2);
          t.single = m.b * sz();
        } else if constexpr (std::is_same_v<T, Lipkin3>) {
          Mat h2 = Mat::Zero(9, 9);
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              if (i != j) h2 += rkron(unit3(i, j), unit3(i, j));
          h2 *= 2.0 * m.b; // ordered site pairs collapse onto unordered ones
          for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) t.pairs.emplace_back(p, q, h2);
          t.single = m.a * (unit3(0, 0) - unit3(2, 2));
        }
      },
      spec.model);
  return t;
}

void add_single(Mat& ham, int n, int d, int site, const Mat& h1) {
  long stride = 1;
  for (int s = site + 1; s < n; ++s) stride *= d;
  long dim = ham.rows();
  for (long t = 0; t < dim; ++t) {
    int a = static_cast<int>((t / stride) % d);
    for (int a2 = 0; a2 < d; ++a2) {
      double v = h1(a2, a);
      if (v != 0.0) ham(t + (a2 - a) * stride, t) += v;
    }
  }
}

void add_pair(Mat& ham, int n, int d, int p, int q, const Mat& h2) {
  long sp = 1, sq = 1;
  for (int s = p + 1; s < n; ++s) sp *= d;
  for (int s = q + 1; s < n; ++s) sq *= d;
  long dim = ham.rows();
  for (long t = 0; t < dim; ++t) {
    int a = static_cast<int>((t / sp) % d);
    int b = static_cast<int>((t / sq) % d);
    for (int a2 = 0; a2 < d; ++a2)
      for (int b2 = 0; b2 < d; ++b2) {
        double v = h2(a2 * d + b2, a * d + b);
        if (v != 0.0) ham(t + (a2 - a) * sp + (b2 - b) * sq, t) += v;
      }
  }
}

}  // namespace

Mat build_full_hamiltonian(const ModelSpec& spec) {
  spec.validate();
  int n = spec.n, d = spec.local_dim();
  long dim = checked_dim(d, n, "build_full_hamiltonian");
  Terms terms = model_terms(spec);
  Mat ham = Mat::Zero(dim, dim);
  for (const auto& [p, q, h2] : terms.pairs) add_pair(ham, n, d, p, q, h2);
  for (int s = 0; s < n; ++s) add_single(ham, n, d, s, terms.single);
  return ham;
}

EdResult ground_state_ed(const ModelSpec& spec) {
  Mat ham = build_full_hamiltonian(spec);
  Eigen::SelfAdjointEigenSolver<Mat> es(ham);
  if (es.info() != Eigen::Success) throw std::runtime_error("ground_state_ed: eigensolve failed");
  EdResult out;
  out.energy = es.eigenvalues()(0);
  out.gap = es.eigenvalues()(1) - es.eigenvalues()(0);
  out.degenerate = out.gap < 1e-10;
  out.state.n = spec.n;
  out.state.d = spec.local_dim();
  out.state.amplitudes = es.eigenvectors().col(0).cast<cxd>();
  return out;
}

CxMat reduced_density(const FullState& psi, const std::vector<int>& keep) {
  int n = psi.n, d = psi.d;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int s : keep) {
    if (s < 0 || s >= n || used[static_cast<std::size_t>(s)])
      throw std::invalid_argument("reduced_density: invalid or repeated site index");
    used[static_cast<std::size_t>(s)] = true;
  }
  int k = static_cast<int>(keep.size());
  long kdim = 1;
  for (int i = 0; i < k; ++i) {
    kdim *= d;
    if (kdim > kReducedCap) throw std::invalid_argument("reduced_density: d^|keep| exceeds cap");
  }
  std::vector<long> stride(static_cast<std::size_t>(n));
  long acc = 1;
  for (int s = n - 1; s >= 0; --s) {
    stride[static_cast<std::size_t>(s)] = acc;
    acc *= d;
  }
  std::vector<int> rest;
  for (int s = 0; s < n; ++s)
    if (!used[static_cast<std::size_t>(s)]) rest.push_back(s);
  long rdim = 1;
  for (std::size_t i = 0; i < rest.size(); ++i) rdim *= d;

  auto offsets = [&](const std::vector<int>& sites, long count) {
    std::vector<long> off(static_cast<std::size_t>(count), 0);
    for (long idx = 0; idx < count; ++idx) {
      long rem = idx;
      for (std::size_t j = sites.size(); j-- > 0;) {
        off[static_cast<std::size_t>(idx)] += (rem % d) * stride[static_cast<std::size_t>(sites[j])];
        rem /= d;
      }
    }
    return off;
  };
  std::vector<long> off_keep = offsets(keep, kdim);
  std::vector<long> off_rest = offsets(rest, rdim);

  CxMat sigma = CxMat::Zero(kdim, kdim);
  for (long r = 0; r < rdim; ++r) {
    long base = off_rest[static_cast<std::size_t>(r)];
    for (long i = 0; i < kdim; ++i) {
      cxd ai = psi.amplitudes(base + off_keep[static_cast<std::size_t>(i)]);
      if (ai == cxd(0.0, 0.0)) continue;
      for (long j = 0; j < kdim; ++j)
        sigma(i, j) += ai * std::conj(psi.amplitudes(base + off_keep[static_cast<std::size_t>(j)]));
    }
  }
  return sigma;
}

double fidelity_with_symmetric(const FullState& psi, const SymmetricOperator& rho) {
  const DickeBasis& basis = rho.basis();
  if (basis.n() != psi.n || basis.local_dim() != psi.d)
    throw std::invalid_argument("fidelity_with_symmetric: state/basis mismatch");
  CxVec v = project_to_symmetric(psi.amplitudes, basis);
  return std::real((v.adjoint() * rho.matrix() * v).value());
}

}  // namespace symqmp
