#include <cmath>
#include <complex>

#include "doctest.h"
#include "symqmp/basis.hpp"
#include "symqmp/compat.hpp"
#include "symqmp/ed.hpp"
#include "symqmp/variational.hpp"

using namespace symqmp;

namespace {

// test-local operator algebra, independent of the builders under test
CxMat tkron(const CxMat& a, const CxMat& b) {
  CxMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CxMat tpauli(char axis) {
  CxMat m(2, 2);
  if (axis == 'x')
    m << 0, 1, 1, 0;
  else if (axis == 'y')
    m << 0, cxd(0, -1), cxd(0, 1), 0;
  else
    m << 1, 0, 0, -1;
  return m;
}

// operator o placed on one site of an n-qubit register
CxMat on_site(const CxMat& o, int site, int n) {
  CxMat out = CxMat::Identity(1, 1);
  for (int s = 0; s < n; ++s) out = tkron(out, s == site ? o : CxMat::Identity(2, 2));
  return out;
}

CxMat pair_term(char ax, int p, int q, int n) { return on_site(tpauli(ax), p, n) * on_site(tpauli(ax), q, n); }

// permutation operator swapping sites p and q of n qudits
Mat swap_sites(int p, int q, int n, int d) {
  long dim = 1;
  for (int s = 0; s < n; ++s) dim *= d;
  std::vector<long> stride(static_cast<std::size_t>(n));
  long acc = 1;
  for (int s = n - 1; s >= 0; --s) {
    stride[static_cast<std::size_t>(s)] = acc;
    acc *= d;
  }
  Mat perm = Mat::Zero(dim, dim);
  for (long t = 0; t < dim; ++t) {
    int a = static_cast<int>((t / stride[static_cast<std::size_t>(p)]) % d);
    int b = static_cast<int>((t / stride[static_cast<std::size_t>(q)]) % d);
    long t2 = t + (b - a) * stride[static_cast<std::size_t>(p)] + (a - b) * stride[static_cast<std::size_t>(q)];
    perm(t2, t) = 1.0;
  }
  return perm;
}

FullState dicke_full_state(int n, int k) {
  DickeBasis basis(n, 2);
  CxMat iso = embedding_isometry(basis);
  return FullState{n, 2, iso.col(k)};
}

}  // namespace

TEST_SUITE("ed") {

TEST_CASE("two-site chain model matches the hand-built matrix") {
  ModelSpec spec{IsingNn{1.7, 0.4}, 2};
  CxMat expect = -1.7 * tkron(tpauli('z'), tpauli('z')) -
                 0.4 * (tkron(tpauli('x'), CxMat::Identity(2, 2)) + tkron(CxMat::Identity(2, 2), tpauli('x')));
  Mat got = build_full_hamiltonian(spec);
  CHECK((got.cast<cxd>() - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("three-site long-range model matches an explicit pair sum") {
  double lam = 1.3, h = 0.7;
  ModelSpec spec{Lmg{lam, 1.0, h}, 3};
  CxMat expect = CxMat::Zero(8, 8);
  for (int p = 0; p < 3; ++p)
    for (int q = p + 1; q < 3; ++q)
      expect += -(lam / 3.0) * (pair_term('x', p, q, 3) + pair_term('y', p, q, 3));
  for (int s = 0; s < 3; ++s) expect += -h * on_site(tpauli('z'), s, 3);
  Mat got = build_full_hamiltonian(spec);
  CHECK((got.cast<cxd>() - expect).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("periodic chain includes the wrap-around bond") {
  double jx = 1.0, jz = 0.5, b = 0.2;
  ModelSpec spec{XxzPeriodic{jx, jz, b}, 3};
  CxMat expect = CxMat::Zero(8, 8);
  int bonds[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (auto& bond : bonds) {
    expect += -jx * (pair_term('x', bond[0], bond[1], 3) + pair_term('y', bond[0], bond[1], 3));
    expect += -jz * pair_term('z', bond[0], bond[1], 3);
  }
  for (int s = 0; s < 3; ++s) expect += b * on_site(tpauli('z'), s, 3);
  Mat got = build_full_hamiltonian(spec);
  CHECK((got.cast<cxd>() - expect).cwiseAbs().maxCoeff() < 1e-13);

  // n = 2: the two bonds coincide, doubling the coupling
  ModelSpec two{XxzPeriodic{jx, jz, b}, 2};
  CxMat expect2 = -2.0 * jx * (tkron(tpauli('x'), tpauli('x')) + tkron(tpauli('y'), tpauli('y'))) -
                  2.0 * jz * tkron(tpauli('z'), tpauli('z')) +
                  b * (tkron(tpauli('z'), CxMat::Identity(2, 2)) + tkron(CxMat::Identity(2, 2), tpauli('z')));
  CHECK((build_full_hamiltonian(two).cast<cxd>() - expect2).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("uniform-coupling models commute with site permutations") {
  std::vector<ModelSpec> specs = {
      ModelSpec{Lmg{1.2, 0.6, 0.5}, 4},
      // the 3-site ring is the complete graph; longer rings are only
      // cyclically symmetric
      ModelSpec{XxzPeriodic{0.8, 0.3, 0.4}, 3},
      ModelSpec{Lipkin3{1.0, 0.7}, 3},
  };
  for (const auto& spec : specs) {
    Mat ham = build_full_hamiltonian(spec);
    int d = spec.local_dim();
    for (int p = 0; p < spec.n; ++p)
      for (int q = p + 1; q < spec.n; ++q) {
        Mat perm = swap_sites(p, q, spec.n, d);
        CHECK((ham * perm - perm * ham).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
}

TEST_CASE("classical chain energies are exact") {
  EdResult aligned = ground_state_ed(ModelSpec{IsingNn{1.0, 0.0}, 6});
  CHECK(aligned.energy == doctest::Approx(-5.0).epsilon(1e-12));
  CHECK(aligned.degenerate); // all-up and all-down tie

  EdResult field = ground_state_ed(ModelSpec{IsingNn{0.0, 1.0}, 4});
  CHECK(field.energy == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(!field.degenerate);
}

TEST_CASE("ground state is normalized and deterministic") {
  ModelSpec spec{XxzTransverse{1.0, 1.3, 0.4}, 5};
  EdResult a = ground_state_ed(spec);
  EdResult b = ground_state_ed(spec);
  CHECK(std::abs(a.state.amplitudes.norm() - 1.0) < 1e-10);
  CHECK((a.state.amplitudes - b.state.amplitudes).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reduced density of a bell pair is maximally mixed") {
  CxVec amp = CxVec::Zero(4);
  amp(1) = 1.0 / std::sqrt(2.0);
  amp(2) = 1.0 / std::sqrt(2.0);
  FullState bell{2, 2, amp};
  CxMat red = reduced_density(bell, {0});
  CHECK((red - CxMat::Identity(2, 2) * 0.5).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reduced densities of symmetric states ignore site choice") {
  FullState d24 = dicke_full_state(4, 2);
  CxMat front = reduced_density(d24, {0, 1});
  CxMat back = reduced_density(d24, {2, 3});
  CHECK((front - back).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(front.trace() - cxd(1.0, 0.0)) < 1e-12);

  // cross-module agreement with the symmetric-sector partial trace
  DickeBasis b4(4, 2);
  CxMat pure = CxMat::Zero(b4.dim(), b4.dim());
  pure(2, 2) = 1.0;
  CxMat via_sym = partial_trace_computational(SymmetricOperator(b4, pure), 2);
  CHECK((front - via_sym).cwiseAbs().maxCoeff() < 1e-12);

  ModelSpec spec{Lmg{1.0, 1.0, 0.3}, 5};
  EdResult gs = ground_state_ed(spec);
  CxMat r1 = reduced_density(gs.state, {0, 2});
  CxMat r2 = reduced_density(gs.state, {1, 4});
  CHECK((r1 - r2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fidelity with the symmetric sector") {
  FullState d24 = dicke_full_state(4, 2);
  DickeBasis b4(4, 2);
  CxMat pure = CxMat::Zero(b4.dim(), b4.dim());
  pure(2, 2) = 1.0;
  CHECK(fidelity_with_symmetric(d24, SymmetricOperator(b4, pure)) == doctest::Approx(1.0).epsilon(1e-12));

  CxVec amp = CxVec::Zero(4);
  amp(1) = 1.0 / std::sqrt(2.0);
  amp(2) = -1.0 / std::sqrt(2.0);
  FullState singlet{2, 2, amp};
  DickeBasis b2(2, 2);
  CxMat mixed = CxMat::Identity(3, 3) / 3.0;
  CHECK(fidelity_with_symmetric(singlet, SymmetricOperator(b2, mixed)) < 1e-12);
}

TEST_CASE("dense-size caps are enforced") {
  CHECK_THROWS(build_full_hamiltonian(ModelSpec{IsingNn{1.0, 0.2}, 15}));
  CHECK_THROWS(build_full_hamiltonian(ModelSpec{Lipkin3{1.0, 0.2}, 9}));
  FullState big{14, 2, CxVec::Zero(16384)};
  std::vector<int> keep13;
  for (int s = 0; s < 13; ++s) keep13.push_back(s);
  CHECK_THROWS(reduced_density(big, keep13));
  CHECK_THROWS(reduced_density(FullState{2, 2, CxVec::Zero(4)}, {0, 0}));
}

}  // TEST_SUITE
