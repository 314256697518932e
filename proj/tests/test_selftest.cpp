#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "symqmp/compat.hpp"
#include "symqmp/rng.hpp"
#include "symqmp/selftest.hpp"
#include "symqmp/variational.hpp"

using namespace symqmp;

TEST_SUITE_BEGIN("selftest");

namespace {

SymmetricOperator excitation_state(int n, int k) {
  DickeBasis b(n, 2);
  CxMat m = CxMat::Zero(b.dim(), b.dim());
  m(k, k) = 1.0;
  return SymmetricOperator(std::move(b), std::move(m));
}

double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 0; i < k; ++i) out = out * (n - i) / (i + 1);
  return out;
}

// Exhaustive oracle for "x = e_k is the only nonnegative solution": the
// polytope {x >= 0, Mx = b} is bounded (M has nonnegative entries and no zero
// column), so it is a single point iff every basic feasible solution is that
// point.  Supports of size rank(M) enumerate all vertices.
bool only_solution_is_basis(const Mat& M, const Vec& rhs, int k) {
  int cols = static_cast<int>(M.cols());
  Eigen::JacobiSVD<Mat> all(M);
  double top = all.singularValues()(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < all.singularValues().size(); ++i)
    if (all.singularValues()(i) > 1e-10 * top) ++rank;

  Vec ek = Vec::Zero(cols);
  ek(k) = 1.0;
  bool saw_basis = false;
  std::vector<int> support(rank);
  std::vector<bool> pick(cols, false);
  std::fill(pick.begin(), pick.begin() + rank, true);
  // iterate over all subsets of columns of size `rank`
  do {
    int idx = 0;
    for (int j = 0; j < cols; ++j)
      if (pick[j]) support[idx++] = j;
    Mat sub(M.rows(), rank);
    for (int c = 0; c < rank; ++c) sub.col(c) = M.col(support[c]);
    Vec xs = sub.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
    Vec x = Vec::Zero(cols);
    for (int c = 0; c < rank; ++c) x(support[c]) = xs(c);
    if ((M * x - rhs).cwiseAbs().maxCoeff() > 1e-9) continue;  // infeasible basis
    if (x.minCoeff() < -1e-9) continue;                        // negative vertex
    if ((x - ek).cwiseAbs().maxCoeff() > 1e-8) return false;   // second vertex
    saw_basis = true;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  REQUIRE(saw_basis);  // e_k itself must appear as a vertex
  return true;
}

}  // namespace

TEST_CASE("random states have the requested rank and reproduce bitwise") {
  SymmetricOperator pure = random_symmetric_state(6, 2, 1, 99);
  CHECK(pure.trace_error() < 1e-12);
  CHECK(pure.hermiticity_defect() < 1e-14);
  double purity = (pure.matrix() * pure.matrix()).trace().real();
  CHECK(purity == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(pure.min_eigenvalue() > -1e-12);

  SymmetricOperator full = random_symmetric_state(6, 2, 7, 100);
  Eigen::SelfAdjointEigenSolver<CxMat> ef(full.matrix(), Eigen::EigenvaluesOnly);
  CHECK(ef.eigenvalues().minCoeff() > 1e-12 * ef.eigenvalues().maxCoeff());

  SymmetricOperator mid = random_symmetric_state(6, 2, 3, 101);
  Eigen::SelfAdjointEigenSolver<CxMat> em(mid.matrix(), Eigen::EigenvaluesOnly);
  int big = 0;
  for (Eigen::Index i = 0; i < em.eigenvalues().size(); ++i)
    if (em.eigenvalues()(i) > 1e-12 * em.eigenvalues().maxCoeff()) ++big;
  CHECK(big == 3);

  SymmetricOperator again = random_symmetric_state(6, 2, 3, 101);
  CHECK(std::memcmp(again.matrix().data(), mid.matrix().data(),
                    sizeof(cxd) * static_cast<std::size_t>(mid.matrix().size())) == 0);
  SymmetricOperator other = random_symmetric_state(6, 2, 3, 102);
  CHECK((other.matrix() - mid.matrix()).cwiseAbs().maxCoeff() > 1e-3);

  CHECK_THROWS_AS(random_symmetric_state(6, 2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_symmetric_state(6, 2, 8, 1), std::invalid_argument);

  SymmetricOperator qutrit = random_symmetric_state(3, 3, 2, 11);
  CHECK(qutrit.basis().dim() == 10);
  CHECK(qutrit.trace_error() < 1e-12);
}

TEST_CASE("trace system matches the hand-built band structure") {
  for (auto [n, k, m] : std::vector<std::array<int, 3>>{{4, 2, 3}, {8, 3, 5}, {6, 0, 1}, {5, 5, 4}}) {
    DickeTraceAnalysis an = dicke_trace_lp(n, k, m);
    REQUIRE(an.system.matrix.rows() == m + 1);
    REQUIRE(an.system.matrix.cols() == n + 1);
    for (int i = 0; i <= m; ++i) {
      for (int j = 0; j <= n; ++j) {
        double want = (j - i >= 0 && j - i <= n - m) ? choose(n - m, j - i) : 0.0;
        CHECK(an.system.matrix(i, j) == want);
      }
      double rw = (k - i >= 0 && k - i <= n - m) ? choose(n - m, k - i) : 0.0;
      CHECK(an.system.rhs(i) == rw);
    }
  }

  // n=2, k=1, m=1: every right-hand side is positive and the solution set is
  // a genuine segment, so nothing is forced
  DickeTraceAnalysis seg = dicke_trace_lp(2, 1, 1);
  CHECK_FALSE(seg.zero_rows_present);
  CHECK_FALSE(seg.unique);
  CHECK(seg.forced_zero.empty());
  CHECK_FALSE(seg.cascade_applicable);

  CHECK_THROWS_AS(dicke_trace_lp(4, 5, 2), std::invalid_argument);
  CHECK_THROWS_AS(dicke_trace_lp(4, -1, 2), std::invalid_argument);
  CHECK_THROWS_AS(dicke_trace_lp(4, 2, 0), std::invalid_argument);
}

TEST_CASE("zero forcing certifies uniqueness exactly where enumeration confirms it") {
  for (int n = 2; n <= 6; ++n) {
    for (int m = 1; m <= n; ++m) {
      for (int k = 0; k <= n; ++k) {
        CAPTURE(n);
        CAPTURE(m);
        CAPTURE(k);
        DickeTraceAnalysis an = dicke_trace_lp(n, k, m);
        bool truth = only_solution_is_basis(an.system.matrix, an.system.rhs, k);
        if (an.unique) {
          // the certificate is sound
          CHECK(truth);
          REQUIRE(an.solution.size() == n + 1);
          CHECK(an.solution(k) == 1.0);
          CHECK(an.solution.sum() == 1.0);
        }
        if (2 * m > n) {
          // past half the parties the forcing argument always closes the case
          CHECK(an.cascade_applicable);
          CHECK(an.unique);
          CHECK(truth);
        }
      }
    }
  }

  // known one-sidedness: this cell is unique as a linear program, but the
  // forcing argument has no zero rows to work with and stays silent
  DickeTraceAnalysis half = dicke_trace_lp(4, 2, 2);
  CHECK_FALSE(half.unique);
  CHECK(only_solution_is_basis(half.system.matrix, half.system.rhs, 2));
}

TEST_CASE("one- and two-party removals keep excitation states pinned") {
  for (int n = 3; n <= 8; ++n)
    for (int k = 0; k <= n; ++k) {
      CAPTURE(n);
      CAPTURE(k);
      CHECK(dicke_trace_lp(n, k, n - 1).unique);
      if (n > 4) CHECK(dicke_trace_lp(n, k, n - 2).unique);
    }
  // at n = 4 the two-party removal leaves too few equations for middle k
  CHECK_FALSE(dicke_trace_lp(4, 2, 2).unique);
  CHECK_FALSE(dicke_trace_lp(3, 1, 1).unique);
}

TEST_CASE("probe recovers an excitation state from its deep reductions") {
  SymmetricOperator rho = excitation_state(8, 3);
  for (int m : {7, 6}) {
    CAPTURE(m);
    ProbeOptions po;
    po.trials = 6;
    UniquenessReport rep = uniqueness_probe(rho, m, 20260822, po);
    CHECK(rep.unique);
    CHECK(rep.min_fidelity > 0.9999);
    CHECK(rep.rank == 1);
    CHECK(rep.discarded == 0);
    CHECK(rep.max_constraint_residual <= 1e-8);
    CHECK(rep.solution_ranks_equal);
    CHECK(rep.shared_solution_rank == 1);
    CHECK(rep.n == 8);
    CHECK(rep.m == m);
    for (std::size_t t = 0; t < rep.trial_seeds.size(); ++t)
      CHECK(rep.trial_seeds[t] == Rng::stream_seed(20260822, t));
  }

  // pointing the objective at the state itself must hand the state back
  ProbeOptions self;
  self.trials = 1;
  self.directions = {rho.matrix()};
  UniquenessReport rep = uniqueness_probe(rho, 7, 1, self);
  CHECK(rep.min_fidelity >= 1.0 - 1e-8);
}

TEST_CASE("probe flags the maximally mixed state as non-unique") {
  DickeBasis b6(6, 2);
  int dim = b6.dim();
  SymmetricOperator mixed(b6, CxMat::Identity(dim, dim) / static_cast<double>(dim));
  CxMat pair = CxMat::Zero(dim, dim);
  pair(0, 0) = 0.5;
  pair(dim - 1, dim - 1) = 0.5;
  SymmetricOperator edges(b6, pair);

  // two visibly different states with byte-equal one-party reductions
  CxMat r1 = partial_trace_symmetric(mixed, 1).matrix();
  CxMat r2 = partial_trace_symmetric(edges, 1).matrix();
  CHECK((r1 - r2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r1 - CxMat::Identity(2, 2) * 0.5).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fidelity(mixed, edges) == doctest::Approx(2.0 / 7.0).epsilon(1e-9));

  ProbeOptions po;
  po.trials = 10;
  UniquenessReport rep = uniqueness_probe(mixed, 1, 7, po);
  CHECK_FALSE(rep.unique);
  CHECK(rep.min_fidelity < 0.9999);
  CHECK(rep.max_constraint_residual <= 1e-8);
  CHECK(rep.rank == 7);
}

TEST_CASE("probe and linear system agree on every excitation state past half") {
  for (int n = 3; n <= 8; ++n)
    for (int m = n / 2 + 1; m < n; ++m)
      for (int k = 0; k <= n; ++k) {
        CAPTURE(n);
        CAPTURE(m);
        CAPTURE(k);
        DickeTraceAnalysis lp = dicke_trace_lp(n, k, m);
        REQUIRE(lp.unique);
        ProbeOptions po;
        po.trials = 4;
        UniquenessReport rep = uniqueness_probe(excitation_state(n, k), m,
                                                1000u * static_cast<unsigned>(n) + 10u * static_cast<unsigned>(m) + static_cast<unsigned>(k), po);
        CHECK(rep.unique == lp.unique);
        CHECK(rep.max_constraint_residual <= 1e-8);
      }
}

TEST_CASE("probe rejects bad inputs and refuses to summarize inconclusive runs") {
  SymmetricOperator rho = excitation_state(4, 2);
  CHECK_THROWS_AS(uniqueness_probe(rho, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(uniqueness_probe(rho, 4, 1), std::invalid_argument);

  ProbeOptions zero;
  zero.trials = 0;
  CHECK_THROWS_AS(uniqueness_probe(rho, 2, 1, zero), std::invalid_argument);

  ProbeOptions wrong;
  wrong.trials = 2;
  wrong.directions = {rho.matrix()};
  CHECK_THROWS_AS(uniqueness_probe(rho, 2, 1, wrong), std::invalid_argument);

  DickeBasis b4(4, 2);
  SymmetricOperator unnormalized(b4, CxMat::Identity(5, 5));
  CHECK_THROWS_AS(uniqueness_probe(unnormalized, 2, 1), std::invalid_argument);

  // a one-iteration cap leaves every trial open, which must not be summarized
  ProbeOptions starved;
  starved.trials = 2;
  starved.max_iter = 1;
  CHECK_THROWS_AS(uniqueness_probe(rho, 3, 1, starved), std::runtime_error);

  // determinism: identical seeds give identical reports
  ProbeOptions po;
  po.trials = 3;
  UniquenessReport a = uniqueness_probe(rho, 3, 5, po);
  UniquenessReport b = uniqueness_probe(rho, 3, 5, po);
  CHECK(a.min_fidelity == b.min_fidelity);
  CHECK(a.fidelities == b.fidelities);
  CHECK(a.trial_seeds == b.trial_seeds);
}

TEST_CASE("rank sweep fills the grid in order and serializes cleanly") {
  RankSweepOptions so;
  so.trials = 4;
  std::vector<RankSweepCell> cells = rank_sweep(4, 2, {3, 2}, {1, 3, 5}, 31, so);
  REQUIRE(cells.size() == 6);
  int want_m[6] = {3, 3, 3, 2, 2, 2};
  int want_r[6] = {1, 3, 5, 1, 3, 5};
  for (int i = 0; i < 6; ++i) {
    CAPTURE(i);
    CHECK(cells[static_cast<std::size_t>(i)].m == want_m[i]);
    CHECK(cells[static_cast<std::size_t>(i)].rank == want_r[i]);
    REQUIRE(cells[static_cast<std::size_t>(i)].error.empty());
    const UniquenessReport& rep = cells[static_cast<std::size_t>(i)].report;
    CHECK(rep.trials == 4);
    CHECK(rep.rank == want_r[i]);
    CHECK(rep.max_constraint_residual <= 1e-8);
  }

  // thread count must not change any reported number
  RankSweepOptions serial = so;
  serial.threads = 1;
  std::vector<RankSweepCell> again = rank_sweep(4, 2, {3, 2}, {1, 3, 5}, 31, serial);
  for (int i = 0; i < 6; ++i) {
    CHECK(again[static_cast<std::size_t>(i)].report.min_fidelity ==
          cells[static_cast<std::size_t>(i)].report.min_fidelity);
    CHECK(again[static_cast<std::size_t>(i)].report.fidelities ==
          cells[static_cast<std::size_t>(i)].report.fidelities);
  }

  std::string csv = rank_sweep_csv(4, cells);
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "n,m,rank,trials,discarded,min_fidelity,unique");
  int rows = 0;
  while (std::getline(lines, line)) {
    int n_ = 0, m_ = 0, r_ = 0, tr_ = 0, di_ = 0, un_ = 0;
    double f_ = 0.0;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%d,%d,%d,%lf,%d", &n_, &m_, &r_, &tr_, &di_, &f_, &un_) == 7);
    CHECK(n_ == 4);
    CHECK(m_ == want_m[rows]);
    CHECK(r_ == want_r[rows]);
    CHECK(tr_ == 4);
    CHECK((un_ == 0 || un_ == 1));
    CHECK(f_ >= 0.0);
    CHECK(f_ <= 1.0 + 1e-9);
    ++rows;
  }
  CHECK(rows == 6);

  CHECK_THROWS_AS(rank_sweep(4, 2, {}, {1}, 1, so), std::invalid_argument);
  CHECK_THROWS_AS(rank_sweep(4, 2, {2}, {6}, 1, so), std::invalid_argument);
  CHECK_THROWS_AS(rank_sweep(4, 2, {4}, {1}, 1, so), std::invalid_argument);
}

TEST_SUITE_END();
