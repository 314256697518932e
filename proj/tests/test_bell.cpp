#include <cmath>
#include <complex>
#include <map>
#include <random>

#include "doctest.h"
#include "symqmp/basis.hpp"
#include "symqmp/bell.hpp"
#include "symqmp/compat.hpp"
#include "symqmp/variational.hpp"

using namespace symqmp;

namespace {

CxMat tkron(const CxMat& a, const CxMat& b) {
  CxMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CxMat tpauli(char axis) {
  CxMat m(2, 2);
  switch (axis) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, cxd(0, -1), cxd(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

// Places per-site 2x2 factors into the n-qubit space, identity elsewhere.
CxMat place(const std::map<int, CxMat>& factors, int n) {
  CxMat out = CxMat::Identity(1, 1);
  for (int s = 0; s < n; ++s) {
    auto it = factors.find(s);
    out = tkron(out, it == factors.end() ? CxMat::Identity(2, 2) : it->second);
  }
  return out;
}

// The inequality's left side written literally as an n-party observable.
CxMat full_bell_operator(const BellInequality& ineq, const std::vector<CxMat>& m0,
                         const std::vector<CxMat>& m1) {
  int n = ineq.n;
  long dim = 1L << n;
  CxMat out = CxMat::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    if (ineq.tag == BellTag::Ineq6)
      out += -2.0 * place({{i, m0[i]}}, n);
    else
      out += (n % 2) * (n - 1.0) * (double(n) * place({{i, m0[i]}}, n) + place({{i, m1[i]}}, n));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (ineq.tag == BellTag::Ineq6) {
        out += 0.5 * place({{i, m0[i]}, {j, m0[j]}}, n);
        out += -1.0 * place({{i, m0[i]}, {j, m1[j]}}, n);
        out += 0.5 * place({{i, m1[i]}, {j, m1[j]}}, n);
      } else {
        out += binomial(n, 2) * place({{i, m0[i]}, {j, m0[j]}}, n);
        out += double(n) * place({{i, m0[i]}, {j, m1[j]}}, n);
        out += -1.0 * place({{i, m1[i]}, {j, m1[j]}}, n);
      }
    }
  return out;
}

std::vector<CxMat> same_settings(int n, double theta) {
  return std::vector<CxMat>(n, std::sin(theta) * tpauli('x') + std::cos(theta) * tpauli('z'));
}

SymmetricOperator random_symmetric_state(int n, std::mt19937_64& gen) {
  DickeBasis basis(n, 2);
  int dim = basis.dim();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CxMat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = cxd(u(gen), u(gen));
  CxMat rho = g * g.adjoint();
  rho /= rho.trace();
  return SymmetricOperator(std::move(basis), std::move(rho));
}

SymmetricOperator pure_dicke(int n, int k) {
  DickeBasis basis(n, 2);
  CxMat m = CxMat::Zero(basis.dim(), basis.dim());
  m(k, k) = 1.0;
  return SymmetricOperator(std::move(basis), std::move(m));
}

// Closed-form value of either expression on a k-excitation Dicke state with
// every party using xz-plane angles (t0, t1): the one- and two-site moments
// of such a state are hypergeometric.
double dicke_value(const BellInequality& ineq, int k, double t0, double t1) {
  int n = ineq.n;
  double z1 = double(n - 2 * k) / n;
  double xx = 2.0 * k * double(n - k) / (n * double(n - 1));
  double zz = (k * double(k - 1) + double(n - k) * (n - k - 1) - 2.0 * k * double(n - k)) /
              (n * double(n - 1));
  auto e1 = [&](double t) { return std::cos(t) * z1; };
  auto e2 = [&](double ta, double tb) {
    return std::sin(ta) * std::sin(tb) * xx + std::cos(ta) * std::cos(tb) * zz;
  };
  double s0 = n * e1(t0), s1 = n * e1(t1);
  double s00 = n * double(n - 1) * e2(t0, t0);
  double s01 = n * double(n - 1) * 0.5 * (e2(t0, t1) + e2(t1, t0));
  double s11 = n * double(n - 1) * e2(t1, t1);
  if (ineq.tag == BellTag::Ineq6) return -2.0 * s0 + 0.5 * s00 - s01 + 0.5 * s11;
  return (n % 2) * (n - 1.0) * (n * s0 + s1) + binomial(n, 2) * s00 + n * s01 - s11;
}

}  // namespace

TEST_SUITE("bell") {

TEST_CASE("classical bounds") {
  for (int n : {2, 3, 4, 5, 8}) CHECK(make_inequality(BellTag::Ineq6, n).classical_bound == -2.0 * n);
  CHECK(make_inequality(BellTag::IneqDicke, 2).classical_bound == -4.0);
  CHECK(make_inequality(BellTag::IneqDicke, 3).classical_bound == -18.0);
  CHECK(make_inequality(BellTag::IneqDicke, 4).classical_bound == -36.0);
  CHECK(make_inequality(BellTag::IneqDicke, 8).classical_bound == -280.0);
  CHECK_THROWS(make_inequality(BellTag::Ineq6, 1));
}

TEST_CASE("strategy-class enumeration agrees with brute force over every strategy") {
  for (int n : {2, 3, 4, 5}) {
    for (auto tag : {BellTag::Ineq6, BellTag::IneqDicke}) {
      BellInequality ineq = make_inequality(tag, n);
      // literal scan: every party fixes both outcomes in advance
      double brute = 1e300;
      long total = 1;
      for (int i = 0; i < n; ++i) total *= 4;
      for (long code = 0; code < total; ++code) {
        std::vector<int> a(n), b(n);
        long c = code;
        for (int i = 0; i < n; ++i) {
          a[i] = (c & 1) ? 1 : -1;
          b[i] = (c & 2) ? 1 : -1;
          c >>= 2;
        }
        double s0 = 0, s1 = 0, s00 = 0, s01 = 0, s11 = 0;
        for (int i = 0; i < n; ++i) {
          s0 += a[i];
          s1 += b[i];
          for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            s00 += a[i] * a[j];
            s01 += a[i] * b[j];
            s11 += b[i] * b[j];
          }
        }
        double value = tag == BellTag::Ineq6
                           ? -2.0 * s0 + 0.5 * s00 - s01 + 0.5 * s11
                           : (n % 2) * (n - 1.0) * (n * s0 + s1) + binomial(n, 2) * s00 + n * s01 - s11;
        brute = std::min(brute, value);
      }
      INFO("n ", n, " tag ", static_cast<int>(tag));
      CHECK(lhv_minimum(ineq) == brute);
      CHECK(brute == ineq.classical_bound);
    }
  }
  // the class-count scan stays exact far beyond brute-force reach
  CHECK(lhv_minimum(make_inequality(BellTag::Ineq6, 40)) == -80.0);
  CHECK(lhv_minimum(make_inequality(BellTag::IneqDicke, 21)) ==
        make_inequality(BellTag::IneqDicke, 21).classical_bound);
}

TEST_CASE("equal settings collapse the first expression to its one-body part") {
  BellInequality ineq = make_inequality(BellTag::Ineq6, 5);
  EffectiveHamiltonian eh = bell_operator(ineq, MeasurementSettings{0.7, 0.7});
  CxMat m0 = measurement_operator(0.7);
  CxMat expect = -5.0 * (tkron(m0, CxMat::Identity(2, 2)) + tkron(CxMat::Identity(2, 2), m0));
  CHECK((eh.matrix - expect).cwiseAbs().maxCoeff() < 1e-14);

  // the aligned product state then sits exactly on the classical bound
  SymmetricOperator all_up = pure_dicke(5, 0);
  ScanOptions opts;
  opts.fixed_state = all_up;
  opts.grid = 8;
  ScanResult res = violation_scan(ineq, opts);
  for (const auto& row : res.rows) CHECK(row.bell_value >= ineq.classical_bound - 1e-9);
  double v00 = std::real((bell_operator(ineq, {0.0, 0.0}).matrix *
                          embed_to_computational(partial_trace_symmetric(all_up, 2)))
                             .trace());
  CHECK(v00 == doctest::Approx(-10.0).epsilon(1e-12));
}

TEST_CASE("pair operator reproduces the literal n-party observable") {
  std::mt19937_64 gen(7171);
  for (int n : {4, 5, 6}) {
    for (auto tag : {BellTag::Ineq6, BellTag::IneqDicke}) {
      BellInequality ineq = make_inequality(tag, n);
      for (double t1 : {0.3, 2.1}) {
        MeasurementSettings ms{1.1, t1};
        EffectiveHamiltonian eh = bell_operator(ineq, ms);
        CxMat full = full_bell_operator(ineq, same_settings(n, ms.theta0), same_settings(n, ms.theta1));
        for (int trial = 0; trial < 3; ++trial) {
          SymmetricOperator rho = random_symmetric_state(n, gen);
          double via_pairs = std::real(
              (eh.matrix * embed_to_computational(partial_trace_symmetric(rho, 2))).trace());
          double via_full = std::real((full * embed_to_computational(rho)).trace());
          INFO("n ", n, " tag ", static_cast<int>(tag), " t1 ", t1);
          CHECK(via_pairs == doctest::Approx(via_full).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("half-filled Dicke states beat the classical bound") {
  // frozen optima of the closed-form moment expression over both angles
  // (independently minimized on a shrinking dense grid); note the optimum
  // sits off the z axis, below the best single-axis value
  struct Expected {
    int n;
    double value;
    double axis_slice;
  };
  for (auto [n, value, axis_slice] :
       {Expected{4, -39.527441367697, -112.0 / 3.0}, Expected{8, -289.214844898129, -1408.0 / 5.0}}) {
    BellInequality ineq = make_inequality(BellTag::IneqDicke, n);
    ScanOptions opts;
    opts.fixed_state = pure_dicke(n, n / 2);
    ScanResult res = violation_scan(ineq, opts);
    INFO("n ", n);
    CHECK(res.best_value == doctest::Approx(value).epsilon(1e-8));
    CHECK(res.best_value < axis_slice);
    CHECK(res.best_q < 0.0);
    CHECK(res.best_q == doctest::Approx((value - ineq.classical_bound) / std::abs(ineq.classical_bound))
                            .epsilon(1e-6));
    // scan rows agree with the closed-form moments everywhere
    for (std::size_t i = 0; i < res.rows.size(); i += 17) {
      const auto& row = res.rows[i];
      CHECK(row.bell_value ==
            doctest::Approx(dicke_value(ineq, n / 2, row.theta0, row.theta1)).epsilon(1e-9));
    }
    // the reported settings reproduce the reported value
    CHECK(dicke_value(ineq, n / 2, res.best.theta0, res.best.theta1) ==
          doctest::Approx(res.best_value).epsilon(1e-12));
  }
}

TEST_CASE("state-optimizing scan matches the projected-spectrum oracle") {
  BellInequality ineq = make_inequality(BellTag::Ineq6, 4);
  ScanOptions opts;
  opts.grid = 32;
  ScanResult res = violation_scan(ineq, opts);
  REQUIRE(res.errors.empty());
  REQUIRE(res.best_state.has_value());

  DickeBasis basis(4, 2);
  CxMat iso = embedding_isometry(basis);
  auto oracle = [&](double dtheta) {
    CxMat full = full_bell_operator(ineq, same_settings(4, 0.0), same_settings(4, dtheta));
    Eigen::SelfAdjointEigenSolver<CxMat> es(iso.adjoint() * full * iso, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  };
  for (const auto& row : res.rows) CHECK(row.bell_value == doctest::Approx(oracle(row.theta1)).epsilon(1e-7));

  double dense = 1e300;
  for (int i = 0; i < 1024; ++i) dense = std::min(dense, oracle(i * M_PI / 1024));
  CHECK(res.best_value <= dense + 1e-6);
  CHECK(res.best_value == doctest::Approx(dense).epsilon(1e-3));
  CHECK(res.best_value ==
        doctest::Approx(oracle(res.best.theta1 - res.best.theta0)).epsilon(1e-7));

  // identical rerun, exercising the parallel grid the second time
  ScanOptions opts2 = opts;
  opts2.threads = 4;
  ScanResult res2 = violation_scan(ineq, opts2);
  CHECK(res2.best_value == res.best_value);
  for (std::size_t i = 0; i < res.rows.size(); ++i) CHECK(res2.rows[i].bell_value == res.rows[i].bell_value);
}

TEST_CASE("common rotation of both settings moves neither optimum") {
  for (auto tag : {BellTag::Ineq6, BellTag::IneqDicke}) {
    BellInequality ineq = make_inequality(tag, 5);
    for (double delta : {0.4, 1.9}) {
      EffectiveHamiltonian a = bell_operator(ineq, {0.2, 1.5});
      EffectiveHamiltonian b = bell_operator(ineq, {0.2 + delta, 1.5 + delta});
      double ea = minimize_pair_operator(a.symmetric_projection, 5).energy;
      double eb = minimize_pair_operator(b.symmetric_projection, 5).energy;
      INFO("tag ", static_cast<int>(tag), " delta ", delta);
      CHECK(ea == doctest::Approx(eb).epsilon(1e-6));
    }
  }
}

TEST_CASE("free-settings evaluation") {
  BellInequality ineq = make_inequality(BellTag::Ineq6, 4);
  SymmetricOperator rho = pure_dicke(4, 2);
  CxMat sigma2 = embed_to_computational(partial_trace_symmetric(rho, 2));
  CxMat sigma1 = embed_to_computational(partial_trace_symmetric(rho, 1));

  std::map<std::pair<int, int>, CxMat> pairs;
  std::map<int, CxMat> singles;
  for (int i = 0; i < 4; ++i) {
    singles[i] = sigma1;
    for (int j = i + 1; j < 4; ++j) pairs[{i, j}] = sigma2;
  }

  SUBCASE("identical plane settings match the pair-operator path") {
    for (auto tag : {BellTag::Ineq6, BellTag::IneqDicke}) {
      BellInequality iq = make_inequality(tag, 4);
      MeasurementSettings ms{0.9, 2.4};
      BlochSettings bs;
      bs.m0.assign(4, Eigen::Vector3d(std::sin(ms.theta0), 0.0, std::cos(ms.theta0)));
      bs.m1.assign(4, Eigen::Vector3d(std::sin(ms.theta1), 0.0, std::cos(ms.theta1)));
      double free = evaluate_free_settings(iq, pairs, singles, bs);
      double via_op = std::real((bell_operator(iq, ms).matrix * sigma2).trace());
      CHECK(free == doctest::Approx(via_op).epsilon(1e-9));
    }
  }

  SUBCASE("per-party directions match the literal observable") {
    std::mt19937_64 gen(4242);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BlochSettings bs;
    std::vector<CxMat> m0, m1;
    for (int i = 0; i < 4; ++i) {
      Eigen::Vector3d v0(u(gen), u(gen), u(gen)), v1(u(gen), u(gen), u(gen));
      v0.normalize();
      v1.normalize();
      bs.m0.push_back(v0);
      bs.m1.push_back(v1);
      m0.push_back(v0(0) * tpauli('x') + v0(1) * tpauli('y') + v0(2) * tpauli('z'));
      m1.push_back(v1(0) * tpauli('x') + v1(1) * tpauli('y') + v1(2) * tpauli('z'));
    }
    double free = evaluate_free_settings(ineq, pairs, singles, bs);
    double full = std::real((full_bell_operator(ineq, m0, m1) * embed_to_computational(rho)).trace());
    CHECK(free == doctest::Approx(full).epsilon(1e-9));
  }

  SUBCASE("product preparations never beat the bound") {
    CxMat plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    std::map<std::pair<int, int>, CxMat> ppairs;
    std::map<int, CxMat> psingles;
    for (int i = 0; i < 4; ++i) {
      psingles[i] = plus;
      for (int j = i + 1; j < 4; ++j) ppairs[{i, j}] = tkron(plus, plus);
    }
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      BlochSettings bs;
      for (int i = 0; i < 4; ++i) {
        bs.m0.emplace_back(u(gen), u(gen), u(gen));
        bs.m1.emplace_back(u(gen), u(gen), u(gen));
      }
      CHECK(evaluate_free_settings(ineq, ppairs, psingles, bs) >= ineq.classical_bound - 1e-9);
    }
  }

  SUBCASE("missing data is rejected") {
    BlochSettings bs;
    bs.m0.assign(4, Eigen::Vector3d(0, 0, 1));
    bs.m1.assign(4, Eigen::Vector3d(1, 0, 0));
    auto incomplete = pairs;
    incomplete.erase({1, 3});
    CHECK_THROWS(evaluate_free_settings(ineq, incomplete, singles, bs));
    CHECK_THROWS(evaluate_free_settings(ineq, pairs, {}, bs));
    BlochSettings short_bs;
    short_bs.m0.assign(3, Eigen::Vector3d(0, 0, 1));
    short_bs.m1.assign(3, Eigen::Vector3d(1, 0, 0));
    CHECK_THROWS(evaluate_free_settings(ineq, pairs, singles, short_bs));
  }
}

TEST_CASE("a scan whose solver cannot converge reports the failure") {
  BellInequality ineq = make_inequality(BellTag::Ineq6, 4);
  ScanOptions opts;
  opts.grid = 4;
  opts.vm.max_iter = 1;
  CHECK_THROWS_AS(violation_scan(ineq, opts), std::runtime_error);
}

}  // TEST_SUITE
