#include "symqmp/bell.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "symqmp/compat.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace symqmp {

namespace {

constexpr double kPi = 3.14159265358979323846;

CxMat ckron(const CxMat& a, const CxMat& b) {
  CxMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CxMat pauli(char axis) {
  CxMat m(2, 2);
  switch (axis) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, cxd(0, -1), cxd(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

// (o x 1 + 1 x o): as a pair observable this reports the sum of the two
// one-site expectations.
CxMat both(const CxMat& o) {
  CxMat id = CxMat::Identity(2, 2);
  return ckron(o, id) + ckron(id, o);
}

CxMat sym2(const CxMat& a, const CxMat& b) { return 0.5 * (ckron(a, b) + ckron(b, a)); }

// Minimizes a unimodal f on [a, b] by golden-section search.
std::pair<double, double> golden_min(const std::function<double(double)>& f, double a, double b,
                                     double tol) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

double reduce_angle(double theta) {
  double t = std::fmod(theta, 2.0 * kPi);
  if (t < 0) t += 2.0 * kPi;
  return t;
}

CxMat measurement_operator(double theta) { return std::sin(theta) * pauli('x') + std::cos(theta) * pauli('z'); }

BellInequality make_inequality(BellTag tag, int n) {
  if (n < 2) throw std::invalid_argument("make_inequality: need n >= 2");
  BellInequality ineq;
  ineq.tag = tag;
  ineq.n = n;
  if (tag == BellTag::Ineq6) {
    ineq.classical_bound = -2.0 * n;
  } else {
    ineq.classical_bound = -binomial(n, 2) * (n + 2 + n % 2);
  }
  return ineq;
}

double lhv_minimum(const BellInequality& ineq) {
  // A deterministic strategy fixes each party's two outcomes; the expression
  // only depends on the counts of the four possible per-party assignments,
  // so it suffices to scan compositions of n into four parts.  All quantities
  // stay integral (the expression is a half-integer combination), hence the
  // scan is exact.
  const int n = ineq.n;
  double best = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= n; ++p)
    for (int q = 0; p + q <= n; ++q)
      for (int r = 0; p + q + r <= n; ++r) {
        int s = n - p - q - r;
        double s0 = p + q - r - s;
        double s1 = p - q + r - s;
        double c01 = p - q - r + s;  // sum over parties of (first outcome)*(second outcome)
        double s00 = s0 * s0 - n;
        double s11 = s1 * s1 - n;
        double s01 = s0 * s1 - c01;
        double value;
        if (ineq.tag == BellTag::Ineq6) {
          value = -2.0 * s0 + 0.5 * s00 - s01 + 0.5 * s11;
        } else {
          value = (n % 2) * (n - 1.0) * (n * s0 + s1) + binomial(n, 2) * s00 + n * s01 - s11;
        }
        best = std::min(best, value);
      }
  return best;
}

EffectiveHamiltonian bell_operator(const BellInequality& ineq, const MeasurementSettings& settings) {
  const int n = ineq.n;
  if (n < 2) throw std::invalid_argument("bell_operator: need n >= 2");
  CxMat m0 = measurement_operator(reduce_angle(settings.theta0));
  CxMat m1 = measurement_operator(reduce_angle(settings.theta1));
  const double nc2 = binomial(n, 2);
  CxMat mat;
  if (ineq.tag == BellTag::Ineq6) {
    CxMat diff = m0 - m1;
    mat = -n * both(m0) + nc2 * ckron(diff, diff);
  } else {
    mat = CxMat::Zero(4, 4);
    mat += (n % 2) * (n - 1.0) * 0.5 * n * n * both(m0);   // n * one-body sum, setting 0
    mat += (n % 2) * (n - 1.0) * 0.5 * n * both(m1);       // one-body sum, setting 1
    mat += 2.0 * nc2 * nc2 * ckron(m0, m0);                // pair-correlator sum, settings 00
    mat += 2.0 * n * nc2 * sym2(m0, m1);                   // settings 01
    mat += -2.0 * nc2 * ckron(m1, m1);                     // settings 11
  }
  DickeBasis b2(2, 2);
  CxMat iso = embedding_isometry(b2);
  CxMat proj = iso.adjoint() * mat * iso;
  return EffectiveHamiltonian{2, std::move(mat), SymmetricOperator(std::move(b2), std::move(proj))};
}

namespace {

// Bell value of a fixed pair reduction, evaluated through the operator path.
double fixed_value(const BellInequality& ineq, const CxMat& sigma4, double t0, double t1) {
  EffectiveHamiltonian eh = bell_operator(ineq, MeasurementSettings{t0, t1});
  return std::real((eh.matrix * sigma4).trace());
}

}  // namespace

ScanResult violation_scan(const BellInequality& ineq, const ScanOptions& opts) {
  if (opts.grid < 1) throw std::invalid_argument("violation_scan: need a nonempty angle grid");
  const double bound = ineq.classical_bound;
  ScanResult out;
  out.ineq = ineq;

  if (opts.fixed_state.has_value()) {
    const SymmetricOperator& st = *opts.fixed_state;
    if (st.basis().local_dim() != 2) throw std::invalid_argument("violation_scan: fixed state must be a qubit state");
    CxMat sigma4;
    if (st.basis().n() == 2) {
      sigma4 = embed_to_computational(st);
    } else {
      if (st.basis().n() != ineq.n)
        throw std::invalid_argument("violation_scan: fixed state size differs from the inequality");
      sigma4 = embed_to_computational(partial_trace_symmetric(st, 2));
    }

    const double step = 2.0 * kPi / opts.grid;
    out.rows.resize(static_cast<std::size_t>(opts.grid) * opts.grid);
    for (int i = 0; i < opts.grid; ++i)
      for (int j = 0; j < opts.grid; ++j) {
        double t0 = i * step, t1 = j * step;
        double v = fixed_value(ineq, sigma4, t0, t1);
        out.rows[static_cast<std::size_t>(i) * opts.grid + j] =
            ScanRow{t0, t1, v, (v - bound) / std::abs(bound)};
      }
    std::size_t arg = 0;
    for (std::size_t k = 1; k < out.rows.size(); ++k)
      if (out.rows[k].bell_value < out.rows[arg].bell_value) arg = k;
    // shrinking-grid descent in both angles; the optimum need not lie on a
    // coordinate axis, so one-angle-at-a-time refinement could stall
    double t0 = out.rows[arg].theta0, t1 = out.rows[arg].theta1;
    double v = out.rows[arg].bell_value;
    double w = step;
    for (int round = 0; round < 12; ++round) {
      constexpr int kFine = 17;
      double c0 = t0, c1 = t1;
      for (int i = 0; i < kFine; ++i)
        for (int j = 0; j < kFine; ++j) {
          double a = c0 + w * (2.0 * i / (kFine - 1) - 1.0);
          double b = c1 + w * (2.0 * j / (kFine - 1) - 1.0);
          double f = fixed_value(ineq, sigma4, a, b);
          if (f < v) {
            v = f;
            t0 = a;
            t1 = b;
          }
        }
      w /= 6.0;
    }
    out.best = MeasurementSettings{reduce_angle(t0), reduce_angle(t1)};
    out.best_value = v;
    out.best_q = (out.best_value - bound) / std::abs(bound);
    return out;
  }

  // State-optimizing mode: only the setting difference matters (a common
  // rotation can be absorbed into the state), and the difference and its
  // negative give the same optimum, so the coarse scan covers [0, pi).
  const double step = kPi / opts.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ScanRow> rows(opts.grid);
  std::vector<std::string> errors(opts.grid);
  VmOptions vm = opts.vm;
  vm.threads = 1;  // grid points are the unit of parallelism

  auto solve_point = [&](double dtheta) -> double {
    EffectiveHamiltonian eh = bell_operator(ineq, MeasurementSettings{0.0, dtheta});
    VmResult r = minimize_pair_operator(eh.symmetric_projection, ineq.n, 2, vm);
    if (r.solver_status != SdpStatus::Optimal) throw std::runtime_error("solver did not reach Optimal");
    return r.energy;
  };

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(opts.threads > 0 ? opts.threads : omp_get_max_threads())
#endif
  for (int i = 0; i < opts.grid; ++i) {
    double dtheta = i * step;
    try {
      double v = solve_point(dtheta);
      rows[i] = ScanRow{0.0, dtheta, v, (v - bound) / std::abs(bound)};
    } catch (const std::exception& e) {
      rows[i] = ScanRow{0.0, dtheta, nan, nan};
      errors[i] = "dtheta=" + std::to_string(dtheta) + ": " + e.what();
    }
  }
  out.rows = std::move(rows);
  for (auto& e : errors)
    if (!e.empty()) out.errors.push_back(std::move(e));

  int arg = -1;
  for (int i = 0; i < opts.grid; ++i) {
    if (std::isnan(out.rows[i].bell_value)) continue;
    if (arg < 0 || out.rows[i].bell_value < out.rows[arg].bell_value) arg = i;
  }
  if (arg < 0) throw std::runtime_error("violation_scan: every grid point failed");

  auto safe_value = [&](double dtheta) -> double {
    try {
      return solve_point(dtheta);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  // two refinement rounds: one grid step wide, then a tight second pass
  auto [d1, v1] = golden_min(safe_value, out.rows[arg].theta1 - step, out.rows[arg].theta1 + step, 1e-8);
  auto [d2, v2] = golden_min(safe_value, d1 - 1e-3, d1 + 1e-3, 1e-9);
  double best_d = v2 <= v1 ? d2 : d1;

  EffectiveHamiltonian eh = bell_operator(ineq, MeasurementSettings{0.0, best_d});
  VmResult best = minimize_pair_operator(eh.symmetric_projection, ineq.n, 2, opts.vm);
  out.best = MeasurementSettings{0.0, reduce_angle(best_d)};
  out.best_value = best.energy;
  out.best_q = (best.energy - bound) / std::abs(bound);
  out.best_state.emplace(std::move(best));
  return out;
}

double evaluate_free_settings(const BellInequality& ineq,
                              const std::map<std::pair<int, int>, CxMat>& pair_rdms,
                              const std::map<int, CxMat>& single_rdms, const BlochSettings& settings) {
  const int n = ineq.n;
  if (static_cast<int>(settings.m0.size()) != n || static_cast<int>(settings.m1.size()) != n)
    throw std::invalid_argument("evaluate_free_settings: need one direction pair per party");

  auto direction_op = [](Eigen::Vector3d v) -> CxMat {
    double norm = v.norm();
    if (norm < 1e-14) throw std::invalid_argument("evaluate_free_settings: zero measurement direction");
    v /= norm;
    return v(0) * pauli('x') + v(1) * pauli('y') + v(2) * pauli('z');
  };
  std::vector<CxMat> m0(n), m1(n);
  for (int i = 0; i < n; ++i) {
    m0[i] = direction_op(settings.m0[i]);
    m1[i] = direction_op(settings.m1[i]);
  }

  std::vector<CxMat> singles(n);
  for (int i = 0; i < n; ++i) {
    auto it = single_rdms.find(i);
    if (it == single_rdms.end() || it->second.rows() != 2 || it->second.cols() != 2)
      throw std::invalid_argument("evaluate_free_settings: missing 2x2 reduction for party " + std::to_string(i));
    singles[i] = it->second;
  }

  auto expect1 = [&](const CxMat& op, int i) { return std::real((op * singles[i]).trace()); };

  double one_body = 0.0;
  for (int i = 0; i < n; ++i) {
    if (ineq.tag == BellTag::Ineq6)
      one_body += -2.0 * expect1(m0[i], i);
    else
      one_body += (n % 2) * (n - 1.0) * (n * expect1(m0[i], i) + expect1(m1[i], i));
  }

  double two_body = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto it = pair_rdms.find({i, j});
      if (it == pair_rdms.end() || it->second.rows() != 4 || it->second.cols() != 4)
        throw std::invalid_argument("evaluate_free_settings: missing 4x4 reduction for pair (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      const CxMat& s = it->second;

      CxMat tr_second = CxMat::Zero(2, 2), tr_first = CxMat::Zero(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) {
            tr_second(a, b) += s(2 * a + c, 2 * b + c);
            tr_first(a, b) += s(2 * c + a, 2 * c + b);
          }
      double dev = std::max((tr_second - singles[i]).cwiseAbs().maxCoeff(),
                            (tr_first - singles[j]).cwiseAbs().maxCoeff());
      if (dev > 1e-6)
        std::cerr << "evaluate_free_settings: pair (" << i << "," << j
                  << ") marginals deviate from the single-party reductions by " << dev << "\n";

      auto expect2 = [&](const CxMat& a, const CxMat& b) { return std::real((ckron(a, b) * s).trace()); };
      if (ineq.tag == BellTag::Ineq6) {
        two_body += expect2(m0[i], m0[j]) - expect2(m0[i], m1[j]) - expect2(m1[i], m0[j]) +
                    expect2(m1[i], m1[j]);
      } else {
        double nc2 = binomial(n, 2);
        two_body += 2.0 * nc2 * expect2(m0[i], m0[j]) +
                    n * (expect2(m0[i], m1[j]) + expect2(m1[i], m0[j])) -
                    2.0 * expect2(m1[i], m1[j]);
      }
    }
  return one_body + two_body;
}

}  // namespace symqmp
