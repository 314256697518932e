#include "symqmp/mps.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

namespace symqmp {

namespace {

// ---------------------------------------------------------------------------
// Compensated (double-double) arithmetic.
//
// The conversion maps amplitudes to polynomial roots and back.  The round
// trip is exact algebra, but the intermediate quantities y^(n-k) * x^k can
// span 10+ orders of magnitude with massive cancellation in the power sums,
// so plain doubles lose up to half the requested 1e-8 residual.  Carrying a
// hi/lo pair (~32 significant digits) through the coefficient recurrence, the
// root polishing, and the reconstruction keeps the floor below 1e-12 for
// every state whose representation exists at all.
// ---------------------------------------------------------------------------

struct DD {
  double hi = 0.0;
  double lo = 0.0;
};

inline DD quick_two_sum(double a, double b) {  // requires |a| >= |b| or a == 0
  double s = a + b;
  return {s, b - (s - a)};
}

inline DD two_sum(double a, double b) {
  double s = a + b;
  double v = s - a;
  return {s, (a - (s - v)) + (b - v)};
}

inline DD two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  return quick_two_sum(s.hi, s.lo + a.lo + b.lo);
}

inline DD dd_neg(DD a) { return {-a.hi, -a.lo}; }

inline DD dd_sub(DD a, DD b) { return dd_add(a, dd_neg(b)); }

inline DD dd_mul(DD a, DD b) {
  DD p = two_prod(a.hi, b.hi);
  return quick_two_sum(p.hi, p.lo + a.hi * b.lo + a.lo * b.hi);
}

inline DD dd_div_d(DD a, double b) {
  double q0 = a.hi / b;
  DD t = two_prod(q0, b);
  double r = ((a.hi - t.hi) - t.lo) + a.lo;
  return quick_two_sum(q0, r / b);
}

inline double dd_val(DD a) { return a.hi + a.lo; }

struct CDD {
  DD re, im;
};

inline CDD make_cdd(cxd hi, cxd lo = {0.0, 0.0}) {
  return {{hi.real(), lo.real()}, {hi.imag(), lo.imag()}};
}

inline cxd cdd_hi(CDD a) { return {a.re.hi, a.im.hi}; }
inline cxd cdd_lo(CDD a) { return {a.re.lo, a.im.lo}; }
inline cxd cdd_val(CDD a) { return {dd_val(a.re), dd_val(a.im)}; }

inline CDD cdd_add(CDD a, CDD b) { return {dd_add(a.re, b.re), dd_add(a.im, b.im)}; }
inline CDD cdd_sub(CDD a, CDD b) { return {dd_sub(a.re, b.re), dd_sub(a.im, b.im)}; }

inline CDD cdd_mul(CDD a, CDD b) {
  return {dd_sub(dd_mul(a.re, b.re), dd_mul(a.im, b.im)),
          dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re))};
}

inline CDD cdd_div_d(CDD a, double b) { return {dd_div_d(a.re, b), dd_div_d(a.im, b)}; }

inline CDD cdd_pow(CDD base, int e) {
  CDD r = make_cdd({1.0, 0.0});
  while (e > 0) {
    if (e & 1) r = cdd_mul(r, base);
    base = cdd_mul(base, base);
    e >>= 1;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Polynomial machinery on compensated coefficients.
// ---------------------------------------------------------------------------

// Newton-identity recurrence for the monic polynomial with root power sums z.
std::vector<CDD> coeff_recurrence(const CxVec& z) {
  int n = static_cast<int>(z.size());
  std::vector<CDD> c(n + 1);
  c[n] = make_cdd({1.0, 0.0});
  for (int m = 1; m <= n; ++m) {
    CDD s{};
    for (int i = 1; i <= m; ++i) {
      s = cdd_add(s, cdd_mul(make_cdd(z[i - 1]), c[n - m + i]));
    }
    s.re = dd_neg(s.re);
    s.im = dd_neg(s.im);
    c[n - m] = cdd_div_d(s, static_cast<double>(m));
  }
  return c;
}

CDD horner(const std::vector<CDD>& c, CDD x) {
  CDD r{};
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j) {
    r = cdd_add(cdd_mul(r, x), c[j]);
  }
  return r;
}

// Companion-matrix eigenvalues of the monic polynomial with (double)
// coefficients c[0..n].  The variable is rescaled by s = max_m |c[n-m]|^(1/m)
// first so the companion entries are O(1); without that, widely scaled
// coefficients (they arise whenever d_0 is small) wreck the eigensolve.
CxVec companion_start_points(const std::vector<cxd>& c) {
  int n = static_cast<int>(c.size()) - 1;
  double log_s = -std::numeric_limits<double>::infinity();
  for (int m = 1; m <= n; ++m) {
    double a = std::abs(c[n - m]);
    if (a > 0.0) log_s = std::max(log_s, std::log(a) / m);
  }
  if (!std::isfinite(log_s)) return CxVec::Zero(n);  // pure X^n: all roots 0
  CxMat a = CxMat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i + 1, i) = 1.0;
  for (int i = 0; i < n; ++i) {
    double mag = std::abs(c[i]);
    if (mag == 0.0) continue;
    cxd phase = c[i] / mag;
    a(i, n - 1) = -phase * std::exp(std::log(mag) - (n - i) * log_s);
  }
  Eigen::ComplexEigenSolver<CxMat> es(a, /*computeEigenvectors=*/false);
  return std::exp(log_s) * es.eigenvalues();
}

// Newton refinement against the compensated coefficients.  Keeps the iterate
// with the smallest |P| so a diverging step can never make things worse.
CDD polish_root(const std::vector<CDD>& c, const std::vector<CDD>& dc, CDD x) {
  CDD best = x;
  double best_p = std::abs(cdd_val(horner(c, x)));
  for (int it = 0; it < 60; ++it) {
    cxd p = cdd_val(horner(c, x));
    cxd q = cdd_val(horner(dc, x));
    if (q == cxd(0.0, 0.0)) break;
    cxd step = p / q;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    x = cdd_sub(x, make_cdd(step));
    double pn = std::abs(cdd_val(horner(c, x)));
    if (pn < best_p) {
      best_p = pn;
      best = x;
    }
    if (std::abs(step) <= 1e-31 * (std::abs(cdd_val(x)) + 1.0)) break;
  }
  return best;
}

std::vector<CDD> derivative(const std::vector<CDD>& c) {
  std::vector<CDD> dc(c.size() - 1);
  for (std::size_t j = 1; j < c.size(); ++j) {
    dc[j - 1] = cdd_mul(c[j], make_cdd({static_cast<double>(j), 0.0}));
  }
  return dc;
}

// Shared back end: companion starts + compensated polish.
std::vector<CDD> solve_roots(const std::vector<CDD>& c) {
  int n = static_cast<int>(c.size()) - 1;
  std::vector<cxd> cd(n + 1);
  for (int j = 0; j <= n; ++j) {
    cd[j] = cdd_val(c[j]);
    if (!std::isfinite(cd[j].real()) || !std::isfinite(cd[j].imag())) {
      throw ConversionDegenerate(std::numeric_limits<double>::infinity());
    }
  }
  CxVec starts = companion_start_points(cd);
  std::vector<CDD> dc = derivative(c);
  std::vector<CDD> out(n);
  for (int a = 0; a < n; ++a) {
    out[a] = polish_root(c, dc, make_cdd(starts[a]));
  }
  return out;
}

std::int64_t factorial(int m) {
  std::int64_t f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// DickeAmplitudes / TIDiagonalMPS basics
// ---------------------------------------------------------------------------

double DickeAmplitudes::norm_error() const { return std::abs(d.squaredNorm() - 1.0); }

void DickeAmplitudes::validate() const {
  if (n < 1) throw std::invalid_argument("DickeAmplitudes: n must be >= 1");
  if (static_cast<int>(d.size()) != n + 1) {
    throw std::invalid_argument("DickeAmplitudes: expected n+1 amplitudes");
  }
}

TIDiagonalMPS TIDiagonalMPS::from_roots(int n, cxd y, CxVec roots) {
  if (n < 1) throw std::invalid_argument("TIDiagonalMPS: n must be >= 1");
  if (roots.size() < 1) throw std::invalid_argument("TIDiagonalMPS: empty root set");
  TIDiagonalMPS m;
  m.n = n;
  m.a0 = CxVec::Constant(roots.size(), y);
  m.a1 = std::move(roots);
  return m;
}

void TIDiagonalMPS::validate() const {
  if (n < 1) throw std::invalid_argument("TIDiagonalMPS: n must be >= 1");
  if (a0.size() < 1 || a0.size() != a1.size()) {
    throw std::invalid_argument("TIDiagonalMPS: a0 and a1 must have equal positive length");
  }
  if (a1_lo.size() != 0 && a1_lo.size() != a1.size()) {
    throw std::invalid_argument("TIDiagonalMPS: a1_lo must be empty or match a1");
  }
}

bool TIDiagonalMPS::uniform_a0(double tol) const {
  if (a0.size() == 0) return false;
  double ref = std::abs(a0[0]) + 1.0;
  for (int i = 1; i < a0.size(); ++i) {
    if (std::abs(a0[i] - a0[0]) > tol * ref) return false;
  }
  return true;
}

cxd TIDiagonalMPS::y() const {
  if (!uniform_a0()) {
    throw std::logic_error("TIDiagonalMPS: A0 is not proportional to the identity");
  }
  return a0[0];
}

cxd TIDiagonalMPS::weight_amplitude(int k) const {
  validate();
  if (k < 0 || k > n) throw std::invalid_argument("weight_amplitude: k out of range");
  CDD s{};
  for (int a = 0; a < a0.size(); ++a) {
    cxd lo = (a1_lo.size() != 0) ? a1_lo[a] : cxd(0.0, 0.0);
    CDD t = cdd_mul(cdd_pow(make_cdd(a0[a]), n - k), cdd_pow(make_cdd(a1[a], lo), k));
    s = cdd_add(s, t);
  }
  return cdd_val(s);
}

cxd TIDiagonalMPS::string_amplitude(const std::vector<int>& bits) const {
  validate();
  if (static_cast<int>(bits.size()) != n) {
    throw std::invalid_argument("string_amplitude: expected n bits");
  }
  cxd sum = 0.0;
  for (int a = 0; a < a0.size(); ++a) {
    cxd p = 1.0;
    for (int i = 0; i < n; ++i) {
      int b = bits[i];
      if (b != 0 && b != 1) throw std::invalid_argument("string_amplitude: bits must be 0/1");
      p *= (b == 1) ? a1[a] : a0[a];
    }
    sum += p;
  }
  return sum;
}

ConversionDegenerate::ConversionDegenerate(double r)
    : std::runtime_error([r] {
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "diagonal representation degenerate: reconstruction residual %.3e", r);
        return std::string(buf);
      }()),
      residual(r) {}

// ---------------------------------------------------------------------------
// Conversion pipeline
// ---------------------------------------------------------------------------

PowerSums power_sums_from_amplitudes(const DickeAmplitudes& d) {
  d.validate();
  int n = d.n;
  double dmax = d.d.cwiseAbs().maxCoeff();
  if (dmax == 0.0) throw std::invalid_argument("power sums: all amplitudes are zero");
  PowerSums out;
  out.n = n;
  out.target_d = d.d;
  if (std::abs(d.d[0]) < 1e-13 * dmax) {
    out.perturbation = 1e-8 * dmax;
    out.target_d[0] += out.perturbation;
  }
  out.y = std::pow(out.target_d[0] / static_cast<double>(n), 1.0 / n);
  // y^(n-k) by repeated multiplication, highest power first
  std::vector<cxd> ypow(n + 1);
  ypow[0] = 1.0;
  for (int j = 1; j <= n; ++j) ypow[j] = ypow[j - 1] * out.y;
  out.z.resize(n);
  for (int k = 1; k <= n; ++k) {
    out.z[k - 1] = out.target_d[k] / (ypow[n - k] * std::sqrt(binomial(n, k)));
  }
  return out;
}

CharPolyCoeffs char_poly_from_power_sums(const CxVec& z) {
  int n = static_cast<int>(z.size());
  if (n < 1) throw std::invalid_argument("char poly: need at least one power sum");
  std::vector<CDD> c = coeff_recurrence(z);
  CharPolyCoeffs out;
  out.c.resize(n + 1);
  for (int j = 0; j <= n; ++j) out.c[j] = cdd_val(c[j]);
  // Determinant cross-check.  Only meaningful where the determinant itself is
  // computable without losing all digits, i.e. at moderate coefficient scale.
  if (z.cwiseAbs().maxCoeff() <= 10.0) {
    for (int m = 1; m <= std::min(n, 6); ++m) {
      cxd det = char_poly_coeff_determinant(z, m);
      cxd rec = out.c[n - m];
      double scale = std::max({1.0, std::abs(det), std::abs(rec)});
      if (std::abs(det - rec) > 1e-9 * scale) {
        throw std::logic_error("char poly: recurrence and determinant paths disagree");
      }
    }
  }
  return out;
}

CharPolyCoeffs char_poly_from_power_sums(const PowerSums& p) {
  return char_poly_from_power_sums(p.z);
}

cxd char_poly_coeff_determinant(const CxVec& z, int m) {
  if (m < 1 || m > static_cast<int>(z.size())) {
    throw std::invalid_argument("coefficient determinant: m out of range");
  }
  CxMat h = CxMat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) h(i, j) = z[i - j];  // z_{i-j+1}
    if (i + 1 < m) h(i, i + 1) = static_cast<double>(m - 1 - i);
  }
  double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return sign / static_cast<double>(factorial(m)) * h.determinant();
}

CxVec roots(const CharPolyCoeffs& coeffs) {
  int n = coeffs.degree();
  if (n < 1) throw std::invalid_argument("roots: degree must be >= 1");
  if (std::abs(coeffs.c[n] - cxd(1.0, 0.0)) > 1e-12) {
    throw std::invalid_argument("roots: polynomial must be monic");
  }
  std::vector<CDD> c(n + 1);
  for (int j = 0; j <= n; ++j) c[j] = make_cdd(coeffs.c[j]);
  c[n] = make_cdd({1.0, 0.0});
  std::vector<CDD> sol = solve_roots(c);
  CxVec out(n);
  for (int a = 0; a < n; ++a) out[a] = cdd_val(sol[a]);
  return out;
}

TIDiagonalMPS dicke_to_mps(const DickeAmplitudes& d) {
  d.validate();
  if (d.norm_error() > 1e-8) {
    throw std::invalid_argument("dicke_to_mps: amplitudes must have unit norm");
  }
  PowerSums ps = power_sums_from_amplitudes(d);
  int n = d.n;
  std::vector<CDD> c = coeff_recurrence(ps.z);
  std::vector<CDD> sol = solve_roots(c);

  TIDiagonalMPS mps;
  mps.n = n;
  mps.a0 = CxVec::Constant(n, ps.y);
  mps.a1.resize(n);
  mps.a1_lo.resize(n);
  for (int a = 0; a < n; ++a) {
    mps.a1[a] = cdd_hi(sol[a]);
    mps.a1_lo[a] = cdd_lo(sol[a]);
  }
  mps.perturbation = ps.perturbation;

  DickeAmplitudes rec = reconstruct_dicke(mps);
  double res = (rec.d - ps.target_d).norm() / ps.target_d.norm();
  mps.residual = res;
  if (!(res <= 1e-6)) throw ConversionDegenerate(res);
  return mps;
}

DickeAmplitudes reconstruct_dicke(const TIDiagonalMPS& mps) {
  mps.validate();
  DickeAmplitudes out;
  out.n = mps.n;
  out.d.resize(mps.n + 1);
  for (int k = 0; k <= mps.n; ++k) {
    out.d[k] = std::sqrt(binomial(mps.n, k)) * mps.weight_amplitude(k);
  }
  return out;
}

TIDiagonalMPS w_state_mps(int n, double eps) {
  if (n < 2) throw std::invalid_argument("w_state_mps: n must be >= 2");
  if (!(eps > 0.0)) throw std::invalid_argument("w_state_mps: eps must be positive");
  double base = std::pow(2.0, -1.0 / n);
  double x0 = base * std::pow(eps, -1.0 / (static_cast<double>(n) * (n - 1)));
  double y0 = base * std::pow(eps, 1.0 / n);
  cxd phase = std::polar(1.0, M_PI / n);
  TIDiagonalMPS m;
  m.n = n;
  m.a0.resize(2);
  m.a1.resize(2);
  m.a0[0] = x0;
  m.a0[1] = phase * x0;
  m.a1[0] = y0;
  m.a1[1] = -phase * y0;
  return m;
}

// ---------------------------------------------------------------------------
// Partition-sum coefficients
// ---------------------------------------------------------------------------

cxd q_polynomial(int m, const CxVec& z) {
  if (m < 0 || m > 12) throw std::invalid_argument("q_polynomial: m must be in [0, 12]");
  if (static_cast<int>(z.size()) < m) {
    throw std::invalid_argument("q_polynomial: need at least m power sums");
  }
  if (m == 0) return {1.0, 0.0};

  std::int64_t mfact = factorial(m);
  std::int64_t abs_weight_total = 0;
  cxd total = 0.0;

  // Enumerate partitions of m as non-increasing part lists.
  std::vector<int> parts;
  auto emit = [&]() {
    // group equal parts -> (part, multiplicity)
    std::int64_t denom = 1;
    int sign = 1;
    cxd mono = 1.0;
    for (std::size_t i = 0; i < parts.size();) {
      int part = parts[i];
      int mult = 0;
      while (i < parts.size() && parts[i] == part) {
        ++mult;
        ++i;
      }
      for (int j = 2; j <= mult; ++j) denom *= j;          // mult!
      for (int j = 0; j < mult; ++j) denom *= part;        // part^mult
      if (mult % 2 == 1) sign = -sign;
      cxd zp = 1.0;
      for (int j = 0; j < mult; ++j) zp *= z[part - 1];
      mono *= zp;
    }
    if (mfact % denom != 0) throw std::logic_error("q_polynomial: non-integer weight");
    std::int64_t w = mfact / denom;
    abs_weight_total += w;
    total += static_cast<double>(sign * w) * mono;
  };
  auto rec = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      emit();
      return;
    }
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
      parts.push_back(p);
      self(self, remaining - p, p);
      parts.pop_back();
    }
  };
  rec(rec, m, m);

  if (abs_weight_total != mfact) {
    throw std::logic_error("q_polynomial: cycle-type weights do not sum to m!");
  }
  return total;
}

double bond_compat_residual_n4_D3(const CxVec& z) {
  if (z.size() != 4) {
    throw std::invalid_argument("bond compat residual: need exactly four power sums");
  }
  return std::abs(q_polynomial(4, z));
}

}  // namespace symqmp
