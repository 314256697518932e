#include "symqmp/compat.hpp"

#include <cmath>
#include <stdexcept>

#include "symqmp/sdp.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace symqmp {

namespace {

Partition add_parts(const Partition& a, const Partition& b) {
  Partition s(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) s[i] = a[i] + b[i];
  return s;
}

// a^{lambda,alpha}_{mu,beta} for lambda = alpha+kappa, mu = beta+kappa:
// binom(n-m, kappa) * sqrt(binom(m,alpha) binom(m,beta) / (binom(n,lambda) binom(n,mu)))
// evaluated in log space.
std::vector<CompatEntry> one_pair(const DickeBasis& bn, const DickeBasis& bm, const DickeBasis& bk,
                                  int alpha, int beta) {
  std::vector<CompatEntry> out;
  out.reserve(bk.dim());
  const Partition& pa = bm.partition(alpha);
  const Partition& pb = bm.partition(beta);
  double la = bm.log_multiplicity(alpha);
  double lb = bm.log_multiplicity(beta);
  for (int kk = 0; kk < bk.dim(); ++kk) {
    const Partition& pk = bk.partition(kk);
    int lam = bn.index(add_parts(pa, pk));
    int mu = bn.index(add_parts(pb, pk));
    double lv = bk.log_multiplicity(kk) + 0.5 * (la + lb - bn.log_multiplicity(lam) - bn.log_multiplicity(mu));
    out.push_back({lam, mu, std::exp(lv)});
  }
  return out;
}

}  // namespace

CompatibilityMap::CompatibilityMap(int n, int m, int d, int threads)
    : n_(n), m_(m), d_(d), bn_(n, d), bm_(m, d) {
  if (m < 1 || m > n) throw std::invalid_argument("CompatibilityMap: need 1 <= m <= n");
  double load = static_cast<double>(bn_.dim()) * bm_.dim() * bm_.dim();
  if (load > 268435456.0)  // 2^28 entries upper bound on stored coefficients
    throw std::invalid_argument("CompatibilityMap: dim(n)*dim(m)^2 exceeds cap");
  DickeBasis bk(n - m, d);
  int nm = bm_.dim();
  mats_.resize(static_cast<std::size_t>(nm) * nm);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
#endif
  for (int slot = 0; slot < nm * nm; ++slot)
    mats_[static_cast<std::size_t>(slot)] = one_pair(bn_, bm_, bk, slot / nm, slot % nm);
}

CompatibilityMap::CompatibilityMap(int n, int m, int d, std::vector<std::vector<CompatEntry>> mats)
    : n_(n), m_(m), d_(d), bn_(n, d), bm_(m, d), mats_(std::move(mats)) {
  if (mats_.size() != static_cast<std::size_t>(bm_.dim()) * bm_.dim())
    throw std::invalid_argument("CompatibilityMap: deserialized slot count mismatch");
}

CxMat CompatibilityMap::apply(const CxMat& rho) const {
  if (rho.rows() != bn_.dim() || rho.cols() != bn_.dim())
    throw std::invalid_argument("CompatibilityMap::apply: matrix/basis mismatch");
  int nm = bm_.dim();
  CxMat sigma(nm, nm);
  for (int a = 0; a < nm; ++a)
    for (int b = 0; b < nm; ++b) {
      cxd acc = 0.0;
      for (const auto& e : entries(a, b)) acc += e.value * rho(e.row, e.col);
      sigma(a, b) = acc;
    }
  return sigma;
}

CompatibilityMap build_constraints(int n, int m, int d, int threads) {
  return CompatibilityMap(n, m, d, threads);
}

CompatibilityMap build_constraints_serial(int n, int m, int d) {
  // straight loop, no pragmas; tests compare against the parallel builder
  DickeBasis bn(n, d), bm(m, d), bk(n - m, d);
  int nm = bm.dim();
  std::vector<std::vector<CompatEntry>> mats(static_cast<std::size_t>(nm) * nm);
  for (int a = 0; a < nm; ++a)
    for (int b = 0; b < nm; ++b) mats[static_cast<std::size_t>(a) * nm + b] = one_pair(bn, bm, bk, a, b);
  return CompatibilityMap(n, m, d, std::move(mats));
}

SymmetricOperator partial_trace_symmetric(const SymmetricOperator& rho, int m) {
  const DickeBasis& bn = rho.basis();
  int n = bn.n(), d = bn.local_dim();
  if (m < 1 || m > n) throw std::invalid_argument("partial_trace_symmetric: need 1 <= m <= n");
  if (m == n) return rho;
  DickeBasis bm(m, d), bk(n - m, d);
  int nm = bm.dim();
  CxMat sigma(nm, nm);
  for (int a = 0; a < nm; ++a)
    for (int b = 0; b < nm; ++b) {
      cxd acc = 0.0;
      for (const auto& e : one_pair(bn, bm, bk, a, b)) acc += e.value * rho.matrix()(e.row, e.col);
      sigma(a, b) = acc;
    }
  return SymmetricOperator(std::move(bm), std::move(sigma));
}

CxMat partial_trace_computational(const SymmetricOperator& rho, int m) {
  SymmetricOperator sigma = partial_trace_symmetric(rho, m);
  return embed_to_computational(sigma);
}

namespace {

struct RealifiedConstraints {
  std::vector<std::vector<SdpEntry>> rows;
  std::vector<double> rhs;
  std::vector<std::pair<int, int>> labels;  // (alpha, beta) per row, beta < 0 marks an Im row
};

// Constraints on Z = [[X,-Y],[Y,X]] (upper-triangle storage, mirrored inner
// products).  For alpha == beta the coefficient matrix is diagonal; for
// alpha < beta its support is disjoint from its transpose, so the stored
// weights below reproduce <A, X> and <A, Y> exactly:
//   Re row: w = value/2 on both diagonal blocks (diagonal support),
//           w = value/4 on both blocks otherwise.
//   Im row (alpha < beta): Y(r,c) = (Z(r+D,c) - Z(c+D,r))/2, giving stored
//           weights +value/4 at (c, r+D) and -value/4 at (r, c+D).
RealifiedConstraints realified_rows(const CompatibilityMap& map, const CxMat& sigma) {
  RealifiedConstraints rc;
  int nm = map.reduced_dim();
  int dimn = map.full_basis().dim();
  for (int a = 0; a < nm; ++a)
    for (int b = a; b < nm; ++b) {
      const auto& ent = map.entries(a, b);
      std::vector<SdpEntry> re_row;
      for (const auto& e : ent) {
        if (e.row == e.col) {
          re_row.push_back({0, e.row, e.row, 0.5 * e.value});
          re_row.push_back({0, e.row + dimn, e.row + dimn, 0.5 * e.value});
        } else {
          int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
          re_row.push_back({0, r, c, 0.25 * e.value});
          re_row.push_back({0, r + dimn, c + dimn, 0.25 * e.value});
        }
      }
      rc.rows.push_back(std::move(re_row));
      rc.rhs.push_back(std::real(sigma(a, b)));
      rc.labels.push_back({a, b});
      if (a != b) {
        std::vector<SdpEntry> im_row;
        for (const auto& e : ent) {
          im_row.push_back({0, e.col, e.row + dimn, 0.25 * e.value});
          im_row.push_back({0, e.row, e.col + dimn, -0.25 * e.value});
        }
        rc.rows.push_back(std::move(im_row));
        rc.rhs.push_back(std::imag(sigma(a, b)));
        rc.labels.push_back({a, -b - 1});
      }
    }
  return rc;
}

}  // namespace

MarginalConstraintRows marginal_constraint_rows(const CompatibilityMap& map, const CxMat& sigma) {
  RealifiedConstraints rc = realified_rows(map, sigma);
  MarginalConstraintRows out;
  out.rows = std::move(rc.rows);
  out.rhs = std::move(rc.rhs);
  out.block_dim = 2 * map.full_basis().dim();
  return out;
}

FeasibilityReport feasibility_check(const SymmetricOperator& sigma, int n, const FeasibilityOptions& opts) {
  const DickeBasis& bm = sigma.basis();
  int m = bm.n(), d = bm.local_dim();
  FeasibilityReport rep;
  double tr_err = std::abs(sigma.matrix().trace() - cxd(1.0, 0.0));
  if (tr_err > 1e-9 + opts.slack) {
    rep.status = FeasibilityReport::Status::Infeasible;
    rep.detail = "input trace deviates from 1; no density-matrix extension can match it";
    rep.residual = tr_err;
    return rep;
  }

  CompatibilityMap map = build_constraints(n, m, d, opts.threads);
  SdpOptions sopts;
  sopts.tol_gap = opts.tol_gap;
  sopts.tol_feas = opts.tol_gap;
  sopts.max_iter = opts.max_iter;
  sopts.threads = opts.threads;

  int dimn = map.full_basis().dim();
  bool complex_path = !sigma.is_real();
  std::vector<std::vector<SdpEntry>> rows;
  std::vector<double> rhs;
  int block_dim = 0;
  if (!complex_path) {
    // sigma and the coefficients are real: a real extension exists iff any does
    block_dim = dimn;
    int nm = map.reduced_dim();
    for (int a = 0; a < nm; ++a)
      for (int b = a; b < nm; ++b) {
        std::vector<SdpEntry> row;
        for (const auto& e : map.entries(a, b)) {
          int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
          row.push_back({0, r, c, (e.row == e.col) ? e.value : 0.5 * e.value});
        }
        rows.push_back(std::move(row));
        rhs.push_back(std::real(sigma.matrix()(a, b)));
      }
  } else {
    block_dim = 2 * dimn;
    RealifiedConstraints rc = realified_rows(map, sigma.matrix());
    rows = std::move(rc.rows);
    rhs = std::move(rc.rhs);
  }

  ConeFeasibility cf = solve_feasibility(rows, rhs, block_dim, sopts, 1e-8 + opts.slack);
  rep.t_star = cf.t_star;
  rep.solver_gap = cf.solution.gap;
  if (cf.solution.status == SdpStatus::IterLimit) {
    rep.status = FeasibilityReport::Status::Inconclusive;
    rep.detail = "solver hit the iteration cap";
    return rep;
  }
  if (cf.feasible) {
    rep.status = FeasibilityReport::Status::Feasible;
    // the solved variable is ext + t*.I, so subtract t* whatever its sign;
    // a small positive t* (within the acceptance threshold) dips the spectrum
    // by at most that amount
    Mat ext = cf.solution.X[0] - cf.t_star * Mat::Identity(block_dim, block_dim);
    CxMat rho_c = complex_path ? unrealify(ext) : ext.cast<cxd>();
    SymmetricOperator witness(map.full_basis(), rho_c);
    CxMat back = map.apply(witness.matrix());
    rep.residual = (back - sigma.matrix()).cwiseAbs().maxCoeff();
    rep.witness = std::move(witness);
  } else {
    rep.status = FeasibilityReport::Status::Infeasible;
    rep.detail = "minimal eigenvalue shift exceeds the feasibility threshold";
    Eigen::Index ny = cf.solution.y.size();
    rep.farkas_certificate.assign(cf.solution.y.data(), cf.solution.y.data() + ny);
    double cert = 0.0;
    for (Eigen::Index i = 0; i < ny; ++i) cert += cf.solution.y(i) * rhs[(std::size_t)i];
    rep.certificate_value = cert;
    Mat dual_mat = Mat::Zero(block_dim, block_dim);
    for (Eigen::Index i = 0; i < ny; ++i)
      for (const auto& e : rows[(std::size_t)i]) {
        dual_mat(e.row, e.col) += cf.solution.y(i) * e.value;
        if (e.row != e.col) dual_mat(e.col, e.row) += cf.solution.y(i) * e.value;
      }
    Eigen::SelfAdjointEigenSolver<Mat> es(dual_mat, Eigen::EigenvaluesOnly);
    rep.certificate_psd_defect = es.eigenvalues().maxCoeff();
  }
  return rep;
}

FeasibilityReport feasibility_check_computational(const CxMat& sigma_full, int m, int n, int d,
                                                  const FeasibilityOptions& opts) {
  DickeBasis bm(m, d);
  ProjectedOperator proj = project_operator(sigma_full, bm);
  double w = proj.discarded_weight;
  if (w > 1e-9 + opts.slack) {
    FeasibilityReport rep;
    rep.status = FeasibilityReport::Status::Infeasible;
    rep.discarded_weight = w;
    rep.detail = "input loses trace weight under the symmetric-sector projection";
    return rep;
  }
  SymmetricOperator sigma(std::move(bm), std::move(proj.sym));
  FeasibilityReport rep = feasibility_check(sigma, n, opts);
  rep.discarded_weight = w;
  return rep;
}

}  // namespace symqmp
