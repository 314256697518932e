#include "symqmp/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace symqmp {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SdpStatus::DualInfeasible: return "DualInfeasible";
    case SdpStatus::IterLimit: return "IterLimit";
  }
  return "?";
}

void SdpProblem::validate() const {
  if (block_dims.empty()) throw std::invalid_argument("sdp: no blocks");
  if (cost.size() != block_dims.size()) throw std::invalid_argument("sdp: cost/block mismatch");
  for (std::size_t b = 0; b < cost.size(); ++b) {
    if (cost[b].rows() != block_dims[b] || cost[b].cols() != block_dims[b])
      throw std::invalid_argument("sdp: cost block shape mismatch");
    if ((cost[b] - cost[b].transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cost[b].cwiseAbs().maxCoeff()))
      throw std::invalid_argument("sdp: cost block not symmetric");
    if (!cost[b].allFinite()) throw std::invalid_argument("sdp: NaN in cost");
  }
  if (constraints.size() != rhs.size()) throw std::invalid_argument("sdp: constraints/rhs mismatch");
  for (const auto& con : constraints)
    for (const auto& e : con) {
      if (e.block < 0 || e.block >= (int)block_dims.size() || e.row < 0 || e.col < e.row ||
          e.col >= block_dims[e.block])
        throw std::invalid_argument("sdp: constraint entry out of range");
      if (!std::isfinite(e.value)) throw std::invalid_argument("sdp: NaN in constraint");
    }
  for (double v : rhs)
    if (!std::isfinite(v)) throw std::invalid_argument("sdp: NaN in rhs");
  if (free_vars > 0) {
    if (free_coeffs.rows() != (Eigen::Index)rhs.size() || free_coeffs.cols() != free_vars)
      throw std::invalid_argument("sdp: free_coeffs shape mismatch");
    if (free_cost.size() != free_vars) throw std::invalid_argument("sdp: free_cost shape mismatch");
    if (!free_coeffs.allFinite() || !free_cost.allFinite())
      throw std::invalid_argument("sdp: NaN in free-variable data");
  }
}

double sparse_inner(const std::vector<SdpEntry>& a, const std::vector<Mat>& m) {
  double acc = 0.0;
  for (const auto& e : a) {
    if (e.row == e.col)
      acc += e.value * m[e.block](e.row, e.col);
    else
      acc += e.value * (m[e.block](e.row, e.col) + m[e.block](e.col, e.row));
  }
  return acc;
}

void add_scaled(std::vector<Mat>& acc, const std::vector<SdpEntry>& a, double scale) {
  for (const auto& e : a) {
    acc[e.block](e.row, e.col) += scale * e.value;
    if (e.row != e.col) acc[e.block](e.col, e.row) += scale * e.value;
  }
}

Mat realify(const CxMat& h) {
  Eigen::Index d = h.rows();
  Mat z(2 * d, 2 * d);
  Mat x = h.real(), y = h.imag();
  z.topLeftCorner(d, d) = x;
  z.bottomRightCorner(d, d) = x;
  z.topRightCorner(d, d) = -y;
  z.bottomLeftCorner(d, d) = y;
  return z;
}

CxMat unrealify(const Mat& z) {
  Eigen::Index d = z.rows() / 2;
  Mat x = 0.5 * (z.topLeftCorner(d, d) + z.bottomRightCorner(d, d));
  Mat y = 0.5 * (z.bottomLeftCorner(d, d) - z.topRightCorner(d, d));
  x = 0.5 * (x + x.transpose()).eval();
  y = 0.5 * (y - y.transpose()).eval();
  return x.cast<cxd>() + cxd(0, 1) * y.cast<cxd>();
}

namespace {

using Blocks = std::vector<Mat>;

Blocks zeros_like(const std::vector<int>& dims) {
  Blocks b;
  b.reserve(dims.size());
  for (int d : dims) b.push_back(Mat::Zero(d, d));
  return b;
}

double block_dot(const Blocks& a, const Blocks& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i].array() * b[i].array()).sum();
  return acc;
}

double block_norm(const Blocks& a) {
  double acc = 0.0;
  for (const auto& m : a) acc += m.squaredNorm();
  return std::sqrt(acc);
}

// largest alpha with P + alpha*D >= 0, given the Cholesky factor of P
double max_step(const Mat& chol_l, const Mat& d) {
  Mat t = chol_l.triangularView<Eigen::Lower>().solve(d);
  Mat m = chol_l.triangularView<Eigen::Lower>().solve(t.transpose());
  Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct SortedRow {
  std::vector<SdpEntry> entries;  // sorted by (block,row,col)
  Eigen::RowVectorXd free_part;
  double self = 0.0;
};

double row_inner(const SortedRow& a, const SortedRow& b) {
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[j];
    auto ka = std::make_tuple(x.block, x.row, x.col);
    auto kb = std::make_tuple(y.block, y.row, y.col);
    if (ka < kb)
      ++i;
    else if (kb < ka)
      ++j;
    else {
      acc += x.value * y.value * (x.row == x.col ? 1.0 : 2.0);
      ++i;
      ++j;
    }
  }
  if (a.free_part.size()) acc += a.free_part.dot(b.free_part);
  return acc;
}

struct PresolveResult {
  std::vector<int> kept;
  std::vector<int> dropped;
  bool infeasible = false;
};

// Incremental Cholesky of the constraint Gram matrix; a dependent row whose
// implied rhs disagrees makes the system infeasible outright.
PresolveResult presolve(const SdpProblem& p) {
  PresolveResult out;
  std::size_t n = p.constraints.size();
  std::vector<SortedRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].entries = p.constraints[i];
    std::sort(rows[i].entries.begin(), rows[i].entries.end(), [](const SdpEntry& a, const SdpEntry& b) {
      return std::make_tuple(a.block, a.row, a.col) < std::make_tuple(b.block, b.row, b.col);
    });
    if (p.free_vars > 0) rows[i].free_part = p.free_coeffs.row((Eigen::Index)i);
    rows[i].self = row_inner(rows[i], rows[i]);
  }
  Mat l(0, 0);
  std::vector<double> kept_rhs;
  for (std::size_t i = 0; i < n; ++i) {
    double a_rr = rows[i].self;
    if (a_rr <= 1e-24) {
      if (std::abs(p.rhs[i]) > 1e-10) {
        out.infeasible = true;
        return out;
      }
      std::fprintf(stderr, "warning: dropping empty constraint row %zu\n", i);
      out.dropped.push_back((int)i);
      continue;
    }
    Eigen::Index k = l.rows();
    Vec g(k);
    for (Eigen::Index j = 0; j < k; ++j) g(j) = row_inner(rows[i], rows[(std::size_t)out.kept[j]]);
    Vec w = k ? l.triangularView<Eigen::Lower>().solve(g).eval() : Vec(0);
    double res2 = a_rr - (k ? w.squaredNorm() : 0.0);
    // cancellation noise in res2 is ~eps*a_rr, so the rank cutoff sits well above it
    if (res2 <= 1e-12 * a_rr) {
      Vec c = k ? l.transpose().triangularView<Eigen::Upper>().solve(w).eval() : Vec(0);
      double implied = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) implied += c(j) * kept_rhs[(std::size_t)j];
      if (std::abs(implied - p.rhs[i]) > 1e-8 * (1.0 + std::abs(p.rhs[i]))) {
        out.infeasible = true;
        return out;
      }
      std::fprintf(stderr, "warning: dropping redundant constraint row %zu\n", i);
      out.dropped.push_back((int)i);
      continue;
    }
    Mat l2(k + 1, k + 1);
    l2.setZero();
    l2.topLeftCorner(k, k) = l;
    l2.block(k, 0, 1, k) = w.transpose();
    l2(k, k) = std::sqrt(res2);
    l = std::move(l2);
    out.kept.push_back((int)i);
    kept_rhs.push_back(p.rhs[i]);
  }
  return out;
}

}  // namespace

Mat schur_complement_serial(const std::vector<std::vector<SdpEntry>>& constraints, const Blocks& x,
                            const Blocks& sinv) {
  // same per-entry arithmetic as the parallel kernel, straight loops
  int p = (int)constraints.size();
  std::vector<int> dims;
  for (const auto& blk : x) dims.push_back((int)blk.rows());
  std::vector<Blocks> m(p);
  for (int j = 0; j < p; ++j) {
    Blocks prod(dims.size());
    for (std::size_t b = 0; b < dims.size(); ++b) prod[b] = Mat::Zero(dims[b], dims[b]);
    for (const auto& e : constraints[j]) {
      prod[e.block].row(e.row) += e.value * sinv[e.block].row(e.col);
      if (e.row != e.col) prod[e.block].row(e.col) += e.value * sinv[e.block].row(e.row);
    }
    m[j].resize(dims.size());
    for (std::size_t b = 0; b < dims.size(); ++b) {
      if (constraints[j].empty())
        m[j][b] = Mat::Zero(dims[b], dims[b]);
      else
        m[j][b] = x[b] * prod[b];
    }
  }
  Mat bmat(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) bmat(i, j) = sparse_inner(constraints[i], m[j]);
  return 0.5 * (bmat + bmat.transpose());
}

Mat schur_complement(const std::vector<std::vector<SdpEntry>>& constraints, const Blocks& x,
                     const Blocks& sinv, int threads) {
  int p = (int)constraints.size();
  std::vector<int> dims;
  for (const auto& blk : x) dims.push_back((int)blk.rows());
  std::vector<Blocks> m(p);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
#endif
  for (int j = 0; j < p; ++j) {
    // X (A_j Sinv) with A_j applied sparsely: A_j Sinv adds value * row 'col'
    // of Sinv to row 'row' (and the mirror) without densifying A_j.
    Blocks prod(dims.size());
    for (std::size_t b = 0; b < dims.size(); ++b) prod[b] = Mat::Zero(dims[b], dims[b]);
    for (const auto& e : constraints[j]) {
      prod[e.block].row(e.row) += e.value * sinv[e.block].row(e.col);
      if (e.row != e.col) prod[e.block].row(e.col) += e.value * sinv[e.block].row(e.row);
    }
    m[j].resize(dims.size());
    for (std::size_t b = 0; b < dims.size(); ++b) {
      if (constraints[j].empty())
        m[j][b] = Mat::Zero(dims[b], dims[b]);
      else
        m[j][b] = x[b] * prod[b];
    }
  }
  Mat bmat(p, p);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
#endif
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) bmat(i, j) = sparse_inner(constraints[i], m[j]);
  return 0.5 * (bmat + bmat.transpose());
}

namespace {

struct Workspace {
  std::vector<int> dims;
  Blocks c;
  std::vector<std::vector<SdpEntry>> a;
  Vec b;
  Mat f;       // p x nf
  Vec f_cost;  // nf
  int nf = 0;
};

struct Iterate {
  Blocks x, s;
  Vec y, u;
};

struct Residuals {
  Vec rp, rf;
  Blocks rd;
  double pobj = 0, dobj = 0, mu = 0;
  double rp_rel = 0, rd_rel = 0, rf_rel = 0, gap_rel = 0;
};

Residuals compute_residuals(const Workspace& w, const Iterate& it, double nu) {
  Residuals r;
  int p = (int)w.a.size();
  r.rp = Vec(p);
  for (int i = 0; i < p; ++i) r.rp(i) = w.b(i) - sparse_inner(w.a[i], it.x);
  if (w.nf > 0) r.rp -= w.f * it.u;
  r.rd = w.c;
  for (std::size_t blk = 0; blk < r.rd.size(); ++blk) r.rd[blk] -= it.s[blk];
  for (int i = 0; i < p; ++i) add_scaled(r.rd, w.a[i], -it.y(i));
  r.rf = w.nf > 0 ? Vec(w.f_cost - w.f.transpose() * it.y) : Vec(0);
  r.pobj = block_dot(w.c, it.x) + (w.nf > 0 ? w.f_cost.dot(it.u) : 0.0);
  r.dobj = w.b.dot(it.y);
  r.mu = block_dot(it.x, it.s) / nu;
  double bnorm = p ? w.b.cwiseAbs().maxCoeff() : 0.0;
  r.rp_rel = p ? r.rp.cwiseAbs().maxCoeff() / (1.0 + bnorm) : 0.0;
  double cnorm = block_norm(w.c);
  r.rd_rel = block_norm(r.rd) / (1.0 + cnorm);
  r.rf_rel = w.nf > 0 ? r.rf.cwiseAbs().maxCoeff() / (1.0 + w.f_cost.cwiseAbs().maxCoeff()) : 0.0;
  r.gap_rel = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  return r;
}

// [[B, F],[F^T, 0]] [dy; du] = [r1; r2] by block elimination
bool saddle_solve(const Mat& bmat, const Mat& f, const Vec& r1, const Vec& r2, Vec& dy, Vec& du) {
  Mat breg = bmat;
  double ridge = 0.0;
  Eigen::LLT<Mat> llt;
  for (int attempt = 0; attempt < 4; ++attempt) {
    llt.compute(breg);
    if (llt.info() == Eigen::Success) break;
    ridge = (ridge == 0.0 ? 1e-13 : ridge * 100) * (1.0 + breg.diagonal().cwiseAbs().maxCoeff());
    breg = bmat + ridge * Mat::Identity(bmat.rows(), bmat.cols());
  }
  if (llt.info() != Eigen::Success) return false;
  Mat lmat = llt.matrixL();
  Vec t1 = lmat.triangularView<Eigen::Lower>().solve(r1);
  if (f.cols() == 0) {
    du = Vec(0);
    dy = lmat.transpose().triangularView<Eigen::Upper>().solve(t1);
    return true;
  }
  Mat e = lmat.triangularView<Eigen::Lower>().solve(f);
  Mat g = e.transpose() * e;
  g.diagonal().array() += 1e-14 * (1.0 + g.diagonal().cwiseAbs().maxCoeff());
  Eigen::LDLT<Mat> gf(g);
  du = gf.solve(e.transpose() * t1 - r2);
  dy = lmat.transpose().triangularView<Eigen::Upper>().solve(t1 - e * du);
  return true;
}

}  // namespace

SdpSolution solve(const SdpProblem& prob, const SdpOptions& opts) {
  prob.validate();
  SdpSolution sol;
  const int p_all = (int)prob.constraints.size();

  PresolveResult pre = presolve(prob);
  sol.dropped_rows = pre.dropped;
  if (pre.infeasible) {
    sol.status = SdpStatus::PrimalInfeasible;
    sol.y = Vec::Zero(p_all);
    return sol;
  }

  Workspace w;
  w.dims = prob.block_dims;
  w.c = prob.cost;
  w.nf = prob.free_vars;
  const int p = (int)pre.kept.size();
  w.a.reserve(p);
  w.b = Vec(p);
  for (int i = 0; i < p; ++i) {
    w.a.push_back(prob.constraints[(std::size_t)pre.kept[i]]);
    w.b(i) = prob.rhs[(std::size_t)pre.kept[i]];
  }
  std::vector<int> free_map;
  if (w.nf > 0) {
    Mat fful(p, prob.free_vars);
    for (int i = 0; i < p; ++i) fful.row(i) = prob.free_coeffs.row(pre.kept[i]);
    // a free variable appearing in no constraint is unbounded unless costless
    for (int j = 0; j < prob.free_vars; ++j) {
      if (p > 0 && fful.col(j).cwiseAbs().maxCoeff() > 1e-14)
        free_map.push_back(j);
      else if (std::abs(prob.free_cost(j)) > 1e-12) {
        sol.status = SdpStatus::DualInfeasible;
        sol.y = Vec::Zero(p_all);
        return sol;
      }
    }
    w.nf = (int)free_map.size();
    w.f = Mat(p, w.nf);
    w.f_cost = Vec(w.nf);
    for (int j = 0; j < w.nf; ++j) {
      w.f.col(j) = fful.col(free_map[j]);
      w.f_cost(j) = prob.free_cost(free_map[j]);
    }
  }

  // normalize the cost so convergence tolerances (and hence the returned X)
  // do not depend on its overall magnitude; duals are scaled back on exit
  double cfrob2 = 0.0;
  for (const auto& blk : w.c) cfrob2 += blk.squaredNorm();
  if (w.nf > 0) cfrob2 += w.f_cost.squaredNorm();
  const double cscale = std::sqrt(cfrob2) > 1e-128 ? std::sqrt(cfrob2) : 1.0;
  for (auto& blk : w.c) blk /= cscale;
  if (w.nf > 0) w.f_cost /= cscale;

  double nu = 0.0;
  for (int d : w.dims) nu += d;
  double bnorm = p ? w.b.cwiseAbs().maxCoeff() : 0.0;
  double tau = std::max({1.0, bnorm, block_norm(w.c)});

  Iterate it;
  it.x = zeros_like(w.dims);
  it.s = zeros_like(w.dims);
  for (std::size_t blk = 0; blk < w.dims.size(); ++blk) {
    it.x[blk] = tau * Mat::Identity(w.dims[blk], w.dims[blk]);
    it.s[blk] = tau * Mat::Identity(w.dims[blk], w.dims[blk]);
  }
  it.y = Vec::Zero(p);
  it.u = Vec::Zero(w.nf);

  const double infeas_thresh = 1.0 / std::sqrt(std::numeric_limits<double>::epsilon());
  Residuals res;
  bool converged = false;
  int iter = 0;

  for (; iter < opts.max_iter; ++iter) {
    res = compute_residuals(w, it, nu);
    if (opts.verbose)
      std::fprintf(stderr, "it %3d  pobj % .9e  dobj % .9e  gap %.2e  rp %.2e  rd %.2e  mu %.2e\n", iter,
                   res.pobj, res.dobj, res.gap_rel, res.rp_rel, res.rd_rel, res.mu);
    if (res.rp_rel <= opts.tol_feas && res.rd_rel <= opts.tol_feas && res.rf_rel <= opts.tol_feas &&
        res.gap_rel <= opts.tol_gap) {
      converged = true;
      break;
    }
    if (res.dobj > infeas_thresh * std::max(1.0, bnorm) && res.gap_rel > 0.1) {
      sol.status = SdpStatus::PrimalInfeasible;
      break;
    }
    if (res.pobj < -infeas_thresh * std::max(1.0, block_norm(w.c)) && res.gap_rel > 0.1) {
      sol.status = SdpStatus::DualInfeasible;
      break;
    }

    // factorizations of the current iterate
    std::vector<Mat> lx(w.dims.size()), ls(w.dims.size());
    Blocks sinv(w.dims.size());
    bool fact_ok = true;
    for (std::size_t blk = 0; blk < w.dims.size(); ++blk) {
      Eigen::LLT<Mat> cx(it.x[blk]), cs(it.s[blk]);
      if (cx.info() != Eigen::Success || cs.info() != Eigen::Success) {
        fact_ok = false;
        break;
      }
      lx[blk] = cx.matrixL();
      ls[blk] = cs.matrixL();
      sinv[blk] = cs.solve(Mat::Identity(w.dims[blk], w.dims[blk]));
      sinv[blk] = 0.5 * (sinv[blk] + sinv[blk].transpose()).eval();
    }
    if (!fact_ok) break;

    Mat bmat = schur_complement(w.a, it.x, sinv, opts.threads);

    auto schur_rhs = [&](double sigma_mu, const Blocks* cross) {
      Vec rhs1(p);
      Blocks k(w.dims.size());
      for (std::size_t blk = 0; blk < w.dims.size(); ++blk) {
        Mat num = it.x[blk] * res.rd[blk];
        if (cross) num += (*cross)[blk];
        k[blk] = num * sinv[blk];
      }
      for (int i = 0; i < p; ++i) {
        double v = res.rp(i) + sparse_inner(w.a[i], it.x) + sparse_inner(w.a[i], k);
        if (sigma_mu != 0.0) v -= sigma_mu * sparse_inner(w.a[i], sinv);
        rhs1(i) = v;
      }
      return rhs1;
    };

    auto direction = [&](const Vec& dy, double sigma_mu, const Blocks* cross, Blocks& dx, Blocks& ds) {
      ds = res.rd;
      for (int i = 0; i < p; ++i) add_scaled(ds, w.a[i], -dy(i));
      dx.resize(w.dims.size());
      for (std::size_t blk = 0; blk < w.dims.size(); ++blk) {
        Mat num = it.x[blk] * ds[blk];
        if (cross) num += (*cross)[blk];
        Mat d = -it.x[blk] - num * sinv[blk];
        if (sigma_mu != 0.0) d += sigma_mu * sinv[blk];
        dx[blk] = 0.5 * (d + d.transpose());
      }
    };

    auto boundary = [&](const Blocks& base_l, const Blocks& delta) {
      double a = std::numeric_limits<double>::infinity();
      for (std::size_t blk = 0; blk < w.dims.size(); ++blk)
        a = std::min(a, max_step(base_l[blk], delta[blk]));
      return a;
    };

    // predictor
    Vec dy_a(p), du_a;
    if (!saddle_solve(bmat, w.nf ? w.f : Mat(p, 0), schur_rhs(0.0, nullptr), w.nf ? res.rf : Vec(0), dy_a,
                      du_a))
      break;
    Blocks dx_a, ds_a;
    direction(dy_a, 0.0, nullptr, dx_a, ds_a);
    double ap_a = std::min(1.0, opts.step_scale * boundary(lx, dx_a));
    double ad_a = std::min(1.0, opts.step_scale * boundary(ls, ds_a));

    // corrector
    double mu_aff = 0.0;
    {
      Blocks xa = it.x, sa = it.s;
      for (std::size_t blk = 0; blk < w.dims.size(); ++blk) {
        xa[blk] += ap_a * dx_a[blk];
        sa[blk] += ad_a * ds_a[blk];
      }
      mu_aff = std::max(0.0, block_dot(xa, sa) / nu);
    }
    double sigma = res.mu > 0 ? std::pow(mu_aff / res.mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    Blocks cross(w.dims.size());
    for (std::size_t blk = 0; blk < w.dims.size(); ++blk) cross[blk] = dx_a[blk] * ds_a[blk];

    Vec dy(p), du;
    if (!saddle_solve(bmat, w.nf ? w.f : Mat(p, 0), schur_rhs(sigma * res.mu, &cross),
                      w.nf ? res.rf : Vec(0), dy, du))
      break;
    Blocks dx, ds;
    direction(dy, sigma * res.mu, &cross, dx, ds);

    double ap = std::min(1.0, opts.step_scale * boundary(lx, dx));
    double ad = std::min(1.0, opts.step_scale * boundary(ls, ds));

    // keep strictly inside the cone; shave the step if roundoff broke PD
    for (int tries = 0; tries < 12; ++tries) {
      bool ok = true;
      for (std::size_t blk = 0; blk < w.dims.size() && ok; ++blk) {
        Eigen::LLT<Mat> test(Mat(it.x[blk] + ap * dx[blk]));
        ok = test.info() == Eigen::Success;
      }
      if (ok) break;
      ap *= 0.8;
    }
    for (int tries = 0; tries < 12; ++tries) {
      bool ok = true;
      for (std::size_t blk = 0; blk < w.dims.size() && ok; ++blk) {
        Eigen::LLT<Mat> test(Mat(it.s[blk] + ad * ds[blk]));
        ok = test.info() == Eigen::Success;
      }
      if (ok) break;
      ad *= 0.8;
    }

    if (std::min(ap, ad) < 1e-10) break;

    for (std::size_t blk = 0; blk < w.dims.size(); ++blk) {
      it.x[blk] += ap * dx[blk];
      it.s[blk] += ad * ds[blk];
    }
    it.y += ad * dy;
    if (w.nf > 0) it.u += ap * du;
  }

  res = compute_residuals(w, it, nu);
  sol.X = it.x;
  sol.S = it.s;
  for (auto& blk : sol.S) blk *= cscale;
  sol.iterations = iter;
  sol.primal_objective = cscale * res.pobj;
  sol.dual_objective = cscale * res.dobj;
  sol.gap = res.gap_rel;
  sol.primal_residual = res.rp_rel;
  sol.dual_residual = res.rd_rel;
  sol.y = Vec::Zero(p_all);
  for (int i = 0; i < p; ++i) sol.y(pre.kept[(std::size_t)i]) = cscale * it.y(i);
  sol.free_values = Vec::Zero(prob.free_vars);
  if (w.nf > 0)
    for (int j = 0; j < w.nf; ++j) sol.free_values(free_map[(std::size_t)j]) = it.u(j);
  if (sol.status == SdpStatus::PrimalInfeasible || sol.status == SdpStatus::DualInfeasible) return sol;
  if (converged || (res.rp_rel <= opts.tol_feas && res.rd_rel <= opts.tol_feas &&
                    res.rf_rel <= opts.tol_feas && res.gap_rel <= opts.tol_gap))
    sol.status = SdpStatus::Optimal;
  else
    sol.status = SdpStatus::IterLimit;
  return sol;
}

ConeFeasibility solve_feasibility(const std::vector<std::vector<SdpEntry>>& constraints,
                                  const std::vector<double>& rhs, int dim, const SdpOptions& opts,
                                  double threshold) {
  ConeFeasibility out;
  if (constraints.empty()) {
    out.feasible = true;
    out.t_star = 0.0;
    out.solution.status = SdpStatus::Optimal;
    out.solution.X = {Mat::Identity(dim, dim) / dim};
    out.solution.S = {Mat::Zero(dim, dim)};
    out.solution.y = Vec(0);
    return out;
  }
  SdpProblem p;
  p.block_dims = {dim};
  p.cost = {Mat::Zero(dim, dim)};
  p.constraints = constraints;
  p.rhs = rhs;
  p.free_vars = 1;
  p.free_coeffs = Mat((Eigen::Index)rhs.size(), 1);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    double tr = 0.0;
    for (const auto& e : constraints[i])
      if (e.row == e.col) tr += e.value;
    p.free_coeffs((Eigen::Index)i, 0) = -tr;
  }
  p.free_cost = Vec::Ones(1);
  out.solution = solve(p, opts);
  out.t_star = out.solution.free_values.size() ? out.solution.free_values(0) : 0.0;
  out.feasible = out.solution.status == SdpStatus::Optimal && out.t_star <= threshold;
  return out;
}

}  // namespace symqmp
