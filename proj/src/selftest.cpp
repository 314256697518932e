#include "symqmp/selftest.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "symqmp/compat.hpp"
#include "symqmp/rng.hpp"
#include "symqmp/sdp.hpp"
#include "symqmp/variational.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace symqmp {

namespace {

int numerical_rank(const CxMat& h, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<CxMat> es(h, Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (top <= 0.0) return 0;
  return static_cast<int>((es.eigenvalues().array() > rel_tol * top).count());
}

CxMat hermitian_direction(Rng& rng, int dim) {
  CxMat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.cgauss();
  CxMat a = 0.5 * (g + g.adjoint());
  return a / a.norm();
}

CxMat normalized_direction(const CxMat& given, int dim) {
  if (given.rows() != dim || given.cols() != dim)
    throw std::invalid_argument("uniqueness_probe: direction dimension mismatch");
  CxMat a = 0.5 * (given + given.adjoint());
  double nrm = a.norm();
  if (!(nrm > 0.0)) throw std::invalid_argument("uniqueness_probe: zero direction");
  return a / nrm;
}

}  // namespace

SymmetricOperator random_symmetric_state(int n, int d, int rank, std::uint64_t seed) {
  DickeBasis basis(n, d);
  int dim = basis.dim();
  if (rank < 1 || rank > dim)
    throw std::invalid_argument("random_symmetric_state: rank must lie in [1, dim]");
  Rng rng(seed);
  CxMat g(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = rng.cgauss();
  CxMat rho = g * g.adjoint();
  rho /= rho.trace().real();
  int got = numerical_rank(rho, 1e-12);
  if (got != rank)
    throw std::runtime_error("random_symmetric_state: draw degenerated below the requested rank");
  return SymmetricOperator(std::move(basis), std::move(rho));
}

void UniquenessReport::validate() const {
  if (trials < 1) throw std::logic_error("UniquenessReport: trials must be >= 1");
  if (discarded < 0 || discarded > trials)
    throw std::logic_error("UniquenessReport: discarded count out of range");
  if (!(min_fidelity >= 0.0 && min_fidelity <= 1.0 + 1e-9))
    throw std::logic_error("UniquenessReport: fidelity outside [0, 1]");
  if (trial_seeds.size() != static_cast<std::size_t>(trials) ||
      fidelities.size() != static_cast<std::size_t>(trials) ||
      solution_ranks.size() != static_cast<std::size_t>(trials))
    throw std::logic_error("UniquenessReport: per-trial records must cover every trial");
}

UniquenessReport uniqueness_probe(const SymmetricOperator& rho, int m, std::uint64_t seed,
                                  const ProbeOptions& opts) {
  const DickeBasis& bn = rho.basis();
  int n = bn.n(), d = bn.local_dim();
  if (m < 1 || m >= n)
    throw std::invalid_argument("uniqueness_probe: need 1 <= m < n");
  if (opts.trials < 1) throw std::invalid_argument("uniqueness_probe: need at least one trial");
  if (!opts.directions.empty() && opts.directions.size() != static_cast<std::size_t>(opts.trials))
    throw std::invalid_argument("uniqueness_probe: directions must cover every trial");
  if (rho.trace_error() > 1e-8)
    throw std::invalid_argument("uniqueness_probe: input is not trace-normalized");

  SymmetricOperator sigma = partial_trace_symmetric(rho, m);
  CompatibilityMap map = build_constraints(n, m, d, opts.threads);
  MarginalConstraintRows mc = marginal_constraint_rows(map, sigma.matrix());
  int dim = bn.dim();

  // The extension set can be a single boundary point (that is the interesting
  // case), which leaves the equality system without a strictly feasible
  // interior and lets the solver stall.  Reintroduce an interior with a
  // nonnegative eigenvalue shift t: optimize over Z = rho' + t I >= 0, t >= 0,
  // and penalize t hard enough that the optimum keeps it at zero -- the
  // objective can gain at most ~dim per unit of shift, far below the penalty.
  double shift_penalty = 100.0 * mc.block_dim;
  std::vector<std::vector<SdpEntry>> aug_rows = mc.rows;
  for (std::size_t i = 0; i < aug_rows.size(); ++i) {
    double tr = 0.0;
    for (const SdpEntry& e : aug_rows[i])
      if (e.row == e.col) tr += e.value;
    aug_rows[i].push_back({1, 0, 0, -tr});
  }
  Mat penalty_cost(1, 1);
  penalty_cost(0, 0) = shift_penalty;

  // Even with the shift the boundary geometry can cost the solver its last
  // digit of feasibility.  Every recovered state is therefore re-projected
  // onto the marginal equalities by a least-norm Hermitian correction; the
  // reading map P acts on the flattened parameters (diagonal first, then
  // interleaved Re/Im of the upper off-diagonal entries).
  int nred = map.reduced_dim();
  auto pair_slot = [dim](int r, int c) {  // r < c
    return dim + 2 * (r * (2 * dim - r - 1) / 2 + (c - r - 1));
  };
  Mat readings = Mat::Zero(static_cast<Eigen::Index>(nred) * nred, static_cast<Eigen::Index>(dim) * dim);
  {
    Eigen::Index row = 0;
    for (int a = 0; a < nred; ++a)
      for (int b = a; b < nred; ++b) {
        for (const CompatEntry& e : map.entries(a, b)) {
          if (e.row == e.col)
            readings(row, e.row) += e.value;
          else
            readings(row, pair_slot(std::min(e.row, e.col), std::max(e.row, e.col))) += e.value;
        }
        ++row;
        if (a == b) continue;
        for (const CompatEntry& e : map.entries(a, b)) {
          if (e.row == e.col) continue;  // real diagonal entries carry no imaginary part
          double sign = e.row < e.col ? 1.0 : -1.0;
          readings(row, pair_slot(std::min(e.row, e.col), std::max(e.row, e.col)) + 1) += sign * e.value;
        }
        ++row;
      }
  }
  Eigen::BDCSVD<Mat> projector(readings, Eigen::ComputeThinU | Eigen::ComputeThinV);

  UniquenessReport rep;
  rep.n = n;
  rep.m = m;
  rep.trials = opts.trials;
  rep.seed = seed;
  rep.rank = numerical_rank(rho.matrix(), 1e-12);
  rep.trial_seeds.resize(opts.trials);
  rep.fidelities.assign(opts.trials, std::numeric_limits<double>::quiet_NaN());
  rep.solution_ranks.assign(opts.trials, -1);
  std::vector<double> residuals(opts.trials, 0.0);
  for (int t = 0; t < opts.trials; ++t) rep.trial_seeds[t] = Rng::stream_seed(seed, t);

  bool parallel = opts.threads != 1 && opts.trials > 1;
  int inner_threads = parallel ? 1 : opts.threads;
  SdpOptions so;
  so.tol_gap = opts.tol_gap;
  so.tol_feas = opts.tol_gap;
  so.max_iter = opts.max_iter;
  so.threads = inner_threads;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(opts.threads > 0 ? opts.threads : omp_get_max_threads()) if (parallel)
#endif
  for (int t = 0; t < opts.trials; ++t) {
    CxMat a;
    if (!opts.directions.empty()) {
      a = normalized_direction(opts.directions[static_cast<std::size_t>(t)], dim);
    } else {
      Rng rng(rep.trial_seeds[static_cast<std::size_t>(t)]);
      a = hermitian_direction(rng, dim);
    }
    SdpProblem p;
    p.block_dims = {mc.block_dim, 1};
    p.cost = {-0.5 * realify(a), penalty_cost};
    p.constraints = aug_rows;
    p.rhs = mc.rhs;
    SdpSolution sol = solve(p, so);
    // A stall just above the target tolerance is still a usable near-optimal
    // point as long as its quality is explicit.  The gap and dual residual
    // must be genuinely small; the primal residual may sit higher because the
    // projection below restores feasibility exactly, and the landing is
    // checked against a hard bound afterwards.
    bool usable = sol.status == SdpStatus::Optimal ||
                  (sol.status == SdpStatus::IterLimit && sol.gap <= 1e-6 &&
                   sol.primal_residual <= 1e-4 && sol.dual_residual <= 1e-6);
    if (!usable) continue;  // inconclusive trial
    double tshift = sol.X[1](0, 0);
    CxMat recovered = unrealify(sol.X[0]) - tshift * CxMat::Identity(dim, dim);

    // Least-norm correction back onto the marginal equalities.  One solve
    // leaves conditioning noise behind when the reading map is nearly rank
    // deficient, so the correction is refined iteratively; three passes land
    // at machine precision in practice.
    for (int pass = 0; pass < 3; ++pass) {
      CxMat defect = map.apply(recovered) - sigma.matrix();
      Vec defect_rhs(static_cast<Eigen::Index>(nred) * nred);
      Eigen::Index row = 0;
      for (int a = 0; a < nred; ++a)
        for (int b = a; b < nred; ++b) {
          defect_rhs(row++) = std::real(defect(a, b));
          if (a != b) defect_rhs(row++) = std::imag(defect(a, b));
        }
      Vec correction = projector.solve(defect_rhs);
      for (int r = 0; r < dim; ++r) recovered(r, r) -= correction(r);
      for (int r = 0; r < dim; ++r)
        for (int c = r + 1; c < dim; ++c) {
          cxd dc(correction(pair_slot(r, c)), correction(pair_slot(r, c) + 1));
          recovered(r, c) -= dc;
          recovered(c, r) -= std::conj(dc);
        }
    }

    double res = (map.apply(recovered) - sigma.matrix()).cwiseAbs().maxCoeff();
    if (!(res <= 1e-8)) continue;  // correction failed to land; treat as inconclusive
    residuals[static_cast<std::size_t>(t)] = res;
    rep.fidelities[static_cast<std::size_t>(t)] = fidelity(rho.matrix(), recovered);
    rep.solution_ranks[static_cast<std::size_t>(t)] = numerical_rank(recovered, 1e-6);
  }

  double min_fid = std::numeric_limits<double>::infinity();
  int kept = 0;
  rep.solution_ranks_equal = true;
  rep.shared_solution_rank = -1;
  for (int t = 0; t < opts.trials; ++t) {
    double f = rep.fidelities[static_cast<std::size_t>(t)];
    if (std::isnan(f)) continue;
    ++kept;
    min_fid = std::min(min_fid, f);
    rep.max_constraint_residual =
        std::max(rep.max_constraint_residual, residuals[static_cast<std::size_t>(t)]);
    int r = rep.solution_ranks[static_cast<std::size_t>(t)];
    if (rep.shared_solution_rank == -1)
      rep.shared_solution_rank = r;
    else if (r != rep.shared_solution_rank)
      rep.solution_ranks_equal = false;
  }
  rep.discarded = opts.trials - kept;
  if (rep.discarded * 10 > opts.trials)
    throw std::runtime_error("uniqueness_probe: more than 10% of trials were inconclusive");
  if (!rep.solution_ranks_equal) rep.shared_solution_rank = -1;
  rep.min_fidelity = std::clamp(min_fid, 0.0, 1.0 + 1e-9);
  rep.unique = rep.min_fidelity > opts.fidelity_threshold;
  rep.validate();
  return rep;
}

DickeTraceAnalysis dicke_trace_lp(int n, int k, int m) {
  if (n < 1 || k < 0 || k > n || m < 1 || m > n)
    throw std::invalid_argument("dicke_trace_lp: need 0 <= k <= n and 1 <= m <= n");
  DickeTraceAnalysis out;
  DickeTraceSystem& sys = out.system;
  sys.n = n;
  sys.k = k;
  sys.m = m;
  sys.matrix = Mat::Zero(m + 1, n + 1);
  sys.rhs = Vec::Zero(m + 1);
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) sys.matrix(i, j) = binomial(n - m, j - i);
    sys.rhs(i) = binomial(n - m, k - i);
  }
  out.cascade_applicable = 2 * m > n;

  // A zero-rhs row is a vanishing sum of nonnegative terms: every variable in
  // its support must be zero.  One pass reaches the closure because forcing
  // never creates new zero-rhs rows.
  std::vector<bool> forced(static_cast<std::size_t>(n + 1), false);
  for (int i = 0; i <= m; ++i) {
    if (sys.rhs(i) != 0.0) continue;
    out.zero_rows_present = true;
    for (int j = 0; j <= n; ++j)
      if (sys.matrix(i, j) > 0.0) forced[static_cast<std::size_t>(j)] = true;
  }
  if (forced[static_cast<std::size_t>(k)])
    throw std::logic_error("dicke_trace_lp: forcing contradicted the known solution");
  for (int j = 0; j <= n; ++j)
    if (forced[static_cast<std::size_t>(j)]) out.forced_zero.push_back(j);

  std::vector<int> free_cols;
  for (int j = 0; j <= n; ++j)
    if (!forced[static_cast<std::size_t>(j)]) free_cols.push_back(j);
  std::vector<int> live_rows;
  for (int i = 0; i <= m; ++i)
    if (sys.rhs(i) != 0.0) live_rows.push_back(i);

  Mat reduced(live_rows.size(), free_cols.size());
  Vec reduced_rhs(live_rows.size());
  for (std::size_t a = 0; a < live_rows.size(); ++a) {
    for (std::size_t b = 0; b < free_cols.size(); ++b)
      reduced(a, b) = sys.matrix(live_rows[a], free_cols[b]);
    reduced_rhs(a) = sys.rhs(live_rows[a]);
  }

  Eigen::JacobiSVD<Mat> svd(reduced, Eigen::ComputeThinU | Eigen::ComputeThinV);
  bool full_column_rank =
      reduced.rows() >= reduced.cols() && reduced.cols() > 0 &&
      svd.singularValues()(reduced.cols() - 1) > 1e-10 * svd.singularValues()(0);
  if (!full_column_rank) return out;  // not certified by this argument

  Vec x_free = svd.solve(reduced_rhs);
  Vec x = Vec::Zero(n + 1);
  for (std::size_t b = 0; b < free_cols.size(); ++b) x(free_cols[b]) = x_free(b);
  double residual = (sys.matrix * x - sys.rhs).cwiseAbs().maxCoeff();
  Vec ek = Vec::Zero(n + 1);
  ek(k) = 1.0;
  if (residual > 1e-9 || (x - ek).cwiseAbs().maxCoeff() > 1e-9)
    throw std::logic_error("dicke_trace_lp: certified solution is not the basis vector");
  out.unique = true;
  out.solution = ek;  // exact form of the certified solution
  return out;
}

std::vector<RankSweepCell> rank_sweep(int n, int d, const std::vector<int>& m_values,
                                      const std::vector<int>& rank_values, std::uint64_t seed,
                                      const RankSweepOptions& opts) {
  if (m_values.empty() || rank_values.empty())
    throw std::invalid_argument("rank_sweep: empty grid");
  int dim = DickeBasis(n, d).dim();
  for (int m : m_values)
    if (m < 1 || m >= n) throw std::invalid_argument("rank_sweep: need 1 <= m < n");
  for (int r : rank_values)
    if (r < 1 || r > dim) throw std::invalid_argument("rank_sweep: rank outside [1, dim]");

  int nm = static_cast<int>(m_values.size());
  int nr = static_cast<int>(rank_values.size());
  std::vector<RankSweepCell> cells(static_cast<std::size_t>(nm) * nr);
  bool parallel = opts.threads != 1 && cells.size() > 1;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(opts.threads > 0 ? opts.threads : omp_get_max_threads()) if (parallel)
#endif
  for (int c = 0; c < nm * nr; ++c) {
    RankSweepCell& cell = cells[static_cast<std::size_t>(c)];
    cell.m = m_values[static_cast<std::size_t>(c / nr)];
    cell.rank = rank_values[static_cast<std::size_t>(c % nr)];
    std::uint64_t cell_seed = Rng::stream_seed(seed, static_cast<std::uint64_t>(c));
    try {
      SymmetricOperator state =
          random_symmetric_state(n, d, cell.rank, Rng::stream_seed(cell_seed, 0));
      ProbeOptions po;
      po.trials = opts.trials;
      po.fidelity_threshold = opts.fidelity_threshold;
      po.tol_gap = opts.tol_gap;
      po.max_iter = opts.max_iter;
      po.threads = parallel ? 1 : opts.threads;
      cell.report = uniqueness_probe(state, cell.m, Rng::stream_seed(cell_seed, 1), po);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }
  return cells;
}

std::string rank_sweep_csv(int n, const std::vector<RankSweepCell>& cells) {
  std::string out = "n,m,rank,trials,discarded,min_fidelity,unique\n";
  char buf[160];
  for (const RankSweepCell& c : cells) {
    if (c.error.empty()) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%.17g,%d\n", n, c.m, c.rank,
                    c.report.trials, c.report.discarded, c.report.min_fidelity,
                    c.report.unique ? 1 : 0);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,0,0,nan,0\n", n, c.m, c.rank);
    }
    out += buf;
  }
  return out;
}

}  // namespace symqmp
