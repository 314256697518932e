#include "symqmp/variational.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "symqmp/compat.hpp"
#include "symqmp/ed.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace symqmp {

namespace {

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

CxMat unit3(int i, int j) {
  CxMat m = CxMat::Zero(3, 3);
  m(i, j) = 1;
  return m;
}

// (o x 1 + 1 x o) / 2: spreads a one-site term evenly over a pair
CxMat sym1(const CxMat& o) {
  CxMat id = CxMat::Identity(o.rows(), o.cols());
  return 0.5 * (ckron(o, id) + ckron(id, o));
}

}  // namespace

const char* ModelSpec::name() const {
  static const char* names[] = {"lmg", "ising-power-law", "ising-nn", "xxz-transverse", "xxz-periodic", "lipkin3"};
  return names[model.index()];
}

void ModelSpec::validate() const {
  if (n < 2) throw std::invalid_argument("ModelSpec: need n >= 2");
  if (const auto* p = std::get_if<IsingPowerLaw>(&model); p && p->alpha < 0)
    throw std::invalid_argument("ModelSpec: power-law exponent must be >= 0");
  if (const auto* p = std::get_if<XxzPeriodic>(&model); p && (p->jx < 0 || p->jz < 0))
    throw std::invalid_argument("ModelSpec: periodic couplings must be >= 0");
}

double power_law_coupling_sum(int n, double alpha) {
  double j = 0.0;
  for (int dist = 1; dist < n; ++dist) j += (n - dist) * std::pow(dist, -alpha);
  return j;
}

EffectiveHamiltonian effective_hamiltonian(const ModelSpec& spec) {
  spec.validate();
  const double n = spec.n;
  CxMat mat;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Lmg>) {
          mat = -binomial(spec.n, 2) * (m.lambda_c / n) *
                    (ckron(pauli('x'), pauli('x')) + m.gamma * ckron(pauli('y'), pauli('y'))) -
                n * m.h * sym1(pauli('z'));
        } else if constexpr (std::is_same_v<T, IsingPowerLaw>) {
          mat = power_law_coupling_sum(spec.n, m.alpha) * std::sin(m.theta) * ckron(pauli('z'), pauli('z')) +
                n * std::cos(m.theta) * sym1(pauli('x'));
        } else if constexpr (std::is_same_v<T, IsingNn>) {
          mat = -(n - 1) * m.jz * ckron(pauli('z'), pauli('z')) - n * m.h * sym1(pauli('x'));
        } else if constexpr (std::is_same_v<T, XxzTransverse>) {
          mat = -m.j * (n - 1) *
                    (ckron(pauli('x'), pauli('x')) + ckron(pauli('y'), pauli('y')) +
                     m.delta * ckron(pauli('z'), pauli('z'))) +
                n * m.h * sym1(pauli('x'));
        } else if constexpr (std::is_same_v<T, XxzPeriodic>) {
          mat = -n * (m.jx * (ckron(pauli('x'), pauli('x')) + ckron(pauli('y'), pauli('y'))) +
                      m.jz * ckron(pauli('z'), pauli('z'))) +
                n * m.b * sym1(pauli('z'));
        } else if constexpr (std::is_same_v<T, Lipkin3>) {
          mat = n * m.a * sym1(unit3(0, 0) - unit3(2, 2));
          CxMat inter = CxMat::Zero(9, 9);
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              if (i != j) inter += ckron(unit3(i, j), unit3(i, j));
          mat += n * (n - 1) * m.b * inter;
        }
      },
      spec.model);

  DickeBasis b2(2, spec.local_dim());
  CxMat iso = embedding_isometry(b2);
  CxMat proj = iso.adjoint() * mat * iso;
  EffectiveHamiltonian eh{2, std::move(mat), SymmetricOperator(std::move(b2), std::move(proj))};
  return eh;
}

Mat lift_to_full(const SymmetricOperator& op, int n, int threads) {
  int m = op.basis().n(), d = op.basis().local_dim();
  if (!op.is_real(1e-12)) throw std::invalid_argument("lift_to_full: operator must be real in the symmetric basis");
  CompatibilityMap map = build_constraints(n, m, d, threads);
  int dimn = map.full_basis().dim(), dimm = map.reduced_dim();
  Mat c = Mat::Zero(dimn, dimn);
  // <lift, rho> = sum_{a,b} op(a,b) sigma(b,a) with sigma the m-party reduction
  for (int a = 0; a < dimm; ++a)
    for (int b = 0; b < dimm; ++b) {
      double w = std::real(op.matrix()(a, b));
      if (w == 0.0) continue;
      for (const auto& e : map.entries(b, a)) c(e.row, e.col) += w * e.value;
    }
  return 0.5 * (c + c.transpose()).eval();
}

VmResult minimize_pair_operator(const SymmetricOperator& op, int n, int m, const VmOptions& opts) {
  int d = op.basis().local_dim();
  if (n < op.basis().n()) throw std::invalid_argument("minimize_pair_operator: need n >= operator size");
  if (m < 1 || m > n) throw std::invalid_argument("minimize_pair_operator: need 1 <= m <= n");
  Mat cost = lift_to_full(op, n, opts.threads);
  int dimn = static_cast<int>(cost.rows());

  SdpProblem p;
  p.block_dims = {dimn};
  p.cost = {cost};
  std::vector<SdpEntry> trace_row;
  for (int i = 0; i < dimn; ++i) trace_row.push_back({0, i, i, 1.0});
  p.constraints = {std::move(trace_row)};
  p.rhs = {1.0};

  SdpOptions sopts;
  sopts.tol_gap = opts.tol_gap;
  sopts.tol_feas = opts.tol_gap;
  sopts.max_iter = opts.max_iter;
  sopts.threads = opts.threads;
  SdpSolution sol = solve(p, sopts);

  SymmetricOperator rho(DickeBasis(n, d), sol.X[0].cast<cxd>());
  SymmetricOperator sigma = partial_trace_symmetric(rho, m);
  return VmResult{sol.primal_objective, std::move(rho), std::move(sigma), sol.gap, sol.status};
}

VmResult ground_state_vm(const ModelSpec& spec, int m, const VmOptions& opts) {
  spec.validate();
  EffectiveHamiltonian eh = effective_hamiltonian(spec);
  return minimize_pair_operator(eh.symmetric_projection, spec.n, m, opts);
}

double entanglement_entropy(const SymmetricOperator& rho, int m) {
  SymmetricOperator sigma = partial_trace_symmetric(rho, m);
  Eigen::SelfAdjointEigenSolver<CxMat> es(sigma.matrix(), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double p = es.eigenvalues()(i);
    if (p < 1e-12) continue;
    s -= p * std::log2(p);
  }
  return s;
}

double fidelity(const CxMat& a, const CxMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("fidelity: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<CxMat> ea(a);
  CxVec sq = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cxd>();
  CxMat root = ea.eigenvectors() * sq.asDiagonal() * ea.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<CxMat> em(CxMat(root * b * root), Eigen::EigenvaluesOnly);
  double f = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(f * f, 0.0, 1.0);
}

double fidelity(const SymmetricOperator& a, const SymmetricOperator& b) {
  if (a.basis().n() != b.basis().n() || a.basis().local_dim() != b.basis().local_dim())
    throw std::invalid_argument("fidelity: operands live in different bases");
  return fidelity(a.matrix(), b.matrix());
}

int xxz_periodic_ground_k(double b, double jx, double jz, int n) {
  double dj = jx - jz;
  if (dj <= 0) throw std::invalid_argument("xxz_periodic_ground_k: window table needs jx > jz");
  double x = 0.5 * (n + b * (n - 1) / dj);
  long k = std::lround(x);
  return static_cast<int>(std::clamp(k, 0L, static_cast<long>(n)));
}

std::vector<SweepRow> sweep(const std::vector<ModelSpec>& grid, const SweepOptions& opts) {
  std::vector<SweepRow> rows(grid.size());
  int npt = static_cast<int>(grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(opts.threads > 0 ? opts.threads : omp_get_max_threads())
#endif
  for (int i = 0; i < npt; ++i) {
    SweepRow& row = rows[static_cast<std::size_t>(i)];
    row.index = i;
    row.spec = grid[static_cast<std::size_t>(i)];
    try {
      VmOptions vo;
      vo.tol_gap = opts.tol_gap;
      vo.max_iter = opts.max_iter;
      vo.threads = 1; // points are the unit of parallelism
      VmResult r = ground_state_vm(row.spec, 2, vo);
      row.energy = r.energy;
      row.solver_gap = r.solver_gap;
      if (r.solver_status != SdpStatus::Optimal) row.error = std::string("solver: ") + to_string(r.solver_status);
      for (int m : opts.entropy_m) row.entropies.push_back(entanglement_entropy(r.rho, m));
      if (opts.with_ed) {
        EdResult ed = ground_state_ed(row.spec);
        row.ed_energy = ed.energy;
        if (std::abs(ed.energy) >= 1e-9)
          row.energy_ratio = r.energy / ed.energy;
        else
          row.energy_diff = r.energy - ed.energy;
        row.ed_fidelity = fidelity_with_symmetric(ed.state, r.rho);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

}  // namespace symqmp
