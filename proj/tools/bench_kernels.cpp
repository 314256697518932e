// Benchmark comparing the OpenMP-parallel kernels against their serial
// reference implementations, with an agreement check on every pair.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <vector>

#include "symqmp/compat.hpp"
#include "symqmp/rng.hpp"
#include "symqmp/sdp.hpp"
#include "symqmp/variational.hpp"

namespace {

using namespace symqmp;
using Clock = std::chrono::steady_clock;

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, double agreement) {
  std::printf("%-24s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   max|diff| %.3g\n",
              name, serial_s * 1e3, parallel_s * 1e3,
              parallel_s > 0 ? serial_s / parallel_s : 0.0, agreement);
}

void bench_constraints(int n, int m, int d, int reps, int threads) {
  std::vector<CompatEntry> serial_out, parallel_out;
  double ts = time_best_of(reps, [&] {
    CompatibilityMap map = build_constraints_serial(n, m, d);
    serial_out = map.all().front();
  });
  double tp = time_best_of(reps, [&] {
    CompatibilityMap map = build_constraints(n, m, d, threads);
    parallel_out = map.all().front();
  });
  // the full tables are compared element-wise once, outside the timed region
  CompatibilityMap a = build_constraints_serial(n, m, d);
  CompatibilityMap b = build_constraints(n, m, d, threads);
  double diff = 0.0;
  for (std::size_t s = 0; s < a.all().size(); ++s) {
    const auto& ea = a.all()[s];
    const auto& eb = b.all()[s];
    if (ea.size() != eb.size()) diff = 1e300;
    for (std::size_t i = 0; diff < 1e300 && i < ea.size(); ++i)
      diff = std::max({diff, std::abs(ea[i].value - eb[i].value),
                       double(ea[i].row != eb[i].row || ea[i].col != eb[i].col)});
  }
  char label[64];
  std::snprintf(label, sizeof label, "constraints n=%d m=%d", n, m);
  report(label, ts, tp, diff);
}

void bench_schur(int dim, int rows, int reps, int threads) {
  Rng rng(12345);
  std::vector<Mat> X(1), Sinv(1);
  Mat g = Mat::NullaryExpr(dim, dim, [&](Eigen::Index, Eigen::Index) { return rng.gauss(); });
  X[0] = g * g.transpose() + dim * Mat::Identity(dim, dim);
  g = Mat::NullaryExpr(dim, dim, [&](Eigen::Index, Eigen::Index) { return rng.gauss(); });
  Sinv[0] = g * g.transpose() + dim * Mat::Identity(dim, dim);
  std::vector<std::vector<SdpEntry>> cons(rows);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < 8; ++k) {
      int r = static_cast<int>(rng.raw() % dim), c = static_cast<int>(rng.raw() % dim);
      if (r > c) std::swap(r, c);
      cons[i].push_back({0, r, c, rng.gauss()});
    }
  Mat serial, parallel;
  double ts = time_best_of(reps, [&] { serial = schur_complement_serial(cons, X, Sinv); });
  double tp = time_best_of(reps, [&] { parallel = schur_complement(cons, X, Sinv, threads); });
  char label[64];
  std::snprintf(label, sizeof label, "schur dim=%d rows=%d", dim, rows);
  report(label, ts, tp, (serial - parallel).cwiseAbs().maxCoeff());
}

void bench_sweep(int n, int points, int reps, int threads) {
  std::vector<ModelSpec> grid;
  for (int i = 0; i < points; ++i) {
    ModelSpec spec;
    spec.n = n;
    spec.model = Lmg{1.0, i / double(points - 1), 0.75};
    grid.push_back(spec);
  }
  SweepOptions serial_opts, parallel_opts;
  serial_opts.threads = 1;
  parallel_opts.threads = threads;
  std::vector<SweepRow> rs, rp;
  double ts = time_best_of(reps, [&] { rs = sweep(grid, serial_opts); });
  double tp = time_best_of(reps, [&] { rp = sweep(grid, parallel_opts); });
  double diff = 0.0;
  for (int i = 0; i < points; ++i) diff = std::max(diff, std::abs(rs[i].energy - rp[i].energy));
  char label[64];
  std::snprintf(label, sizeof label, "vm sweep n=%d pts=%d", n, points);
  report(label, ts, tp, diff);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmarks: serial reference vs OpenMP implementation"};
  int reps = 3, threads = 0, n = 10, schur_dim = 160, schur_rows = 400, sweep_n = 24,
      sweep_points = 16;
  app.add_option("--reps", reps, "Timing repetitions; best time wins")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads for the parallel side; 0 means all cores")
      ->capture_default_str();
  app.add_option("--n", n, "Party count for the constraint-table benchmark")
      ->capture_default_str();
  app.add_option("--schur-dim", schur_dim, "Block dimension for the Schur benchmark")
      ->capture_default_str();
  app.add_option("--schur-rows", schur_rows, "Constraint rows for the Schur benchmark")
      ->capture_default_str();
  app.add_option("--sweep-n", sweep_n, "Party count for the sweep benchmark")
      ->capture_default_str();
  app.add_option("--sweep-points", sweep_points, "Grid points for the sweep benchmark")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  bench_constraints(n, 2, 2, reps, threads);
  bench_constraints(n, 3, 2, reps, threads);
  bench_schur(schur_dim, schur_rows, reps, threads);
  bench_sweep(sweep_n, sweep_points, reps, threads);
  return 0;
}
