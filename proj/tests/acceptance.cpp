// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// `acceptance 3 7` runs only the listed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <string>
#include <vector>

#include "dsdr/distributed.hpp"
#include "dsdr/experiment.hpp"
#include "dsdr/metrics.hpp"
#include "dsdr/models.hpp"
#include "dsdr/psvm.hpp"
#include "dsdr/rng.hpp"
#include "dsdr/svm_solver.hpp"

using namespace dsdr;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Matrix normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

ExperimentConfig model_config(ModelId id, Eigen::Index n, std::uint64_t seed, int reps) {
  ExperimentConfig c;
  c.model.model_id = id;
  c.model.n = n;
  c.model.p = 10;
  c.replicates = reps;
  c.seed = seed;
  return c;
}

// 1. naive with one batch reproduces the full candidate matrix
Outcome engine_equivalence() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    ModelSpec spec;
    spec.n = 2000;
    spec.p = 5;
    spec.seed = 100 + s;
    const Dataset d = generate_model(spec).data;
    const SdrFit full = fit_full(d, FitOptions{});
    const SdrFit naive = naive_fit(d, partition(d.n(), 1, s), NaiveOptions{});
    worst = std::max(worst, (full.M.dense() - naive.M.dense()).cwiseAbs().maxCoeff());
  }
  const double secs = since(t0);
  return {worst <= 1e-6 && secs < 60.0,
          fmt("max |M_full - M_naive| = %.3g over 10 datasets (<= 1e-6), %.1f s (< 60 s)", worst, secs)};
}

// 2. pooled refinement sums do not depend on how rows are split
Outcome partition_invariance() {
  ModelSpec spec;
  spec.n = 1000;
  spec.seed = 7;
  const Dataset d = generate_model(spec).data;
  const Vector mu = sample_mean(d.x);
  const SymMatrix sigma = sample_covariance(d.x, mu);
  const SliceSpec slices = dividing_points(as_span(d.y), 5);
  SolverConfig cfg;
  cfg.lambda = default_lambda(d.n());
  double worst = 0.0;
  for (int l = 0; l < 4; ++l) {
    const Labels y = sliced_labels(as_span(d.y), slices.dividing_points[static_cast<std::size_t>(l)]);
    const DirectionEstimate theta = psvm_direction(d.x, y, mu, sigma, cfg);
    auto pooled = [&](int k) {
      const Partition part = partition(d.n(), k, 11);
      Matrix u = Matrix::Zero(11, 11);
      Vector v = Vector::Zero(11);
      for (const auto& batch : part.batches) {
        Labels bl;
        for (Eigen::Index i : batch) bl.push_back(y[static_cast<std::size_t>(i)]);
        const WorkerSummary s = worker_summary(gather_rows(d.x, batch), bl, mu, theta, 0.3, d.n());
        u += s.U_curv.dense();
        v += s.V_grad;
      }
      return std::make_pair(u, v);
    };
    const auto [u1, v1] = pooled(1);
    for (int k : {4, 25}) {
      const auto [uk, vk] = pooled(k);
      worst = std::max({worst, (uk - u1).norm() / u1.norm(), (vk - v1).norm() / v1.norm()});
    }
  }
  return {worst <= 1e-10, fmt("max relative difference %.3g across k in {1,4,25}, 4 slices (<= 1e-10)", worst)};
}

// 3. solver against the exhaustive grid
Outcome solver_optimality() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  int done = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index p = trial < 10 ? 1 : 2;
    const Eigen::Index m = 4 + static_cast<Eigen::Index>(rng.below(5));
    Matrix x = normal_matrix(rng, m, p);
    Labels y(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      const double s = x(i, 0) - (p > 1 ? 0.5 * x(i, 1) : 0.0) + rng.normal();
      y[static_cast<std::size_t>(i)] = s > 0 ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    const Vector mu = sample_mean(x);
    const SymMatrix sigma = sample_covariance(x, mu);
    SolverConfig cfg;
    cfg.lambda = 0.5 + 2.5 * rng.uniform();
    const bool weighted = trial % 2 == 1;
    const double pi = 0.15 + 0.7 * rng.uniform();
    const DirectionEstimate fit = weighted ? wpsvm_direction(x, y, mu, sigma, cfg, pi)
                                           : psvm_direction(x, y, mu, sigma, cfg);
    const std::vector<double> w = weighted ? class_weights(y, pi) : std::vector<double>{};
    const DirectionEstimate grid = brute_force_oracle(x, y, mu, sigma, cfg.lambda, w, GridSpec{});
    worst = std::max(worst, std::abs(fit.objective_value - grid.objective_value));
    ++done;
  }
  return {worst <= 1e-3 && done == 20,
          fmt("max |objective - grid minimum| = %.3g over %d instances (m 4..8, p 1..2, step 1e-3; <= 1e-3), %.0f s",
              worst, done, since(t0))};
}

// 4. smoothing gap halves with h (as stated), and vanishes once |u| >= h
Outcome smoothing_consistency() {
  Rng rng(4);
  const Eigen::Index n = 200000;
  Matrix x = normal_matrix(rng, n, 2);
  Labels y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = x(i, 0) - 0.5 * x(i, 1) + 0.5 * rng.normal() > 0 ? 1 : -1;
  const Vector mu = sample_mean(x);
  const SymMatrix sigma = sample_covariance(x, mu);
  DirectionEstimate th;
  th.psi = Vector(2);
  th.psi << 1.2, -0.9;
  th.t = 0.2;
  const double exact = hinge_objective(th, x, y, mu, sigma, 5.0);
  std::vector<double> gaps;
  for (double h : {0.4, 0.2, 0.1}) gaps.push_back(std::abs(smoothed_objective(th, x, y, mu, sigma, 5.0, h) - exact));
  const double r1 = gaps[0] / gaps[1], r2 = gaps[1] / gaps[2];
  const bool halves = std::abs(r1 - 2.0) <= 0.4 && std::abs(r2 - 2.0) <= 0.4;

  // every margin argument far from the kink: exact equality
  Matrix xs(3, 1);
  xs << -2, 1, 3;
  const Labels ys{-1, 1, 1};
  DirectionEstimate far;
  far.psi = Vector::Constant(1, 4.0);
  far.t = 0.0;
  bool equal = true;
  for (double h : {0.4, 0.2, 0.1}) {
    equal = equal && smoothed_objective(far, xs, ys, Vector::Zero(1), SymMatrix::identity(1), 5.0, h) ==
                         hinge_objective(far, xs, ys, Vector::Zero(1), SymMatrix::identity(1), 5.0);
  }
  return {halves && equal,
          fmt("gap ratios per halving %.3f, %.3f (need 2 +- 20%%); exact equality off the band: %s", r1, r2,
              equal ? "yes" : "no")};
}

// 5. smoothed minimizer found by grid is a fixed point of the update
Outcome fixed_point() {
  Rng rng(17);
  const Eigen::Index m = 40;
  Matrix x = normal_matrix(rng, m, 1);
  Labels y(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) y[static_cast<std::size_t>(i)] = x(i, 0) + 0.8 * rng.normal() > 0.2 ? 1 : -1;
  const Vector mu = sample_mean(x);
  const SymMatrix sigma = sample_covariance(x, mu);
  const double lambda = 4.0, h = 0.5;
  double cpsi = 0.0, ct = 0.0, half = 3.0, step = 0.01;
  for (int level = 0; level < 6; ++level) {
    double best = 1e300, bp = cpsi, bt = ct;
    const int steps = static_cast<int>(std::round(2 * half / step));
    for (int a = 0; a <= steps; ++a) {
      for (int b = 0; b <= steps; ++b) {
        DirectionEstimate th;
        th.psi = Vector::Constant(1, cpsi - half + a * step);
        th.t = ct - half + b * step;
        const double v = smoothed_objective(th, x, y, mu, sigma, lambda, h);
        if (v < best) {
          best = v;
          bp = th.psi(0);
          bt = th.t;
        }
      }
    }
    cpsi = bp;
    ct = bt;
    half = 5 * step;
    step /= 10;
  }
  DirectionEstimate star;
  star.psi = Vector::Constant(1, cpsi);
  star.t = ct;
  std::vector<WorkerSummary> sums;
  const Partition part = partition(m, 4, 1);
  for (const auto& batch : part.batches) {
    Labels bl;
    for (Eigen::Index i : batch) bl.push_back(y[static_cast<std::size_t>(i)]);
    sums.push_back(worker_summary(gather_rows(x, batch), bl, mu, star, h, m));
  }
  const DirectionEstimate next = refined_update(sums, lambda);
  const double moved = std::max(std::abs(next.psi(0) - star.psi(0)), std::abs(next.t - star.t));
  return {moved <= 1e-4, fmt("grid minimizer (psi %.6f, t %.6f) moves by %.3g (<= 1e-4)", cpsi, ct, moved)};
}

// 6. accuracy at n = 30000
Outcome accuracy() {
  const auto t0 = Clock::now();
  ExperimentConfig c = model_config(ModelId::I, 30000, 6000, 50);
  const double full = run_experiment(c).row.mean_distance;
  c.fit.engine = Engine::Refined;
  c.fit.k = 10;
  c.fit.B = 3;
  const double refined = run_experiment(c).row.mean_distance;
  c.fit.engine = Engine::Naive;
  const double naive = run_experiment(c).row.mean_distance;
  return {full <= 0.15 && refined <= 0.30 && naive <= 0.30,
          fmt("Model I n=30000, 50 reps: full %.4f (<= 0.15), refined k=10 B=3 %.4f (<= 0.30), naive k=10 %.4f "
              "(<= 0.30), %.0f s",
              full, refined, naive, since(t0))};
}

// 7. naive degrades at large k more than refined does
Outcome naive_degradation() {
  const auto t0 = Clock::now();
  ExperimentConfig c = model_config(ModelId::I, 30000, 7000, 50);
  c.fit.engine = Engine::Naive;
  c.fit.k = 500;
  const ExperimentResult naive = run_experiment(c);
  c.fit.engine = Engine::Refined;
  c.fit.B = 3;
  const ExperimentResult refined = run_experiment(c);
  int wins = 0;
  for (std::size_t r = 0; r < naive.replicates.size(); ++r) {
    wins += naive.replicates[r].distance > refined.replicates[r].distance;
  }
  const double share = static_cast<double>(wins) / static_cast<double>(naive.replicates.size());
  return {share >= 0.7,
          fmt("k=500, 50 paired reps: naive > refined in %.0f%% (need >= 70%%); means naive %.4f, refined %.4f, %.0f s",
              100 * share, naive.row.mean_distance, refined.row.mean_distance, since(t0))};
}

// 8. weighting is needed for a binary response
Outcome wpsvm_necessity() {
  const auto t0 = Clock::now();
  ExperimentConfig c = model_config(ModelId::III, 10000, 8000, 30);
  c.fit.variant = Variant::Wpsvm;
  const double weighted = run_experiment(c).row.mean_distance;
  c.fit.variant = Variant::Psvm;
  const double plain = run_experiment(c).row.mean_distance;
  return {weighted <= 0.35 && plain >= 0.8,
          fmt("Model III n=10000, 30 reps: WPSVM %.4f (<= 0.35), PSVM %.4f (>= 0.8), %.0f s", weighted, plain,
              since(t0))};
}

// 9. root-n rate
Outcome root_n_rate() {
  const auto t0 = Clock::now();
  const std::vector<Eigen::Index> grid{2000, 8000, 32000};
  ExperimentConfig c = model_config(ModelId::I, 2000, 9000, 50);
  const ScalingResult full = scaling_study(c, grid);
  c.fit.engine = Engine::Refined;
  c.fit.k = 50;
  c.fit.B = 3;
  const ScalingResult refined = scaling_study(c, grid);
  auto ok = [](double s) { return s >= -0.65 && s <= -0.35; };
  return {ok(full.slope) && ok(refined.slope),
          fmt("slopes full %.3f (%.4f/%.4f/%.4f), refined k=50 B=3 %.3f (%.4f/%.4f/%.4f); need [-0.65, -0.35], %.0f s",
              full.slope, full.mean_distance[0], full.mean_distance[1], full.mean_distance[2], refined.slope,
              refined.mean_distance[0], refined.mean_distance[1], refined.mean_distance[2], since(t0))};
}

// 10. refined is much faster than the full fit
Outcome speed() {
  ModelSpec spec;
  spec.n = 30000;
  spec.seed = 10;
  const Dataset d = generate_model(spec).data;
  const Partition part = partition(d.n(), 50, 10);
  auto best_of = [](int times, const std::function<void()>& f) {
    double best = 1e300;
    for (int i = 0; i < times; ++i) {
      const auto t = Clock::now();
      f();
      best = std::min(best, since(t));
    }
    return best;
  };
  const double full = best_of(3, [&] { fit_full(d, FitOptions{}); });
  const double refined = best_of(3, [&] { refined_fit(d, part, RefinedOptions{}); });
  return {full / refined >= 5.0,
          fmt("n=30000 p=10: full %.3f s, refined k=50 %.3f s, speed-up %.1fx (>= 5x)", full, refined, full / refined)};
}

// 11. metric example tables
Outcome metrics() {
  auto e = [](Eigen::Index p, Eigen::Index i) {
    Vector v = Vector::Zero(p);
    v(i) = 1;
    return v;
  };
  Matrix a(5, 2), b(5, 2);
  a << e(5, 0), e(5, 1);
  b << e(5, 2), e(5, 3);
  Matrix e1(2, 1), diag(2, 1);
  e1 << 1, 0;
  diag << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const double pd_err = std::max({std::abs(projection_distance(a, a)), std::abs(projection_distance(a, b) - 2.0),
                                  std::abs(projection_distance(e1, diag) - 1.0)});

  const std::vector<double> y{0, 1, 2};
  Matrix z(3, 1), same(3, 1);
  z << 0, 2, 4;
  same << 0, 1, 2;
  double dc_err = std::max(std::abs(distance_correlation(y, z) - 1.0), std::abs(distance_correlation(y, same) - 1.0));
  // n = 4 against a direct double-centering computation
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> yy(4);
    for (auto& v : yy) v = rng.normal();
    const Matrix zz = normal_matrix(rng, 4, 2);
    Matrix da(4, 4), db(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        da(i, j) = std::abs(yy[i] - yy[j]);
        db(i, j) = (zz.row(i) - zz.row(j)).norm();
      }
    auto centre = [](Matrix& m) {
      const Vector r = m.rowwise().mean();
      const Vector c = m.colwise().mean().transpose();
      const double g = m.mean();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) += g - r(i) - c(j);
    };
    centre(da);
    centre(db);
    const double direct = std::sqrt((da.array() * db.array()).sum() /
                                    std::sqrt((da.array() * da.array()).sum() * (db.array() * db.array()).sum()));
    dc_err = std::max(dc_err, std::abs(distance_correlation(yy, zz) - direct));
  }
  return {pd_err <= 1e-10 && dc_err <= 1e-12,
          fmt("projection_distance max error %.3g (<= 1e-10), distance_correlation max error %.3g (<= 1e-12)", pd_err,
              dc_err)};
}

// 12. bench CSV is reproducible byte for byte
Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(DSDR_ACCEPTANCE_TMP);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "bench.json");
    cfg << R"({"experiments": [
      {"model": {"model_id": "I", "n": 3000, "p": 10}, "engine": "full", "replicates": 3, "seed": 12},
      {"model": {"model_id": "II", "n": 3000, "p": 10}, "engine": "naive", "k": 5, "replicates": 3, "seed": 12},
      {"model": {"model_id": "III", "n": 3000, "p": 10}, "engine": "refined", "variant": "wpsvm", "k": 5,
       "replicates": 3, "seed": 12, "compute_dcor": true}
    ]})";
  }
  auto run = [&](const std::string& out) {
    const std::string cmd = std::string(DSDR_CLI_PATH) + " bench --config " + (dir / "bench.json").string() +
                            " --out " + (dir / out).string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  auto slurp = [&](const std::string& name) {
    std::ifstream in(dir / name, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const int s1 = run("run1.csv");
  const int s2 = run("run2.csv");
  const std::string a = slurp("run1.csv"), b = slurp("run2.csv");
  const bool same = s1 == 0 && s2 == 0 && !a.empty() && a == b;
  return {same, fmt("two bench runs (exit %d, %d) %s, %zu bytes", s1, s2, same ? "byte-identical" : "differ", a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"engine equivalence", engine_equivalence},
      {"partition invariance of refinement", partition_invariance},
      {"solver optimality", solver_optimality},
      {"smoothing consistency", smoothing_consistency},
      {"fixed point", fixed_point},
      {"accuracy", accuracy},
      {"naive degradation at large k", naive_degradation},
      {"WPSVM necessity", wpsvm_necessity},
      {"root-n rate", root_n_rate},
      {"speed ordering", speed},
      {"metric correctness", metrics},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
