#include "dsdr/svm_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dsdr/error.hpp"
#include "dsdr/rng.hpp"
#include "dsdr/smoothing.hpp"

namespace dsdr {

namespace {

void check_problem(const Matrix& data, std::span<const int> labels, const Vector& mu,
                   const SymMatrix& sigma, std::span<const double> weights) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (n == 0) throw Error(ErrorKind::EmptyData, "no observations");
  if (labels.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "labels length does not match data rows");
  }
  if (mu.size() != data.cols() || sigma.dim() != data.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "mu / Sigma do not match data columns");
  }
  if (!weights.empty() && weights.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "weights length does not match data rows");
  }
  for (int y : labels) {
    if (y != 1 && y != -1) throw Error(ErrorKind::InvalidArgument, "labels must be +1 or -1");
  }
}

void check_theta(const DirectionEstimate& theta, const Matrix& data) {
  if (theta.psi.size() != data.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "psi length does not match data columns");
  }
}

template <typename Loss>
double penalized_loss(const DirectionEstimate& theta, const Matrix& data,
                      std::span<const int> labels, const Vector& mu, const SymMatrix& sigma,
                      double lambda, std::span<const double> weights, Loss loss) {
  check_problem(data, labels, mu, sigma, weights);
  check_theta(theta, data);
  const Vector scores = data * theta.psi;
  const double offset = mu.dot(theta.psi) + theta.t;
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double u = 1.0 - labels[ui] * (scores(i) - offset);
    const double w = weights.empty() ? 1.0 : weights[ui];
    total += w * loss(u);
  }
  const double quad = theta.psi.dot(sigma.dense() * theta.psi);
  return quad + lambda * total / static_cast<double>(data.rows());
}

// Minimizes sum_i c_i [a_i + y_i t]_+ over t. When the minimizer is an
// interval the midpoint is returned, which keeps the label-flip symmetry exact.
double best_intercept(const std::vector<double>& a, const std::vector<double>& y,
                      const std::vector<double>& c) {
  struct Kink {
    double at;
    double weight;
  };
  std::vector<Kink> kinks;
  kinks.reserve(a.size());
  double slope = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (c[i] <= 0.0) continue;
    kinks.push_back({-a[i] * y[i], c[i]});
    if (y[i] < 0) slope -= c[i];
    total += c[i];
  }
  if (kinks.empty()) return 0.0;
  std::sort(kinks.begin(), kinks.end(),
            [](const Kink& l, const Kink& r) { return l.at < r.at; });
  const double flat_tol = 1e-13 * total;
  if (slope >= -flat_tol) return kinks.front().at;
  for (std::size_t j = 0; j < kinks.size();) {
    // all kinks at one location move the slope together
    std::size_t next = j;
    while (next < kinks.size() && kinks[next].at == kinks[j].at) slope += kinks[next++].weight;
    if (slope > flat_tol) return kinks[j].at;
    if (slope >= -flat_tol) {
      // Flat stretch between this kink and the next distinct one.
      if (next == kinks.size()) return kinks[j].at;
      return 0.5 * (kinks[j].at + kinks[next].at);
    }
    j = next;
  }
  return kinks.back().at;
}

// Soft-margin linear SVM with unpenalized intercept in whitened coordinates:
//   min_{eta, t} P(eta, t) = 1/2 |eta|^2 + sum_i c_i [1 - y_i (eta^T z_i - t)]_+ .
//
// For fixed t the dual is box constrained,
//   D_t(alpha) = sum_i alpha_i (1 + y_i t) - 1/2 |sum_i alpha_i y_i z_i|^2,  0 <= alpha_i <= c_i,
// and is maximized by coordinate descent. Any box-feasible alpha gives an
// affine lower bound t' -> D_t(alpha) + (t' - t) sum_i alpha_i y_i on the
// profile f(t') = min_eta P(eta, t'), so the intercept is located by a 1-D
// cutting-plane search whose lower envelope, together with the best primal
// value seen, certifies the optimality gap.
class WhitenedSvm {
 public:
  WhitenedSvm(Matrix z_cols, std::vector<double> y, std::vector<double> c, long max_passes,
              double tol)
      : z_(std::move(z_cols)),
        y_(std::move(y)),
        c_(std::move(c)),
        alpha_(y_.size(), 0.0),
        eta_(Vector::Zero(z_.rows())),
        max_passes_(max_passes),
        tol_(tol),
        rng_(0x5eed5eed5eedULL) {
    qd_.resize(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) {
      qd_[i] = z_.col(static_cast<Eigen::Index>(i)).squaredNorm();
    }
  }

  void solve() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double lo = -inf;
    double hi = inf;
    double step = 1.0;
    double t = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      const Cut cut = dual_solve(t);
      cuts_.push_back(cut);
      consider_primal(t);
      if (cut.slope == 0.0) {
        lower_ = std::max(lower_, cut.at(t));
      } else if (cut.slope < 0) {
        lo = std::max(lo, t);
      } else {
        hi = std::min(hi, t);
      }
      double next;
      if (lo == -inf && hi == inf) break;  // slope exactly zero at the first cut
      if (hi == inf) {
        next = lo + step;
        step *= 2.0;
      } else if (lo == -inf) {
        next = hi - step;
        step *= 2.0;
      } else {
        lower_ = std::max(lower_, envelope_minimum(next));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double width = hi - lo;
        if (next - lo < 0.01 * width || hi - next < 0.01 * width) next = 0.5 * (lo + hi);
        if (width <= 1e-14 * (1.0 + std::abs(lo) + std::abs(hi))) break;
      }
      if (best_value_ - lower_ <= target_gap(best_value_)) break;
      if (std::abs(step) > 1e15) break;
      t = next;
    }
  }

  const Vector& eta() const { return best_eta_; }
  double intercept() const { return best_t_; }
  long passes() const { return passes_; }
  /// Certified bound on P(eta(), intercept()) - min P.
  double gap() const { return best_value_ - lower_; }

 private:
  struct Cut {
    double slope;   // sum_i alpha_i y_i
    double offset;  // value at t = 0
    double at(double t) const { return offset + slope * t; }
  };

  double target_gap(double value) const { return 0.25 * tol_ * (1.0 + 2.0 * std::abs(value)); }

  double envelope(double t) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const Cut& c : cuts_) v = std::max(v, c.at(t));
    return v;
  }

  // Minimum of the max of all cuts; argmin returned through `where`.
  double envelope_minimum(double& where) const {
    double best = std::numeric_limits<double>::infinity();
    where = 0.0;
    for (const Cut& a : cuts_) {
      if (a.slope >= 0) continue;
      for (const Cut& b : cuts_) {
        if (b.slope <= 0) continue;
        const double cross = (a.offset - b.offset) / (b.slope - a.slope);
        const double value = envelope(cross);
        if (value < best) {
          best = value;
          where = cross;
        }
      }
    }
    return best;
  }

  void recompute_eta() {
    eta_.setZero();
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      if (alpha_[i] != 0.0) eta_.noalias() += (alpha_[i] * y_[i]) * z_.col(static_cast<Eigen::Index>(i));
    }
  }

  double primal(double t) const {
    const Vector scores = z_.transpose() * eta_;
    double loss = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      loss += c_[i] * std::max(0.0, 1.0 - y_[i] * (scores(static_cast<Eigen::Index>(i)) - t));
    }
    return 0.5 * eta_.squaredNorm() + loss;
  }

  double dual(double t) const {
    double linear = 0.0;
    for (std::size_t i = 0; i < alpha_.size(); ++i) linear += alpha_[i] * (1.0 + y_[i] * t);
    return linear - 0.5 * eta_.squaredNorm();
  }

  // Upper bound from the current normal with its exactly optimal intercept.
  void consider_primal(double t) {
    const Vector scores = z_.transpose() * eta_;
    std::vector<double> a(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) {
      a[i] = 1.0 - y_[i] * scores(static_cast<Eigen::Index>(i));
    }
    const double polished = best_intercept(a, y_, c_);
    for (double candidate : {polished, t}) {
      const double value = primal(candidate);
      if (value < best_value_) {
        best_value_ = value;
        best_eta_ = eta_;
        best_t_ = candidate;
      }
    }
  }

  // Coordinate descent on D_t with shrinking. Stops once the duality gap at t
  // is below a fraction of the target, or the pass budget runs out.
  Cut dual_solve(double t) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = y_.size();
    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), 0);
    std::size_t active = n;
    double pg_tol = 1e-2;
    double pg_max_old = inf;
    double pg_min_old = -inf;
    for (long pass = 0; pass < max_passes_; ++pass) {
      ++passes_;
      double pg_max = -inf;
      double pg_min = inf;
      for (std::size_t s = 0; s + 1 < active; ++s) {
        const std::size_t j = s + rng_.below(active - s);
        std::swap(index[s], index[j]);
      }
      for (std::size_t s = 0; s < active; ++s) {
        const std::size_t i = index[s];
        const auto col = static_cast<Eigen::Index>(i);
        const double grad = y_[i] * eta_.dot(z_.col(col)) - (1.0 + y_[i] * t);
        double pg = 0.0;
        if (alpha_[i] <= 0.0) {
          if (grad > pg_max_old) {
            --active;
            std::swap(index[s], index[active]);
            --s;
            continue;
          }
          if (grad < 0) pg = grad;
        } else if (alpha_[i] >= c_[i]) {
          if (grad < pg_min_old) {
            --active;
            std::swap(index[s], index[active]);
            --s;
            continue;
          }
          if (grad > 0) pg = grad;
        } else {
          pg = grad;
        }
        pg_max = std::max(pg_max, pg);
        pg_min = std::min(pg_min, pg);
        if (pg != 0.0) {
          const double old = alpha_[i];
          const double updated = qd_[i] > 0.0 ? std::clamp(old - grad / qd_[i], 0.0, c_[i])
                                              : (grad < 0 ? c_[i] : 0.0);
          alpha_[i] = updated;
          const double delta = (updated - old) * y_[i];
          if (delta != 0.0) eta_.noalias() += delta * z_.col(col);
        }
      }
      if (active == 0 || pg_max - pg_min <= pg_tol) {
        if (active == n) {
          recompute_eta();
          const double p = primal(t);
          if (p - dual(t) <= 0.1 * target_gap(p) || pg_tol < 1e-13) break;
          pg_tol *= 0.1;
        }
        active = n;
        pg_max_old = inf;
        pg_min_old = -inf;
        continue;
      }
      pg_max_old = pg_max <= 0 ? inf : pg_max;
      pg_min_old = pg_min >= 0 ? -inf : pg_min;
    }
    recompute_eta();
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += alpha_[i] * y_[i];
    return {slope, dual(t) - slope * t};
  }

  Matrix z_;  // p x m, one whitened observation per column
  std::vector<double> y_;
  std::vector<double> c_;
  std::vector<double> qd_;
  std::vector<double> alpha_;
  Vector eta_;
  long max_passes_;
  double tol_;
  Rng rng_;
  long passes_ = 0;
  std::vector<Cut> cuts_;
  double lower_ = -std::numeric_limits<double>::infinity();
  double best_value_ = std::numeric_limits<double>::infinity();
  Vector best_eta_;
  double best_t_ = 0.0;
};


DirectionEstimate degenerate_direction(Eigen::Index p, int label) {
  DirectionEstimate out;
  out.psi = Vector::Zero(p);
  // With psi = 0 every margin is -t; t = -label puts all hinge terms at zero.
  out.t = -static_cast<double>(label);
  out.objective_value = 0.0;
  out.degenerate = true;
  return out;
}

}  // namespace

double hinge_objective(const DirectionEstimate& theta, const Matrix& data,
                       std::span<const int> labels, const Vector& mu, const SymMatrix& sigma,
                       double lambda, std::span<const double> weights) {
  return penalized_loss(theta, data, labels, mu, sigma, lambda, weights,
                        [](double u) { return std::max(u, 0.0); });
}

double smoothed_objective(const DirectionEstimate& theta, const Matrix& data,
                          std::span<const int> labels, const Vector& mu, const SymMatrix& sigma,
                          double lambda, double h, std::span<const double> weights) {
  if (!(h > 0)) throw Error(ErrorKind::InvalidArgument, "bandwidth h must be positive");
  return penalized_loss(theta, data, labels, mu, sigma, lambda, weights,
                        [h](double u) { return smoothed_hinge(u, h); });
}

std::vector<double> class_weights(std::span<const int> labels, double pi) {
  if (!(pi > 0.0 && pi < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "weight pi must lie strictly inside (0, 1)");
  }
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = labels[i] == 1 ? 1.0 - pi : pi;
  return w;
}

DirectionEstimate weighted_svm_direction(const Matrix& data, std::span<const int> labels,
                                         const Vector& mu, const SymMatrix& sigma,
                                         const SolverConfig& config,
                                         std::span<const double> weights) {
  check_problem(data, labels, mu, sigma, weights);
  if (!(config.lambda > 0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  if (!(config.kkt_tol > 0)) throw Error(ErrorKind::InvalidArgument, "kkt_tol must be positive");
  const Eigen::Index m = data.rows();
  const Eigen::Index p = data.cols();

  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) return degenerate_direction(p, labels.front());

  const double ridge = config.ridge < 0 ? default_ridge(sigma.dense()) : config.ridge;
  const Whitening whitening = whitening_transform(sigma, ridge);

  Matrix z = whitening.forward * (data.rowwise() - mu.transpose()).transpose();
  std::vector<double> y(labels.begin(), labels.end());
  std::vector<double> c(static_cast<std::size_t>(m));
  const double cost = config.lambda / (2.0 * static_cast<double>(m));
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0) throw Error(ErrorKind::InvalidArgument, "weights must be non-negative");
    c[i] = cost * w;
  }
  const long max_passes = config.max_passes > 0 ? config.max_passes : std::max(1000L, 10 * static_cast<long>(m));

  WhitenedSvm svm(std::move(z), std::move(y), std::move(c), max_passes, config.kkt_tol);
  svm.solve();

  DirectionEstimate out;
  out.psi = whitening.forward * svm.eta();
  out.t = svm.intercept();
  out.passes = svm.passes();
  out.objective_value = hinge_objective(out, data, labels, mu, sigma, config.lambda, weights);
  return out;
}

DirectionEstimate psvm_direction(const Matrix& data, std::span<const int> labels,
                                 const Vector& mu, const SymMatrix& sigma,
                                 const SolverConfig& config) {
  return weighted_svm_direction(data, labels, mu, sigma, config, {});
}

DirectionEstimate wpsvm_direction(const Matrix& data, std::span<const int> labels,
                                  const Vector& mu, const SymMatrix& sigma,
                                  const SolverConfig& config, double pi) {
  const std::vector<double> w = class_weights(labels, pi);
  return weighted_svm_direction(data, labels, mu, sigma, config, w);
}

DirectionEstimate brute_force_oracle(const Matrix& data, std::span<const int> labels,
                                     const Vector& mu, const SymMatrix& sigma, double lambda,
                                     std::span<const double> weights, const GridSpec& grid) {
  check_problem(data, labels, mu, sigma, weights);
  const Eigen::Index p = data.cols();
  if (p > 2) throw Error(ErrorKind::OracleTooLarge, "grid oracle supports p <= 2 only");
  if (!(grid.step > 0) || !(grid.upper >= grid.lower)) {
    throw Error(ErrorKind::InvalidArgument, "invalid grid");
  }
  const auto points =
      static_cast<long>(std::floor((grid.upper - grid.lower) / grid.step + 1e-9)) + 1;
  auto coord = [&](long k) { return grid.lower + static_cast<double>(k) * grid.step; };

  const Eigen::Index m = data.rows();
  const Matrix centered = data.rowwise() - mu.transpose();
  std::vector<double> w(static_cast<std::size_t>(m), 1.0);
  if (!weights.empty()) w.assign(weights.begin(), weights.end());
  const double scale = lambda / static_cast<double>(m);

  // For fixed psi the loss is convex and piecewise linear in t, so the best
  // grid t is one of the two grid points around a continuous minimizer. This
  // returns the exhaustive grid minimum without scanning the t axis.
  std::vector<double> a(static_cast<std::size_t>(m)), yd(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] = labels[i];
  auto loss_at = [&](double t) {
    double loss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) loss += w[i] * std::max(0.0, a[i] + yd[i] * t);
    return loss;
  };

  double best = std::numeric_limits<double>::infinity();
  double best_psi[2] = {0.0, 0.0};
  double best_t = 0.0;
  double psi[2] = {0.0, 0.0};
  const long outer = p == 2 ? points : 1;
  for (long k0 = 0; k0 < points; ++k0) {
    psi[0] = coord(k0);
    for (long k1 = 0; k1 < outer; ++k1) {
      if (p == 2) psi[1] = coord(k1);
      double quad = 0.0;
      for (Eigen::Index r = 0; r < p; ++r) {
        for (Eigen::Index c = 0; c < p; ++c) quad += psi[r] * sigma(r, c) * psi[c];
      }
      for (Eigen::Index i = 0; i < m; ++i) {
        double sc = 0.0;
        for (Eigen::Index r = 0; r < p; ++r) sc += psi[r] * centered(i, r);
        const auto ui = static_cast<std::size_t>(i);
        a[ui] = 1.0 - yd[ui] * sc;
      }
      const double t_star = std::clamp(best_intercept(a, yd, w), grid.lower, grid.upper);
      const auto lo = std::clamp(static_cast<long>(std::floor((t_star - grid.lower) / grid.step)),
                                 0L, points - 1);
      for (long kt = lo; kt <= std::min(lo + 1, points - 1); ++kt) {
        const double t = coord(kt);
        const double value = quad + scale * loss_at(t);
        if (value < best) {
          best = value;
          best_psi[0] = psi[0];
          best_psi[1] = psi[1];
          best_t = t;
        }
      }
    }
  }
  DirectionEstimate out;
  out.psi = Vector(p);
  for (Eigen::Index a = 0; a < p; ++a) out.psi(a) = best_psi[a];
  out.t = best_t;
  out.objective_value = best;
  return out;
}

}  // namespace dsdr
