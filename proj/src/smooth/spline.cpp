#include "spex/smooth/spline.hpp"

#include <algorithm>
#include <cmath>

#include "spex/common/error.hpp"

namespace spex::smooth {

SplineBasis SplineBasis::cubic(std::vector<double> knots) {
  if (knots.size() < 3) throw ConfigError("cubic spline needs at least 3 knots");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) throw ConfigError("spline knots must be strictly increasing");
  }
  SplineBasis b;
  b.kind_ = SplineKind::cubic;
  b.knots_ = std::move(knots);
  b.build_cardinal();
  return b;
}

SplineBasis SplineBasis::cyclic(std::vector<double> knots, double period) {
  if (knots.size() < 3) throw ConfigError("cyclic spline needs at least 3 knots");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) throw ConfigError("spline knots must be strictly increasing");
  }
  if (!(period > knots.back() - knots.front())) {
    throw ConfigError("cyclic period must exceed the knot span");
  }
  SplineBasis b;
  b.kind_ = SplineKind::cyclic_cubic;
  b.knots_ = std::move(knots);
  b.period_ = period;
  b.build_cardinal();
  return b;
}

SplineBasis SplineBasis::tensor(SplineBasis first, SplineBasis second) {
  if (first.kind_ == SplineKind::tensor || second.kind_ == SplineKind::tensor) {
    throw ConfigError("tensor product of tensor bases is not supported");
  }
  SplineBasis b;
  b.kind_ = SplineKind::tensor;
  const Eigen::Index p1 = first.size(), p2 = second.size();
  const Eigen::MatrixXd s1 = first.penalty(), s2 = second.penalty();
  b.penalty_ = Eigen::MatrixXd::Zero(p1 * p2, p1 * p2);
  // Column index is i * p2 + j for marginal columns i, j.
  for (Eigen::Index i = 0; i < p1; ++i) {
    for (Eigen::Index k = 0; k < p1; ++k) {
      for (Eigen::Index j = 0; j < p2; ++j) b.penalty_(i * p2 + j, k * p2 + j) += s1(i, k);
    }
    for (Eigen::Index j = 0; j < p2; ++j) {
      for (Eigen::Index l = 0; l < p2; ++l) b.penalty_(i * p2 + j, i * p2 + l) += s2(j, l);
    }
  }
  b.first_ = std::make_shared<const SplineBasis>(std::move(first));
  b.second_ = std::make_shared<const SplineBasis>(std::move(second));
  return b;
}

Eigen::Index SplineBasis::size() const {
  if (kind_ == SplineKind::tensor) return first_->size() * second_->size();
  return static_cast<Eigen::Index>(knots_.size());
}

// Knot values beta and knot second derivatives gamma determine the spline.
// C1 continuity gives B gamma = D beta; the penalty is D' B^-1 D.
void SplineBasis::build_cardinal() {
  const int k = static_cast<int>(knots_.size());
  if (kind_ == SplineKind::cubic) {
    std::vector<double> h(k - 1);
    for (int i = 0; i + 1 < k; ++i) h[i] = knots_[i + 1] - knots_[i];
    const int m = k - 2;
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd dmat = Eigen::MatrixXd::Zero(m, k);
    for (int i = 0; i < m; ++i) {
      dmat(i, i) = 1.0 / h[i];
      dmat(i, i + 1) = -1.0 / h[i] - 1.0 / h[i + 1];
      dmat(i, i + 2) = 1.0 / h[i + 1];
      bmat(i, i) = (h[i] + h[i + 1]) / 3.0;
      if (i + 1 < m) {
        bmat(i, i + 1) = h[i + 1] / 6.0;
        bmat(i + 1, i) = h[i + 1] / 6.0;
      }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(bmat);
    const Eigen::MatrixXd interior = llt.solve(dmat);
    curvature_ = Eigen::MatrixXd::Zero(k, k);
    curvature_.middleRows(1, m) = interior;
    penalty_ = dmat.transpose() * interior;
  } else {
    std::vector<double> h(k);
    for (int i = 0; i + 1 < k; ++i) h[i] = knots_[i + 1] - knots_[i];
    h[k - 1] = knots_[0] + period_ - knots_[k - 1];
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd dmat = Eigen::MatrixXd::Zero(k, k);
    for (int j = 0; j < k; ++j) {
      const int prev = (j + k - 1) % k, next = (j + 1) % k;
      const double hp = h[prev], hj = h[j];
      bmat(j, prev) += hp / 6.0;
      bmat(j, j) += (hp + hj) / 3.0;
      bmat(j, next) += hj / 6.0;
      dmat(j, prev) += 1.0 / hp;
      dmat(j, j) -= 1.0 / hp + 1.0 / hj;
      dmat(j, next) += 1.0 / hj;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(bmat);
    curvature_ = llt.solve(dmat);
    penalty_ = dmat.transpose() * curvature_;
  }
  penalty_ = (0.5 * (penalty_ + penalty_.transpose())).eval();
}

double SplineBasis::wrap(double x) const {
  const double x0 = knots_.front();
  double r = std::fmod(x - x0, period_);
  if (r < 0.0) r += period_;
  if (r >= period_) r = 0.0;
  return x0 + r;
}

void SplineBasis::row_into(double x, double* out) const {
  const int k = static_cast<int>(knots_.size());
  std::fill(out, out + k, 0.0);
  auto accumulate = [&](int j0, int j1, double lo, double hi, double xv) {
    const double h = hi - lo;
    const double am = (hi - xv) / h, ap = (xv - lo) / h;
    const double cm = ((hi - xv) * (hi - xv) * (hi - xv) / h - h * (hi - xv)) / 6.0;
    const double cp = ((xv - lo) * (xv - lo) * (xv - lo) / h - h * (xv - lo)) / 6.0;
    out[j0] += am;
    out[j1] += ap;
    for (int c = 0; c < k; ++c) out[c] += cm * curvature_(j0, c) + cp * curvature_(j1, c);
  };
  if (kind_ == SplineKind::cyclic_cubic) {
    const double xv = wrap(x);
    int j = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), xv) - knots_.begin()) - 1;
    j = std::clamp(j, 0, k - 1);
    const double lo = knots_[j];
    const double hi = j + 1 < k ? knots_[j + 1] : knots_[0] + period_;
    accumulate(j, (j + 1) % k, lo, hi, xv);
    return;
  }
  if (x < knots_.front() || x > knots_.back()) {
    // Linear extrapolation from the boundary value and slope.
    const bool left = x < knots_.front();
    const int j = left ? 0 : k - 2;
    const double lo = knots_[j], hi = knots_[j + 1], h = hi - lo;
    const double edge = left ? lo : hi;
    // f(edge) is the knot value; f'(edge) from the end segment.
    std::vector<double> slope(k, 0.0);
    slope[j] -= 1.0 / h;
    slope[j + 1] += 1.0 / h;
    for (int c = 0; c < k; ++c) {
      if (left) slope[c] += -h * (2.0 * curvature_(j, c) + curvature_(j + 1, c)) / 6.0;
      else slope[c] += h * (curvature_(j, c) + 2.0 * curvature_(j + 1, c)) / 6.0;
    }
    out[left ? 0 : k - 1] += 1.0;
    for (int c = 0; c < k; ++c) out[c] += (x - edge) * slope[c];
    return;
  }
  int j = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin()) - 1;
  j = std::clamp(j, 0, k - 2);
  accumulate(j, j + 1, knots_[j], knots_[j + 1], x);
}

Eigen::MatrixXd SplineBasis::eval(std::span<const double> x) const {
  if (kind_ == SplineKind::tensor) throw ConfigError("tensor basis needs two coordinates");
  if (knots_.empty()) throw ConfigError("spline basis has no knots");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(x.size(), size());
  for (std::size_t i = 0; i < x.size(); ++i) row_into(x[i], out.row(i).data());
  return out;
}

Eigen::MatrixXd SplineBasis::eval(std::span<const double> x1, std::span<const double> x2) const {
  if (kind_ != SplineKind::tensor) throw ConfigError("paired evaluation needs a tensor basis");
  if (x1.size() != x2.size()) throw ConfigError("tensor coordinates differ in length");
  const Eigen::MatrixXd b1 = first_->eval(x1), b2 = second_->eval(x2);
  const Eigen::Index p1 = b1.cols(), p2 = b2.cols();
  Eigen::MatrixXd out(x1.size(), p1 * p2);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index i = 0; i < p1; ++i) {
      for (Eigen::Index j = 0; j < p2; ++j) out(r, i * p2 + j) = b1(r, i) * b2(r, j);
    }
  }
  return out;
}

Eigen::RowVectorXd SplineBasis::second_derivative_row(double x) const {
  if (kind_ == SplineKind::tensor) throw ConfigError("second derivative of a tensor basis");
  const int k = static_cast<int>(knots_.size());
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(k);
  int j0, j1;
  double lo, hi, xv = x;
  if (kind_ == SplineKind::cyclic_cubic) {
    xv = wrap(x);
    int j = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), xv) - knots_.begin()) - 1;
    j = std::clamp(j, 0, k - 1);
    j0 = j;
    j1 = (j + 1) % k;
    lo = knots_[j];
    hi = j + 1 < k ? knots_[j + 1] : knots_[0] + period_;
  } else {
    if (x < knots_.front() || x > knots_.back()) return row;
    int j = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin()) - 1;
    j = std::clamp(j, 0, k - 2);
    j0 = j;
    j1 = j + 1;
    lo = knots_[j];
    hi = knots_[j + 1];
  }
  const double h = hi - lo;
  const double wm = (hi - xv) / h, wp = (xv - lo) / h;
  row = wm * curvature_.row(j0) + wp * curvature_.row(j1);
  return row;
}

Eigen::MatrixXd SplineBasis::penalty() const { return penalty_; }

std::vector<double> quantile_knots(std::span<const double> x, int count) {
  if (count < 3) throw ConfigError("at least 3 knots are required");
  std::vector<double> v(x.begin(), x.end());
  v.erase(std::remove_if(v.begin(), v.end(), [](double d) { return !std::isfinite(d); }), v.end());
  if (v.empty()) throw ConfigError("cannot place knots: no finite covariate values");
  std::sort(v.begin(), v.end());
  std::vector<double> knots;
  for (int i = 0; i < count; ++i) {
    const double pos = (v.size() - 1) * static_cast<double>(i) / (count - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(v.size() - 1, lo + 1);
    const double q = v[lo] + (pos - lo) * (v[hi] - v[lo]);
    if (knots.empty() || q > knots.back()) knots.push_back(q);
  }
  if (knots.size() < 3) throw ConfigError("covariate has too few distinct values for a spline");
  return knots;
}

}  // namespace spex::smooth
