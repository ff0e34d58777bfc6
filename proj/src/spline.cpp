#include "pulsefront/spline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "pulsefront/error.hpp"

namespace pulsefront {

namespace {

inline void basis(double u, double b[4]) {
  const double v = 1.0 - u;
  b[0] = v * v * v / 6.0;
  b[1] = (3.0 * u * u * u - 6.0 * u * u + 4.0) / 6.0;
  b[2] = (-3.0 * u * u * u + 3.0 * u * u + 3.0 * u + 1.0) / 6.0;
  b[3] = u * u * u / 6.0;
}

inline void dbasis(double u, double b[4]) {
  const double v = 1.0 - u;
  b[0] = -0.5 * v * v;
  b[1] = 1.5 * u * u - 2.0 * u;
  b[2] = -1.5 * u * u + u + 0.5;
  b[3] = 0.5 * u * u;
}

// Natural end conditions: n values -> n + 2 coefficients.
void open_coefficients(const std::vector<double>& y, std::vector<double>& c) {
  const int n = static_cast<int>(y.size());
  c.assign(n + 2, 0.0);
  if (n == 1) {
    c.assign(3, y[0]);
    return;
  }
  std::vector<double> x(n);
  x[0] = y[0];
  x[n - 1] = y[n - 1];
  const int m = n - 2;
  if (m > 0) {
    // Thomas algorithm on (1, 4, 1) x = 6 y - boundary terms.
    std::vector<double> cp(m), dp(m);
    for (int i = 0; i < m; ++i) {
      double rhs = 6.0 * y[i + 1];
      if (i == 0) rhs -= x[0];
      if (i == m - 1) rhs -= x[n - 1];
      const double denom = 4.0 - (i ? cp[i - 1] : 0.0);
      cp[i] = 1.0 / denom;
      dp[i] = (rhs - (i ? dp[i - 1] : 0.0)) / denom;
    }
    for (int i = m - 1; i >= 0; --i) x[i + 1] = dp[i] - (i < m - 1 ? cp[i] * x[i + 2] : 0.0);
  }
  for (int i = 0; i < n; ++i) c[i + 1] = x[i];
  c[0] = 2.0 * x[0] - x[1];
  c[n + 1] = 2.0 * x[n - 1] - x[n - 2];
}

Eigen::MatrixXd periodic_inverse(int n) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) += 4.0 / 6.0;
    A(i, (i + 1) % n) += 1.0 / 6.0;
    A(i, (i + n - 1) % n) += 1.0 / 6.0;
  }
  return A.inverse();
}

}  // namespace

TensorSpline::TensorSpline(const Field& f) : axes_(f.grid->axes()) {
  const int d = dim();
  ext_.resize(d);
  for (int k = 0; k < d; ++k) ext_[k] = axes_[k].periodic ? axes_[k].count : axes_[k].count + 2;

  // Start from the values laid out on the node grid and transform one axis at a time.
  std::vector<int> cur(d);
  for (int k = 0; k < d; ++k) cur[k] = axes_[k].count;
  std::vector<double> data = f.values;
  for (int k = 0; k < d; ++k) {
    std::vector<int> next = cur;
    next[k] = ext_[k];
    std::size_t outer = 1, inner = 1;
    for (int j = 0; j < k; ++j) outer *= cur[j];
    for (int j = k + 1; j < d; ++j) inner *= cur[j];
    const int n = cur[k], ne = next[k];
    std::vector<double> out(outer * ne * inner);
    Eigen::MatrixXd pinv;
    if (axes_[k].periodic) pinv = periodic_inverse(n);
    std::vector<double> line(n), c;
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < inner; ++in) {
        for (int i = 0; i < n; ++i) line[i] = data[(o * n + i) * inner + in];
        if (axes_[k].periodic) {
          c.assign(n, 0.0);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) c[i] += pinv(i, j) * line[j];
        } else {
          open_coefficients(line, c);
        }
        for (int i = 0; i < ne; ++i) out[(o * ne + i) * inner + in] = c[i];
      }
    data.swap(out);
    cur = next;
  }
  coef_ = std::move(data);
  stride_.assign(d, 1);
  for (int k = d - 2; k >= 0; --k) stride_[k] = stride_[k + 1] * ext_[k + 1];
}

double TensorSpline::operator()(std::span<const double> x) const { return eval_impl(x, nullptr); }

double TensorSpline::eval_d0(std::span<const double> x, double& d0) const { return eval_impl(x, &d0); }

double TensorSpline::eval_impl(std::span<const double> x, double* d0) const {
  const int d = dim();
  require(d >= 1 && d <= 4 && static_cast<int>(x.size()) == d, ErrorCode::invalid_argument,
          "spline evaluation with wrong dimension");
  double w[4][4];
  double dw[4];
  int idx[4][4];
  for (int k = 0; k < d; ++k) {
    const Axis& a = axes_[k];
    int i;
    double u;
    if (a.periodic) {
      const double t = (wrap_periodic(x[k], a.lo, a.period()) - a.lo) / a.spacing;
      i = std::min(static_cast<int>(std::floor(t)), a.count - 1);
      u = std::clamp(t - i, 0.0, 1.0);
      for (int m = 0; m < 4; ++m) idx[k][m] = ((i + m - 1) % a.count + a.count) % a.count;
    } else {
      const double t = std::clamp((x[k] - a.lo) / a.spacing, 0.0, static_cast<double>(a.count - 1));
      i = std::min(static_cast<int>(std::floor(t)), std::max(a.count - 2, 0));
      u = t - i;
      for (int m = 0; m < 4; ++m) idx[k][m] = i + m;  // coefficient index shifted by the leading ghost
    }
    basis(u, w[k]);
    if (k == 0 && d0) {
      dbasis(u, dw);
      for (double& v : dw) v /= a.spacing;
    }
  }
  double val = 0.0, der = 0.0;
  if (d == 3) {
    for (int a = 0; a < 4; ++a) {
      const std::size_t oa = idx[0][a] * stride_[0];
      double sa = 0.0;
      for (int b = 0; b < 4; ++b) {
        const double* row = coef_.data() + oa + idx[1][b] * stride_[1];
        double sb = 0.0;
        for (int c = 0; c < 4; ++c) sb += w[2][c] * row[idx[2][c]];
        sa += w[1][b] * sb;
      }
      val += w[0][a] * sa;
      if (d0) der += dw[a] * sa;
    }
  } else {
    int m[4] = {0, 0, 0, 0};
    const int total = 1 << (2 * d);
    for (int flat = 0; flat < total; ++flat) {
      int r = flat;
      for (int k = d - 1; k >= 0; --k) {
        m[k] = r & 3;
        r >>= 2;
      }
      double wt = 1.0, wd = 1.0;
      std::size_t off = 0;
      for (int k = 0; k < d; ++k) {
        off += idx[k][m[k]] * stride_[k];
        if (k == 0) {
          wt = w[0][m[0]];
          wd = d0 ? dw[m[0]] : 0.0;
        } else {
          wt *= w[k][m[k]];
          wd *= w[k][m[k]];
        }
      }
      val += wt * coef_[off];
      der += wd * coef_[off];
    }
  }
  if (d0) *d0 = der;
  return val;
}

CardinalSpline::CardinalSpline(std::vector<double> knots) : knots_(std::move(knots)) {
  const int m = static_cast<int>(knots_.size());
  require(m >= 2, ErrorCode::invalid_argument, "cardinal spline needs at least two knots");
  for (int k = 1; k < m; ++k)
    require(knots_[k] > knots_[k - 1], ErrorCode::invalid_argument, "cardinal spline knots must increase");
  // Natural spline: M_0 = M_{m-1} = 0 and the standard tridiagonal system for the rest.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  for (int j = 1; j < m - 1; ++j) {
    const double h0 = knots_[j] - knots_[j - 1], h1 = knots_[j + 1] - knots_[j];
    A(j, j - 1) = h0 / 6.0;
    A(j, j) = (h0 + h1) / 3.0;
    A(j, j + 1) = h1 / 6.0;
    B(j, j - 1) = 1.0 / h0;
    B(j, j) = -1.0 / h0 - 1.0 / h1;
    B(j, j + 1) = 1.0 / h1;
  }
  const Eigen::MatrixXd S = A.partialPivLu().solve(B);
  second_.resize(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) second_[i * m + k] = S(i, k);
}

bool CardinalSpline::contains(double a) const {
  const double tol = 1e-12 * (1.0 + std::abs(a));
  return a >= knots_.front() - tol && a <= knots_.back() + tol;
}

std::vector<double> CardinalSpline::weights(double a) const {
  require(contains(a), ErrorCode::out_of_range, "angle outside the interpolation lattice");
  const int m = static_cast<int>(knots_.size());
  a = std::clamp(a, knots_.front(), knots_.back());
  int j = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), a) - knots_.begin()) - 1;
  j = std::clamp(j, 0, m - 2);
  const double h = knots_[j + 1] - knots_[j];
  const double B = (a - knots_[j]) / h, A = 1.0 - B;
  const double ca = (A * A * A - A) * h * h / 6.0, cb = (B * B * B - B) * h * h / 6.0;
  std::vector<double> w(m, 0.0);
  w[j] += A;
  w[j + 1] += B;
  for (int k = 0; k < m; ++k) w[k] += ca * second_[j * m + k] + cb * second_[(j + 1) * m + k];
  return w;
}

}  // namespace pulsefront

namespace pulsefront {

namespace {

// Fornberg's finite-difference weights: w[d][k] approximates the d-th derivative at x0 from f(x[k]).
void fd_weights(double x0, const double* x, int n, int m, double w[3][7]) {
  for (int d = 0; d <= m; ++d)
    for (int k = 0; k < n; ++k) w[d][k] = 0.0;
  w[0][0] = 1.0;
  double c1 = 1.0, c4 = x[0] - x0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int d = mn; d >= 1; --d) w[d][i] = c1 * (d * w[d - 1][i - 1] - c5 * w[d][i - 1]) / c2;
        w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
      }
      for (int d = mn; d >= 1; --d) w[d][j] = (c4 * w[d][j] - d * w[d - 1][j]) / c3;
      w[0][j] = c4 * w[0][j] / c3;
    }
    c1 = c2;
  }
}

}  // namespace

StripInterpolant::StripInterpolant(const Field& f) {
  require(f.grid != nullptr && f.grid->dim() >= 1, ErrorCode::invalid_argument, "interpolant needs a grid");
  axes_ = f.grid->axes();
  require(!axes_[0].periodic && axes_[0].count >= 7, ErrorCode::invalid_argument,
          "strip interpolant needs an open axis 0 with at least seven nodes");
  for (std::size_t k = 1; k < axes_.size(); ++k)
    require(axes_[k].periodic, ErrorCode::invalid_argument, "strip interpolant needs periodic transverse axes");
  const int Ns = axes_[0].count;
  row_ = f.grid->size() / static_cast<std::size_t>(Ns);
  values_ = f.values;
  d1_.assign(values_.size(), 0.0);
  d2_.assign(values_.size(), 0.0);
  const double h = axes_[0].spacing;
  double w[3][7];
  double xs[7];
  for (int i = 0; i < Ns; ++i) {
    const int first = std::clamp(i - 3, 0, Ns - 7);
    for (int k = 0; k < 7; ++k) xs[k] = first + k;
    fd_weights(static_cast<double>(i), xs, 7, 2, w);
    for (std::size_t j = 0; j < row_; ++j) {
      double a1 = 0.0, a2 = 0.0;
      for (int k = 0; k < 7; ++k) {
        const double v = values_[static_cast<std::size_t>(first + k) * row_ + j];
        a1 += w[1][k] * v;
        a2 += w[2][k] * v;
      }
      d1_[static_cast<std::size_t>(i) * row_ + j] = a1 / h;
      d2_[static_cast<std::size_t>(i) * row_ + j] = a2 / (h * h);
    }
  }
}

void StripInterpolant::trig_weights(int n, double L, double x, double* w) {
  if (n == 1) {
    w[0] = 1.0;
    return;
  }
  const double h = L / n;
  double r = std::fmod(x, L);
  if (r < 0.0) r += L;
  const double t = r / h;
  const int near = static_cast<int>(std::lround(t));
  if (std::abs(t - near) < 1e-13) {
    for (int j = 0; j < n; ++j) w[j] = 0.0;
    w[near % n] = 1.0;
    return;
  }
  // sin(pi (x - x_j)/h) = (-1)^j sin(pi x/h); the denominator uses the angle difference formula.
  const double a = std::numbers::pi * r / L;
  const double num = std::sin(std::numbers::pi * t) / n;
  const double sa = std::sin(a), ca = std::cos(a);
  const bool even = n % 2 == 0;
  for (int j = 0; j < n; ++j) {
    const double b = std::numbers::pi * j / n;
    const double sb = std::sin(b), cb = std::cos(b);
    const double sd = sa * cb - ca * sb;  // sin(a - b)
    const double cd = ca * cb + sa * sb;  // cos(a - b)
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    w[j] = sign * num * (even ? cd / sd : 1.0 / sd);
  }
}

double StripInterpolant::transverse(const std::vector<double>& data, std::size_t row, double* const* w) const {
  const double* r = data.data() + row * row_;
  const int nd = static_cast<int>(axes_.size()) - 1;
  if (nd == 0) return r[0];
  if (nd == 1) {
    double acc = 0.0;
    for (int j = 0; j < axes_[1].count; ++j) acc += w[0][j] * r[j];
    return acc;
  }
  if (nd == 2) {
    const int n1 = axes_[1].count, n2 = axes_[2].count;
    double acc = 0.0;
    for (int j1 = 0; j1 < n1; ++j1) {
      double inner = 0.0;
      const double* r2 = r + static_cast<std::size_t>(j1) * n2;
      for (int j2 = 0; j2 < n2; ++j2) inner += w[1][j2] * r2[j2];
      acc += w[0][j1] * inner;
    }
    return acc;
  }
  const int n1 = axes_[1].count, n2 = axes_[2].count, n3 = axes_[3].count;
  double acc = 0.0;
  for (int j1 = 0; j1 < n1; ++j1)
    for (int j2 = 0; j2 < n2; ++j2) {
      double inner = 0.0;
      const double* r3 = r + (static_cast<std::size_t>(j1) * n2 + j2) * n3;
      for (int j3 = 0; j3 < n3; ++j3) inner += w[2][j3] * r3[j3];
      acc += w[0][j1] * w[1][j2] * inner;
    }
  return acc;
}

double StripInterpolant::eval_impl(std::span<const double> x, double* d0) const {
  const Axis& a = axes_[0];
  const int Ns = a.count;
  const double t = std::clamp((x[0] - a.lo) / a.spacing, 0.0, static_cast<double>(Ns - 1));
  const int i = std::min(static_cast<int>(std::floor(t)), Ns - 2);
  const double u = t - i, h = a.spacing;

  const int nd = static_cast<int>(axes_.size()) - 1;
  require(nd <= 3, ErrorCode::invalid_argument, "strip interpolant supports up to three transverse axes");
  double wbuf[3][64];
  std::vector<std::vector<double>> wdyn;
  double* w[3] = {wbuf[0], wbuf[1], wbuf[2]};
  for (int k = 0; k < nd; ++k) {
    const Axis& ax = axes_[k + 1];
    if (ax.count > 64) {
      wdyn.emplace_back(ax.count);
      w[k] = wdyn.back().data();
    }
    trig_weights(ax.count, ax.period(), x[k + 1] - ax.lo, w[k]);
  }
  const double v0 = transverse(values_, i, w), v1 = transverse(values_, i + 1, w);
  const double p0 = transverse(d1_, i, w) * h, p1 = transverse(d1_, i + 1, w) * h;
  const double q0 = transverse(d2_, i, w) * h * h, q1 = transverse(d2_, i + 1, w) * h * h;

  // Quintic Hermite basis on [0, 1].
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  const double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5, H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
  const double H2 = 0.5 * (u2 - 3 * u3 + 3 * u4 - u5);
  const double G0 = 10 * u3 - 15 * u4 + 6 * u5, G1 = -4 * u3 + 7 * u4 - 3 * u5, G2 = 0.5 * (u3 - 2 * u4 + u5);
  if (d0) {
    const double dH0 = -30 * u2 + 60 * u3 - 30 * u4, dH1 = 1 - 18 * u2 + 32 * u3 - 15 * u4;
    const double dH2 = 0.5 * (2 * u - 9 * u2 + 12 * u3 - 5 * u4);
    const double dG0 = 30 * u2 - 60 * u3 + 30 * u4, dG1 = -12 * u2 + 28 * u3 - 15 * u4;
    const double dG2 = 0.5 * (3 * u2 - 8 * u3 + 5 * u4);
    *d0 = (v0 * dH0 + p0 * dH1 + q0 * dH2 + v1 * dG0 + p1 * dG1 + q1 * dG2) / h;
  }
  return v0 * H0 + p0 * H1 + q0 * H2 + v1 * G0 + p1 * G1 + q1 * G2;
}

}  // namespace pulsefront
