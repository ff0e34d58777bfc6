#include "pulsefront/blocktridiag.hpp"

#include <cmath>

#include "pulsefront/error.hpp"

namespace pulsefront {

void BlockTridiag::reset(int blocks, int n) {
  require(blocks >= 1 && n >= 1, ErrorCode::invalid_argument, "empty block system");
  if (blocks != m_ || n != n_) {
    m_ = blocks;
    n_ = n;
    D_.assign(m_, Eigen::MatrixXd::Zero(n_, n_));
    lu_.resize(m_);
  } else {
    for (auto& d : D_) d.setZero();
  }
  L_.assign(m_, {});
  U_.assign(m_, {});
  factored_ = false;
}

void BlockTridiag::add_lower(int b, int row, int col, double v) { L_[b].push_back({row, col, v}); }
void BlockTridiag::add_upper(int b, int row, int col, double v) { U_[b].push_back({row, col, v}); }

Eigen::VectorXd BlockTridiag::multiply(const Eigen::VectorXd& x) const {
  require(!factored_, ErrorCode::precondition, "multiply after factor");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  for (int b = 0; b < m_; ++b) {
    y.segment(b * n_, n_) = D_[b] * x.segment(b * n_, n_);
    for (const auto& e : L_[b]) y[b * n_ + e.row] += e.v * x[(b - 1) * n_ + e.col];
    for (const auto& e : U_[b]) y[b * n_ + e.row] += e.v * x[(b + 1) * n_ + e.col];
  }
  return y;
}

bool BlockTridiag::factor() {
  // S_0 = D_0, S_{b+1} = D_{b+1} - L_{b+1} S_b^{-1} U_b.
  Eigen::MatrixXd Ub(n_, n_), X(n_, n_);
  for (int b = 0; b < m_; ++b) {
    lu_[b].compute(D_[b]);
    const double rc = lu_[b].rcond();
    if (!(rc > 1e-300) || !std::isfinite(rc)) return false;
    if (b + 1 == m_) break;
    Ub.setZero();
    for (const auto& e : U_[b]) Ub(e.row, e.col) += e.v;
    X = lu_[b].solve(Ub);
    auto& Dn = D_[b + 1];
    for (const auto& e : L_[b + 1]) Dn.row(e.row) -= e.v * X.row(e.col);
  }
  factored_ = true;
  return true;
}

void BlockTridiag::solve(Eigen::MatrixXd& B) const {
  require(factored_, ErrorCode::precondition, "solve before factor");
  const Eigen::Index k = B.cols();
  // Forward: y_b = S_b^{-1} (B_b - L_b y_{b-1}).
  for (int b = 0; b < m_; ++b) {
    if (b > 0)
      for (const auto& e : L_[b]) B.row(b * n_ + e.row) -= e.v * B.row((b - 1) * n_ + e.col);
    B.middleRows(b * n_, n_) = lu_[b].solve(B.middleRows(b * n_, n_));
  }
  // Backward: x_b = y_b - S_b^{-1} U_b x_{b+1}.
  Eigen::MatrixXd t(n_, k);
  for (int b = m_ - 2; b >= 0; --b) {
    t.setZero();
    for (const auto& e : U_[b]) t.row(e.row) += e.v * B.row((b + 1) * n_ + e.col);
    B.middleRows(b * n_, n_) -= lu_[b].solve(t);
  }
}

}  // namespace pulsefront
