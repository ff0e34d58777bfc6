#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pulsefront {

/// Block-tridiagonal matrix with dense n x n diagonal blocks and sparse off-diagonal blocks,
/// factored by block Gaussian elimination (partial pivoting inside each Schur block).
class BlockTridiag {
 public:
  void reset(int blocks, int n);
  int blocks() const { return m_; }
  int block_size() const { return n_; }

  Eigen::MatrixXd& diag(int b) { return D_[b]; }
  void add_lower(int b, int row, int col, double v);  // coupling of block row b to b-1
  void add_upper(int b, int row, int col, double v);  // coupling of block row b to b+1

  /// y = A x for a stacked vector (used by tests).
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;

  bool factor();
  /// Solves in place for every column of B (stacked block rows).
  void solve(Eigen::MatrixXd& B) const;

 private:
  struct Entry {
    int row, col;
    double v;
  };
  int m_ = 0, n_ = 0;
  std::vector<Eigen::MatrixXd> D_;
  std::vector<std::vector<Entry>> L_, U_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  bool factored_ = false;
};

}  // namespace pulsefront
