#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pulsefront/reaction.hpp"

namespace pulsefront {

/// One uniform axis. Periodic axes have `count` nodes covering [lo, lo + count*spacing).
struct Axis {
  double lo = 0.0;
  double spacing = 1.0;
  int count = 1;
  bool periodic = false;

  double coord(int i) const { return lo + spacing * i; }
  /// Last node for open axes, lo + period for periodic ones.
  double hi() const { return periodic ? lo + spacing * count : lo + spacing * (count - 1); }
  double period() const { return spacing * count; }
  bool operator==(const Axis&) const = default;
};

enum class GridKind { torus, strip, box };
enum class BoundaryPolicy { none, periodic, dirichlet_from_field, periodic_in_x };

const char* to_string(GridKind k) noexcept;
const char* to_string(BoundaryPolicy p) noexcept;

/// Structured grid, row-major with the last axis fastest.
class Grid {
 public:
  Grid(GridKind kind, std::vector<Axis> axes, BoundaryPolicy policy);

  /// Torus over one period cell with `points[k]` nodes per dimension.
  static std::shared_ptr<const Grid> torus(const PeriodCell& cell, const std::vector<int>& points);
  /// Axis 0 is s on [s_min, s_max] with s = 0 a node, then the torus axes.
  static std::shared_ptr<const Grid> strip(double s_min, double s_max, double ds, const PeriodCell& cell,
                                           const std::vector<int>& z_points);
  /// Box with nodes at lo[k] + i*h[k], i = 0..points[k]-1, boundary nodes included.
  static std::shared_ptr<const Grid> box(const std::vector<double>& lo, const std::vector<double>& hi,
                                         const std::vector<int>& points, BoundaryPolicy policy);

  GridKind kind() const { return kind_; }
  BoundaryPolicy policy() const { return policy_; }
  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int k) const { return axes_[k]; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int k) const { return strides_[k]; }

  std::size_t index(std::span<const int> multi) const;
  void unravel(std::size_t flat, std::span<int> multi) const;
  void coords(std::size_t flat, std::span<double> x) const;
  bool is_boundary(std::size_t flat) const;

  bool same_as(const Grid& other) const;
  std::string describe() const;

 private:
  GridKind kind_;
  std::vector<Axis> axes_;
  BoundaryPolicy policy_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Values outside an open axis, requested by the stencil at ghost positions.
using GhostFn = std::function<double(std::span<const double>)>;

struct Field {
  GridPtr grid;
  std::vector<double> values;
  double time = 0.0;

  Field() = default;
  Field(GridPtr g, double fill = 0.0, double t = 0.0);
  Field(GridPtr g, std::vector<double> v, double t = 0.0);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  /// Throws nan_detected if any value is not finite.
  void check_finite(const std::string& where) const;
};

/// Fills a field by evaluating fn at every node.
Field sample(GridPtr grid, const std::function<double(std::span<const double>)>& fn, double t = 0.0);

/// Second-order central 2N+1 point Laplacian. Open axes read ghost values from `ghost`,
/// which is required unless every axis is periodic.
Field laplacian(const Field& f, const GhostFn& ghost = {});

/// Multilinear interpolation with periodic wrap; open axes clamp within half a spacing.
double interpolate(const Field& f, std::span<const double> x);

double sup_norm_diff(const Field& a, const Field& b);
/// max_i |a_i| / weight(x_i).
double weighted_sup(const Field& a, const std::function<double(std::span<const double>)>& weight);

/// Reduces x into [lo, lo + L) so that integer shifts give identical results.
double wrap_periodic(double x, double lo, double L);

}  // namespace pulsefront
