#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gradedgeo/linalg.hpp"

namespace gradedgeo {

/// Discretized curve: strictly increasing times, nodes and velocities, with
/// piecewise cubic Hermite interpolation between nodes.
///
/// The same type holds lifts (vector fields along a curve): nodes are then
/// the lift values and velocities their time derivatives.
class CurvePath {
 public:
  CurvePath() = default;
  CurvePath(std::vector<double> times, std::vector<Vec> nodes, std::vector<Vec> velocities);

  /// Samples a curve given in closed form on `times`.
  static CurvePath sample(const std::vector<double>& times,
                          const std::function<Vec(double)>& position,
                          const std::function<Vec(double)>& velocity);

  int dim() const { return nodes_.empty() ? 0 : static_cast<int>(nodes_.front().size()); }
  std::size_t size() const { return times_.size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& nodes() const { return nodes_; }
  const std::vector<Vec>& velocities() const { return velocities_; }

  Vec position(double t) const;
  Vec velocity(double t) const;
  Vec acceleration(double t) const;
  /// Index of the segment [t_i, t_{i+1}] holding t (clamped to the grid).
  std::size_t segment(double t) const;

  bool same_grid(const CurvePath& other) const;
  /// Node-wise sum this + s * other (same grid).
  CurvePath plus_scaled(const CurvePath& other, double s) const;

  /// CSV with header t,x_1..x_D,v_1..v_D, full double precision.
  void write_csv(std::ostream& os) const;
  static CurvePath read_csv(std::istream& is);
  void save_csv(const std::string& path) const;
  static CurvePath load_csv(const std::string& path);

 private:
  std::vector<double> times_;
  std::vector<Vec> nodes_;
  std::vector<Vec> velocities_;
};

}  // namespace gradedgeo
