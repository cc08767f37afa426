#include "gradedgeo/curve.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gradedgeo {

CurvePath::CurvePath(std::vector<double> times, std::vector<Vec> nodes, std::vector<Vec> velocities)
    : times_(std::move(times)), nodes_(std::move(nodes)), velocities_(std::move(velocities)) {
  if (times_.size() < 2) throw std::invalid_argument("CurvePath needs at least two nodes");
  if (nodes_.size() != times_.size() || velocities_.size() != times_.size()) {
    throw DimensionError("CurvePath: times, nodes and velocities differ in length");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) throw std::invalid_argument("CurvePath: grid not strictly increasing");
  }
  const auto d = nodes_.front().size();
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (nodes_[i].size() != d || velocities_[i].size() != d) {
      throw DimensionError("CurvePath: inconsistent node dimension");
    }
  }
}

CurvePath CurvePath::sample(const std::vector<double>& times, const std::function<Vec(double)>& position,
                            const std::function<Vec(double)>& velocity) {
  std::vector<Vec> x, v;
  x.reserve(times.size());
  v.reserve(times.size());
  for (double t : times) {
    x.push_back(position(t));
    v.push_back(velocity(t));
  }
  return CurvePath(times, std::move(x), std::move(v));
}

std::size_t CurvePath::segment(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(i, times_.size() - 2);
}

Vec CurvePath::position(double t) const {
  const std::size_t i = segment(t);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * nodes_[i] + (s3 - 2 * s2 + s) * h * velocities_[i] +
         (-2 * s3 + 3 * s2) * nodes_[i + 1] + (s3 - s2) * h * velocities_[i + 1];
}

Vec CurvePath::velocity(double t) const {
  const std::size_t i = segment(t);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) / h) * nodes_[i] + (3 * s2 - 4 * s + 1) * velocities_[i] +
         ((-6 * s2 + 6 * s) / h) * nodes_[i + 1] + (3 * s2 - 2 * s) * velocities_[i + 1];
}

Vec CurvePath::acceleration(double t) const {
  const std::size_t i = segment(t);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  return ((12 * s - 6) / (h * h)) * nodes_[i] + ((6 * s - 4) / h) * velocities_[i] +
         ((-12 * s + 6) / (h * h)) * nodes_[i + 1] + ((6 * s - 2) / h) * velocities_[i + 1];
}

bool CurvePath::same_grid(const CurvePath& other) const { return times_ == other.times_; }

CurvePath CurvePath::plus_scaled(const CurvePath& other, double s) const {
  if (!same_grid(other)) throw std::invalid_argument("CurvePath::plus_scaled: grid mismatch");
  std::vector<Vec> x(nodes_), v(velocities_);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] += s * other.nodes_[i];
    v[i] += s * other.velocities_[i];
  }
  return CurvePath(times_, std::move(x), std::move(v));
}

void CurvePath::write_csv(std::ostream& os) const {
  const int d = dim();
  os << "t";
  for (int k = 1; k <= d; ++k) os << ",x_" << k;
  for (int k = 1; k <= d; ++k) os << ",v_" << k;
  os << '\n';
  char buf[32];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
  };
  for (std::size_t i = 0; i < times_.size(); ++i) {
    put(times_[i]);
    for (int k = 0; k < d; ++k) {
      os << ',';
      put(nodes_[i](k));
    }
    for (int k = 0; k < d; ++k) {
      os << ',';
      put(velocities_[i](k));
    }
    os << '\n';
  }
}

CurvePath CurvePath::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("curve CSV: missing header");
  const auto cols = std::count(line.begin(), line.end(), ',') + 1;
  if (cols < 3 || (cols - 1) % 2 != 0) throw std::invalid_argument("curve CSV: bad header '" + line + "'");
  const int d = static_cast<int>((cols - 1) / 2);
  std::vector<double> t;
  std::vector<Vec> x, v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<long>(row.size()) != cols) throw std::invalid_argument("curve CSV: ragged row");
    t.push_back(row[0]);
    x.push_back(Eigen::Map<Vec>(row.data() + 1, d));
    v.push_back(Eigen::Map<Vec>(row.data() + 1 + d, d));
  }
  return CurvePath(std::move(t), std::move(x), std::move(v));
}

void CurvePath::save_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_csv(f);
}

CurvePath CurvePath::load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return read_csv(f);
}

}  // namespace gradedgeo
