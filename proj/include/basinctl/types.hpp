#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <complex>

namespace basinctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Axis-aligned box in state space, one interval per coordinate.
struct Box {
  Vec lower;
  Vec upper;

  int dim() const { return static_cast<int>(lower.size()); }
  double diameter() const { return (upper - lower).norm(); }
  bool contains(const Vec& x, double slack = 0.0) const {
    return (x.array() >= lower.array() - slack).all() &&
           (x.array() <= upper.array() + slack).all();
  }
  Vec map_unit(const Vec& u) const { return lower + u.cwiseProduct(upper - lower); }
};

}  // namespace basinctl
