#pragma once

#include <span>
#include <vector>

#include "eprtele/grid.hpp"

namespace eprtele {

struct Moments {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Moments of a sampled density; `weights` are point masses (density times
/// cell size), not necessarily normalized.
inline Moments moments(std::span<const double> coords, std::span<const double> weights) {
  Moments m;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    m.mass += weights[i];
    m.mean += weights[i] * coords[i];
  }
  m.mean /= m.mass;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double x = coords[i] - m.mean;
    m.variance += weights[i] * x * x;
  }
  m.variance /= m.mass;
  return m;
}

inline Moments moments(const std::vector<double>& coords, const RVector& density) {
  return moments(std::span<const double>(coords),
                 std::span<const double>(density.data(), static_cast<std::size_t>(density.size())));
}

struct PairMoments {
  Moments sum;         // of x1 + x2
  Moments difference;  // of x1 - x2
};

/// Moments of x1 + x2 and x1 - x2 under a 2-D density p(x1, x2) with rows
/// indexed by x1.
inline PairMoments pair_moments(const std::vector<double>& x1, const std::vector<double>& x2,
                                const RMatrix& p) {
  PairMoments out;
  double mass = 0.0;
  double ms = 0.0;
  double md = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double w = p(i, j);
      mass += w;
      ms += w * (x1[static_cast<std::size_t>(i)] + x2[static_cast<std::size_t>(j)]);
      md += w * (x1[static_cast<std::size_t>(i)] - x2[static_cast<std::size_t>(j)]);
    }
  }
  ms /= mass;
  md /= mass;
  double vs = 0.0;
  double vd = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double w = p(i, j);
      const double s = x1[static_cast<std::size_t>(i)] + x2[static_cast<std::size_t>(j)] - ms;
      const double d = x1[static_cast<std::size_t>(i)] - x2[static_cast<std::size_t>(j)] - md;
      vs += w * s * s;
      vd += w * d * d;
    }
  }
  out.sum = Moments{mass, ms, vs / mass};
  out.difference = Moments{mass, md, vd / mass};
  return out;
}

}  // namespace eprtele
