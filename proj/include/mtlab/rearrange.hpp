#pragma once

// Distribution functions A(t) = sigma{u >= t}, level-set lengths, the co-area
// Dirichlet lower bound, and radial rearrangement onto a comparison disk.
//
// A(t) is exact for the piecewise-linear interpolant of the samples: each
// cell contributes a piecewise-quadratic function of the level, accumulated
// over the uniform level grid with difference arrays (O(cells + levels)).
// Level-set lengths use metric-weighted marching squares (straight segments,
// saddles resolved by the cell-average sign).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mtlab/comparison.hpp"
#include "mtlab/geom.hpp"

namespace mtlab {

struct DistributionSummary {
  std::vector<double> levels;        // ascending, extremes included
  std::vector<double> area_above;    // A(level)
  std::vector<double> level_length;  // l(level)
  std::vector<double> level_length_mid;  // l at interval midpoints (co-area)
  double volume = 0.0;               // cell-rule total area
  double median = 0.0;
  double average = 0.0;
  double median_jump = 0.0;          // A drop across the median interval
};

namespace detail {

struct LevelGrid {
  double lo = 0.0;
  double dl = 0.0;
  int count = 0;

  double level(int k) const { return lo + k * dl; }

  // Largest k with level(k) <= v, clamped to [-1, count-1].
  int k_leq(double v) const {
    if (v < lo) return -1;
    int k = static_cast<int>(std::floor((v - lo) / dl));
    if (k + 1 < count && level(k + 1) <= v) ++k;
    while (k >= 0 && level(k) > v) --k;
    return std::min(k, count - 1);
  }
};

// Accumulates sums of range-restricted quadratics c0 + c1 l + c2 l^2.
class PolyAccumulator {
 public:
  explicit PolyAccumulator(const LevelGrid& grid)
      : grid_(grid),
        d0_(static_cast<std::size_t>(grid.count) + 1, 0.0),
        d1_(static_cast<std::size_t>(grid.count) + 1, 0.0),
        d2_(static_cast<std::size_t>(grid.count) + 1, 0.0) {}

  // Adds the polynomial on level indices [k_lo, k_hi] inclusive.
  void add(int k_lo, int k_hi, double c0, double c1, double c2) {
    k_lo = std::max(k_lo, 0);
    k_hi = std::min(k_hi, grid_.count - 1);
    if (k_lo > k_hi) return;
    d0_[static_cast<std::size_t>(k_lo)] += c0;
    d0_[static_cast<std::size_t>(k_hi) + 1] -= c0;
    d1_[static_cast<std::size_t>(k_lo)] += c1;
    d1_[static_cast<std::size_t>(k_hi) + 1] -= c1;
    d2_[static_cast<std::size_t>(k_lo)] += c2;
    d2_[static_cast<std::size_t>(k_hi) + 1] -= c2;
  }

  std::vector<double> evaluate() const {
    std::vector<double> out(static_cast<std::size_t>(grid_.count));
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    for (int k = 0; k < grid_.count; ++k) {
      a0 += d0_[static_cast<std::size_t>(k)];
      a1 += d1_[static_cast<std::size_t>(k)];
      a2 += d2_[static_cast<std::size_t>(k)];
      const double l = grid_.level(k);
      out[static_cast<std::size_t>(k)] = a0 + a1 * l + a2 * l * l;
    }
    return out;
  }

 private:
  LevelGrid grid_;
  std::vector<double> d0_, d1_, d2_;
};

// Contribution of one linear triangle (values v1<=v2<=v3, metric area S) to
// the area-above-level accumulator.
inline void add_triangle_above(PolyAccumulator& acc, const LevelGrid& g, double v1, double v2,
                               double v3, double S) {
  const double span = v3 - v1;
  if (!(span > 0.0)) {  // flat triangle: step at its value
    acc.add(0, g.k_leq(v1), S, 0.0, 0.0);
    return;
  }
  acc.add(0, g.k_leq(v1), S, 0.0, 0.0);
  if (v2 > v1) {
    // S * (1 - (l - v1)^2 / ((v2-v1)(v3-v1))) on (v1, v2]
    const double d = (v2 - v1) * span;
    acc.add(g.k_leq(v1) + 1, g.k_leq(v2), S * (1.0 - v1 * v1 / d), 2.0 * S * v1 / d, -S / d);
  }
  if (v3 > v2) {
    // S * (v3 - l)^2 / ((v3-v2)(v3-v1)) on (v2, v3]
    const double d = (v3 - v2) * span;
    acc.add(g.k_leq(v2) + 1, g.k_leq(v3), S * v3 * v3 / d, -2.0 * S * v3 / d, S / d);
  }
}

// Radial segment [t_i, t_i+dt] with linear u and linear w: exact
// area-above-level (quadratic) and circle length at the crossing (linear).
inline void add_radial_segment(PolyAccumulator* area_acc, const LevelGrid& g,
                               PolyAccumulator* len_acc, const LevelGrid& len_grid, double ua,
                               double ub, double wa, double wb, double dt, double period) {
  const double full = period * dt * 0.5 * (wa + wb);
  if (ua == ub) {
    if (area_acc) area_acc->add(0, g.k_leq(ua), full, 0.0, 0.0);
    return;
  }
  const bool increasing = ub > ua;
  const double u_lo = increasing ? ua : ub;
  const double u_hi = increasing ? ub : ua;
  const double du = u_hi - u_lo;

  // Fraction s in [0,1] measured from the node where u attains the level
  // first; area above is quadratic in s, s is affine in the level.
  double q0, q1, q2;  // area(s) = q0 + q1 s + q2 s^2
  double alpha, beta;  // s = alpha + beta*l
  const double half = period * dt * 0.5;
  if (increasing) {
    // above part = [tau, t_i+dt], s = (l - ua)/du
    q0 = half * (wa + wb);
    q1 = half * ((wb - wa) - (wa + wb));
    q2 = -half * (wb - wa);
    alpha = -ua / du;
    beta = 1.0 / du;
  } else {
    // above part = [t_i, tau], s = (ua - l)/du measured downward... s here is
    // the covered fraction q = (ua - l)/du
    q0 = 0.0;
    q1 = half * 2.0 * wa;
    q2 = half * (wb - wa);
    alpha = ua / du;
    beta = -1.0 / du;
  }
  const double c2 = q2 * beta * beta;
  const double c1 = q1 * beta + 2.0 * q2 * alpha * beta;
  const double c0 = q0 + q1 * alpha + q2 * alpha * alpha;
  if (area_acc) {
    area_acc->add(0, g.k_leq(u_lo), full, 0.0, 0.0);
    area_acc->add(g.k_leq(u_lo) + 1, g.k_leq(u_hi), c0, c1, c2);
  }

  if (len_acc) {
    // circle length period * w(tau(l)), linear in l; attributed half-open
    // (u_lo, u_hi] so node-exact levels are counted once
    const double dwdu = (increasing ? (wb - wa) : (wa - wb)) / du;
    const double w_at_lo = increasing ? wa : wb;
    const double lc0 = period * (w_at_lo - u_lo * dwdu);
    const double lc1 = period * dwdu;
    len_acc->add(len_grid.k_leq(u_lo) + 1, len_grid.k_leq(u_hi), lc0, lc1, 0.0);
  }
}

// Marching squares over one cell at one level; returns total metric length.
inline double cell_level_length(double uA, double uB, double uC, double uD, double dt,
                                double dth, double w0, double w1, double level) {
  const int conf = (uA >= level ? 1 : 0) | (uB >= level ? 2 : 0) | (uC >= level ? 4 : 0) |
                   (uD >= level ? 8 : 0);
  if (conf == 0 || conf == 15) return 0.0;

  // crossing points in local (x, y) = ((t - t0)/dt, (theta - theta0)/dth)
  auto frac = [&](double va, double vb) {
    const double d = vb - va;
    return d == 0.0 ? 0.5 : std::clamp((level - va) / d, 0.0, 1.0);
  };
  const double pAB = frac(uA, uB);  // bottom edge, y = 0
  const double pBC = frac(uB, uC);  // right edge, x = 1
  const double pCD = frac(uC, uD);  // top edge (C at x=1), y = 1
  const double pDA = frac(uD, uA);  // left edge (D at y=1), x = 0

  struct P {
    double x, y;
  };
  const P eAB{pAB, 0.0};
  const P eBC{1.0, pBC};
  const P eCD{1.0 - pCD, 1.0};
  const P eDA{0.0, 1.0 - pDA};

  auto seg_len = [&](const P& a, const P& b) {
    const double dtt = (b.x - a.x) * dt;
    const double dhh = (b.y - a.y) * dth;
    const double xm = 0.5 * (a.x + b.x);
    const double wm = w0 + xm * (w1 - w0);
    return std::sqrt(dtt * dtt + wm * wm * dhh * dhh);
  };

  switch (conf) {
    case 1: case 14: return seg_len(eAB, eDA);
    case 2: case 13: return seg_len(eAB, eBC);
    case 3: case 12: return seg_len(eBC, eDA);
    case 4: case 11: return seg_len(eBC, eCD);
    case 6: case 9: return seg_len(eAB, eCD);
    case 7: case 8: return seg_len(eCD, eDA);
    case 5: case 10: {
      const double center = 0.25 * (uA + uB + uC + uD);
      const bool center_in = center >= level;
      const bool a_in = (conf == 5);  // A and C inside for 5; B and D for 10
      if (a_in == center_in)
        return seg_len(eAB, eBC) + seg_len(eCD, eDA);
      return seg_len(eAB, eDA) + seg_len(eBC, eCD);
    }
    default: return 0.0;
  }
}

}  // namespace detail

// Distribution data of u on the surface: A(t), l(t), median, average.
inline DistributionSummary distribution(const WarpedSurface& s, const GridFunction& u,
                                        int n_levels) {
  require_on_surface(s, u);
  if (n_levels < 32) fail(errc::bad_parameter, "need n_levels >= 32");
  const double umin = u.min_value();
  const double umax = u.max_value();
  if (umax - umin < 1e-14 * (1.0 + std::abs(umax)))
    fail(errc::constant_function, "function range below resolution");

  DistributionSummary out;
  const int L = n_levels;
  detail::LevelGrid grid{umin, (umax - umin) / (L - 1), L};
  detail::LevelGrid mid_grid{umin + 0.5 * grid.dl, grid.dl, L - 1};
  out.levels.resize(static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) out.levels[static_cast<std::size_t>(k)] = grid.level(k);

  detail::PolyAccumulator area_acc(grid);
  detail::PolyAccumulator len_acc(grid);
  detail::PolyAccumulator len_mid_acc(mid_grid);

  const int n = s.n_t();
  const double dt = s.dt();
  const double period = s.theta_period();
  double volume = 0.0;

  if (u.radial()) {
    for (int i = 0; i < n; ++i) {
      const double wa = s.warp_at(i), wb = s.warp_at(i + 1);
      volume += period * dt * 0.5 * (wa + wb);
      detail::add_radial_segment(&area_acc, grid, &len_acc, grid, u.at(i), u.at(i + 1), wa, wb,
                                 dt, period);
      detail::add_radial_segment(nullptr, grid, &len_mid_acc, mid_grid, u.at(i), u.at(i + 1),
                                 wa, wb, dt, period);
    }
    out.area_above = area_acc.evaluate();
    out.level_length = len_acc.evaluate();
    out.level_length_mid = len_mid_acc.evaluate();
  } else {
    const int m = s.n_theta();
    const double dth = s.dtheta();
    const double tri_coord = 0.5 * dt * dth;  // coordinate area of one triangle
    for (int i = 0; i < n; ++i) {
      const double w0 = s.warp_at(i), w1 = s.warp_at(i + 1);
      // triangles (A,B,C) with weights (w0,w1,w1) and (A,C,D) with (w0,w1,w0)
      const double s_abc = tri_coord * (w0 + 2.0 * w1) / 3.0;
      const double s_acd = tri_coord * (2.0 * w0 + w1) / 3.0;
      const double cell_area = s_abc + s_acd;
      for (int j = 0; j < m; ++j) {
        const int jp = (j + 1) % m;
        const double uA = u.at(i, j), uB = u.at(i + 1, j);
        const double uC = u.at(i + 1, jp), uD = u.at(i, jp);
        volume += cell_area;
        double v[3] = {uA, uB, uC};
        std::sort(v, v + 3);
        detail::add_triangle_above(area_acc, grid, v[0], v[1], v[2], s_abc);
        double w[3] = {uA, uC, uD};
        std::sort(w, w + 3);
        detail::add_triangle_above(area_acc, grid, w[0], w[1], w[2], s_acd);
      }
    }
    out.area_above = area_acc.evaluate();

    // Level-set lengths by marching squares, on levels and midpoints.
    out.level_length.assign(static_cast<std::size_t>(L), 0.0);
    out.level_length_mid.assign(static_cast<std::size_t>(L - 1), 0.0);
    for (int i = 0; i < n; ++i) {
      const double w0 = s.warp_at(i), w1 = s.warp_at(i + 1);
      for (int j = 0; j < m; ++j) {
        const int jp = (j + 1) % m;
        const double uA = u.at(i, j), uB = u.at(i + 1, j);
        const double uC = u.at(i + 1, jp), uD = u.at(i, jp);
        const double cmin = std::min({uA, uB, uC, uD});
        const double cmax = std::max({uA, uB, uC, uD});
        for (int k = std::max(0, grid.k_leq(cmin) + 1); k <= grid.k_leq(cmax); ++k)
          out.level_length[static_cast<std::size_t>(k)] += detail::cell_level_length(
              uA, uB, uC, uD, dt, dth, w0, w1, grid.level(k));
        for (int k = std::max(0, mid_grid.k_leq(cmin) + 1); k <= mid_grid.k_leq(cmax); ++k)
          out.level_length_mid[static_cast<std::size_t>(k)] += detail::cell_level_length(
              uA, uB, uC, uD, dt, dth, w0, w1, mid_grid.level(k));
      }
    }
  }

  out.volume = volume;
  // Monotone cleanup against roundoff; A(t0) = volume by construction.
  double prev = volume;
  for (double& a : out.area_above) {
    a = std::clamp(a, 0.0, prev);
    prev = a;
  }

  out.average = integrate(s, u, [](double x) { return x; }) / s.volume();

  // Median: level where A crosses volume/2, linear between levels.
  const double half = 0.5 * volume;
  const auto& A = out.area_above;
  std::size_t k = 0;
  while (k + 1 < A.size() && A[k + 1] > half) ++k;
  if (k + 1 >= A.size()) {
    out.median = out.levels.back();
  } else {
    const double a0 = A[k], a1 = A[k + 1];
    const double f = a0 == a1 ? 0.0 : (a0 - half) / (a0 - a1);
    out.median = out.levels[k] + f * grid.dl;
    out.median_jump = a0 - a1;
  }
  return out;
}

// Discrete int l^2(t)/(-A'(t)) dt over level intervals with A strictly
// decreasing; plateaus (dA = 0) are skipped. Cauchy-Schwarz lower bound for
// the Dirichlet energy.
inline double coarea_lower_bound(const DistributionSummary& dist) {
  if (dist.levels.size() < 3) fail(errc::bad_parameter, "need at least 3 levels");
  const std::size_t L = dist.levels.size();
  const double dl = dist.levels[1] - dist.levels[0];
  double sum = 0.0;
  int used = 0;
  for (std::size_t k = 0; k + 1 < L; ++k) {
    const double dA = dist.area_above[k] - dist.area_above[k + 1];
    if (!(dA > 0.0)) continue;
    const double lmid = dist.level_length_mid[k];
    sum += lmid * lmid * dl * dl / dA;
    ++used;
  }
  if (used == 0) fail(errc::no_variation, "distribution function has no decrease");
  return sum;
}

namespace detail {

// Generalized inverse of the nonincreasing A: level_at_area(s) interpolates
// at the first level index where A drops to <= s. Value plateaus of u (flat
// stretches of A) are skipped automatically; an exact plateau query returns
// the lowest level of the run (the leftmost preimage); queries below A at
// the top level return the top level, so mass sitting at the maximum keeps
// its value.
struct InverseDistribution {
  std::vector<double> areas;   // nonincreasing, one per level
  std::vector<double> levels;  // ascending

  explicit InverseDistribution(const DistributionSummary& d)
      : areas(d.area_above), levels(d.levels) {
    double prev = areas.front();
    for (double& a : areas) {  // enforce monotonicity against roundoff
      a = std::min(a, prev);
      prev = a;
    }
  }

  double level_at_area(double s) const {
    if (s >= areas.front()) return levels.front();
    if (s < areas.back()) return levels.back();
    // first index with areas[k] <= s; predecessor is strictly above s
    std::size_t lo = 0, hi = areas.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (areas[mid] > s ? lo : hi) = mid;
    }
    const double f = (areas[lo] - s) / (areas[lo] - areas[hi]);
    return levels[lo] + f * (levels[hi] - levels[lo]);
  }
};

}  // namespace detail

struct RadialRearrangement {
  WarpedSurface surface;  // the comparison disk as a warped surface
  GridFunction values;    // radial, nonincreasing
};

// u*(r) = A^{-1}(2 pi f(r)): the equimeasurable nonincreasing radial
// function on the comparison disk.
inline RadialRearrangement rearrange_decreasing(const DistributionSummary& dist,
                                                const ComparisonDisk& disk,
                                                DiskSurfaceOptions opts = {}) {
  const double scale = std::max(std::abs(dist.levels.front()), std::abs(dist.levels.back()));
  if (dist.levels.front() < -1e-9 * (1.0 + scale))
    fail(errc::precondition_violated,
         "rearrange_decreasing needs a nonnegative function; take |u| first");

  const double support_area = dist.area_above.front();
  const double max_area = disk.area_at(disk.r_max());
  if (max_area < support_area * (1.0 - 1e-9))
    fail(errc::disk_too_small, "disk area " + std::to_string(max_area) +
                                   " below the function support " +
                                   std::to_string(support_area));
  if (opts.r_cut <= 0.0)
    opts.r_cut = disk.radius_at_area(std::min(support_area, max_area));

  WarpedSurface surf = as_warped_surface(disk, opts);
  detail::InverseDistribution inv(dist);
  std::vector<double> vals(static_cast<std::size_t>(surf.n_t()) + 1);
  for (int i = 0; i <= surf.n_t(); ++i)
    vals[static_cast<std::size_t>(i)] = inv.level_at_area(disk.area_at(surf.t_at(i)));
  return RadialRearrangement{surf, GridFunction::from_values(surf, std::move(vals), true)};
}

struct TwoSidedRearrangement {
  WarpedSurface surface;  // half-volume comparison disk
  GridFunction u_minus;   // nondecreasing radial, u_minus(R) = median
  GridFunction u_plus;    // nonincreasing radial, u_plus(R) = median
  double median = 0.0;
  bool median_degenerate = false;
};

// Upper/lower radial rearrangements split at the median, on the disk
// truncated at half the surface volume.
inline TwoSidedRearrangement rearrange_two_sided(const WarpedSurface& s, const GridFunction& u,
                                                 const ComparisonDisk& disk, int n_levels = 1024,
                                                 DiskSurfaceOptions opts = {}) {
  if (s.infinite_volume()) fail(errc::infinite_volume, "two-sided rearrangement needs finite volume");
  require_on_surface(s, u);

  if (u.max_value() - u.min_value() < 1e-14 * (1.0 + std::abs(u.max_value()))) {
    // constant functions rearrange to themselves on both sides
    const double c = u.max_value();
    const double vol = s.volume();
    const double max_area = disk.area_at(disk.r_max());
    if (max_area < 0.5 * vol * (1.0 - 1e-9))
      fail(errc::disk_too_small, "disk does not reach half the surface volume");
    opts.r_cut = disk.radius_at_area(0.5 * vol);
    opts.finite_volume = true;
    WarpedSurface half_disk = as_warped_surface(disk, opts);
    return TwoSidedRearrangement{half_disk, GridFunction::constant(half_disk, c),
                                 GridFunction::constant(half_disk, c), c, false};
  }

  DistributionSummary dist = distribution(s, u, n_levels);
  DistributionSummary neg = distribution(s, u.map([](double x) { return -x; }), n_levels);
  const double vol = dist.volume;
  const double m = dist.median;

  const double max_area = disk.area_at(disk.r_max());
  if (max_area < 0.5 * vol * (1.0 - 1e-9))
    fail(errc::disk_too_small, "disk does not reach half the surface volume");
  opts.r_cut = disk.radius_at_area(0.5 * vol);
  opts.finite_volume = true;
  WarpedSurface half_disk = as_warped_surface(disk, opts);

  TwoSidedRearrangement out{half_disk, GridFunction::constant(half_disk, 0.0),
                            GridFunction::constant(half_disk, 0.0), m, false};
  out.median_degenerate = dist.median_jump > 0.1 * vol;

  detail::InverseDistribution inv_up(dist);
  detail::InverseDistribution inv_dn(neg);
  std::vector<double> plus(static_cast<std::size_t>(half_disk.n_t()) + 1);
  std::vector<double> minus(plus.size());
  for (int i = 0; i <= half_disk.n_t(); ++i) {
    const double a = std::min(disk.area_at(half_disk.t_at(i)), 0.5 * vol);
    plus[static_cast<std::size_t>(i)] = std::max(m, inv_up.level_at_area(a));
    minus[static_cast<std::size_t>(i)] = std::min(m, -inv_dn.level_at_area(a));
  }
  out.u_plus = GridFunction::from_values(half_disk, std::move(plus), true);
  out.u_minus = GridFunction::from_values(half_disk, std::move(minus), true);
  return out;
}

struct PolyaSzegoReport {
  double energy_original = 0.0;
  double energy_rearranged = 0.0;
  double coarea_bound = 0.0;
  bool dominated = false;
  double dominance_margin = 0.0;
};

// E(u*) <= coarea bound <= E(u) whenever the measured profile of the surface
// dominates g; the report carries the dominance flag either way.
inline PolyaSzegoReport polya_szego_report(const WarpedSurface& s, const GridFunction& u,
                                           const ComparisonDisk& disk, int n_levels = 1024,
                                           int n_profile_samples = 512) {
  PolyaSzegoReport rep;
  DistributionSummary dist = distribution(s, u, n_levels);
  rep.energy_original = dirichlet_energy(s, u);
  rep.coarea_bound = coarea_lower_bound(dist);
  RadialRearrangement rr = rearrange_decreasing(dist, disk);
  rep.energy_rearranged = dirichlet_energy(rr.surface, rr.values);
  MeasuredProfile mp = measure_profile(s, n_profile_samples);
  DominanceReport dom = profile_dominates(disk.profile(), mp, 1e-6);
  rep.dominated = dom.dominated;
  rep.dominance_margin = dom.worst_margin;
  return rep;
}

}  // namespace mtlab
