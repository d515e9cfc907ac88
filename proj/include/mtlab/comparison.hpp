#pragma once

// The comparison disk: solves 2pi f'(r) = g(2pi f(r)) by adaptive classical
// RK4 with exact event location at the area breakpoints of g, cross-checks
// against the per-regime closed forms, and measures the conformal distortion
// of dr^2 + f'(r)^2 dtheta^2 against the curvature -h^2 model sinh(h r).

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mtlab/geom.hpp"
#include "mtlab/profile.hpp"

namespace mtlab {

// Closed-form first-branch solution (area/2pi as a function of radius):
// (1/-K)(cosh(sqrt(-K) r) - 1) for K<0, r^2/2 for K=0,
// (1/K)(1 - cos(sqrt(K) r)) for K>0 with r <= pi/sqrt(K).
inline double closed_form_f(double K, double r) {
  if (!(r >= 0.0)) fail(errc::out_of_domain, "radius must be nonnegative");
  if (K < 0.0) {
    const double k = std::sqrt(-K);
    return (std::cosh(k * r) - 1.0) / (-K);
  }
  if (K == 0.0) return 0.5 * r * r;
  const double k = std::sqrt(K);
  if (r > detail::pi / k * (1.0 + 1e-12))
    fail(errc::out_of_domain, "first branch for K > 0 ends at r = pi/sqrt(K)");
  return (1.0 - std::cos(k * r)) / K;
}

namespace detail {

// Inverse of the first-branch closed form: radius at which 2*pi*f = a.
inline double closed_form_radius(double K, double area) {
  const double f = area / two_pi;
  if (K < 0.0) {
    const double k = std::sqrt(-K);
    return std::acosh(1.0 + (-K) * f) / k;
  }
  if (K == 0.0) return std::sqrt(2.0 * f);
  const double k = std::sqrt(K);
  const double c = 1.0 - K * f;
  if (c < -1.0) fail(errc::out_of_domain, "area exceeds the K > 0 model sphere");
  return std::acos(std::max(-1.0, c)) / k;
}

struct DiskData {
  PiecewiseProfile profile;
  double tol = 1e-10;
  double r_max = 0.0;
  double seed_r = 0.0;
  double seed_area = 0.0;
  double r1 = std::numeric_limits<double>::infinity();
  double r2 = std::numeric_limits<double>::infinity();
  std::vector<double> rs, as, ds;  // samples: radius, area, d(area)/dr
  double sup_ratio = 0.0, inf_ratio = 0.0;
  long steps_taken = 0;
};

}  // namespace detail

struct SolveOptions {
  bool adaptive = true;
  double max_step = 0.05;   // step size in fixed mode; cap in adaptive mode
  long max_steps = 400000;
  double seed_area = 0.0;   // 0: the default min(eps, 1e-6)/10
};

struct DistortionReport {
  double sup_ratio = 0.0;   // sup of f'(r)/sinh(h r) over (0, r_max]
  double inf_ratio = 0.0;
  double conformal_constant = 1.0;  // sup/inf, the two-sided bound C >= 1
  double origin_limit = 0.0;        // 1/h
  double tail_limit = 0.0;          // 2 h f(g(eps)/h) e^{-g(eps)}
  double ratio_at_rmax = 0.0;       // measured ratio at the truncation radius
  bool tail_formula_valid = false;  // exponential regime reached before g(eps)/h
};

class ComparisonDisk {
 public:
  explicit ComparisonDisk(std::shared_ptr<const detail::DiskData> d) : d_(std::move(d)) {}

  const PiecewiseProfile& profile() const { return d_->profile; }
  double tol() const { return d_->tol; }
  double r_max() const { return d_->r_max; }
  double r1() const { return d_->r1; }
  double r2() const { return d_->r2; }
  double seed_r() const { return d_->seed_r; }
  double sup_ratio() const { return d_->sup_ratio; }
  double inf_ratio() const { return d_->inf_ratio; }
  long steps_taken() const { return d_->steps_taken; }
  std::span<const double> sample_r() const { return d_->rs; }
  std::span<const double> sample_area() const { return d_->as; }

  // 2 pi f(r).
  double area_at(double r) const {
    if (r < 0.0 || r > d_->r_max * (1.0 + 1e-12))
      fail(errc::out_of_domain, "radius outside [0, r_max]");
    r = std::min(r, d_->r_max);
    if (r <= d_->seed_r)
      return detail::two_pi * closed_form_f(d_->profile.K(), r);
    const auto& rs = d_->rs;
    std::size_t hi = static_cast<std::size_t>(
        std::lower_bound(rs.begin(), rs.end(), r) - rs.begin());
    if (hi == 0) return d_->as.front();
    if (hi >= rs.size()) return d_->as.back();
    const std::size_t lo = hi - 1;
    return detail::hermite(r, rs[lo], rs[hi], d_->as[lo], d_->as[hi], d_->ds[lo], d_->ds[hi]);
  }

  double f_at(double r) const { return area_at(r) / detail::two_pi; }

  // f'(r) = g(2 pi f(r)) / 2 pi; zero at the center.
  double fprime_at(double r) const {
    const double a = area_at(r);
    if (a <= 0.0) return 0.0;
    return d_->profile(a) / detail::two_pi;
  }

  // Inverse of area_at on [0, area_at(r_max)].
  double radius_at_area(double a) const {
    if (a < 0.0 || a > d_->as.back() * (1.0 + 1e-12))
      fail(errc::out_of_domain, "area outside the solved range");
    if (a <= d_->seed_area) return detail::closed_form_radius(d_->profile.K(), a);
    const auto& as = d_->as;
    std::size_t hi = static_cast<std::size_t>(
        std::lower_bound(as.begin(), as.end(), a) - as.begin());
    if (hi >= as.size()) return d_->rs.back();
    if (hi == 0) return d_->rs.front();
    const std::size_t lo = hi - 1;
    auto fn = [&](double r) {
      return detail::hermite(r, d_->rs[lo], d_->rs[hi], as[lo], as[hi], d_->ds[lo], d_->ds[hi]) -
             a;
    };
    return detail::bisect(fn, d_->rs[lo], d_->rs[hi]);
  }

 private:
  std::shared_ptr<const detail::DiskData> d_;
};

namespace detail {

// One classical RK4 step for a' = rhs(a).
inline double rk4_step(const std::function<double(double)>& rhs, double a, double h) {
  const double k1 = rhs(a);
  const double k2 = rhs(a + 0.5 * h * k1);
  const double k3 = rhs(a + 0.5 * h * k2);
  const double k4 = rhs(a + h * k3);
  return a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

inline double default_r_max(const PiecewiseProfile& g) {
  // Past the second breakpoint the tail ratio resolves like e^{-2h(r-r2)};
  // 20/h of headroom puts that below 1e-17.
  const double r1 = detail::closed_form_radius(g.K(), g.eps());
  const double r2 =
      g.degenerate_plateau() ? r1 : r1 + (g.t2() - g.eps()) / g.g_eps();
  return r2 + 20.0 / g.h();
}

// Integrates 2 pi f' = g(2 pi f). Each branch of g is integrated with its
// smooth extension; breakpoints are located by bisection on the cubic dense
// output and the integrator restarts exactly there.
inline ComparisonDisk solve_f(const PiecewiseProfile& profile, double r_max, double tol = 1e-10,
                              SolveOptions opts = {}) {
  if (!(r_max > 0.0)) fail(errc::bad_parameter, "r_max must be positive");
  if (!(tol > 0.0)) fail(errc::bad_parameter, "tol must be positive");

  auto data = std::make_shared<detail::DiskData>(detail::DiskData{profile});
  detail::DiskData& d = *data;
  d.tol = tol;
  d.r_max = r_max;

  const double K = profile.K();
  const double eps = profile.eps();
  const double g_eps = profile.g_eps();
  const double h_cheeger = profile.h();
  const double t2 = profile.t2();

  // Seed on the closed-form first branch, past the degenerate fixed point.
  d.seed_area = opts.seed_area > 0.0 ? opts.seed_area : std::min(eps, 1e-6) / 10.0;
  if (d.seed_area >= eps) fail(errc::bad_parameter, "seed area must stay below eps");
  d.seed_r = detail::closed_form_radius(K, d.seed_area);

  // Branch right-hand sides (smooth extensions).
  auto rhs_small = [K](double a) {
    const double rad = a * (detail::four_pi - K * a);
    return std::sqrt(std::max(rad, 0.0));
  };
  auto rhs_plateau = [g_eps](double) { return g_eps; };
  auto rhs_linear = [h_cheeger](double a) { return h_cheeger * a; };

  struct Segment {
    std::function<double(double)> rhs;
    double event_area;  // +inf when the segment runs to r_max
    double* event_radius;
  };
  std::vector<Segment> segments;
  const double inf = std::numeric_limits<double>::infinity();
  segments.push_back({rhs_small, eps, &d.r1});
  if (!profile.degenerate_plateau()) segments.push_back({rhs_plateau, t2, &d.r2});
  else d.r2 = d.r1;  // tied below once r1 is known
  segments.push_back({rhs_linear, inf, nullptr});

  double r = d.seed_r;
  double a = d.seed_area;
  d.rs.push_back(r);
  d.as.push_back(a);
  d.ds.push_back(rhs_small(a));

  double h = opts.adaptive ? std::min(opts.max_step, 1e-4) : opts.max_step;

  for (std::size_t seg = 0; seg < segments.size() && r < r_max; ++seg) {
    const auto& rhs = segments[seg].rhs;
    bool segment_done = false;
    while (!segment_done) {
      if (++d.steps_taken > opts.max_steps)
        fail(errc::no_convergence, "step budget exhausted at r = " + std::to_string(r));
      double step = std::min(h, r_max - r);
      if (step < 1e-14 * (1.0 + r)) {
        if (r >= r_max * (1.0 - 1e-13)) break;
        fail(errc::step_underflow, "step underflow at r = " + std::to_string(r));
      }

      double a_new;
      if (opts.adaptive) {
        const double full = detail::rk4_step(rhs, a, step);
        const double half = detail::rk4_step(rhs, detail::rk4_step(rhs, a, step / 2), step / 2);
        const double err = std::abs(half - full) / 15.0;
        // Relative budget with a floor near the seed; the sqrt branch makes
        // relative errors decay like 1/sqrt(a) downstream, so noise injected
        // at small areas would otherwise dominate the distortion ratio.
        const double budget = tol * (std::abs(half) + 30.0 * d.seed_area);
        if (err > budget && step > 1e-14 * (1.0 + r)) {
          h = step * std::max(0.2, 0.9 * std::pow(budget / (err + 1e-300), 0.2));
          continue;
        }
        a_new = half + (half - full) / 15.0;  // local extrapolation
        h = step * std::min(5.0, std::max(0.2, 0.9 * std::pow(budget / (err + 1e-300), 0.2)));
        h = std::min(h, opts.max_step);
      } else {
        a_new = detail::rk4_step(rhs, a, step);
      }

      const double r_new = r + step;
      const double d0 = rhs(a);
      const double d1 = rhs(a_new);
      const double a_evt = segments[seg].event_area;

      if (a_new >= a_evt) {
        // Locate the breakpoint on the dense output and restart there.
        auto crossing = [&](double rr) {
          return detail::hermite(rr, r, r_new, a, a_new, d0, d1) - a_evt;
        };
        const double r_evt = detail::bisect(crossing, r, r_new);
        r = r_evt;
        a = a_evt;
        if (segments[seg].event_radius) *segments[seg].event_radius = r_evt;
        d.rs.push_back(r);
        d.as.push_back(a);
        d.ds.push_back(segments[seg + 1].rhs(a));
        segment_done = true;
      } else {
        r = r_new;
        a = a_new;
        d.rs.push_back(r);
        d.as.push_back(a);
        d.ds.push_back(d1);
        if (r >= r_max * (1.0 - 1e-13)) {
          segment_done = true;
          seg = segments.size();  // stop outer loop too
        }
      }
    }
  }
  if (profile.degenerate_plateau()) d.r2 = d.r1;

  // Distortion scan of f'(r)/sinh(h r) over stored samples plus a uniform
  // refinement; the r -> 0+ limit 1/h is included explicitly.
  {
    ComparisonDisk probe(data);
    double sup = 1.0 / h_cheeger, inf_v = 1.0 / h_cheeger;
    auto consider = [&](double rr) {
      if (rr <= 0.0 || rr > d.r_max) return;
      const double ratio = probe.fprime_at(rr) / std::sinh(h_cheeger * rr);
      sup = std::max(sup, ratio);
      inf_v = std::min(inf_v, ratio);
    };
    for (double rr : d.rs) consider(rr);
    const int refine = 4096;
    for (int i = 1; i <= refine; ++i) consider(d.r_max * i / refine);
    d.sup_ratio = sup;
    d.inf_ratio = inf_v;
  }

  return ComparisonDisk(data);
}

inline DistortionReport conformal_distortion(const ComparisonDisk& disk, double h) {
  if (!(h > 0.0)) fail(errc::non_positive, "h must be positive");
  const PiecewiseProfile& g = disk.profile();
  DistortionReport rep;
  rep.sup_ratio = disk.sup_ratio();
  rep.inf_ratio = disk.inf_ratio();
  rep.conformal_constant = rep.sup_ratio / rep.inf_ratio;
  rep.origin_limit = 1.0 / h;
  rep.ratio_at_rmax = disk.fprime_at(disk.r_max()) / std::sinh(h * disk.r_max());

  const double r2 = disk.r2();
  if (std::isfinite(r2)) {
    if (disk.r_max() < r2 + 5.0 / h)
      fail(errc::truncation_too_short,
           "r_max must reach r2 + 5/h to resolve the tail limit");
    // The tail identity 2 h f(R) e^{-hR} is R-invariant on the exponential
    // regime; with R = g(eps)/h it reads 2 h f(g(eps)/h) e^{-g(eps)}.
    const double R = g.g_eps() / h;
    if (R >= r2 && R <= disk.r_max()) {
      rep.tail_limit = 2.0 * h * disk.f_at(R) * std::exp(-g.g_eps());
      rep.tail_formula_valid = true;
    } else {
      rep.tail_limit = 2.0 * h * disk.f_at(disk.r_max()) * std::exp(-h * disk.r_max());
      rep.tail_formula_valid = false;
    }
  }
  return rep;
}

struct DiskSurfaceOptions {
  double r_cut = 0.0;  // 0: use the full solved range
  int n_t = 2048;
  int n_theta = 256;
  bool finite_volume = false;  // half-volume truncations of compact surfaces
};

// The solved disk as a warped surface with w = f'. Centered-disk area and
// perimeter on it reproduce 2 pi f and g(2 pi f).
inline WarpedSurface as_warped_surface(const ComparisonDisk& disk,
                                       DiskSurfaceOptions opts = {}) {
  const double r_cut = opts.r_cut > 0.0 ? opts.r_cut : disk.r_max();
  if (r_cut > disk.r_max() * (1.0 + 1e-12))
    fail(errc::out_of_domain, "r_cut exceeds the solved range");
  SurfaceOptions so;
  so.n_t = opts.n_t;
  so.n_theta = opts.n_theta;
  so.truncated = !opts.finite_volume;
  so.infinite_volume = !opts.finite_volume;
  if (so.infinite_volume) so.tail_bound = std::numeric_limits<double>::infinity();
  ComparisonDisk local = disk;  // shared-state copy keeps the closure alive
  return WarpedSurface(Topology::disk, 0.0, r_cut,
                       Warp::custom([local](double r) {
                         return r <= 0.0 ? 0.0 : local.fprime_at(r);
                       }),
                       so);
}

}  // namespace mtlab
