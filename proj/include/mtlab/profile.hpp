#pragma once

// Isoperimetric comparison profiles: the small-volume bound sqrt(t(4pi-Kt))
// with its volume threshold V0, the three-branch global profile g, and
// empirical centered-disk profiles of concrete surfaces.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mtlab/geom.hpp"

namespace mtlab {

struct ProfileParams {
  double delta;  // systole
  double h;      // Cheeger constant
  double K;      // upper curvature bound
  double v0;     // volume threshold: the root of K v^2 - 4 pi v + delta^2
};

inline ProfileParams make_params(double delta, double h, double K) {
  if (!(delta > 0.0) || !(h > 0.0))
    fail(errc::non_positive, "delta and h must be positive");
  const double disc = 4.0 * detail::pi * detail::pi - K * delta * delta;
  if (!(disc > 0.0))
    fail(errc::curvature_too_large, "4pi^2 - K delta^2 must be positive");
  const double v0 = delta * delta / (detail::two_pi + std::sqrt(disc));
  return ProfileParams{delta, h, K, v0};
}

// sqrt(t(4pi - Kt)), the small-volume lower bound for the profile.
inline double small_volume_bound(double t, double K) {
  if (!(t > 0.0)) fail(errc::out_of_domain, "t must be positive");
  if (K > 0.0 && t >= detail::four_pi / K)
    fail(errc::negative_radicand, "t >= 4pi/K with K > 0");
  return std::sqrt(t * (detail::four_pi - K * t));
}

// g(t): sqrt(t(4pi-Kt)) on (0,eps], constant g(eps) on (eps, g(eps)/h],
// h*t beyond. If the plateau is empty (g(eps)/h <= eps) the profile is the
// two-branch variant and degenerate_plateau() reports it.
class PiecewiseProfile {
 public:
  PiecewiseProfile(double K, double h, double eps, std::optional<ProfileParams> params = {})
      : K_(K), h_(h), eps_(eps), params_(params) {
    if (!(eps > 0.0) || !(h > 0.0)) fail(errc::non_positive, "eps and h must be positive");
    if (K > 0.0 && eps >= detail::four_pi / K)
      fail(errc::negative_radicand, "eps >= 4pi/K with K > 0");
    g_eps_ = std::sqrt(eps * (detail::four_pi - K * eps));
    t2_ = g_eps_ / h;
    degenerate_ = t2_ <= eps;
    if (degenerate_) t2_ = eps;
  }

  double operator()(double t) const {
    if (!(t > 0.0)) fail(errc::out_of_domain, "g is defined for t > 0");
    if (t <= eps_) return std::sqrt(t * (detail::four_pi - K_ * t));
    if (!degenerate_ && t <= t2_) return g_eps_;
    return h_ * t;
  }

  double K() const { return K_; }
  double h() const { return h_; }
  double eps() const { return eps_; }
  double g_eps() const { return g_eps_; }
  double t2() const { return t2_; }
  bool degenerate_plateau() const { return degenerate_; }
  const std::optional<ProfileParams>& params() const { return params_; }

 private:
  double K_;
  double h_;
  double eps_;
  double g_eps_;
  double t2_;
  bool degenerate_;
  std::optional<ProfileParams> params_;
};

// Free-standing constructor: eps decoupled from any systole (the lemma poses
// eps, h, K independently).
inline PiecewiseProfile make_profile(double K, double h, double eps) {
  return PiecewiseProfile(K, h, eps);
}

// Spec-checked constructor: eps must stay below params.v0 (so that
// g(eps) <= delta) and below the positive-curvature clip 4pi/(1+K).
inline PiecewiseProfile build_g(const ProfileParams& params, double eps) {
  if (!(eps > 0.0)) fail(errc::non_positive, "eps must be positive");
  if (eps > params.v0 * (1.0 + 1e-12))
    fail(errc::eps_too_large, "eps = " + std::to_string(eps) + " exceeds v0 = " +
                                  std::to_string(params.v0));
  if (params.K > 0.0 && eps > detail::four_pi / (1.0 + params.K))
    fail(errc::eps_too_large, "eps exceeds the positive-curvature clip 4pi/(1+K)");
  return PiecewiseProfile(params.K, params.h, eps, params);
}

struct MeasuredProfile {
  std::vector<double> area;       // strictly increasing
  std::vector<double> perimeter;  // same length
  double cheeger_upper = 0.0;     // min perimeter/area over admissible samples
  double volume = 0.0;
  bool infinite_volume = false;
};

// Centered-disk (area, perimeter) samples. cheeger_upper runs over samples
// with 2*area < volume on finite-volume surfaces, over all samples otherwise.
inline MeasuredProfile measure_profile(const WarpedSurface& s, int n_samples) {
  detail::require_ball_topology(s);
  if (n_samples < 16) fail(errc::bad_parameter, "need at least 16 samples");

  MeasuredProfile out;
  out.volume = s.volume();
  out.infinite_volume = s.infinite_volume() || (s.truncated() && !std::isfinite(s.tail_bound()));
  out.area.reserve(static_cast<std::size_t>(n_samples));
  out.perimeter.reserve(static_cast<std::size_t>(n_samples));

  const double span = s.t_max() - s.t_min();
  double cheeger = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n_samples; ++k) {
    const double r = s.t_min() + span * k / n_samples;
    const double a = disk_area(s, r);
    const double p = disk_perimeter(s, r);
    if (!out.area.empty() && !(a > out.area.back())) continue;  // guard plateaus
    out.area.push_back(a);
    out.perimeter.push_back(p);
    const bool admissible = out.infinite_volume || 2.0 * a < out.volume;
    if (admissible && a > 0.0) cheeger = std::min(cheeger, p / a);
  }
  out.cheeger_upper = cheeger;
  return out;
}

struct DominanceReport {
  double worst_margin = 0.0;  // min over samples of perimeter - g(area)
  double worst_area = 0.0;
  bool dominated = false;
  double tolerance = 0.0;
  int samples_checked = 0;
};

// Does the measured centered-disk profile dominate g? On finite-volume
// surfaces only samples with area <= Vol/2 enter (the comparison range the
// rearrangement theorems use).
inline DominanceReport profile_dominates(const PiecewiseProfile& g, const MeasuredProfile& m,
                                         double tolerance = 1e-9) {
  DominanceReport rep;
  rep.tolerance = tolerance;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.area.size(); ++i) {
    const double a = m.area[i];
    if (!(a > 0.0)) continue;
    if (!m.infinite_volume && 2.0 * a > m.volume * (1.0 + 1e-12)) break;
    const double margin = m.perimeter[i] - g(a);
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_area = a;
    }
    ++rep.samples_checked;
  }
  if (rep.samples_checked == 0) {
    rep.worst_margin = 0.0;
    rep.dominated = false;
    return rep;
  }
  const double scale = 1.0 + std::abs(g(rep.worst_area));
  rep.dominated = rep.worst_margin >= -tolerance * scale;
  return rep;
}

}  // namespace mtlab
