#pragma once

// Warped-product surfaces  dt^2 + w(t)^2 dtheta^2  and sampled functions on
// them: curvature, geodesic-disk area/perimeter, quadrature and Dirichlet
// energy. Everything else in the library computes on top of this module.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mtlab/detail/numeric.hpp"
#include "mtlab/errors.hpp"

namespace mtlab {

enum class WarpKind { constant, linear, sinh_t, cosh_t, sin_t, exp_t, custom };

// Radial warp w(t). Analytic kinds are amp*base(rate*t) and carry exact
// derivatives; custom warps fall back to finite-difference stencils.
class Warp {
 public:
  static Warp constant(double value) { return Warp(WarpKind::constant, value, 0.0); }
  static Warp linear(double slope) { return Warp(WarpKind::linear, slope, 1.0); }
  static Warp sinh(double amp = 1.0, double rate = 1.0) { return Warp(WarpKind::sinh_t, amp, rate); }
  static Warp cosh(double amp = 1.0, double rate = 1.0) { return Warp(WarpKind::cosh_t, amp, rate); }
  static Warp sin(double amp = 1.0, double rate = 1.0) { return Warp(WarpKind::sin_t, amp, rate); }
  static Warp exp(double amp = 1.0, double rate = 1.0) { return Warp(WarpKind::exp_t, amp, rate); }
  static Warp custom(std::function<double(double)> fn) {
    Warp w(WarpKind::custom, 1.0, 1.0);
    w.fn_ = std::move(fn);
    return w;
  }

  double operator()(double t) const {
    switch (kind_) {
      case WarpKind::constant: return amp_;
      case WarpKind::linear: return amp_ * t;
      case WarpKind::sinh_t: return amp_ * std::sinh(rate_ * t);
      case WarpKind::cosh_t: return amp_ * std::cosh(rate_ * t);
      case WarpKind::sin_t: return amp_ * std::sin(rate_ * t);
      case WarpKind::exp_t: return amp_ * std::exp(rate_ * t);
      case WarpKind::custom: return fn_(t);
    }
    return 0.0;
  }

  // First derivative; exact for analytic kinds, central difference otherwise.
  double deriv(double t, double h = 1e-6) const {
    switch (kind_) {
      case WarpKind::constant: return 0.0;
      case WarpKind::linear: return amp_;
      case WarpKind::sinh_t: return amp_ * rate_ * std::cosh(rate_ * t);
      case WarpKind::cosh_t: return amp_ * rate_ * std::sinh(rate_ * t);
      case WarpKind::sin_t: return amp_ * rate_ * std::cos(rate_ * t);
      case WarpKind::exp_t: return amp_ * rate_ * std::exp(rate_ * t);
      case WarpKind::custom: return (fn_(t + h) - fn_(t - h)) / (2.0 * h);
    }
    return 0.0;
  }

  // Second derivative; 5-point stencil for custom warps.
  double second_deriv(double t, double h = 1e-4) const {
    switch (kind_) {
      case WarpKind::constant:
      case WarpKind::linear: return 0.0;
      case WarpKind::sinh_t: return amp_ * rate_ * rate_ * std::sinh(rate_ * t);
      case WarpKind::cosh_t: return amp_ * rate_ * rate_ * std::cosh(rate_ * t);
      case WarpKind::sin_t: return -amp_ * rate_ * rate_ * std::sin(rate_ * t);
      case WarpKind::exp_t: return amp_ * rate_ * rate_ * std::exp(rate_ * t);
      case WarpKind::custom:
        return (-fn_(t + 2 * h) + 16 * fn_(t + h) - 30 * fn_(t) + 16 * fn_(t - h) -
                fn_(t - 2 * h)) /
               (12.0 * h * h);
    }
    return 0.0;
  }

  WarpKind kind() const { return kind_; }
  bool analytic() const { return kind_ != WarpKind::custom; }
  double amp() const { return amp_; }
  double rate() const { return rate_; }

  // Warp of the metric scaled by s^2: t -> t/s stretched, amplitude times s.
  Warp scaled(double s) const {
    switch (kind_) {
      case WarpKind::constant: return constant(amp_ * s);
      case WarpKind::linear: return linear(amp_);
      case WarpKind::sinh_t: return sinh(amp_ * s, rate_ / s);
      case WarpKind::cosh_t: return cosh(amp_ * s, rate_ / s);
      case WarpKind::sin_t: return sin(amp_ * s, rate_ / s);
      case WarpKind::exp_t: return exp(amp_ * s, rate_ / s);
      case WarpKind::custom: {
        auto f = fn_;
        return custom([f, s](double t) { return s * f(t / s); });
      }
    }
    return *this;
  }

 private:
  Warp(WarpKind kind, double amp, double rate) : kind_(kind), amp_(amp), rate_(rate) {}

  WarpKind kind_;
  double amp_;
  double rate_;
  std::function<double(double)> fn_;
};

enum class Topology { disk, cylinder, cusp, closed_rotational };

struct SurfaceOptions {
  int n_t = 2048;
  int n_theta = 256;
  double theta_period = detail::two_pi;
  bool truncated = false;        // a coordinate end replaced an infinite one
  bool infinite_volume = false;  // the represented surface has infinite volume
  double tail_bound = 0.0;       // recorded bound on the discarded tail
};

class WarpedSurface {
 public:
  WarpedSurface(Topology topology, double t_min, double t_max, Warp warp,
                SurfaceOptions opts = {})
      : topology_(topology),
        t_min_(t_min),
        t_max_(t_max),
        warp_(std::move(warp)),
        opts_(opts) {
    if (!(t_max_ > t_min_)) fail(errc::bad_parameter, "t_max must exceed t_min");
    if (opts_.n_t < 2) fail(errc::bad_parameter, "n_t must be >= 2");
    if (opts_.n_t % 2) ++opts_.n_t;  // Simpson needs an even interval count
    if (opts_.n_theta < 4) fail(errc::bad_parameter, "n_theta must be >= 4");
    if (!(opts_.theta_period > 0.0)) fail(errc::bad_parameter, "theta_period must be positive");

    const int n = opts_.n_t;
    warp_nodes_.resize(static_cast<std::size_t>(n) + 1);
    double wmax = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = warp_(t_at(i));
      warp_nodes_[static_cast<std::size_t>(i)] = w;
      wmax = std::max(wmax, std::abs(w));
    }
    warp_max_ = wmax;
    validate_shape();

    // Simpson-weighted volume, cached; integrate() with F=1 reproduces it.
    const auto sw = detail::simpson_weights(n, dt());
    std::vector<double> terms(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
      terms[static_cast<std::size_t>(i)] = sw[static_cast<std::size_t>(i)] *
                                           warp_nodes_[static_cast<std::size_t>(i)];
    volume_ = detail::pairwise_sum(terms) * opts_.theta_period;
  }

  Topology topology() const { return topology_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double theta_period() const { return opts_.theta_period; }
  int n_t() const { return opts_.n_t; }
  int n_theta() const { return opts_.n_theta; }
  bool truncated() const { return opts_.truncated; }
  bool infinite_volume() const { return opts_.infinite_volume; }
  double tail_bound() const { return opts_.tail_bound; }
  const Warp& warp() const { return warp_; }

  double dt() const { return (t_max_ - t_min_) / opts_.n_t; }
  double dtheta() const { return opts_.theta_period / opts_.n_theta; }
  double t_at(int i) const { return t_min_ + i * dt(); }
  double theta_at(int j) const { return j * dtheta(); }
  double warp_at(int i) const { return warp_nodes_[static_cast<std::size_t>(i)]; }
  std::span<const double> warp_nodes() const { return warp_nodes_; }
  double warp_max() const { return warp_max_; }

  // Total area of the represented (possibly truncated) patch.
  double volume() const { return volume_; }

  // Same surface with the metric multiplied by s^2.
  WarpedSurface scaled(double s) const {
    SurfaceOptions o = opts_;
    o.tail_bound *= s * s;
    return WarpedSurface(topology_, s * t_min_, s * t_max_, warp_.scaled(s), o);
  }

 private:
  void validate_shape() const {
    const int n = opts_.n_t;
    const double floor = 1e-12 * (1.0 + warp_max_);
    for (int i = 1; i < n; ++i) {
      if (!(warp_nodes_[static_cast<std::size_t>(i)] > floor))
        fail(errc::bad_parameter,
             "warp must be positive on the open interval (t = " + std::to_string(t_at(i)) + ")");
    }
    const double span = t_max_ - t_min_;
    auto one_sided_deriv = [&](double t0, double sign) {
      if (warp_.analytic()) return warp_.deriv(t0);
      const double h = sign * dt();
      return (-3.0 * warp_(t0) + 4.0 * warp_(t0 + h) - warp_(t0 + 2 * h)) / (2.0 * h);
    };
    if (topology_ == Topology::disk) {
      if (std::abs(warp_nodes_.front()) > 1e-8 * (1.0 + warp_max_))
        fail(errc::bad_parameter, "disk warp must vanish at the center");
      const double cone = one_sided_deriv(t_min_, +1.0) * opts_.theta_period;
      if (std::abs(cone - detail::two_pi) > 1e-2 * detail::two_pi)
        fail(errc::bad_parameter, "disk cone angle is not smooth: w'(t_min)*period = " +
                                      std::to_string(cone));
    }
    if (topology_ == Topology::closed_rotational) {
      if (std::abs(warp_nodes_.front()) > 1e-6 * (1.0 + warp_max_) ||
          std::abs(warp_nodes_.back()) > 1e-6 * (1.0 + warp_max_))
        fail(errc::bad_parameter, "closed rotational warp must vanish at both poles");
    }
    (void)span;
  }

  Topology topology_;
  double t_min_;
  double t_max_;
  Warp warp_;
  SurfaceOptions opts_;
  std::vector<double> warp_nodes_;
  double warp_max_ = 0.0;
  double volume_ = 0.0;
};

// Scalar samples on a surface grid. Radial functions carry one value per
// t-node; full functions are row-major (i_t * n_theta + j_theta).
class GridFunction {
 public:
  static GridFunction radial(const WarpedSurface& s, const std::function<double(double)>& f) {
    std::vector<double> v(static_cast<std::size_t>(s.n_t()) + 1);
    for (int i = 0; i <= s.n_t(); ++i) v[static_cast<std::size_t>(i)] = f(s.t_at(i));
    return GridFunction(std::move(v), true, s.n_t(), s.n_theta());
  }

  static GridFunction full(const WarpedSurface& s,
                           const std::function<double(double, double)>& f) {
    std::vector<double> v(static_cast<std::size_t>(s.n_t() + 1) * s.n_theta());
    for (int i = 0; i <= s.n_t(); ++i)
      for (int j = 0; j < s.n_theta(); ++j)
        v[static_cast<std::size_t>(i) * s.n_theta() + j] = f(s.t_at(i), s.theta_at(j));
    return GridFunction(std::move(v), false, s.n_t(), s.n_theta());
  }

  static GridFunction constant(const WarpedSurface& s, double c) {
    return GridFunction(std::vector<double>(static_cast<std::size_t>(s.n_t()) + 1, c), true,
                        s.n_t(), s.n_theta());
  }

  static GridFunction from_values(const WarpedSurface& s, std::vector<double> values,
                                  bool radial) {
    const std::size_t want = radial ? static_cast<std::size_t>(s.n_t()) + 1
                                    : static_cast<std::size_t>(s.n_t() + 1) * s.n_theta();
    if (values.size() != want) fail(errc::bad_parameter, "value count does not match the grid");
    return GridFunction(std::move(values), radial, s.n_t(), s.n_theta());
  }

  bool radial() const { return radial_; }
  int n_t() const { return n_t_; }
  int n_theta() const { return n_theta_; }

  double at(int i, int j = 0) const {
    return radial_ ? values_[static_cast<std::size_t>(i)]
                   : values_[static_cast<std::size_t>(i) * n_theta_ + j];
  }

  std::span<const double> values() const { return values_; }

  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

  GridFunction map(const std::function<double(double)>& f) const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(values_[i]);
    return GridFunction(std::move(v), radial_, n_t_, n_theta_);
  }

  bool matches(const WarpedSurface& s) const {
    return n_t_ == s.n_t() && (radial_ || n_theta_ == s.n_theta());
  }

 private:
  GridFunction(std::vector<double> values, bool radial, int n_t, int n_theta)
      : values_(std::move(values)), radial_(radial), n_t_(n_t), n_theta_(n_theta) {
    for (double v : values_)
      if (!std::isfinite(v)) fail(errc::bad_parameter, "grid values must be finite");
  }

  std::vector<double> values_;
  bool radial_;
  int n_t_;
  int n_theta_;
};

inline void require_on_surface(const WarpedSurface& s, const GridFunction& u) {
  if (!u.matches(s)) fail(errc::bad_parameter, "function grid does not match the surface");
}

// K(t) = -w''(t)/w(t); exact for analytic warp kinds.
inline double curvature_at(const WarpedSurface& s, double t) {
  if (!(t > s.t_min() && t < s.t_max()))
    fail(errc::out_of_domain, "t = " + std::to_string(t) + " outside the open interval");
  const double w = s.warp()(t);
  if (std::abs(w) < 1e-12 * (1.0 + s.warp_max()))
    fail(errc::near_zero_warp, "warp below floor at t = " + std::to_string(t));
  if (s.warp().analytic()) return -s.warp().second_deriv(t) / w;
  const double h =
      std::max(1e-7 * (s.t_max() - s.t_min()),
               std::min({s.dt(), (t - s.t_min()) / 2.0, (s.t_max() - t) / 2.0}));
  return -s.warp().second_deriv(t, h) / w;
}

namespace detail {
inline void require_ball_topology(const WarpedSurface& s) {
  if (s.topology() != Topology::disk && s.topology() != Topology::closed_rotational)
    fail(errc::wrong_topology, "centered disks need a disk or closed rotational surface");
}
}  // namespace detail

// Area of the centered disk of radius r: theta_period * int_{t_min}^r w.
inline double disk_area(const WarpedSurface& s, double r) {
  detail::require_ball_topology(s);
  if (!(r > s.t_min() && r <= s.t_max() * (1.0 + 1e-12)))
    fail(errc::out_of_domain, "radius outside (t_min, t_max]");
  r = std::min(r, s.t_max());
  const double frac = (r - s.t_min()) / (s.t_max() - s.t_min());
  const int n = std::max(32, 2 * static_cast<int>(std::ceil(s.n_t() * frac / 2.0)));
  const auto& w = s.warp();
  return s.theta_period() *
         detail::simpson([&w](double t) { return w(t); }, s.t_min(), r, n);
}

// Perimeter of the centered disk of radius r: theta_period * w(r).
inline double disk_perimeter(const WarpedSurface& s, double r) {
  detail::require_ball_topology(s);
  if (!(r > s.t_min() && r <= s.t_max() * (1.0 + 1e-12)))
    fail(errc::out_of_domain, "radius outside (t_min, t_max]");
  return s.theta_period() * s.warp()(std::min(r, s.t_max()));
}

// int_Sigma F(u) dsigma with Simpson weights in t, uniform weights in theta.
inline double integrate(const WarpedSurface& s, const GridFunction& u,
                        const std::function<double(double)>& F) {
  require_on_surface(s, u);
  const int n = s.n_t();
  const auto sw = detail::simpson_weights(n, s.dt());
  if (u.radial()) {
    std::vector<double> terms(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      const double fi = F(u.at(i));
      if (!std::isfinite(fi))
        fail(errc::non_finite_integrand,
             "integrand not finite at t = " + std::to_string(s.t_at(i)));
      terms[static_cast<std::size_t>(i)] = sw[static_cast<std::size_t>(i)] * s.warp_at(i) * fi;
    }
    return detail::pairwise_sum(terms) * s.theta_period();
  }
  const int m = s.n_theta();
  std::vector<double> rows(static_cast<std::size_t>(n) + 1);
  std::vector<double> cols(static_cast<std::size_t>(m));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double fij = F(u.at(i, j));
      if (!std::isfinite(fij))
        fail(errc::non_finite_integrand, "integrand not finite at t = " +
                                             std::to_string(s.t_at(i)) + ", theta = " +
                                             std::to_string(s.theta_at(j)));
      cols[static_cast<std::size_t>(j)] = fij;
    }
    rows[static_cast<std::size_t>(i)] =
        sw[static_cast<std::size_t>(i)] * s.warp_at(i) * detail::pairwise_sum(cols);
  }
  return detail::pairwise_sum(rows) * s.dtheta();
}

// int |grad u|^2 dsigma = int (d_t u)^2 + w^{-2}(d_theta u)^2 dsigma.
// Central differences inside, second-order one-sided at the t ends.
inline double dirichlet_energy(const WarpedSurface& s, const GridFunction& u) {
  require_on_surface(s, u);
  const int n = s.n_t();
  if (n + 1 < 3) fail(errc::degenerate_grid, "need at least 3 t-nodes");
  const double h = s.dt();
  const auto sw = detail::simpson_weights(n, h);

  auto dt_at = [&](auto&& val, int i, int j) {
    if (i == 0) return (-3.0 * val(0, j) + 4.0 * val(1, j) - val(2, j)) / (2.0 * h);
    if (i == n) return (3.0 * val(n, j) - 4.0 * val(n - 1, j) + val(n - 2, j)) / (2.0 * h);
    return (val(i + 1, j) - val(i - 1, j)) / (2.0 * h);
  };
  auto val = [&](int i, int j) { return u.at(i, j); };

  if (u.radial()) {
    std::vector<double> terms(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      const double du = dt_at(val, i, 0);
      terms[static_cast<std::size_t>(i)] = sw[static_cast<std::size_t>(i)] * s.warp_at(i) * du * du;
    }
    return detail::pairwise_sum(terms) * s.theta_period();
  }

  const int m = s.n_theta();
  const double dth = s.dtheta();
  const double pole_floor = 1e-12 * (1.0 + s.warp_max());
  std::vector<double> rows(static_cast<std::size_t>(n) + 1);
  std::vector<double> cols(static_cast<std::size_t>(m));
  for (int i = 0; i <= n; ++i) {
    const double w = s.warp_at(i);
    for (int j = 0; j < m; ++j) {
      const double du = dt_at(val, i, j);
      double g2 = du * du;
      if (w > pole_floor) {
        const int jp = (j + 1) % m, jm = (j + m - 1) % m;
        const double dv = (u.at(i, jp) - u.at(i, jm)) / (2.0 * dth);
        g2 += dv * dv / (w * w);
      }
      cols[static_cast<std::size_t>(j)] = g2;
    }
    rows[static_cast<std::size_t>(i)] =
        sw[static_cast<std::size_t>(i)] * w * detail::pairwise_sum(cols);
  }
  return detail::pairwise_sum(rows) * dth;
}

// --- Stock surfaces -------------------------------------------------------

inline WarpedSurface make_euclidean_disk(double radius, SurfaceOptions opts = {}) {
  return WarpedSurface(Topology::disk, 0.0, radius, Warp::linear(1.0), opts);
}

inline WarpedSurface make_sphere(SurfaceOptions opts = {}) {
  return WarpedSurface(Topology::closed_rotational, 0.0, detail::pi, Warp::sin(), opts);
}

// Flat cylinder [0, length] x S^1 with the given circumference.
inline WarpedSurface make_flat_cylinder(double length, double circumference,
                                        SurfaceOptions opts = {}) {
  opts.theta_period = circumference;
  return WarpedSurface(Topology::cylinder, 0.0, length, Warp::constant(1.0), opts);
}

// Hyperbolic plane truncated at geodesic radius t_cut (an infinite-volume
// surface; the truncation tail is the whole complement).
inline WarpedSurface make_hyperbolic_plane(double t_cut, SurfaceOptions opts = {}) {
  opts.truncated = true;
  opts.infinite_volume = true;
  opts.tail_bound = std::numeric_limits<double>::infinity();
  return WarpedSurface(Topology::disk, 0.0, t_cut, Warp::sinh(), opts);
}

}  // namespace mtlab
