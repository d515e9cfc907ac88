#pragma once

// Moser-Trudinger functional, L^p norms, median/average, and the
// Markov/Hardy-style inequality reports. Where the eigenvalue convention is
// ambiguous, reports carry both readings (lambda1 and 1/lambda1) side by
// side; the proof-faithful one is marked by the holds_* flags.

#include <cmath>
#include <string>
#include <utility>

#include "mtlab/geom.hpp"
#include "mtlab/rearrange.hpp"
#include "mtlab/spectral.hpp"

namespace mtlab {

struct MTReport {
  double alpha = 0.0;
  double value = 0.0;   // int (e^{alpha u^2} - 1) dsigma
  double energy = 0.0;  // int |grad u|^2 dsigma
  bool constraint_ok = false;  // energy <= 1
};

// Overflow-safe evaluation: expm1 of alpha*u^2, hard error past exp(700)
// with the offending node and the partial integral in the message.
inline MTReport mt_functional(const WarpedSurface& s, const GridFunction& u, double alpha) {
  if (!(alpha > 0.0)) fail(errc::non_positive, "alpha must be positive");
  require_on_surface(s, u);

  // Locate overflow before integrating so the partial sum is well-defined.
  const int n = s.n_t();
  const int m = u.radial() ? 1 : s.n_theta();
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double e = alpha * u.at(i, j) * u.at(i, j);
      if (e > 700.0) {
        double partial = 0.0;
        try {
          partial = integrate(s, u, [alpha](double x) {
            const double ex = alpha * x * x;
            return ex > 700.0 ? 0.0 : std::expm1(ex);
          });
        } catch (const error&) {
        }
        fail(errc::overflow, "alpha*u^2 = " + std::to_string(e) + " at node (t = " +
                                 std::to_string(s.t_at(i)) + ", theta = " +
                                 std::to_string(u.radial() ? 0.0 : s.theta_at(j)) +
                                 "); partial integral over the safe region = " +
                                 std::to_string(partial));
      }
    }
  }

  MTReport rep;
  rep.alpha = alpha;
  rep.value = integrate(s, u, [alpha](double x) { return std::expm1(alpha * x * x); });
  rep.energy = dirichlet_energy(s, u);
  rep.constraint_ok = rep.energy <= 1.0 + 1e-9;
  return rep;
}

inline double lp_norm(const WarpedSurface& s, const GridFunction& u, double p) {
  if (!(p >= 1.0)) fail(errc::bad_parameter, "p must be >= 1");
  const double ip = integrate(s, u, [p](double x) { return std::pow(std::abs(x), p); });
  return std::pow(ip, 1.0 / p);
}

// (median, average); the median interpolates A(t) = Vol/2 linearly in the
// level variable.
inline std::pair<double, double> median_average(const WarpedSurface& s, const GridFunction& u,
                                                int n_levels = 1024) {
  if (s.infinite_volume()) fail(errc::infinite_volume, "median needs finite volume");
  DistributionSummary d = distribution(s, u, n_levels);
  return {d.median, d.average};
}

struct MarkovReport {
  double lhs = 0.0;            // |median - average|
  double rhs_paper = 0.0;      // sqrt(2 lambda1 / Vol) * |grad u|_2
  double rhs_poincare = 0.0;   // sqrt(2 / (lambda1 Vol)) * |grad u|_2
  bool holds_paper = false;
  bool holds_poincare = false;
  double median = 0.0;
  double average = 0.0;
  double grad_norm = 0.0;
};

// |m - <u>| against both readings of the spectral constant. The Poincare
// reading (Chebyshev with |u-<u>|_2^2 <= |grad u|_2^2 / lambda1) is the one
// the proof supports and must hold; the literal reading is informational.
inline MarkovReport markov_report(const WarpedSurface& s, const GridFunction& u,
                                  const SpectralEstimate& est, int n_levels = 1024) {
  if (s.infinite_volume()) fail(errc::infinite_volume, "Markov report needs finite volume");
  MarkovReport rep;
  if (u.max_value() - u.min_value() < 1e-14 * (1.0 + std::abs(u.max_value()))) {
    rep.median = rep.average = u.max_value();
    rep.holds_paper = rep.holds_poincare = true;  // 0 <= 0
    return rep;
  }
  DistributionSummary d = distribution(s, u, n_levels);
  rep.median = d.median;
  rep.average = d.average;
  rep.lhs = std::abs(d.median - d.average);
  rep.grad_norm = std::sqrt(dirichlet_energy(s, u));
  const double vol = s.volume();
  rep.rhs_paper = std::sqrt(2.0 * est.lambda1 / vol) * rep.grad_norm;
  rep.rhs_poincare = std::sqrt(2.0 * est.poincare_const / vol) * rep.grad_norm;
  rep.holds_paper = rep.lhs <= rep.rhs_paper * (1.0 + 1e-9);
  rep.holds_poincare = rep.lhs <= rep.rhs_poincare * (1.0 + 1e-9);
  return rep;
}

struct HardyReport {
  double energy = 0.0;
  double bound_paper = 0.0;     // 4 lambda1 m^2 A   (lemma's final form)
  double bound_a2 = 0.0;        // 4 lambda1 m^2 A^2 (proof's intermediate form)
  double bound_poincare = 0.0;  // 4 m^2 A^2 / poincare_const (literal reading)
  bool holds_paper = false;
  bool holds_a2 = false;
  bool holds_poincare = false;
  double disk_area = 0.0;
  double m = 0.0;
  double lambda1 = 0.0;
};

// Energy lower bounds for a radial nondecreasing v with v(boundary) = m > 0
// and int v <= -m A. Pass a Dirichlet-boundary estimate to assert the A^1
// form (v - m vanishes on the boundary, so |grad v|^2 >= lambda_D |v-m|^2
// >= lambda_D * 4 A m^2); the A^2 forms are reported for inspection only.
inline HardyReport hardy_report(const WarpedSurface& disk_surface, const GridFunction& v,
                                double m, const SpectralEstimate& est) {
  if (!(m > 0.0)) fail(errc::non_positive, "m must be positive");
  require_on_surface(disk_surface, v);
  if (!v.radial()) fail(errc::bad_parameter, "v must be radial");

  const int n = disk_surface.n_t();
  const double span = std::abs(v.max_value()) + std::abs(v.min_value()) + m;
  for (int i = 0; i < n; ++i)
    if (v.at(i + 1) < v.at(i) - 1e-9 * span)
      fail(errc::not_monotone, "v must be nondecreasing in the radius");
  if (std::abs(v.at(n) - m) > 1e-8 * (1.0 + m))
    fail(errc::precondition_violated, "v must equal m on the boundary");
  const double integral = integrate(disk_surface, v, [](double x) { return x; });
  const double area = disk_surface.volume();
  if (integral > -m * area * (1.0 - 1e-8) + 1e-8)
    fail(errc::precondition_violated, "int v = " + std::to_string(integral) +
                                          " must stay below -m*A = " +
                                          std::to_string(-m * area));

  HardyReport rep;
  rep.energy = dirichlet_energy(disk_surface, v);
  rep.disk_area = area;
  rep.m = m;
  rep.lambda1 = est.lambda1;
  rep.bound_paper = 4.0 * est.lambda1 * m * m * area;
  rep.bound_a2 = 4.0 * est.lambda1 * m * m * area * area;
  rep.bound_poincare = 4.0 * m * m * area * area / est.poincare_const;
  rep.holds_paper = rep.energy >= rep.bound_paper * (1.0 - 1e-9);
  rep.holds_a2 = rep.energy >= rep.bound_a2 * (1.0 - 1e-9);
  rep.holds_poincare = rep.energy >= rep.bound_poincare * (1.0 - 1e-9);
  return rep;
}

struct QuadraticShiftBound {
  double min_value = 0.0;  // -1/(4 Lambda A)
  double argmin = 0.0;     // m / c = 1/(4 Lambda m A)
  double c = 0.0;          // 4 Lambda m^2 A, must lie in (0, 1)
  double search_min = 0.0; // golden-section confirmation
  double search_argmin = 0.0;
};

// min over u of (u-m)^2/(1-c) - u^2 with c = 4 Lambda m^2 A in (0,1).
// Closed form and an independent 1D search, both reported.
inline QuadraticShiftBound quadratic_shift_bound(double m, double Lambda, double A) {
  const double c = 4.0 * Lambda * m * m * A;
  if (!(c > 0.0) || !(c < 1.0))
    fail(errc::constraint_violated, "need c = 4*Lambda*m^2*A in (0,1), got " + std::to_string(c));
  QuadraticShiftBound out;
  out.c = c;
  out.min_value = -1.0 / (4.0 * Lambda * A);
  out.argmin = m / c;

  auto phi = [m, c](double x) { return (x - m) * (x - m) / (1.0 - c) - x * x; };
  // coarse brute-force localization, then golden-section refinement
  const double B = 10.0 * (1.0 + std::abs(m) / c);
  const int N = 4000;
  const double step = 2.0 * B / N;
  double best_x = -B, best_v = phi(-B);
  for (int i = 1; i <= N; ++i) {
    const double x = -B + i * step;
    const double vx = phi(x);
    if (vx < best_v) {
      best_v = vx;
      best_x = x;
    }
  }
  out.search_argmin = detail::golden_section(phi, best_x - 2.0 * step, best_x + 2.0 * step, 1e-13);
  out.search_min = phi(out.search_argmin);
  return out;
}

}  // namespace mtlab
