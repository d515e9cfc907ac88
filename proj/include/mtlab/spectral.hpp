#pragma once

// Spectral gap of radial surfaces through the 1D Sturm-Liouville reduction
//   -(w u')'/w + m^2 u / w^2 = lambda u
// discretized by symmetric second-order finite differences. Eigenvalues come
// from Sturm-count bisection on the tridiagonal pencil; eigenvectors from
// shifted inverse iteration with the constant mode deflated (Neumann).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mtlab/geom.hpp"

namespace mtlab {

enum class Boundary { neumann, dirichlet };

struct SpectralEstimate {
  double lambda1 = 0.0;        // reported gap (smallest admissible eigenvalue)
  double poincare_const = 0.0; // 1 / lambda1
  int n = 0;
  Boundary boundary = Boundary::neumann;
  int sector = 0;
  double rayleigh_residual = 0.0;
  std::vector<double> eigenvector;  // on the full node grid (constrained nodes zero)
  std::vector<double> nodes;
};

namespace detail {

// Finite-difference forms for one angular sector on [t_min, t_max].
class SturmLiouvilleForm {
 public:
  SturmLiouvilleForm(const WarpedSurface& s, int n, Boundary bc, int sector)
      : n_(n), bc_(bc), sector_(sector) {
    if (n < 64) fail(errc::bad_parameter, "need n >= 64 grid intervals");
    const double t0 = s.t_min(), t1 = s.t_max();
    dt_ = (t1 - t0) / n;
    wn_.resize(static_cast<std::size_t>(n) + 1);
    wh_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i <= n; ++i) wn_[i] = s.warp()(t0 + i * dt_);
    for (int i = 0; i < n; ++i) wh_[i] = s.warp()(t0 + (i + 0.5) * dt_);
    double wmax = 0.0;
    for (double w : wn_) wmax = std::max(wmax, w);

    mass_.resize(static_cast<std::size_t>(n) + 1);
    mass_[0] = 0.5 * dt_ * 0.5 * (wn_[0] + wh_[0]);
    mass_[n] = 0.5 * dt_ * 0.5 * (wn_[n] + wh_[n - 1]);
    for (int i = 1; i < n; ++i)
      mass_[i] = 0.5 * dt_ * (0.5 * (wh_[i - 1] + wn_[i]) + 0.5 * (wn_[i] + wh_[i]));

    // Node selection: true boundaries per topology, poles dropped for m >= 1.
    const double pole_floor = 1e-10 * (1.0 + wmax);
    std::vector<bool> keepmask(static_cast<std::size_t>(n) + 1, true);
    const Topology topo = s.topology();
    if (bc == Boundary::dirichlet) {
      if (topo == Topology::closed_rotational)
        fail(errc::bad_parameter, "closed rotational surfaces have no boundary");
      if (topo == Topology::disk) {
        keepmask[static_cast<std::size_t>(n)] = false;
      } else {
        keepmask[0] = false;
        keepmask[static_cast<std::size_t>(n)] = false;
      }
    }
    if (sector >= 1) {
      for (int i = 0; i <= n; ++i)
        if (wn_[i] <= pole_floor) keepmask[static_cast<std::size_t>(i)] = false;
    }
    for (int i = 0; i <= n; ++i)
      if (keepmask[static_cast<std::size_t>(i)]) keep_.push_back(i);

    // Tridiagonal stiffness on kept nodes (consecutive by construction).
    const std::size_t dof = keep_.size();
    diag_.assign(dof, 0.0);
    off_.assign(dof > 0 ? dof - 1 : 0, 0.0);
    for (std::size_t k = 0; k < dof; ++k) {
      const int i = keep_[k];
      double d = 0.0;
      if (i > 0) d += wh_[i - 1] / dt_;
      if (i < n) d += wh_[i] / dt_;
      if (sector >= 1) d += sector * sector * mass_[i] / (wn_[i] * wn_[i]);
      diag_[k] = d;
      if (k + 1 < dof && keep_[k + 1] == i + 1) off_[k] = -wh_[i] / dt_;
    }
  }

  int n() const { return n_; }
  std::size_t dof() const { return keep_.size(); }
  const std::vector<int>& kept_nodes() const { return keep_; }
  double mass_at(int i) const { return mass_[static_cast<std::size_t>(i)]; }

  // Quadratic forms on full node vectors (size n+1); theta_period cancels.
  double energy(std::span<const double> v) const {
    double e = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double d = (v[i + 1] - v[i]) / dt_;
      e += wh_[i] * d * d * dt_;
    }
    if (sector_ >= 1) {
      for (int i = 0; i <= n_; ++i) {
        if (wn_[i] <= 0.0) continue;
        e += sector_ * sector_ * mass_[i] * v[i] * v[i] / (wn_[i] * wn_[i]);
      }
    }
    return e;
  }

  double mass(std::span<const double> v) const {
    double m = 0.0;
    for (int i = 0; i <= n_; ++i) m += mass_[i] * v[i] * v[i];
    return m;
  }

  // Symmetric standard form via the diagonal mass: a_k, b_k of D^{-1/2}AD^{-1/2}.
  void standard_form(std::vector<double>& a, std::vector<double>& b) const {
    const std::size_t dof = keep_.size();
    a.resize(dof);
    b.resize(dof > 0 ? dof - 1 : 0);
    for (std::size_t k = 0; k < dof; ++k)
      a[k] = diag_[k] / mass_[keep_[k]];
    for (std::size_t k = 0; k + 1 < dof; ++k)
      b[k] = off_[k] / std::sqrt(mass_[keep_[k]] * mass_[keep_[k + 1]]);
  }

 private:
  int n_;
  Boundary bc_;
  int sector_;
  double dt_ = 0.0;
  std::vector<double> wn_, wh_, mass_;
  std::vector<int> keep_;
  std::vector<double> diag_, off_;
};

// Number of eigenvalues of the symmetric tridiagonal (a, b) below sigma.
inline int sturm_count(const std::vector<double>& a, const std::vector<double>& b, double sigma) {
  int count = 0;
  double d = 1.0;
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double offsq = k == 0 ? 0.0 : b[k - 1] * b[k - 1];
    d = a[k] - sigma - offsq / d;
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++count;
  }
  return count;
}

// k-th smallest eigenvalue (0-based) by bisection on the Sturm count.
inline double tridiag_eigenvalue(const std::vector<double>& a, const std::vector<double>& b,
                                 int k) {
  double hi = 0.0, lo = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i + 1 < a.size() ? std::abs(b[i]) : 0.0);
    hi = std::max(hi, a[i] + r);
    lo = std::min(lo, a[i] - r);
  }
  const double scale = std::max({std::abs(lo), std::abs(hi), 1e-30});
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * scale; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(a, b, mid) >= k + 1) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Solve (T - sigma I) x = y for tridiagonal T with partial pivoting.
inline void tridiag_shifted_solve(const std::vector<double>& a, const std::vector<double>& b,
                                  double sigma, std::vector<double>& x) {
  const std::size_t n = a.size();
  std::vector<double> dl(n, 0.0), dd(n, 0.0), du(n, 0.0), du2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    dd[i] = a[i] - sigma;
    if (i + 1 < n) {
      dl[i + 1] = b[i];
      du[i] = b[i];
    }
  }
  std::vector<int> swapped(n, 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(dl[i + 1]) > std::abs(dd[i])) {
      std::swap(dd[i], dl[i + 1]);
      std::swap(du[i], dd[i + 1]);
      du2[i] = du[i + 1];
      du[i + 1] = 0.0;
      std::swap(x[i], x[i + 1]);
      swapped[i] = 1;
    }
    if (dd[i] == 0.0) dd[i] = 1e-300;
    const double m = dl[i + 1] / dd[i];
    dd[i + 1] -= m * du[i];
    if (du2[i] != 0.0) du[i + 1] -= m * du2[i];
    x[i + 1] -= m * x[i];
  }
  if (dd[n - 1] == 0.0) dd[n - 1] = 1e-300;
  for (std::size_t ii = n; ii-- > 0;) {
    double v = x[ii];
    if (ii + 1 < n) v -= du[ii] * x[ii + 1];
    if (ii + 2 < n && du2[ii] != 0.0) v -= du2[ii] * x[ii + 2];
    x[ii] = v / dd[ii];
  }
}

}  // namespace detail

// Smallest admissible eigenvalue of the m-sector problem. Neumann deflates
// the constant mode (m = 0); Dirichlet takes the plain smallest.
inline SpectralEstimate radial_gap(const WarpedSurface& s, int n, Boundary bc, int sector = 0) {
  switch (s.topology()) {
    case Topology::disk:
    case Topology::cylinder:
    case Topology::closed_rotational: break;
    case Topology::cusp:
      if (!s.truncated())
        fail(errc::wrong_topology, "cusp surfaces need a truncation for spectral estimates");
      break;
  }

  detail::SturmLiouvilleForm form(s, n, bc, sector);
  std::vector<double> a, b;
  form.standard_form(a, b);

  const bool deflate = (bc == Boundary::neumann && sector == 0);
  const int k = deflate ? 1 : 0;
  const double lambda = detail::tridiag_eigenvalue(a, b, k);
  if (!(lambda > 0.0))
    fail(errc::no_convergence, "gap came out nonpositive: " + std::to_string(lambda));

  // Inverse iteration at a slightly detuned shift for the eigenvector.
  const std::size_t dof = form.dof();
  std::vector<double> x(dof), q(dof);
  for (std::size_t i = 0; i < dof; ++i)
    x[i] = std::sin(detail::pi * (static_cast<double>(i) + 0.372) / static_cast<double>(dof));
  if (deflate) {
    double qn = 0.0;
    for (std::size_t i = 0; i < dof; ++i) {
      q[i] = std::sqrt(form.mass_at(form.kept_nodes()[i]));
      qn += q[i] * q[i];
    }
    qn = std::sqrt(qn);
    for (double& v : q) v /= qn;
  }
  auto project = [&]() {
    if (!deflate) return;
    double dot = 0.0;
    for (std::size_t i = 0; i < dof; ++i) dot += x[i] * q[i];
    for (std::size_t i = 0; i < dof; ++i) x[i] -= dot * q[i];
  };
  const double sigma = lambda * (1.0 - 1e-7) - 1e-14;
  double rayleigh = lambda;
  double resid = std::numeric_limits<double>::infinity();
  auto apply = [&](const std::vector<double>& v, std::size_t i) {
    double av = a[i] * v[i];
    if (i > 0) av += b[i - 1] * v[i - 1];
    if (i + 1 < dof) av += b[i] * v[i + 1];
    return av;
  };
  for (int it = 0; it < 12 && resid > 1e-11 * (1.0 + lambda); ++it) {
    project();
    detail::tridiag_shifted_solve(a, b, sigma, x);
    project();
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0)) fail(errc::no_convergence, "inverse iteration collapsed");
    for (double& v : x) v /= nrm;
    double xtax = 0.0, rr = 0.0;
    for (std::size_t i = 0; i < dof; ++i) {
      const double av = apply(x, i);
      xtax += x[i] * av;
      const double r = av - lambda * x[i];
      rr += r * r;
    }
    rayleigh = xtax;
    resid = std::sqrt(rr);
  }
  if (resid > 1e-6 * (1.0 + lambda))
    fail(errc::no_convergence, "eigen residual " + std::to_string(resid) + " above cap");

  SpectralEstimate est;
  est.lambda1 = lambda;
  est.poincare_const = 1.0 / lambda;
  est.n = n;
  est.boundary = bc;
  est.sector = sector;
  est.rayleigh_residual = std::max(resid, std::abs(rayleigh - lambda) / lambda);
  est.eigenvector.assign(static_cast<std::size_t>(n) + 1, 0.0);
  est.nodes.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    est.nodes[static_cast<std::size_t>(i)] = s.t_min() + (s.t_max() - s.t_min()) * i / n;
  const auto& kept = form.kept_nodes();
  for (std::size_t i = 0; i < dof; ++i)
    est.eigenvector[static_cast<std::size_t>(kept[i])] =
        x[i] / std::sqrt(form.mass_at(kept[i]));  // back to nodal values
  return est;
}

// Minimum of the sector gaps m = 0..max_sector (the full gap of the warped
// product restricted to low angular frequencies).
inline SpectralEstimate min_sector_gap(const WarpedSurface& s, int n, Boundary bc,
                                       int max_sector = 2) {
  SpectralEstimate best = radial_gap(s, n, bc, 0);
  for (int m = 1; m <= max_sector; ++m) {
    SpectralEstimate cand = radial_gap(s, n, bc, m);
    if (cand.lambda1 < best.lambda1) best = cand;
  }
  return best;
}

// Discrete Rayleigh quotient in the solver's own forms (full node vector).
inline double rayleigh_quotient(const WarpedSurface& s, int n, Boundary bc, int sector,
                                std::span<const double> v) {
  detail::SturmLiouvilleForm form(s, n, bc, sector);
  const double m = form.mass(v);
  if (!(m > 0.0)) fail(errc::bad_parameter, "test function has zero mass");
  return form.energy(v) / m;
}

// M-weighted mean of a node vector (for projecting out constants in tests).
inline double mass_weighted_mean(const WarpedSurface& s, int n, std::span<const double> v) {
  detail::SturmLiouvilleForm form(s, n, Boundary::neumann, 0);
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    num += form.mass_at(i) * v[i];
    den += form.mass_at(i);
  }
  return num / den;
}

struct CrossCheckReport {
  double four_lambda = 0.0;     // 4 * lambda1
  double cheeger_sq = 0.0;      // cheeger_upper^2
  double buser_quantity = 0.0;  // lambda1 / (sqrt(-K_lower) h + h^2)
  bool cheeger_ok = false;      // 4 lambda1 >= cheeger_upper^2
  bool informational = true;    // false only when cheeger_upper is certified exact
};

inline CrossCheckReport cheeger_buser_report(const SpectralEstimate& est, double cheeger_upper,
                                             double curvature_lower,
                                             bool cheeger_certified = false) {
  CrossCheckReport rep;
  rep.four_lambda = 4.0 * est.lambda1;
  rep.cheeger_sq = cheeger_upper * cheeger_upper;
  const double dp = std::sqrt(std::max(0.0, -curvature_lower));
  rep.buser_quantity = est.lambda1 / (dp * cheeger_upper + cheeger_upper * cheeger_upper);
  rep.cheeger_ok = rep.four_lambda >= rep.cheeger_sq;
  rep.informational = !cheeger_certified;
  return rep;
}

}  // namespace mtlab
