#pragma once

// Explicit test-function families: the cusp end with f_b = e^t - e^b, the
// thin collar with g = (cosh t - cosh R0) on (-R0, R0), and the Moser
// sequence on the Euclidean unit disk. Scans over family parameters drive
// the blow-up and sharpness experiments.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "mtlab/functionals.hpp"
#include "mtlab/geom.hpp"

namespace mtlab {

namespace detail {

inline int max_threads() {
  const char* env = std::getenv("MTLAB_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v >= 1 ? v : 1;
}

// Index-parallel loop with deterministic per-index results.
template <typename F>
void parallel_for(int n, F&& body) {
  const int threads = std::min(max_threads(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

struct CuspClosedForms {
  double energy = 0.0;  // (2 pi / 3) e^{3b}
  double l2sq = 0.0;    // (2 pi / 3) e^{3b}
  double l4p4 = 0.0;    // (2 pi / 5) e^{5b}
};

struct CuspMember {
  WarpedSurface surface;
  GridFunction u;  // f_b = e^t - e^b, nonpositive on t <= b
  CuspClosedForms closed;
  double b = 0.0;
};

// Cusp end t <= b of dt^2 + e^{2t} dtheta^2. Truncated 21 units below b so
// the L^2/L^4 tails stay under 1e-9 of the totals.
inline CuspMember cusp_member(double b, int n_t = 32768) {
  const double t_lo = b - 21.0;
  SurfaceOptions opts;
  opts.n_t = n_t;
  opts.truncated = true;
  opts.infinite_volume = false;  // the end itself has finite area 2 pi e^b
  opts.tail_bound = detail::two_pi * std::exp(t_lo);
  WarpedSurface surf(Topology::cusp, t_lo, b, Warp::exp(), opts);
  const double eb = std::exp(b);
  GridFunction u = GridFunction::radial(surf, [eb](double t) { return std::exp(t) - eb; });
  const double e3b = std::exp(3.0 * b);
  const double e5b = std::exp(5.0 * b);
  CuspClosedForms cf{2.0 * detail::pi / 3.0 * e3b, 2.0 * detail::pi / 3.0 * e3b,
                     2.0 * detail::pi / 5.0 * e5b};
  return CuspMember{std::move(surf), std::move(u), cf, b};
}

struct CollarReport {
  double eps = 0.0;
  double r0 = 0.0;
  double energy = 0.0;       // quadrature |grad g|_2^2
  double integral = 0.0;     // quadrature int g
  double l2sq = 0.0;         // quadrature |g|_2^2
  double l4_centered = 0.0;  // quadrature |g - avg|_4^4
  double average = 0.0;
  // antiderivative oracles for the same quantities
  double oracle_energy = 0.0;    // 2 pi eps (2/3) sinh^3 R0
  double oracle_integral = 0.0;  // 2 pi eps (R0 - sinh(2 R0)/2)
  double oracle_l2sq = 0.0;      // 4 pi eps (sinh R0 + sinh^3 R0 / 3 - R0 cosh R0)
  // literal printed expressions, reported side by side for inspection
  double paper_energy = 0.0;    // (2/3) eps cosh R0
  double paper_integral = 0.0;  // 2 eps (-sinh(2 R0)/4 + R0/2)
  double paper_l2sq = 0.0;      // 2 eps (sinh^3 R0 / 3 + sinh R0 - R0 cosh R0)
};

struct CollarMember {
  WarpedSurface surface;
  GridFunction u;
  CollarReport report;
};

// Collar dt^2 + eps^2 cosh^2(t) dtheta^2 on (-R0 - pad, R0 + pad) with
// pad = R0/2; g vanishes on the pad. n_t is rounded to a multiple of 6 so
// the kinks at +-R0 land on grid nodes.
inline CollarMember collar_member(double eps, double r0, int n_t = 12288) {
  if (!(eps > 0.0) || !(r0 > 0.0)) fail(errc::non_positive, "eps and R0 must be positive");
  n_t = ((n_t + 5) / 6) * 6;
  const double half_width = 1.5 * r0;
  SurfaceOptions opts;
  opts.n_t = n_t;
  WarpedSurface surf(Topology::cylinder, -half_width, half_width, Warp::cosh(eps), opts);
  const double cr0 = std::cosh(r0);
  GridFunction u = GridFunction::radial(surf, [r0, cr0](double t) {
    return std::abs(t) < r0 ? std::cosh(t) - cr0 : 0.0;
  });

  CollarReport rep;
  rep.eps = eps;
  rep.r0 = r0;
  rep.energy = dirichlet_energy(surf, u);
  rep.integral = integrate(surf, u, [](double x) { return x; });
  rep.l2sq = integrate(surf, u, [](double x) { return x * x; });
  rep.average = rep.integral / surf.volume();
  const double avg = rep.average;
  rep.l4_centered = integrate(surf, u, [avg](double x) {
    const double d = x - avg;
    return d * d * d * d;
  });
  const double sr0 = std::sinh(r0);
  rep.oracle_energy = detail::two_pi * eps * (2.0 / 3.0) * sr0 * sr0 * sr0;
  rep.oracle_integral = detail::two_pi * eps * (r0 - 0.5 * std::sinh(2.0 * r0));
  rep.oracle_l2sq = 2.0 * detail::two_pi * eps * (sr0 + sr0 * sr0 * sr0 / 3.0 - r0 * cr0);
  rep.paper_energy = (2.0 / 3.0) * eps * cr0;
  rep.paper_integral = 2.0 * eps * (-0.25 * std::sinh(2.0 * r0) + 0.5 * r0);
  rep.paper_l2sq = 2.0 * eps * (sr0 * sr0 * sr0 / 3.0 + sr0 - r0 * cr0);
  return CollarMember{std::move(surf), std::move(u), rep};
}

struct CollarScanRow {
  double eps = 0.0;
  double r0 = 0.0;
  double ratio = 0.0;  // |g - avg|_4^4 / |grad g|_2^4
  double energy = 0.0;
  double l4_centered = 0.0;
  double paper_ratio = 0.0;  // same ratio from the literal printed expressions
};

struct CollarScanTable {
  std::vector<CollarScanRow> rows;
  double slope = 0.0;        // least-squares d log(ratio) / d log(eps)
  double paper_slope = 0.0;  // slope of the literal-expression ratio
  bool ratio_increasing = false;
};

// Blow-up scan with the coupling R0 = eps^{1/10}.
inline CollarScanTable collar_blowup_scan(std::span<const double> eps_list, int n_t = 12288) {
  if (eps_list.size() < 4) fail(errc::insufficient_range, "need at least 4 eps values");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      fail(errc::insufficient_range, "eps values must be strictly decreasing");
  if (!(eps_list.front() / eps_list.back() >= 1e3 * (1.0 - 1e-9)))
    fail(errc::insufficient_range, "eps range must span at least 3 decades");

  CollarScanTable table;
  table.rows.resize(eps_list.size());
  detail::parallel_for(static_cast<int>(eps_list.size()), [&](int i) {
    const double eps = eps_list[static_cast<std::size_t>(i)];
    const double r0 = std::pow(eps, 0.1);
    CollarMember m = collar_member(eps, r0, n_t);
    CollarScanRow row;
    row.eps = eps;
    row.r0 = r0;
    row.energy = m.report.energy;
    row.l4_centered = m.report.l4_centered;
    row.ratio = m.report.l4_centered / (m.report.energy * m.report.energy);
    // literal-expression ratio: centered L4 asymptote over printed energy^2
    const double paper_l4 = 16.0 * eps * std::pow(r0, 9.0) / 315.0;
    row.paper_ratio = paper_l4 / (m.report.paper_energy * m.report.paper_energy);
    table.rows[static_cast<std::size_t>(i)] = row;
  });

  std::vector<double> lx, ly, lp;
  table.ratio_increasing = true;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    lx.push_back(std::log(table.rows[i].eps));
    ly.push_back(std::log(table.rows[i].ratio));
    lp.push_back(std::log(table.rows[i].paper_ratio));
    if (i > 0 && !(table.rows[i].ratio > table.rows[i - 1].ratio))
      table.ratio_increasing = false;
  }
  table.slope = detail::ls_slope(lx, ly);
  table.paper_slope = detail::ls_slope(lx, lp);
  return table;
}

struct MoserMember {
  WarpedSurface surface;  // Euclidean unit disk
  GridFunction u;         // the Moser profile, Dirichlet energy 1
  double k = 0.0;
};

// u = sqrt(log k / 2 pi) inside rho <= 1/k, log(1/rho)/sqrt(2 pi log k)
// outside; continuous, vanishing on the boundary, unit energy.
inline MoserMember moser_member(double k, int n_t = 1 << 20) {
  if (!(k >= std::exp(1.0) * (1.0 - 1e-12)))
    fail(errc::bad_parameter, "the Moser family needs k >= e");
  SurfaceOptions opts;
  opts.n_t = n_t;
  WarpedSurface surf = make_euclidean_disk(1.0, opts);
  const double L = std::log(k);
  const double cap = std::sqrt(L / detail::two_pi);
  const double inv_k = 1.0 / k;
  const double denom = std::sqrt(detail::two_pi * L);
  GridFunction u = GridFunction::radial(surf, [cap, inv_k, denom](double rho) {
    if (rho <= inv_k) return cap;
    return std::log(1.0 / rho) / denom;
  });
  return MoserMember{std::move(surf), std::move(u), k};
}

enum class FamilyKind { cusp, collar, moser };

struct FamilySpec {
  FamilyKind kind = FamilyKind::cusp;
  std::vector<double> params;  // cusp: b values; collar: eps values; moser: k values
  int n_t = 0;                 // 0: per-kind default
};

struct MTScanRow {
  double param = 0.0;
  double alpha = 0.0;
  double value = 0.0;   // MT functional of u / |grad u|_2
  double energy = 0.0;  // of the normalized function (1 up to quadrature)
};

// MT values of the family normalized to unit Dirichlet energy. The Moser
// family is already normalized; cusp/collar members are rescaled.
inline std::vector<MTScanRow> mt_scan(const FamilySpec& spec, std::span<const double> alphas) {
  if (spec.params.empty()) fail(errc::bad_parameter, "family parameter list is empty");
  const int n_members = static_cast<int>(spec.params.size());
  std::vector<std::vector<MTScanRow>> rows(static_cast<std::size_t>(n_members));

  struct Member {
    WarpedSurface surface;
    GridFunction u;
  };
  auto build = [&spec](double p) -> Member {
    switch (spec.kind) {
      case FamilyKind::cusp: {
        CuspMember m = cusp_member(p, spec.n_t > 0 ? spec.n_t : 32768);
        return Member{std::move(m.surface), std::move(m.u)};
      }
      case FamilyKind::collar: {
        CollarMember m = collar_member(p, std::pow(p, 0.1), spec.n_t > 0 ? spec.n_t : 12288);
        return Member{std::move(m.surface), std::move(m.u)};
      }
      case FamilyKind::moser: {
        MoserMember m = moser_member(p, spec.n_t > 0 ? spec.n_t : 1 << 20);
        return Member{std::move(m.surface), std::move(m.u)};
      }
    }
    fail(errc::bad_parameter, "unknown family kind");
  };

  detail::parallel_for(n_members, [&](int idx) {
    const double p = spec.params[static_cast<std::size_t>(idx)];
    Member mem = build(p);
    const WarpedSurface& surf = mem.surface;
    const GridFunction& u = mem.u;
    const double e = dirichlet_energy(surf, u);
    const double scale = 1.0 / std::sqrt(e);
    GridFunction un = u.map([scale](double x) { return scale * x; });
    std::vector<MTScanRow>& out = rows[static_cast<std::size_t>(idx)];
    for (double alpha : alphas) {
      try {
        MTReport rep = mt_functional(surf, un, alpha);
        out.push_back(MTScanRow{p, alpha, rep.value, rep.energy});
      } catch (const error& err) {
        if (err.code() != errc::overflow) throw;
        fail(errc::overflow, "member " + std::to_string(p) + ", alpha " +
                                 std::to_string(alpha) + ": " + err.what());
      }
    }
  });

  std::vector<MTScanRow> flat;
  for (auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

}  // namespace mtlab
