#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "vortexlab/grid.hpp"
#include "vortexlab/vec2.hpp"
#include "vortexlab/vortexometry.hpp"

namespace vortexlab {

/// Unweighted local energy density e_eps = |grad u|^2 / 2 + (1-|u|^2)^2/(4 eps^2).
inline ScalarField energy_density(const ComplexField& u, double eps) {
  ComplexField ux = ddx(u), uy = ddy(u);
  ScalarField e(u.grid);
  const double c = 1.0 / (4.0 * eps * eps);
  for (std::size_t k = 0; k < e.v.size(); ++k) {
    const double grad2 = ux.re[k] * ux.re[k] + ux.im[k] * ux.im[k] +
                         uy.re[k] * uy.re[k] + uy.im[k] * uy.im[k];
    const double p = 1.0 - (u.re[k] * u.re[k] + u.im[k] * u.im[k]);
    e.v[k] = 0.5 * grad2 + c * p * p;
  }
  return e;
}

/// Weighted density e~ = b (e_eps + (1-|u|^2)/2 f_eps), b = e^h.
inline ScalarField weighted_density(const ComplexField& u,
                                    const ScalarField& b, double eps,
                                    const ScalarField& f_eps) {
  ScalarField e = energy_density(u, eps);
  ScalarField out(u.grid);
  for (std::size_t k = 0; k < out.v.size(); ++k) {
    const double p = 1.0 - (u.re[k] * u.re[k] + u.im[k] * u.im[k]);
    out.v[k] = b.v[k] * (e.v[k] + 0.5 * p * f_eps.v[k]);
  }
  return out;
}

/// Boundary correction of the modified energy:
/// loop integral of (|u|^2 - 1)/4 * db/dnu with one-sided normal stencils.
inline double boundary_energy_term(const ComplexField& u,
                                   const ScalarField& b) {
  const Grid& g = u.grid;
  auto gb = gradient(b);
  auto edge_w = [](int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
  double sum = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const double w = edge_w(i, g.nx) * g.hx();
    sum += w * 0.25 * (u.abs2(i, 0) - 1.0) * (-gb.y[g.idx(i, 0)]);
    sum += w * 0.25 * (u.abs2(i, g.ny - 1) - 1.0) * gb.y[g.idx(i, g.ny - 1)];
  }
  for (int j = 0; j < g.ny; ++j) {
    const double w = edge_w(j, g.ny) * g.hy();
    sum += w * 0.25 * (u.abs2(0, j) - 1.0) * (-gb.x[g.idx(0, j)]);
    sum += w * 0.25 * (u.abs2(g.nx - 1, j) - 1.0) * gb.x[g.idx(g.nx - 1, j)];
  }
  return sum;
}

struct EnergyReport {
  double t = 0.0;
  double e_total = 0.0;     // integral of e_eps
  double e_weighted = 0.0;  // integral of e~
  double F = 0.0;           // free energy with pinned potential weight b^2
  double F_tilde = 0.0;     // F + f-term + boundary term
  double normalized = 0.0;  // F_tilde / |log eps|
  double vortex_target = std::numeric_limits<double>::quiet_NaN();
};

/// Quadrature of all energy functionals; when vortex positions are supplied
/// the per-vortex target pi sum b(a_i) is attached for comparison.
inline EnergyReport total_energies(const ComplexField& u, const ScalarField& b,
                                   double eps, const ScalarField& f_eps,
                                   double t = 0.0,
                                   const std::vector<Vec2>* vortices = nullptr) {
  const Grid& g = u.grid;
  EnergyReport r;
  r.t = t;
  ScalarField e = energy_density(u, eps);
  r.e_total = integrate(e);

  ComplexField ux = ddx(u), uy = ddy(u);
  ScalarField gdens(g), fterm(g), wdens(g);
  const double c = 1.0 / (4.0 * eps * eps);
  for (std::size_t k = 0; k < gdens.v.size(); ++k) {
    const double grad2 = ux.re[k] * ux.re[k] + ux.im[k] * ux.im[k] +
                         uy.re[k] * uy.re[k] + uy.im[k] * uy.im[k];
    const double p = 1.0 - (u.re[k] * u.re[k] + u.im[k] * u.im[k]);
    gdens.v[k] = 0.5 * b.v[k] * grad2 + c * b.v[k] * b.v[k] * p * p;
    fterm.v[k] = 0.5 * p * b.v[k] * f_eps.v[k];
    wdens.v[k] = b.v[k] * (e.v[k] + 0.5 * p * f_eps.v[k]);
  }
  r.e_weighted = integrate(wdens);
  r.F = integrate(gdens);
  r.F_tilde = r.F + integrate(fterm) + boundary_energy_term(u, b);
  r.normalized = r.F_tilde / std::abs(std::log(eps));
  if (vortices) {
    double target = 0.0;
    constexpr double kPi = 3.14159265358979323846;
    auto binterp = [&](Vec2 p) {
      // bilinear sample of b
      const double sx = p.x / g.hx(), sy = p.y / g.hy();
      const int i = std::clamp(static_cast<int>(sx), 0, g.nx - 2);
      const int j = std::clamp(static_cast<int>(sy), 0, g.ny - 2);
      const double fx = sx - i, fy = sy - j;
      return b(i, j) * (1 - fx) * (1 - fy) + b(i + 1, j) * fx * (1 - fy) +
             b(i, j + 1) * (1 - fx) * fy + b(i + 1, j + 1) * fx * fy;
    };
    for (const auto& a : *vortices) target += kPi * binterp(a);
    r.vortex_target = target;
  }
  return r;
}

struct SymmetricTensorField {
  Grid grid;
  ScalarField t11, t12, t22;
};

/// Weighted stress-energy tensor
/// T = b ( grad u (x) grad u - (e_eps + (1-|u|^2)/2 f_eps) Id ).
inline SymmetricTensorField stress_tensor(const ComplexField& u,
                                          const ScalarField& b, double eps,
                                          const ScalarField& f_eps) {
  const Grid& g = u.grid;
  ComplexField ux = ddx(u), uy = ddy(u);
  SymmetricTensorField T{g, ScalarField(g), ScalarField(g), ScalarField(g)};
  const double c = 1.0 / (4.0 * eps * eps);
  for (std::size_t k = 0; k < b.v.size(); ++k) {
    const double g11 = ux.re[k] * ux.re[k] + ux.im[k] * ux.im[k];
    const double g22 = uy.re[k] * uy.re[k] + uy.im[k] * uy.im[k];
    const double g12 = ux.re[k] * uy.re[k] + ux.im[k] * uy.im[k];
    const double p = 1.0 - (u.re[k] * u.re[k] + u.im[k] * u.im[k]);
    const double diag = 0.5 * (g11 + g22) + c * p * p + 0.5 * p * f_eps.v[k];
    T.t11.v[k] = b.v[k] * (g11 - diag);
    T.t12.v[k] = b.v[k] * g12;
    T.t22.v[k] = b.v[k] * (g22 - diag);
  }
  return T;
}

/// Row-wise divergence (d1 T11 + d2 T12, d1 T12 + d2 T22).
inline VectorField stress_divergence(const SymmetricTensorField& T) {
  auto d1t11 = ddx(T.t11);
  auto d2t12 = ddy(T.t12);
  auto d1t12 = ddx(T.t12);
  auto d2t22 = ddy(T.t22);
  VectorField out(T.grid);
  for (std::size_t k = 0; k < out.x.size(); ++k) {
    out.x[k] = d1t11.v[k] + d2t12.v[k];
    out.y[k] = d1t12.v[k] + d2t22.v[k];
  }
  return out;
}

/// Discrete residual of the energy-evolution identity over one step:
/// | Delta(int e~)/dt + int alpha b |dt u|^2 - int b V . Z_eps - flux |.
/// dt u is the difference quotient and spatial integrals use the midpoint
/// state, so the residual measures the full scheme error.
inline double energy_evolution_residual(const ComplexField& u_prev,
                                        const ComplexField& u_next, double dt,
                                        const ScalarField& b, double eps,
                                        const ScalarField& f_eps,
                                        const VectorField& Z_eps,
                                        double alpha) {
  const Grid& g = u_prev.grid;
  const double E0 = integrate(weighted_density(u_prev, b, eps, f_eps));
  const double E1 = integrate(weighted_density(u_next, b, eps, f_eps));

  ComplexField mid(g), dtu(g);
  for (std::size_t k = 0; k < mid.re.size(); ++k) {
    mid.re[k] = 0.5 * (u_prev.re[k] + u_next.re[k]);
    mid.im[k] = 0.5 * (u_prev.im[k] + u_next.im[k]);
    dtu.re[k] = (u_next.re[k] - u_prev.re[k]) / dt;
    dtu.im[k] = (u_next.im[k] - u_prev.im[k]) / dt;
  }
  ScalarField dissip(g);
  for (std::size_t k = 0; k < dissip.v.size(); ++k)
    dissip.v[k] = alpha * b.v[k] *
                  (dtu.re[k] * dtu.re[k] + dtu.im[k] * dtu.im[k]);

  VectorField V = velocity(u_prev, u_next, dt);
  ScalarField pump(g);
  for (std::size_t k = 0; k < pump.v.size(); ++k)
    pump.v[k] = b.v[k] * (V.x[k] * Z_eps.x[k] + V.y[k] * Z_eps.y[k]);

  // boundary flux of b (dt u, grad u_mid) . nu
  ComplexField mx = ddx(mid), my = ddy(mid);
  auto edge_w = [](int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
  double flux = 0.0;
  auto ip = [&](std::size_t k, const ComplexField& w) {
    return dtu.re[k] * w.re[k] + dtu.im[k] * w.im[k];
  };
  for (int i = 0; i < g.nx; ++i) {
    const double w = edge_w(i, g.nx) * g.hx();
    std::size_t k0 = g.idx(i, 0), k1 = g.idx(i, g.ny - 1);
    flux += w * (-b.v[k0] * ip(k0, my) + b.v[k1] * ip(k1, my));
  }
  for (int j = 0; j < g.ny; ++j) {
    const double w = edge_w(j, g.ny) * g.hy();
    std::size_t k0 = g.idx(0, j), k1 = g.idx(g.nx - 1, j);
    flux += w * (-b.v[k0] * ip(k0, mx) + b.v[k1] * ip(k1, mx));
  }

  return std::abs((E1 - E0) / dt + integrate(dissip) - integrate(pump) - flux);
}

}  // namespace vortexlab
