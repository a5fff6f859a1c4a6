#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "vortexlab/pinning.hpp"

using namespace vortexlab;
using Catch::Approx;

namespace {

constexpr double kPi = 3.14159265358979323846;

double fit_order(const std::vector<double>& hs, const std::vector<double>& es) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(hs.size());
  for (int k = 0; k < n; ++k) {
    const double x = std::log(hs[k]), y = std::log(es[k]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double max_err(const ScalarField& got, const ScalarField& want) {
  double m = 0.0;
  for (std::size_t k = 0; k < got.v.size(); ++k)
    m = std::max(m, std::abs(got.v[k] - want.v[k]));
  return m;
}

BoundaryData smooth_boundary_data(const Grid& g) {
  return BoundaryData::make(
      g, [](double x, double y) { return 0.3 + 0.15 * std::sin(kPi * x) + 0.1 * y; },
      [](double, double y) { return 0.3 + 0.2 * std::sin(kPi * y); },
      [](double x, double) { return -0.1 + 0.15 * std::cos(kPi * x); });
}

ScalarField smooth_b(const Grid& g) {
  PinningLandscape p = PinningLandscape::gaussian(
      GaussianWell{{0.5, 0.5}, 0.4, 0.22});
  return p.realize(g);
}

}  // namespace

TEST_CASE("solve_phi0 returns zero for zero flux data") {
  Grid g(33, 33, 1.0, 1.0);
  auto b = smooth_b(g);

  SECTION("J = I = 0") {
    auto phi0 = solve_phi0(b, BoundaryData::zero(g), 1.0, 1.0);
    REQUIRE(max_abs(phi0) < 1e-12);
  }

  SECTION("b = 1 with J.nu = I.nu on all edges") {
    ScalarField one(g, 1.0);
    auto jx = [](double, double) { return 0.7; };
    auto jy = [](double, double) { return -0.4; };
    BoundaryData::Fn Jx = jx, Jy = jy, Ix = jx, Iy = jy;
    auto bd = BoundaryData::make(g, [](double, double) { return 0.0; }, Jx, Jy,
                                 &Ix, &Iy);
    auto phi0 = solve_phi0(one, bd, 1.0, 1.0);
    REQUIRE(max_abs(phi0) < 1e-12);
  }
}

TEST_CASE("Neumann Helmholtz solver converges at second order") {
  // manufactured phi* = cos(pi x) cosh(y) with variable zeroth-order weight
  const double sigma = 1.3, alpha = 0.8;
  auto phi_exact = [](double x, double y) {
    return std::cos(kPi * x) * std::cosh(y);
  };
  auto err_on = [&](int n) {
    Grid g(n, n, 1.0, 1.0);
    ScalarField c(g, sigma);
    auto bw = ScalarField::sample(
        g, [](double x, double y) { return 1.0 + 0.25 * x * y; });
    ScalarField q(g);
    for (std::size_t k = 0; k < q.v.size(); ++k) q.v[k] = alpha * bw.v[k];
    auto s = ScalarField::sample(g, [&](double x, double y) {
      const double lap = (1.0 - kPi * kPi) * phi_exact(x, y);
      return -sigma * lap + alpha * (1.0 + 0.25 * x * y) * phi_exact(x, y);
    });
    EdgeValues flux = EdgeValues::zero(g);
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i);
      flux.bottom[i] = -sigma * std::cos(kPi * x) * std::sinh(0.0);
      flux.top[i] = sigma * std::cos(kPi * x) * std::sinh(1.0);
    }
    for (int j = 0; j < g.ny; ++j) {
      const double y = g.y(j);
      flux.left[j] = sigma * kPi * std::sin(0.0) * std::cosh(y);
      flux.right[j] = -sigma * kPi * std::sin(kPi) * std::cosh(y);
    }
    auto u = solve_neumann(c, q, s, flux, false, "manufactured");
    return max_err(u, ScalarField::sample(g, phi_exact));
  };
  std::vector<double> hs, es;
  for (int n : {33, 65, 129}) {
    hs.push_back(1.0 / (n - 1));
    es.push_back(err_on(n));
  }
  const double order = fit_order(hs, es);
  REQUIRE(order > 1.8);
  REQUIRE(order < 2.2);
}

TEST_CASE("solve_h0 trivial and manufactured cases") {
  SECTION("H = 0 and phi0 = 0 give h0 = 0") {
    Grid g(33, 33, 1.0, 1.0);
    auto b = smooth_b(g);
    ScalarField phi0(g, 0.0);
    auto h0 = solve_h0(b, phi0, BoundaryData::zero(g), 1.0);
    REQUIRE(max_abs(h0) < 1e-12);
  }

  SECTION("constants solve -div(grad u / b) + u = c with trace c") {
    Grid g(33, 33, 1.0, 1.0);
    auto invb = ScalarField::sample(
        g, [](double x, double) { return std::exp(-x); });
    ScalarField q(g, 1.0);
    const double cval = 2.4;
    ScalarField s(g, cval);
    ScalarField trace_f(g, cval);
    auto u = solve_dirichlet(invb, q, s, EdgeValues::trace_of(trace_f), "const");
    for (double v : u.v) REQUIRE(v == Approx(cval).margin(1e-9));
  }

  SECTION("manufactured h* = 1 + x y with b = exp(x) converges at order 2") {
    // -div(grad h / b) + h = y e^{-x} + 1 + x y
    auto err_on = [&](int n) {
      Grid g(n, n, 1.0, 1.0);
      auto invb = ScalarField::sample(
          g, [](double x, double) { return std::exp(-x); });
      ScalarField q(g, 1.0);
      auto s = ScalarField::sample(g, [](double x, double y) {
        return y * std::exp(-x) + 1.0 + x * y;
      });
      auto exact = ScalarField::sample(
          g, [](double x, double y) { return 1.0 + x * y; });
      auto u = solve_dirichlet(invb, q, s, EdgeValues::trace_of(exact), "mms");
      return max_err(u, exact);
    };
    std::vector<double> hs, es;
    for (int n : {33, 65, 129}) {
      hs.push_back(1.0 / (n - 1));
      es.push_back(err_on(n));
    }
    const double order = fit_order(hs, es);
    REQUIRE(order > 1.8);
    REQUIRE(order < 2.2);
  }
}

TEST_CASE("solve_xi0_X0 matches the analytic Poisson solution") {
  SECTION("zero source") {
    Grid g(33, 33, 1.0, 1.0);
    auto [xi0, X0] = solve_xi0_X0(ScalarField(g, 0.0));
    REQUIRE(max_abs(xi0) < 1e-13);
    REQUIRE(max_abs(X0) < 1e-12);
  }

  SECTION("h0 = -2 pi^2 sin sin gives xi0 = sin sin") {
    Grid g(65, 65, 1.0, 1.0);
    auto h0 = ScalarField::sample(g, [](double x, double y) {
      return -2.0 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y);
    });
    auto [xi0, X0] = solve_xi0_X0(h0);
    auto xi_exact = ScalarField::sample(g, [](double x, double y) {
      return std::sin(kPi * x) * std::sin(kPi * y);
    });
    REQUIRE(max_err(xi0, xi_exact) < 5e-4);
    auto X_exact = VectorField::sample(
        g,
        [](double x, double y) { return -kPi * std::sin(kPi * x) * std::cos(kPi * y); },
        [](double x, double y) { return kPi * std::cos(kPi * x) * std::sin(kPi * y); });
    double xerr = 0.0;
    for (std::size_t k = 0; k < X0.x.size(); ++k)
      xerr = std::max(xerr, std::hypot(X0.x[k] - X_exact.x[k],
                                       X0.y[k] - X_exact.y[k]));
    REQUIRE(xerr < 5e-3);

    // X0 . nu vanishes identically on the boundary (tangential stencil of a
    // constant trace)
    for (int i = 0; i < g.nx; ++i) {
      REQUIRE(std::abs(X0.y[g.idx(i, 0)]) < 1e-10);
      REQUIRE(std::abs(X0.y[g.idx(i, g.ny - 1)]) < 1e-10);
    }
    for (int j = 0; j < g.ny; ++j) {
      REQUIRE(std::abs(X0.x[g.idx(0, j)]) < 1e-10);
      REQUIRE(std::abs(X0.x[g.idx(g.nx - 1, j)]) < 1e-10);
    }
  }

  SECTION("curl X0 reproduces h0 at second order under halving") {
    // away from the corners, where Lap(xi0) = h0 is incompatible with the
    // zero trace unless h0 vanishes there
    auto err_on = [](int n) {
      Grid g(n, n, 1.0, 1.0);
      auto h0 = ScalarField::sample(g, [](double x, double y) {
        const double rx = x - 0.5, ry = y - 0.5;
        return std::exp(-4.0 * (rx * rx + ry * ry));
      });
      auto [xi0, X0] = solve_xi0_X0(h0);
      (void)xi0;
      auto c = curl(X0);
      double m = 0.0;
      const double margin = corner_margin(g);
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
          if (g.boundary_distance(g.x(i), g.y(j)) >= margin)
            m = std::max(m, std::abs(c(i, j) - h0(i, j)));
      return m;
    };
    const double ratio = err_on(49) / err_on(97);
    REQUIRE(ratio > 3.0);
    REQUIRE(ratio < 5.2);
  }
}

TEST_CASE("solve_psi0 basics") {
  SECTION("all-zero data give psi0 = 0") {
    Grid g(33, 33, 1.0, 1.0);
    auto b = smooth_b(g);
    ScalarField zero(g, 0.0);
    auto psi0 = solve_psi0(b, zero, zero, BoundaryData::zero(g), 1.0);
    REQUIRE(max_abs(psi0) < 1e-12);
  }

  SECTION("manufactured pure-Neumann Poisson converges at order 2") {
    auto err_on = [](int n) {
      Grid g(n, n, 1.0, 1.0);
      ScalarField c(g, 1.0), q(g, 0.0);
      auto s = ScalarField::sample(g, [](double x, double) {
        return kPi * kPi * std::cos(kPi * x);  // -Lap(cos(pi x))
      });
      auto u = solve_neumann(c, q, s, EdgeValues::zero(g), true, "poisson");
      auto exact = ScalarField::sample(
          g, [](double x, double) { return std::cos(kPi * x); });
      return max_err(u, exact);
    };
    std::vector<double> hs, es;
    for (int n : {33, 65, 129}) {
      hs.push_back(1.0 / (n - 1));
      es.push_back(err_on(n));
    }
    const double order = fit_order(hs, es);
    REQUIRE(order > 1.8);
    REQUIRE(order < 2.2);
  }

  SECTION("returned representative integrates to zero") {
    Grid g(49, 41, 1.0, 1.2);
    auto b = smooth_b(g);
    auto bd = smooth_boundary_data(g);
    auto aux = solve_auxiliary_fields(b, bd, 1.0, 1.3);
    REQUIRE(std::abs(integrate(aux.psi0)) < 1e-12);
  }
}

TEST_CASE("compatibility check") {
  Grid g(65, 65, 1.0, 1.0);
  auto b = smooth_b(g);
  auto bd = smooth_boundary_data(g);

  SECTION("consistent data sit far below the tolerance") {
    auto rep = compatibility_defect(b, bd);
    REQUIRE(rep.relative() < 1e-6);
  }

  SECTION("tampering with J after the phi0 stage raises") {
    const EdgeValues phi_flux = bd.phi0_flux(b);
    auto phi0 = solve_phi0(b, bd, 1.0, 1.0);
    auto h0 = solve_h0(b, phi0, bd, 1.0);

    BoundaryData tampered = bd;
    for (int j = 0; j < g.ny; ++j)
      tampered.Jx(g.nx - 1, j) += 0.05;  // injects net outflux on one edge
    REQUIRE_THROWS_AS(
        solve_psi0(b, phi0, h0, tampered, 1.0, {}, &phi_flux),
        CompatibilityViolation);
  }
}

TEST_CASE("structural identity residual refines at order >= 1.8") {
  auto resid_on = [](int n) {
    Grid g(n, n, 1.0, 1.0);
    auto b = smooth_b(g);
    auto bd = smooth_boundary_data(g);
    auto aux = solve_auxiliary_fields(b, bd, 1.0, 1.3);
    return aux.identity_residual;
  };
  const double r1 = resid_on(97), r2 = resid_on(193);
  REQUIRE(r2 < r1);
  const double order = std::log2(r1 / r2);
  REQUIRE(order > 1.8);
}

TEST_CASE("pipeline is linear in the boundary data") {
  Grid g(49, 49, 1.0, 1.0);
  auto b = smooth_b(g);
  auto bd = smooth_boundary_data(g);

  BoundaryData doubled = bd;
  for (auto& v : doubled.H.v) v *= 2.0;
  for (auto& v : doubled.Jx.v) v *= 2.0;
  for (auto& v : doubled.Jy.v) v *= 2.0;
  for (auto* e : {&doubled.I_nu.bottom, &doubled.I_nu.top, &doubled.I_nu.left,
                  &doubled.I_nu.right})
    for (auto& v : *e) v *= 2.0;

  auto a1 = solve_auxiliary_fields(b, bd, 1.0, 1.3);
  auto a2 = solve_auxiliary_fields(b, doubled, 1.0, 1.3);

  auto check = [](const ScalarField& one, const ScalarField& two, double tol) {
    double m = 0.0, scale = 1e-12;
    for (std::size_t k = 0; k < one.v.size(); ++k) {
      m = std::max(m, std::abs(two.v[k] - 2.0 * one.v[k]));
      scale = std::max(scale, std::abs(one.v[k]));
    }
    REQUIRE(m / scale < tol);
  };
  check(a1.phi0, a2.phi0, 1e-7);
  check(a1.h0, a2.h0, 1e-7);
  check(a1.psi0, a2.psi0, 1e-7);
  double m = 0.0, scale = 1e-12;
  for (std::size_t k = 0; k < a1.Z.x.size(); ++k) {
    m = std::max(m, std::hypot(a2.Z.x[k] - 2.0 * a1.Z.x[k],
                               a2.Z.y[k] - 2.0 * a1.Z.y[k]));
    scale = std::max(scale, std::hypot(a1.Z.x[k], a1.Z.y[k]));
  }
  REQUIRE(m / scale < 1e-6);
}

TEST_CASE("solves are bitwise deterministic") {
  Grid g(41, 37, 1.0, 0.9);
  auto b = smooth_b(g);
  auto bd = smooth_boundary_data(g);
  auto a1 = solve_auxiliary_fields(b, bd, 1.0, 1.3);
  auto a2 = solve_auxiliary_fields(b, bd, 1.0, 1.3);
  REQUIRE(std::memcmp(a1.psi0.v.data(), a2.psi0.v.data(),
                      a1.psi0.v.size() * sizeof(double)) == 0);
  REQUIRE(std::memcmp(a1.phi0.v.data(), a2.phi0.v.data(),
                      a1.phi0.v.size() * sizeof(double)) == 0);
}

TEST_CASE("assemble_Z_and_f term structure") {
  Grid g(33, 33, 1.0, 1.0);

  SECTION("unpinned unforced case vanishes") {
    ScalarField b(g, 1.0);
    auto bd = BoundaryData::zero(g);
    auto aux = solve_auxiliary_fields(b, bd, 1.0, 1.0);
    auto [Z, f] = assemble_Z_and_f(aux, b, aux.phi0, 0.5, 0.05, 1.0);
    REQUIRE(max_abs(Z) < 1e-11);
    REQUIRE(max_abs(f) < 1e-9);
  }

  SECTION("beta = 0 and Z = 0 leave the epsilon-free pinning term") {
    auto b = smooth_b(g);
    auto bd = BoundaryData::zero(g);
    auto aux = solve_auxiliary_fields(b, bd, 1.0, 1.0);
    // zero data => Z = 0, phi0 = 0; f reduces to Lap(sqrt b)/sqrt b
    auto [Z1, f1] = assemble_Z_and_f(aux, b, aux.phi0, 0.0, 0.04, 1.0);
    auto [Z2, f2] = assemble_Z_and_f(aux, b, aux.phi0, 0.0, 0.01, 1.0);
    (void)Z1; (void)Z2;
    for (std::size_t k = 0; k < f1.v.size(); ++k)
      REQUIRE(f1.v[k] == Approx(f2.v[k]).margin(1e-10));
    ScalarField sqrtb(g);
    for (std::size_t k = 0; k < sqrtb.v.size(); ++k)
      sqrtb.v[k] = std::sqrt(b.v[k]);
    auto lap = laplacian(sqrtb);
    for (std::size_t k = 0; k < f1.v.size(); ++k)
      REQUIRE(f1.v[k] == Approx(lap.v[k] / sqrtb.v[k]).margin(1e-10));
  }

  SECTION("lambda scales Z linearly and the |Z_eps|^2 term quadratically") {
    auto b = smooth_b(g);
    auto bd = smooth_boundary_data(g);
    auto aux = solve_auxiliary_fields(b, bd, 1.0, 1.3);
    const double eps = 0.05, L = std::abs(std::log(eps));
    auto [Z1, f1] = assemble_Z_and_f(aux, b, aux.phi0, 0.0, eps, 1.0);
    auto [Z2, f2] = assemble_Z_and_f(aux, b, aux.phi0, 0.0, eps, 2.0);
    for (std::size_t k = 0; k < Z1.x.size(); ++k) {
      REQUIRE(Z2.x[k] == Approx(2.0 * Z1.x[k]).margin(1e-13));
      REQUIRE(Z2.y[k] == Approx(2.0 * Z1.y[k]).margin(1e-13));
    }
    // f = Lap(sqrt b)/sqrt b - lambda^2 L^2 |Z|^2 at beta = 0
    for (std::size_t k = 0; k < f1.v.size(); ++k) {
      const double base = f1.v[k] +
          L * L * (Z1.x[k] * Z1.x[k] + Z1.y[k] * Z1.y[k]);
      const double quad = base -
          4.0 * L * L * (Z1.x[k] * Z1.x[k] + Z1.y[k] * Z1.y[k]);
      REQUIRE(f2.v[k] == Approx(quad).margin(1e-9));
    }
  }
}
