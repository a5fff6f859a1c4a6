#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "vortexlab/errors.hpp"
#include "vortexlab/grid.hpp"
#include "vortexlab/pinning.hpp"
#include "vortexlab/vec2.hpp"

namespace vortexlab {

enum class Flavor { forced_gl, pinned_gl };

struct ModelParams {
  double alpha = 1.0;
  double beta = 0.0;
  double sigma = 1.0;
  double eps = 0.05;
  double lambda = 0.0;
  Flavor flavor = Flavor::forced_gl;

  double log_eps_abs() const { return std::abs(std::log(eps)); }
  std::complex<double> time_multiplier() const {
    return {alpha, beta * log_eps_abs()};
  }

  void validate() const {
    if (!(alpha > 0.0)) throw ConfigError("params.alpha", "must be positive");
    if (!(sigma > 0.0)) throw ConfigError("params.sigma", "must be positive");
    if (!(eps > 0.0 && eps < 0.5))
      throw ConfigError("params.epsilon", "must lie in (0, 1/2)");
    if (log_eps_abs() < 1.0)
      throw ConfigError("params.epsilon", "|log eps| must be at least 1");
    if (!(lambda >= 0.0))
      throw ConfigError("params.lambda", "must be nonnegative");
  }
};

/// Forcing coefficients of the model equation. Z_eps carries the full
/// multiplier lambda |log eps| Z so the drift term is 2 i Z_eps . grad u.
struct ForcingFields {
  ScalarField h;       // log b
  VectorField grad_h;
  VectorField Z_eps;
  ScalarField f_eps;

  static ForcingFields none(const Grid& g) {
    ForcingFields f;
    f.h = ScalarField(g, 0.0);
    f.grad_h = VectorField(g);
    f.Z_eps = VectorField(g);
    f.f_eps = ScalarField(g, 0.0);
    return f;
  }

  static ForcingFields make(const ScalarField& b, const VectorField& Z_lambda,
                            const ScalarField& f_eps, double log_eps_abs) {
    ForcingFields f;
    const Grid& g = b.grid;
    f.h = ScalarField(g);
    for (std::size_t k = 0; k < b.v.size(); ++k) f.h.v[k] = std::log(b.v[k]);
    f.grad_h = gradient(f.h);
    f.Z_eps = VectorField(g);
    for (std::size_t k = 0; k < b.v.size(); ++k) {
      f.Z_eps.x[k] = log_eps_abs * Z_lambda.x[k];
      f.Z_eps.y[k] = log_eps_abs * Z_lambda.y[k];
    }
    f.f_eps = f_eps;
    return f;
  }
};

/// Theorem hypothesis on the forcing potential: ||f||_C1 <= 1/eps, checked on
/// the grid as max(|f| + |grad f|).
inline bool f_eps_bound_holds(const ScalarField& f_eps, double eps) {
  auto gf = gradient(f_eps);
  double m = 0.0;
  for (std::size_t k = 0; k < f_eps.v.size(); ++k)
    m = std::max(m, std::abs(f_eps.v[k]) + std::hypot(gf.x[k], gf.y[k]));
  return m <= 1.0 / eps;
}

struct SimState {
  double t = 0.0;
  ComplexField u;
};

/// Mirror-symmetric 5-point Laplacian: the homogeneous-Neumann operator that
/// the DCT-I diagonalization inverts exactly.
inline ComplexField laplacian_neumann(const ComplexField& u) {
  const Grid& g = u.grid;
  ComplexField out(g);
  const double ax = 1.0 / (g.hx() * g.hx()), ay = 1.0 / (g.hy() * g.hy());
  auto stencil = [&](const std::vector<double>& f, std::vector<double>& o) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto k = g.idx(i, j);
        const double uw = (i > 0) ? f[k - 1] : f[k + 1];
        const double ue = (i < g.nx - 1) ? f[k + 1] : f[k - 1];
        const double us = (j > 0) ? f[k - g.nx] : f[k + g.nx];
        const double un = (j < g.ny - 1) ? f[k + g.nx] : f[k - g.nx];
        o[k] = ax * (uw + ue - 2.0 * f[k]) + ay * (us + un - 2.0 * f[k]);
      }
  };
  stencil(u.re, out.re);
  stencil(u.im, out.im);
  return out;
}

namespace detail {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

/// DCT-I (REDFT00) workspace diagonalizing the mirror Laplacian on the
/// node-centered grid.
class DctWorkspace {
public:
  explicit DctWorkspace(const Grid& g) : grid_(g) {
    const std::size_t n = g.size();
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_real(n);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan_ = fftw_plan_r2r_2d(g.ny, g.nx, in_, out_, FFTW_REDFT00,
                             FFTW_REDFT00, FFTW_ESTIMATE);
  }
  ~DctWorkspace() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  DctWorkspace(const DctWorkspace&) = delete;
  DctWorkspace& operator=(const DctWorkspace&) = delete;

  void forward(const std::vector<double>& src, std::vector<double>& dst) {
    const std::size_t n = grid_.size();
    std::copy(src.begin(), src.end(), in_);
    fftw_execute(plan_);
    dst.assign(out_, out_ + n);
  }

private:
  Grid grid_;
  double* in_;
  double* out_;
  fftw_plan plan_;
};

}  // namespace detail

/// Exact solver for (c/dt - Lap_N) u = r with complex c via DCT-I
/// diagonalization; c is the mixed-flow multiplier alpha + i beta |log eps|.
class HelmholtzSolver {
public:
  explicit HelmholtzSolver(const Grid& g)
      : grid_(g), work_(std::make_unique<detail::DctWorkspace>(g)) {
    eig_x_.resize(g.nx);
    eig_y_.resize(g.ny);
    const double ax = 1.0 / (g.hx() * g.hx()), ay = 1.0 / (g.hy() * g.hy());
    for (int k = 0; k < g.nx; ++k)
      eig_x_[k] = 2.0 * ax * (1.0 - std::cos(kPi_ * k / (g.nx - 1)));
    for (int k = 0; k < g.ny; ++k)
      eig_y_[k] = 2.0 * ay * (1.0 - std::cos(kPi_ * k / (g.ny - 1)));
  }

  ComplexField solve(const ComplexField& rhs, std::complex<double> shift) {
    const Grid& g = grid_;
    std::vector<double> re_hat, im_hat;
    work_->forward(rhs.re, re_hat);
    work_->forward(rhs.im, im_hat);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto k = g.idx(i, j);
        const std::complex<double> denom = shift + eig_x_[i] + eig_y_[j];
        const std::complex<double> v =
            std::complex<double>(re_hat[k], im_hat[k]) / denom;
        re_hat[k] = v.real();
        im_hat[k] = v.imag();
      }
    ComplexField out(g);
    work_->forward(re_hat, out.re);
    work_->forward(im_hat, out.im);
    const double scale = 1.0 / (4.0 * (g.nx - 1) * (g.ny - 1));
    for (auto& v : out.re) v *= scale;
    for (auto& v : out.im) v *= scale;
    return out;
  }

private:
  static constexpr double kPi_ = 3.14159265358979323846;
  Grid grid_;
  std::unique_ptr<detail::DctWorkspace> work_;
  std::vector<double> eig_x_, eig_y_;
};

namespace detail {

enum class RhsMode { forced, pinned_direct, pinned_substituted };

/// Explicit part N(u): everything except the Laplacian.
inline ComplexField explicit_terms(const ComplexField& u,
                                   const ModelParams& p,
                                   const ForcingFields& ff,
                                   const ScalarField& b, RhsMode mode) {
  const Grid& g = u.grid;
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  ComplexField out(g);
  if (mode == RhsMode::pinned_direct) {
    for (std::size_t k = 0; k < out.re.size(); ++k) {
      const double a2 = u.re[k] * u.re[k] + u.im[k] * u.im[k];
      const double w = inv_eps2 * (b.v[k] - a2);
      out.re[k] = w * u.re[k];
      out.im[k] = w * u.im[k];
    }
    return out;
  }
  ComplexField ux = ddx(u), uy = ddy(u);
  const bool substituted = (mode == RhsMode::pinned_substituted);
  for (std::size_t k = 0; k < out.re.size(); ++k) {
    const double a2 = u.re[k] * u.re[k] + u.im[k] * u.im[k];
    const double rw = substituted ? b.v[k] : 1.0;
    const double w = rw * inv_eps2 * (1.0 - a2);
    double re = w * u.re[k] + ff.grad_h.x[k] * ux.re[k] + ff.grad_h.y[k] * uy.re[k];
    double im = w * u.im[k] + ff.grad_h.x[k] * ux.im[k] + ff.grad_h.y[k] * uy.im[k];
    // 2 i Z . grad u
    const double zx = 2.0 * ff.Z_eps.x[k], zy = 2.0 * ff.Z_eps.y[k];
    re -= zx * ux.im[k] + zy * uy.im[k];
    im += zx * ux.re[k] + zy * uy.re[k];
    re += ff.f_eps.v[k] * u.re[k];
    im += ff.f_eps.v[k] * u.im[k];
    out.re[k] = re;
    out.im[k] = im;
  }
  return out;
}

}  // namespace detail

/// dt u for the forcing-model equation
/// (alpha + i beta |log eps|) dt u = Lap u + u (1-|u|^2)/eps^2
///                                   + grad h . grad u + 2 i Z_eps . grad u
///                                   + f_eps u
/// with homogeneous Neumann boundary handling.
inline ComplexField rhs_forced_gl(const ComplexField& u, const ModelParams& p,
                                  const ForcingFields& ff) {
  ComplexField lap = laplacian_neumann(u);
  ScalarField dummy(u.grid, 1.0);
  ComplexField N = detail::explicit_terms(u, p, ff, dummy,
                                          detail::RhsMode::forced);
  const std::complex<double> c = p.time_multiplier();
  ComplexField out(u.grid);
  for (std::size_t k = 0; k < out.re.size(); ++k) {
    const std::complex<double> v =
        std::complex<double>(lap.re[k] + N.re[k], lap.im[k] + N.im[k]) / c;
    out.re[k] = v.real();
    out.im[k] = v.imag();
  }
  return out;
}

/// dt u for the pinned equation
/// (alpha + i beta |log eps|) dt u = Lap u + u (b - |u|^2)/eps^2.
inline ComplexField rhs_pinned_gl(const ComplexField& u, const ScalarField& b,
                                  const ModelParams& p) {
  ComplexField lap = laplacian_neumann(u);
  ForcingFields dummy;
  ComplexField N = detail::explicit_terms(u, p, dummy, b,
                                          detail::RhsMode::pinned_direct);
  const std::complex<double> c = p.time_multiplier();
  ComplexField out(u.grid);
  for (std::size_t k = 0; k < out.re.size(); ++k) {
    const std::complex<double> v =
        std::complex<double>(lap.re[k] + N.re[k], lap.im[k] + N.im[k]) / c;
    out.re[k] = v.real();
    out.im[k] = v.imag();
  }
  return out;
}

/// First-order IMEX integrator: the Laplacian is treated implicitly through
/// the shifted-Helmholtz solve, everything else explicitly.
class GlSimulator {
public:
  static GlSimulator forced(const ModelParams& p, ForcingFields ff) {
    GlSimulator s(p, ff.h.grid);
    s.mode_ = detail::RhsMode::forced;
    s.forcing_ = std::move(ff);
    s.b_ = ScalarField(s.grid_, 1.0);
    return s;
  }
  static GlSimulator pinned(const ModelParams& p, const ScalarField& b) {
    GlSimulator s(p, b.grid);
    s.mode_ = detail::RhsMode::pinned_direct;
    s.forcing_ = ForcingFields::none(b.grid);
    s.b_ = b;
    return s;
  }
  /// Integrates the substituted unknown v = u / sqrt(b).
  static GlSimulator pinned_substituted(const ModelParams& p,
                                        const ScalarField& b) {
    GlSimulator s(p, b.grid);
    s.mode_ = detail::RhsMode::pinned_substituted;
    ForcingFields ff = ForcingFields::none(b.grid);
    ff.h = ScalarField(b.grid);
    for (std::size_t k = 0; k < b.v.size(); ++k)
      ff.h.v[k] = std::log(b.v[k]);
    ff.grad_h = gradient(ff.h);
    ScalarField sqrtb(b.grid);
    for (std::size_t k = 0; k < b.v.size(); ++k)
      sqrtb.v[k] = std::sqrt(b.v[k]);
    auto lap = laplacian(sqrtb);
    ff.f_eps = ScalarField(b.grid);
    for (std::size_t k = 0; k < b.v.size(); ++k)
      ff.f_eps.v[k] = lap.v[k] / sqrtb.v[k];
    s.forcing_ = std::move(ff);
    s.b_ = b;
    return s;
  }

  const ModelParams& params() const { return params_; }
  const ForcingFields& forcing() const { return forcing_; }
  const ScalarField& b() const { return b_; }

  /// Spec default step: min(0.2 eps^2, 0.25 h^2 |alpha + i beta log eps| / alpha).
  double default_dt() const {
    const double h2 = std::min(grid_.hx() * grid_.hx(), grid_.hy() * grid_.hy());
    return std::min(0.2 * params_.eps * params_.eps,
                    0.25 * h2 * std::abs(params_.time_multiplier()) /
                        params_.alpha);
  }

  ComplexField rhs(const ComplexField& u) const {
    if (mode_ == detail::RhsMode::pinned_direct)
      return rhs_pinned_gl(u, b_, params_);
    ComplexField lap = laplacian_neumann(u);
    ComplexField N = detail::explicit_terms(u, params_, forcing_, b_, mode_);
    const std::complex<double> c = params_.time_multiplier();
    ComplexField out(u.grid);
    for (std::size_t k = 0; k < out.re.size(); ++k) {
      const std::complex<double> v =
          std::complex<double>(lap.re[k] + N.re[k], lap.im[k] + N.im[k]) / c;
      out.re[k] = v.real();
      out.im[k] = v.imag();
    }
    return out;
  }

  /// One IMEX step; throws StepRejected when max |u| leaves the guard region.
  void step(SimState& state, double dt) {
    const std::complex<double> c = params_.time_multiplier();
    const std::complex<double> shift = c / dt;
    ComplexField N =
        detail::explicit_terms(state.u, params_, forcing_, b_, mode_);
    ComplexField rhs(grid_);
    for (std::size_t k = 0; k < rhs.re.size(); ++k) {
      const std::complex<double> v =
          shift * std::complex<double>(state.u.re[k], state.u.im[k]) +
          std::complex<double>(N.re[k], N.im[k]);
      rhs.re[k] = v.real();
      rhs.im[k] = v.imag();
    }
    ComplexField next = helmholtz_.solve(rhs, shift);
    const double m = max_abs(next);
    if (m > 2.0)
      throw StepRejected("gl_sim: |u| exceeded the blow-up guard", m);
    state.u = std::move(next);
    state.t += dt;
  }

private:
  GlSimulator(const ModelParams& p, const Grid& g)
      : params_(p), grid_(g), helmholtz_(g) {
    params_.validate();
  }

  ModelParams params_;
  Grid grid_;
  detail::RhsMode mode_ = detail::RhsMode::forced;
  ForcingFields forcing_;
  ScalarField b_;
  HelmholtzSolver helmholtz_;
};

/// Multi-vortex initial data: u(x) = pref(x) prod_i rho(|x-a_i|/eps)
/// exp(i d_i theta_i) with rho = tanh; pref is sqrt(b) for the pinned flavor
/// and 1 for the forcing model.
inline ComplexField make_well_prepared(const Grid& g,
                                       const std::vector<Vec2>& positions,
                                       const std::vector<int>& degrees,
                                       const ModelParams& p,
                                       const ScalarField& b) {
  if (positions.size() != degrees.size())
    throw PlacementError("positions and degrees differ in length");
  const double min_sep = 8.0 * p.eps;
  for (std::size_t a = 0; a < positions.size(); ++a) {
    if (g.boundary_distance(positions[a].x, positions[a].y) < min_sep)
      throw PlacementError("vortex too close to the boundary");
    for (std::size_t c = a + 1; c < positions.size(); ++c)
      if (distance(positions[a], positions[c]) < min_sep)
        throw PlacementError("vortex pair closer than 8 eps");
    if (degrees[a] != 1 && degrees[a] != -1)
      throw PlacementError("degrees must be +1 or -1");
  }
  ComplexField u(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j);
      std::complex<double> z =
          (p.flavor == Flavor::pinned_gl) ? std::sqrt(b(i, j)) : 1.0;
      for (std::size_t a = 0; a < positions.size(); ++a) {
        const double dx = x - positions[a].x, dy = y - positions[a].y;
        const double r = std::hypot(dx, dy);
        const double theta = std::atan2(dy, dx);
        z *= std::tanh(r / p.eps) *
             std::exp(std::complex<double>(0.0, degrees[a] * theta));
      }
      u.set(i, j, z);
    }
  return u;
}

}  // namespace vortexlab
