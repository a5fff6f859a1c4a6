#pragma once

#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <vector>

#include "vortexlab/errors.hpp"
#include "vortexlab/grid.hpp"
#include "vortexlab/vec2.hpp"
#include "vortexlab/vortexometry.hpp"

namespace vortexlab {

/// A position left the domain during force evaluation.
class OutOfDomain : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// C1 cubic-convolution interpolation (Catmull-Rom weights) of a node field;
/// indices clamp at the boundary.
class Bicubic {
public:
  explicit Bicubic(ScalarField f) : f_(std::move(f)) {}

  double operator()(double x, double y) const {
    const Grid& g = f_.grid;
    const double sx = x / g.hx(), sy = y / g.hy();
    const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, g.nx - 2);
    const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, g.ny - 2);
    const double fx = sx - i, fy = sy - j;
    double wx[4], wy[4];
    weights(fx, wx);
    weights(fy, wy);
    double sum = 0.0;
    for (int b = 0; b < 4; ++b) {
      const int jj = std::clamp(j - 1 + b, 0, g.ny - 1);
      double row = 0.0;
      for (int a = 0; a < 4; ++a) {
        const int ii = std::clamp(i - 1 + a, 0, g.nx - 1);
        row += wx[a] * f_(ii, jj);
      }
      sum += wy[b] * row;
    }
    return sum;
  }

private:
  static void weights(double s, double w[4]) {
    const double s2 = s * s, s3 = s2 * s;
    w[0] = -0.5 * s + s2 - 0.5 * s3;
    w[1] = 1.0 - 2.5 * s2 + 1.5 * s3;
    w[2] = 0.5 * s + 2.0 * s2 - 1.5 * s3;
    w[3] = -0.5 * s2 + 0.5 * s3;
  }
  ScalarField f_;
};

/// Force data of the limiting law: the current field Z (unit current
/// multiplier) and grad log b, either closed-form or interpolated.
struct ForceField {
  std::function<Vec2(Vec2)> Z;
  std::function<Vec2(Vec2)> grad_log_b;

  static ForceField closed_form(std::function<Vec2(Vec2)> Zf,
                                std::function<Vec2(Vec2)> glb) {
    return {std::move(Zf), std::move(glb)};
  }

  static ForceField from_fields(const VectorField& Z, const ScalarField& b) {
    auto zx = std::make_shared<Bicubic>([&] {
      ScalarField f(Z.grid);
      f.v = Z.x;
      return f;
    }());
    auto zy = std::make_shared<Bicubic>([&] {
      ScalarField f(Z.grid);
      f.v = Z.y;
      return f;
    }());
    ScalarField logb(b.grid);
    for (std::size_t k = 0; k < b.v.size(); ++k) logb.v[k] = std::log(b.v[k]);
    auto glb = gradient(logb);
    auto gx = std::make_shared<Bicubic>([&] {
      ScalarField f(b.grid);
      f.v = glb.x;
      return f;
    }());
    auto gy = std::make_shared<Bicubic>([&] {
      ScalarField f(b.grid);
      f.v = glb.y;
      return f;
    }());
    ForceField out;
    out.Z = [zx, zy](Vec2 p) { return Vec2{(*zx)(p.x, p.y), (*zy)(p.x, p.y)}; };
    out.grad_log_b = [gx, gy](Vec2 p) {
      return Vec2{(*gx)(p.x, p.y), (*gy)(p.x, p.y)};
    };
    return out;
  }
};

struct OdeSystem {
  std::vector<int> degrees;
  ForceField force;
  double lx = 1.0, ly = 1.0;  // domain rectangle for exit events
  double alpha = 1.0;
  double beta = 0.0;
  double lambda = 0.0;

  int n() const { return static_cast<int>(degrees.size()); }

  void validate() const {
    if (!(alpha > 0.0))
      throw ConfigError("law.alpha", "must be positive");
    if (!(alpha * alpha + beta * beta > 0.0))
      throw ConfigError("law.beta", "alpha^2 + beta^2 must be positive");
    for (int d : degrees)
      if (d != 1 && d != -1)
        throw ConfigError("law.degrees", "degrees must be +1 or -1");
  }
};

/// Velocities of the limiting law, solved form:
/// a' = [alpha F - d beta F_perp] / (alpha^2 + beta^2) with
/// F = -2 d lambda Z_perp(a) - grad log b(a).
inline std::vector<Vec2> ode_rhs(const std::vector<Vec2>& positions,
                                 const OdeSystem& sys) {
  const double denom = sys.alpha * sys.alpha + sys.beta * sys.beta;
  std::vector<Vec2> out(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec2 a = positions[i];
    if (a.x < 0.0 || a.x > sys.lx || a.y < 0.0 || a.y > sys.ly)
      throw OutOfDomain("vortex position left the domain");
    const double d = sys.degrees[i];
    const Vec2 F = (-2.0 * d * sys.lambda) * sys.force.Z(a).perp() -
                   sys.force.grad_log_b(a);
    out[i] = (sys.alpha * F - d * sys.beta * F.perp()) / denom;
  }
  return out;
}

struct OdeSolution {
  std::vector<Trajectory> paths;
  double T_star = 0.0;
  Termination stop_reason = Termination::horizon;
};

struct OdeOptions {
  double dt = 1e-3;
  double stop_radius = -1.0;  // defaults to 1e-3 min(lx, ly)
  int sample_stride = 1;      // store every k-th step
};

namespace ldetail {

struct Event {
  double s = 2.0;  // fraction of the step, > 1 means none
  Termination kind = Termination::horizon;
  int a = -1, b = -1;  // involved vortex indices
};

/// Earliest linear-interpolation crossing of the collision or exit radius
/// inside one step.
inline Event first_event(const std::vector<Vec2>& p0,
                         const std::vector<Vec2>& p1, const OdeSystem& sys,
                         double radius) {
  Event ev;
  const int n = static_cast<int>(p0.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Vec2 d0 = p0[i] - p0[j];
      const Vec2 dd = (p1[i] - p1[j]) - d0;
      // |d0 + s dd|^2 = radius^2
      const double A = dd.dot(dd), B = 2.0 * d0.dot(dd),
                   C = d0.dot(d0) - radius * radius;
      double s = 2.0;
      if (C <= 0.0) {
        s = 0.0;
      } else if (A > 0.0) {
        const double disc = B * B - 4.0 * A * C;
        if (disc >= 0.0) {
          const double root = (-B - std::sqrt(disc)) / (2.0 * A);
          if (root >= 0.0 && root <= 1.0) s = root;
        }
      }
      if (s < ev.s) ev = {s, Termination::collision, i, j};
    }
  for (int i = 0; i < n; ++i) {
    auto cross = [&](double c0, double c1, double lo, double hi) {
      // distance to the nearest face along one axis
      double s = 2.0;
      if (c1 - c0 < 0.0 && c0 > lo + radius)
        s = (c0 - (lo + radius)) / (c0 - c1);
      else if (c0 <= lo + radius)
        s = 0.0;
      double s2 = 2.0;
      if (c1 - c0 > 0.0 && c0 < hi - radius)
        s2 = ((hi - radius) - c0) / (c1 - c0);
      else if (c0 >= hi - radius)
        s2 = 0.0;
      return std::min(s, s2);
    };
    const double sx = cross(p0[i].x, p1[i].x, 0.0, sys.lx);
    const double sy = cross(p0[i].y, p1[i].y, 0.0, sys.ly);
    const double s = std::min(sx, sy);
    if (s <= 1.0 && s < ev.s) ev = {s, Termination::exit, i, -1};
  }
  return ev;
}

}  // namespace ldetail

/// Classical RK4 with event detection by dense linear interpolation between
/// steps. A position that leaves the domain during a stage evaluation is
/// treated as an exit event, never as a failure.
inline OdeSolution integrate_law(const OdeSystem& sys,
                                 const std::vector<Vec2>& initial,
                                 double horizon, const OdeOptions& opt = {}) {
  sys.validate();
  if (initial.size() != sys.degrees.size())
    throw ConfigError("law.initial", "positions and degrees differ in length");
  const double radius =
      opt.stop_radius > 0.0 ? opt.stop_radius : 1e-3 * std::min(sys.lx, sys.ly);

  OdeSolution sol;
  const int n = sys.n();
  for (int i = 0; i < n; ++i) {
    Trajectory tr;
    tr.id = i;
    tr.degree = sys.degrees[i];
    tr.samples.push_back({0.0, initial[i]});
    sol.paths.push_back(std::move(tr));
  }

  std::vector<Vec2> p = initial;
  double t = 0.0;
  long step_index = 0;

  auto record = [&](double tt, const std::vector<Vec2>& pp, bool force) {
    if (!force && (step_index % opt.sample_stride) != 0) return;
    for (int i = 0; i < n; ++i) sol.paths[i].samples.push_back({tt, pp[i]});
  };
  auto finish = [&](double T, Termination why, int a, int b,
                    const std::vector<Vec2>& pp) {
    record(T, pp, true);
    sol.T_star = T;
    sol.stop_reason = why;
    for (int i = 0; i < n; ++i) {
      sol.paths[i].terminal_time = T;
      sol.paths[i].termination = Termination::horizon;
    }
    if (why == Termination::collision) {
      sol.paths[a].termination = Termination::collision;
      sol.paths[b].termination = Termination::collision;
    } else if (why == Termination::exit) {
      sol.paths[a].termination = Termination::exit;
    }
  };

  while (t < horizon - 1e-15) {
    const double dt = std::min(opt.dt, horizon - t);
    std::vector<Vec2> p1;
    bool stage_exit = false;
    int exit_idx = -1;
    try {
      auto k1 = ode_rhs(p, sys);
      auto at = [&](const std::vector<Vec2>& k, double f) {
        std::vector<Vec2> q(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[i] + k[i] * f;
        return q;
      };
      auto k2 = ode_rhs(at(k1, 0.5 * dt), sys);
      auto k3 = ode_rhs(at(k2, 0.5 * dt), sys);
      auto k4 = ode_rhs(at(k3, dt), sys);
      p1.resize(p.size());
      for (std::size_t i = 0; i < p.size(); ++i)
        p1[i] = p[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
    } catch (const OutOfDomain&) {
      stage_exit = true;
    }
    if (stage_exit) {
      // march to the wall with the last valid velocities
      auto v = ode_rhs(p, sys);
      p1.resize(p.size());
      double smin = 1.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        p1[i] = p[i] + v[i] * dt;
        const double bd = std::min(std::min(p1[i].x, sys.lx - p1[i].x),
                                   std::min(p1[i].y, sys.ly - p1[i].y));
        if (bd < radius) {
          exit_idx = static_cast<int>(i);
        }
      }
      (void)smin;
      if (exit_idx < 0) exit_idx = 0;
      finish(t + dt, Termination::exit, exit_idx, -1, p1);
      return sol;
    }

    const auto ev = ldetail::first_event(p, p1, sys, radius);
    if (ev.s <= 1.0) {
      std::vector<Vec2> pe(p.size());
      for (std::size_t i = 0; i < p.size(); ++i)
        pe[i] = p[i] + (p1[i] - p[i]) * ev.s;
      finish(t + ev.s * dt, ev.kind, ev.a, ev.b, pe);
      return sol;
    }
    t += dt;
    ++step_index;
    p = std::move(p1);
    record(t, p, false);
  }
  finish(horizon, Termination::horizon, -1, -1, p);
  return sol;
}

// ---------------------------------------------------------------------------
// Critical current
// ---------------------------------------------------------------------------

struct ConfinementSpec {
  std::vector<Vec2> minima;  // assigned minimum per vortex
  double radius = 0.2;
  double horizon = 5.0;
};

enum class SweepOutcome { bracketed, above_grid, below_grid };

struct CriticalReport {
  std::vector<double> lambdas;
  std::vector<bool> confined;
  bool monotone = true;  // single confined -> deconfined transition
  SweepOutcome outcome = SweepOutcome::bracketed;
  double lambda0 = std::numeric_limits<double>::quiet_NaN();
  double delta_lambda = 0.0;
};

/// Confinement verdict for one current multiplier: every vortex must stay
/// within the given radius of its assigned minimum for all t <= horizon, and
/// must not exit the domain.
inline bool confinement_verdict(OdeSystem sys, double lambda,
                                const std::vector<Vec2>& initial,
                                const ConfinementSpec& spec,
                                const OdeOptions& opt) {
  sys.lambda = lambda;
  auto sol = integrate_law(sys, initial, spec.horizon, opt);
  if (sol.stop_reason == Termination::exit) return false;
  for (std::size_t i = 0; i < sol.paths.size(); ++i)
    for (const auto& [t, pos] : sol.paths[i].samples)
      if (distance(pos, spec.minima[i]) > spec.radius) return false;
  return true;
}

/// Classifies a verdict vector: outcome and whether it contains a single
/// confined -> deconfined transition (the law does not guarantee this; an
/// anomaly is reported through `monotone`, never thrown).
inline void analyze_sweep(CriticalReport& rep) {
  int transitions = 0;
  for (std::size_t k = 1; k < rep.confined.size(); ++k)
    if (rep.confined[k] != rep.confined[k - 1]) ++transitions;
  rep.monotone =
      (transitions == 0) || (transitions == 1 && rep.confined.front());
  if (std::all_of(rep.confined.begin(), rep.confined.end(),
                  [](bool c) { return c; })) {
    rep.outcome = SweepOutcome::above_grid;
    return;
  }
  if (!rep.confined.front()) {
    rep.outcome = SweepOutcome::below_grid;
    return;
  }
  rep.outcome = SweepOutcome::bracketed;
}

/// Sweeps the current multiplier over an increasing grid and refines the
/// confined/deconfined bracket by bisection down to delta_lambda
/// (default 1e-3 of the grid span). Non-monotone verdict vectors are
/// reported, not asserted away; the first transition is bracketed.
inline CriticalReport critical_current(const OdeSystem& sys,
                                       const std::vector<double>& lambda_grid,
                                       const std::vector<Vec2>& initial,
                                       const ConfinementSpec& spec,
                                       const OdeOptions& opt = {},
                                       double delta_lambda = -1.0,
                                       int threads = 0) {
  if (lambda_grid.size() < 2)
    throw ConfigError("critical.lambda_grid", "needs at least two entries");
  for (std::size_t k = 1; k < lambda_grid.size(); ++k)
    if (!(lambda_grid[k] > lambda_grid[k - 1]))
      throw ConfigError("critical.lambda_grid", "must be strictly increasing");
  if (spec.minima.size() != sys.degrees.size())
    throw ConfigError("critical.minima", "one assigned minimum per vortex");

  CriticalReport rep;
  rep.lambdas = lambda_grid;
  const double span = lambda_grid.back() - lambda_grid.front();
  rep.delta_lambda = delta_lambda > 0.0 ? delta_lambda : 1e-3 * span;

  const int nthreads =
      threads > 0 ? threads
                  : std::max(1u, std::thread::hardware_concurrency());
  rep.confined.resize(lambda_grid.size());
  for (std::size_t base = 0; base < lambda_grid.size();
       base += static_cast<std::size_t>(nthreads)) {
    std::vector<std::future<bool>> batch;
    for (std::size_t k = base;
         k < std::min(base + nthreads, lambda_grid.size()); ++k)
      batch.push_back(std::async(std::launch::async, [&, k] {
        return confinement_verdict(sys, lambda_grid[k], initial, spec, opt);
      }));
    for (std::size_t k = 0; k < batch.size(); ++k)
      rep.confined[base + k] = batch[k].get();
  }

  analyze_sweep(rep);
  if (rep.outcome != SweepOutcome::bracketed) return rep;

  std::size_t k = 1;
  while (k < rep.confined.size() && rep.confined[k]) ++k;
  double lo = lambda_grid[k - 1], hi = lambda_grid[k];
  while (hi - lo > rep.delta_lambda) {
    const double mid = 0.5 * (lo + hi);
    if (confinement_verdict(sys, mid, initial, spec, opt))
      lo = mid;
    else
      hi = mid;
  }
  rep.lambda0 = 0.5 * (lo + hi);
  return rep;
}

}  // namespace vortexlab
