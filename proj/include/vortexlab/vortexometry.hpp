#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "vortexlab/grid.hpp"
#include "vortexlab/vec2.hpp"

namespace vortexlab {

/// Vorticity mu(u) = curl(iu, grad u) evaluated pointwise as
/// 2 (i d1 u, d2 u).
inline ScalarField vorticity(const ComplexField& u) {
  ComplexField ux = ddx(u), uy = ddy(u);
  ScalarField mu(u.grid);
  for (std::size_t k = 0; k < mu.v.size(); ++k) {
    // (i a, b) with a = d1 u, b = d2 u equals Im(conj(a) b)
    mu.v[k] = 2.0 * (ux.re[k] * uy.im[k] - ux.im[k] * uy.re[k]);
  }
  return mu;
}

/// Velocity V = 2 (dt u, i grad u) from consecutive snapshots, with the
/// difference quotient in time and the averaged midpoint field in space.
inline VectorField velocity(const ComplexField& u_prev,
                            const ComplexField& u_next, double dt) {
  const Grid& g = u_prev.grid;
  ComplexField mid(g), dtu(g);
  for (std::size_t k = 0; k < mid.re.size(); ++k) {
    mid.re[k] = 0.5 * (u_prev.re[k] + u_next.re[k]);
    mid.im[k] = 0.5 * (u_prev.im[k] + u_next.im[k]);
    dtu.re[k] = (u_next.re[k] - u_prev.re[k]) / dt;
    dtu.im[k] = (u_next.im[k] - u_prev.im[k]) / dt;
  }
  ComplexField mx = ddx(mid), my = ddy(mid);
  VectorField V(g);
  for (std::size_t k = 0; k < V.x.size(); ++k) {
    // (dtu, i w) = -Re(dtu) Im(w) + Im(dtu) Re(w) = -Im(conj(dtu) w)
    V.x[k] = -2.0 * (dtu.re[k] * mx.im[k] - dtu.im[k] * mx.re[k]);
    V.y[k] = -2.0 * (dtu.re[k] * my.im[k] - dtu.im[k] * my.re[k]);
  }
  return V;
}

/// Continuity defect of the snapshot pair: max-norm of
/// (mu(u_next) - mu(u_prev))/dt + curl V. With the midpoint velocity this
/// cancels exactly in time and measures only spatial commutators.
inline double continuity_defect(const ComplexField& u_prev,
                                const ComplexField& u_next, double dt) {
  auto m0 = vorticity(u_prev);
  auto m1 = vorticity(u_next);
  auto cv = curl(velocity(u_prev, u_next, dt));
  double m = 0.0;
  for (std::size_t k = 0; k < m0.v.size(); ++k)
    m = std::max(m, std::abs((m1.v[k] - m0.v[k]) / dt + cv.v[k]));
  return m;
}

/// Scheme-sensitive continuity defect: the time derivative of u is taken
/// from the equation's right-hand side at the midpoint state, so the defect
/// carries the integrator's O(dt) error on top of the spatial O(h^2).
template <class RhsFn>
double continuity_defect_scheme(const ComplexField& u_prev,
                                const ComplexField& u_next, double dt,
                                RhsFn&& rhs) {
  const Grid& g = u_prev.grid;
  ComplexField mid(g);
  for (std::size_t k = 0; k < mid.re.size(); ++k) {
    mid.re[k] = 0.5 * (u_prev.re[k] + u_next.re[k]);
    mid.im[k] = 0.5 * (u_prev.im[k] + u_next.im[k]);
  }
  ComplexField dtu = rhs(mid);
  ComplexField mx = ddx(mid), my = ddy(mid);
  VectorField V(g);
  for (std::size_t k = 0; k < V.x.size(); ++k) {
    V.x[k] = -2.0 * (dtu.re[k] * mx.im[k] - dtu.im[k] * mx.re[k]);
    V.y[k] = -2.0 * (dtu.re[k] * my.im[k] - dtu.im[k] * my.re[k]);
  }
  auto m0 = vorticity(u_prev);
  auto m1 = vorticity(u_next);
  auto cv = curl(V);
  double m = 0.0;
  for (std::size_t k = 0; k < m0.v.size(); ++k)
    m = std::max(m, std::abs((m1.v[k] - m0.v[k]) / dt + cv.v[k]));
  return m;
}

struct Vortex {
  Vec2 pos;
  int degree = 0;
};

struct PlaquetteWinding {
  int i = 0, j = 0;  // lower-left node of the cell
  int winding = 0;
};

struct VortexState {
  double t = 0.0;
  std::vector<Vortex> vortices;
  std::vector<PlaquetteWinding> raw_winding;
  bool degenerate_zero = false;

  int total_winding() const {
    int s = 0;
    for (const auto& p : raw_winding) s += p.winding;
    return s;
  }
};

namespace vdetail {

inline double wrap_phase(double d) {
  constexpr double tau = 2.0 * 3.14159265358979323846;
  d -= tau * std::floor((d + 0.5 * tau) / tau);
  return d;  // in [-pi, pi)
}

/// Integer winding of the phase around cell (i,j). The wrapped edge sums
/// differ from the raw telescoping sum (which is zero) by an exact multiple
/// of 2 pi, so rounding removes all floating-point noise.
inline int plaquette_winding(const ComplexField& u, int i, int j) {
  const auto th = [&](int a, int b) {
    return std::atan2(u.im[u.grid.idx(a, b)], u.re[u.grid.idx(a, b)]);
  };
  const double t00 = th(i, j), t10 = th(i + 1, j), t11 = th(i + 1, j + 1),
               t01 = th(i, j + 1);
  const double s = wrap_phase(t10 - t00) + wrap_phase(t11 - t10) +
                   wrap_phase(t01 - t11) + wrap_phase(t00 - t01);
  return static_cast<int>(std::lround(s / (2.0 * 3.14159265358979323846)));
}

/// Zero of the bilinear interpolant of (Re u, Im u) inside cell (i,j),
/// in cell coordinates; falls back to the center when Newton leaves the cell.
inline Vec2 bilinear_zero(const ComplexField& u, int i, int j) {
  const Grid& g = u.grid;
  const double r00 = u.re[g.idx(i, j)], r10 = u.re[g.idx(i + 1, j)];
  const double r01 = u.re[g.idx(i, j + 1)], r11 = u.re[g.idx(i + 1, j + 1)];
  const double m00 = u.im[g.idx(i, j)], m10 = u.im[g.idx(i + 1, j)];
  const double m01 = u.im[g.idx(i, j + 1)], m11 = u.im[g.idx(i + 1, j + 1)];
  auto eval = [&](double s, double t, double& fr, double& fi, double J[4]) {
    const double a = (1 - s) * (1 - t), b = s * (1 - t), c = (1 - s) * t,
                 d = s * t;
    fr = a * r00 + b * r10 + c * r01 + d * r11;
    fi = a * m00 + b * m10 + c * m01 + d * m11;
    J[0] = -(1 - t) * r00 + (1 - t) * r10 - t * r01 + t * r11;  // dfr/ds
    J[1] = -(1 - s) * r00 - s * r10 + (1 - s) * r01 + s * r11;  // dfr/dt
    J[2] = -(1 - t) * m00 + (1 - t) * m10 - t * m01 + t * m11;
    J[3] = -(1 - s) * m00 - s * m10 + (1 - s) * m01 + s * m11;
  };
  double s = 0.5, t = 0.5;
  for (int it = 0; it < 12; ++it) {
    double fr, fi, J[4];
    eval(s, t, fr, fi, J);
    const double det = J[0] * J[3] - J[1] * J[2];
    if (std::abs(det) < 1e-30) break;
    const double ds = (fr * J[3] - fi * J[1]) / det;
    const double dt = (fi * J[0] - fr * J[2]) / det;
    s -= ds;
    t -= dt;
    if (std::abs(ds) + std::abs(dt) < 1e-13) break;
  }
  if (!(s >= -0.25 && s <= 1.25 && t >= -0.25 && t <= 1.25)) return {0.5, 0.5};
  s = std::clamp(s, 0.0, 1.0);
  t = std::clamp(t, 0.0, 1.0);
  return {s, t};
}

}  // namespace vdetail

/// Detects vortices by per-plaquette phase winding; nonzero plaquettes are
/// clustered with 8-connectivity and each cluster reports the winding sum as
/// its degree and a subgrid zero estimate as its position.
inline VortexState detect(const ComplexField& u, double t = 0.0) {
  const Grid& g = u.grid;
  VortexState st;
  st.t = t;
  std::map<std::pair<int, int>, int> cells;
  for (int j = 0; j < g.ny - 1; ++j)
    for (int i = 0; i < g.nx - 1; ++i) {
      const int w = vdetail::plaquette_winding(u, i, j);
      if (w != 0) {
        st.raw_winding.push_back({i, j, w});
        cells[{i, j}] = w;
      }
    }

  std::map<std::pair<int, int>, bool> seen;
  for (const auto& [cell, w0] : cells) {
    if (seen[cell]) continue;
    // flood fill the 8-connected cluster
    std::vector<std::pair<int, int>> cluster, stack{cell};
    seen[cell] = true;
    while (!stack.empty()) {
      auto c = stack.back();
      stack.pop_back();
      cluster.push_back(c);
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          auto nb = std::make_pair(c.first + di, c.second + dj);
          auto it = cells.find(nb);
          if (it != cells.end() && !seen[nb]) {
            seen[nb] = true;
            stack.push_back(nb);
          }
        }
    }
    int degree = 0;
    double wsum = 0.0;
    Vec2 pos{0.0, 0.0};
    bool any_resolved = false;
    Vec2 centroid{0.0, 0.0};
    for (auto [ci, cj] : cluster) {
      degree += cells[{ci, cj}];
      double umin = 1e300;
      for (int dj = 0; dj <= 1; ++dj)
        for (int di = 0; di <= 1; ++di)
          umin = std::min(umin, std::sqrt(u.abs2(ci + di, cj + dj)));
      const Vec2 cc{g.x(ci) + 0.5 * g.hx(), g.y(cj) + 0.5 * g.hy()};
      centroid += cc * (1.0 / cluster.size());
      if (umin < 1e-12) {
        st.degenerate_zero = true;
        continue;
      }
      const Vec2 local = vdetail::bilinear_zero(u, ci, cj);
      const Vec2 refined{g.x(ci) + local.x * g.hx(), g.y(cj) + local.y * g.hy()};
      const double w = 1.0 / umin;
      pos += refined * w;
      wsum += w;
      any_resolved = true;
    }
    Vortex v;
    v.degree = degree;
    v.pos = any_resolved ? pos / wsum : centroid;
    st.vortices.push_back(v);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Tracking
// ---------------------------------------------------------------------------

enum class Termination { collision, exit, horizon };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::collision: return "collision";
    case Termination::exit: return "exit";
    default: return "horizon";
  }
}

struct Trajectory {
  int id = 0;
  int degree = 0;
  std::vector<std::pair<double, Vec2>> samples;
  Termination termination = Termination::horizon;
  double terminal_time = 0.0;

  Vec2 position_at(double t) const {
    if (samples.empty()) return {};
    if (t <= samples.front().first) return samples.front().second;
    if (t >= samples.back().first) return samples.back().second;
    for (std::size_t k = 1; k < samples.size(); ++k)
      if (samples[k].first >= t) {
        const double t0 = samples[k - 1].first, t1 = samples[k].first;
        const double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
        return samples[k - 1].second * (1.0 - w) + samples[k].second * w;
      }
    return samples.back().second;
  }
};

struct TrackParams {
  Grid grid;
  double eps = 0.05;
  double gate = 0.1;             // 10 max(h, dt_frame v_max)
  double tie_tolerance = 0.0;    // 0.1 h when 0
  double r_coll = 0.0;           // max(4 eps, 2h) when 0
  double r_exit = 0.0;           // max(4 eps, 2h) when 0

  static TrackParams make(const Grid& g, double eps, double dt_frame,
                          double v_max) {
    TrackParams p;
    p.grid = g;
    p.eps = eps;
    const double h = std::max(g.hx(), g.hy());
    p.gate = 10.0 * std::max(h, dt_frame * v_max);
    p.tie_tolerance = 0.1 * h;
    p.r_coll = std::max(4.0 * eps, 2.0 * h);
    p.r_exit = std::max(4.0 * eps, 2.0 * h);
    return p;
  }
};

struct TrackResult {
  std::vector<Trajectory> trajectories;
  int ambiguities = 0;
};

/// Greedy nearest-neighbor matching of same-degree vortices frame-to-frame.
/// Collision closes both members of an opposite-degree pair inside r_coll;
/// exit closes a trajectory within r_exit of the boundary; surviving tracks
/// terminate at the horizon.
inline TrackResult track(const std::vector<VortexState>& frames,
                         const TrackParams& params) {
  TrackResult result;
  if (frames.empty()) return result;

  struct Active {
    int traj = -1;
    bool alive = true;
  };
  std::vector<Active> active;
  auto& trajs = result.trajectories;

  auto open_traj = [&](const Vortex& v, double t) {
    Trajectory tr;
    tr.id = static_cast<int>(trajs.size());
    tr.degree = v.degree;
    tr.samples.push_back({t, v.pos});
    trajs.push_back(std::move(tr));
    active.push_back({static_cast<int>(trajs.size()) - 1, true});
  };

  auto close_traj = [&](int traj, Termination why, double t) {
    trajs[traj].termination = why;
    trajs[traj].terminal_time = t;
    for (auto& a : active)
      if (a.traj == traj) a.alive = false;
  };

  const Grid& g = params.grid;
  auto near_boundary = [&](Vec2 p) {
    return g.boundary_distance(p.x, p.y) < params.r_exit;
  };

  for (const auto& v : frames.front().vortices) open_traj(v, frames.front().t);

  auto sweep_events = [&](double t) {
    // collisions between opposite-degree live tracks
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (!active[a].alive) continue;
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        if (!active[b].alive) continue;
        auto& ta = trajs[active[a].traj];
        auto& tb = trajs[active[b].traj];
        if (ta.degree + tb.degree != 0) continue;
        if (distance(ta.samples.back().second, tb.samples.back().second) <
            params.r_coll) {
          close_traj(active[a].traj, Termination::collision, t);
          close_traj(active[b].traj, Termination::collision, t);
        }
      }
    }
    for (auto& a : active) {
      if (!a.alive) continue;
      if (near_boundary(trajs[a.traj].samples.back().second))
        close_traj(a.traj, Termination::exit, t);
    }
  };
  sweep_events(frames.front().t);

  for (std::size_t f = 1; f < frames.size(); ++f) {
    const auto& frame = frames[f];
    struct Cand {
      double dist;
      int a;  // active index
      int d;  // detection index
    };
    std::vector<Cand> cands;
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (!active[a].alive) continue;
      const auto& tr = trajs[active[a].traj];
      for (std::size_t d = 0; d < frame.vortices.size(); ++d) {
        if (frame.vortices[d].degree != tr.degree) continue;
        const double dist =
            distance(tr.samples.back().second, frame.vortices[d].pos);
        if (dist <= params.gate)
          cands.push_back({dist, static_cast<int>(a), static_cast<int>(d)});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.dist != y.dist) return x.dist < y.dist;
      if (x.a != y.a) return x.a < y.a;
      return x.d < y.d;
    });
    std::vector<char> a_used(active.size(), 0), d_used(frame.vortices.size(), 0);
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const auto& c = cands[k];
      if (a_used[c.a] || d_used[c.d]) continue;
      if (k + 1 < cands.size()) {
        const auto& n = cands[k + 1];
        if (!a_used[n.a] && !d_used[n.d] && (n.a == c.a || n.d == c.d) &&
            n.dist - c.dist < params.tie_tolerance)
          ++result.ambiguities;
      }
      a_used[c.a] = 1;
      d_used[c.d] = 1;
      trajs[active[c.a].traj].samples.push_back({frame.t, frame.vortices[c.d].pos});
    }
    // tracks with no match: decide why they vanished
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (!active[a].alive || a_used[a]) continue;
      auto& tr = trajs[active[a].traj];
      const Vec2 last = tr.samples.back().second;
      if (g.boundary_distance(last.x, last.y) < 2.0 * params.r_exit) {
        close_traj(active[a].traj, Termination::exit, frame.t);
        continue;
      }
      bool near_opposite = false;
      for (std::size_t b = 0; b < active.size(); ++b) {
        if (b == a || !active[b].alive) continue;
        const auto& tb = trajs[active[b].traj];
        if (tb.degree + tr.degree == 0 &&
            distance(last, tb.samples.back().second) < 2.0 * params.r_coll)
          near_opposite = true;
      }
      close_traj(active[a].traj, near_opposite ? Termination::collision
                                               : Termination::horizon,
                 frame.t);
    }
    sweep_events(frame.t);
  }

  const double t_end = frames.back().t;
  for (auto& a : active)
    if (a.alive) close_traj(a.traj, Termination::horizon, t_end);
  return result;
}

}  // namespace vortexlab
