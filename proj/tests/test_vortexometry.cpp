#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "vortexlab/gl_sim.hpp"
#include "vortexlab/vortexometry.hpp"

using namespace vortexlab;
using Catch::Approx;

namespace {
constexpr double kPi = 3.14159265358979323846;

ComplexField moving_vortex(const Grid& g, Vec2 a, double eps, int degree = 1) {
  return ComplexField::sample(g, [&](double x, double y) {
    const double dx = x - a.x, dy = y - a.y;
    const double r = std::hypot(dx, dy);
    return std::tanh(r / eps) *
           std::exp(std::complex<double>(0.0, degree * std::atan2(dy, dx)));
  });
}

}  // namespace

TEST_CASE("vorticity of trivial fields") {
  Grid g(65, 65, 1.0, 1.0);

  auto c = ComplexField::sample(
      g, [](double, double) { return std::complex<double>(0.3, -0.8); });
  REQUIRE(max_abs(vorticity(c)) == 0.0);

  auto plane = ComplexField::sample(g, [](double x, double) {
    return std::exp(std::complex<double>(0.0, 4.0 * x));
  });
  REQUIRE(max_abs(vorticity(plane)) < 1e-11);
}

TEST_CASE("vorticity integrates to 2 pi times the degree") {
  Grid g(257, 257, 1.0, 1.0);
  const double eps = 0.05;
  auto u = moving_vortex(g, {0.503, 0.497}, eps);
  const double total = integrate(vorticity(u));
  REQUIRE(total == Approx(2.0 * kPi).epsilon(0.02));
}

TEST_CASE("velocity of trivial motions") {
  Grid g(65, 65, 1.0, 1.0);
  auto u = ComplexField::sample(g, [](double x, double y) {
    return std::exp(std::complex<double>(0.0, 2.0 * x - y));
  });

  SECTION("frozen field has zero velocity") {
    REQUIRE(max_abs(velocity(u, u, 1e-3)) == 0.0);
  }

  SECTION("a global phase rotation produces no transport") {
    const double c = 0.05;
    ComplexField u2(g);
    const auto rot = std::exp(std::complex<double>(0.0, c));
    for (std::size_t k = 0; k < u.re.size(); ++k) {
      const auto z = std::complex<double>(u.re[k], u.im[k]) * rot;
      u2.re[k] = z.real();
      u2.im[k] = z.imag();
    }
    const double dt = 1e-3;
    auto V = velocity(u, u2, dt);
    // |u| = 1: V reduces to a multiple of grad|u|^2, zero up to stencils
    REQUIRE(max_abs(V) < 1e-4 * (c / dt));
    REQUIRE(max_abs(curl(V)) < 2e-2 * (c / dt));
  }
}

TEST_CASE("velocity encodes the perpendicular vortex velocity") {
  Grid g(257, 257, 1.0, 1.0);
  const double eps = 0.04;
  const Vec2 a0{0.5, 0.5};
  const Vec2 w{0.3, -0.2};
  const double dt = 2e-3;
  auto u0 = moving_vortex(g, a0, eps);
  auto u1 = moving_vortex(g, a0 + w * dt, eps);
  auto V = velocity(u0, u1, dt);

  // integrate V against a smooth bump centered at the vortex
  const double R = 0.35;
  ScalarField bx(g), by(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double r = std::hypot(g.x(i) - a0.x, g.y(j) - a0.y);
      const double phi = (r < R) ? std::pow(std::cos(0.5 * kPi * r / R), 2) : 0.0;
      bx(i, j) = V.x[g.idx(i, j)] * phi;
      by(i, j) = V.y[g.idx(i, j)] * phi;
    }
  const Vec2 got{integrate(bx), integrate(by)};
  const Vec2 want = 2.0 * kPi * w.perp();  // phi(a0) = 1
  REQUIRE(got.x == Approx(want.x).epsilon(0.10));
  REQUIRE(got.y == Approx(want.y).epsilon(0.10));
}

TEST_CASE("detect finds positions, degrees, and conjugation flips") {
  Grid g(129, 129, 1.0, 1.0);
  const double eps = 0.05;
  const Vec2 a{0.5212, 0.4771};

  auto u = moving_vortex(g, a, eps);
  auto st = detect(u, 1.5);
  REQUIRE(st.t == 1.5);
  REQUIRE(st.vortices.size() == 1);
  REQUIRE(st.vortices[0].degree == 1);
  REQUIRE(distance(st.vortices[0].pos, a) < g.hx());

  ComplexField conj_u = u;
  for (auto& v : conj_u.im) v = -v;
  auto stc = detect(conj_u);
  REQUIRE(stc.vortices.size() == 1);
  REQUIRE(stc.vortices[0].degree == -1);
  REQUIRE(distance(stc.vortices[0].pos, st.vortices[0].pos) < 1e-12);
}

TEST_CASE("detect separates a well-prepared pair") {
  Grid g(129, 65, 2.0, 1.0);
  ModelParams p;
  p.eps = 0.05;
  auto u = make_well_prepared(g, {{0.703, 0.497}, {1.297, 0.503}}, {1, -1}, p,
                              ScalarField(g, 1.0));
  auto st = detect(u);
  REQUIRE(st.vortices.size() == 2);
  std::vector<int> degs{st.vortices[0].degree, st.vortices[1].degree};
  std::sort(degs.begin(), degs.end());
  REQUIRE(degs[0] == -1);
  REQUIRE(degs[1] == 1);
  REQUIRE(st.total_winding() == 0);
}

TEST_CASE("detect flags degenerate zero blocks") {
  Grid g(65, 65, 1.0, 1.0);
  // linear degree-1 field whose zero is masked by an exact 2x2 zero block
  const Vec2 a{0.507, 0.4935};
  auto u = ComplexField::sample(g, [&](double x, double y) {
    return std::complex<double>(x - a.x, y - a.y);
  });
  const int i0 = 32, j0 = 31;
  for (int dj = 0; dj <= 1; ++dj)
    for (int di = 0; di <= 1; ++di) u.set(i0 + di, j0 + dj, {0.0, 0.0});
  auto st = detect(u);
  REQUIRE(st.degenerate_zero);
  REQUIRE(st.vortices.size() == 1);
  REQUIRE(st.vortices[0].degree == 1);
  REQUIRE(distance(st.vortices[0].pos, a) < 2.0 * g.hx());
}

namespace {

VortexState frame_at(double t, std::vector<Vortex> vs) {
  VortexState st;
  st.t = t;
  st.vortices = std::move(vs);
  return st;
}

}  // namespace

TEST_CASE("track: stationary vortex runs to the horizon") {
  Grid g(65, 65, 1.0, 1.0);
  TrackParams params = TrackParams::make(g, 0.05, 0.01, 1.0);
  std::vector<VortexState> frames;
  for (int k = 0; k < 100; ++k)
    frames.push_back(frame_at(0.01 * k, {{{0.5, 0.5}, 1}}));
  auto res = track(frames, params);
  REQUIRE(res.trajectories.size() == 1);
  const auto& tr = res.trajectories[0];
  REQUIRE(tr.degree == 1);
  REQUIRE(tr.samples.size() == 100);
  REQUIRE(tr.termination == Termination::horizon);
  REQUIRE(tr.terminal_time == Approx(0.99));
}

TEST_CASE("track: approaching opposite pair collides at the same time") {
  Grid g(65, 65, 1.0, 1.0);
  TrackParams params = TrackParams::make(g, 0.02, 0.01, 2.0);
  std::vector<VortexState> frames;
  for (int k = 0; k <= 60; ++k) {
    const double t = 0.01 * k;
    const double x1 = 0.25 + 0.5 * t, x2 = 0.75 - 0.5 * t;
    frames.push_back(frame_at(t, {{{x1, 0.5}, 1}, {{x2, 0.5}, -1}}));
  }
  auto res = track(frames, params);
  REQUIRE(res.trajectories.size() == 2);
  for (const auto& tr : res.trajectories) {
    REQUIRE(tr.termination == Termination::collision);
    REQUIRE(tr.terminal_time ==
            Approx(res.trajectories[0].terminal_time).margin(1e-12));
  }
  // collision when gap 0.5 - t closes to r_coll
  const double expect = 0.5 - params.r_coll;
  REQUIRE(res.trajectories[0].terminal_time == Approx(expect).margin(0.011));
}

TEST_CASE("track: drift into the boundary reports exit") {
  Grid g(65, 65, 1.0, 1.0);
  TrackParams params = TrackParams::make(g, 0.02, 0.01, 2.0);
  std::vector<VortexState> frames;
  for (int k = 0; k <= 80; ++k) {
    const double t = 0.01 * k;
    const double x = 0.5 + 0.7 * t;
    if (x < 1.0 - 1e-6)
      frames.push_back(frame_at(t, {{{x, 0.5}, 1}}));
    else
      frames.push_back(frame_at(t, {}));
  }
  auto res = track(frames, params);
  REQUIRE(res.trajectories.size() == 1);
  REQUIRE(res.trajectories[0].termination == Termination::exit);
}

TEST_CASE("track is invariant under detection ordering") {
  Grid g(65, 65, 1.0, 1.0);
  TrackParams params = TrackParams::make(g, 0.02, 0.01, 2.0);
  std::vector<VortexState> frames, shuffled;
  std::mt19937 rng(7);
  for (int k = 0; k <= 40; ++k) {
    const double t = 0.01 * k;
    std::vector<Vortex> vs{{{0.3 + 0.2 * t, 0.4}, 1},
                           {{0.7 - 0.2 * t, 0.6}, 1},
                           {{0.5, 0.3 + 0.1 * t}, -1}};
    frames.push_back(frame_at(t, vs));
    std::shuffle(vs.begin(), vs.end(), rng);
    shuffled.push_back(frame_at(t, vs));
  }
  auto r1 = track(frames, params);
  auto r2 = track(shuffled, params);
  REQUIRE(r1.trajectories.size() == r2.trajectories.size());
  // match trajectories by initial position
  for (const auto& t1 : r1.trajectories) {
    bool found = false;
    for (const auto& t2 : r2.trajectories) {
      if (distance(t1.samples.front().second, t2.samples.front().second) <
          1e-12) {
        found = true;
        REQUIRE(t1.degree == t2.degree);
        REQUIRE(t1.samples.size() == t2.samples.size());
        REQUIRE(distance(t1.samples.back().second, t2.samples.back().second) <
                1e-12);
      }
    }
    REQUIRE(found);
  }
}

TEST_CASE("track reports ambiguity on exact ties deterministically") {
  Grid g(65, 65, 1.0, 1.0);
  TrackParams params = TrackParams::make(g, 0.02, 0.01, 2.0);
  std::vector<VortexState> frames;
  frames.push_back(frame_at(0.0, {{{0.5, 0.5}, 1}}));
  // two equidistant candidates
  frames.push_back(frame_at(0.01, {{{0.48, 0.5}, 1}, {{0.52, 0.5}, 1}}));
  auto res = track(frames, params);
  REQUIRE(res.ambiguities >= 1);
  REQUIRE(res.trajectories.size() == 1);
  REQUIRE(res.trajectories[0].samples.back().second.x == Approx(0.48));
}

TEST_CASE("continuity defect of the midpoint velocity is small") {
  Grid g(97, 97, 1.0, 1.0);
  ModelParams p;
  p.eps = 0.2;
  p.beta = 0.4;
  PinningLandscape lsc =
      PinningLandscape::gaussian(GaussianWell{{0.5, 0.5}, 0.3, 0.2});
  auto b = lsc.realize(g);
  VectorField Z(g);
  for (auto& z : Z.y) z = 0.2;
  ScalarField f(g, 0.0);
  auto ff = ForcingFields::make(b, Z, f, p.log_eps_abs());
  auto sim = GlSimulator::forced(p, ff);
  SimState st;
  st.u = ComplexField::sample(g, [](double x, double y) {
    const double mod = 0.9 + 0.05 * std::cos(kPi * x) * std::cos(2.0 * kPi * y);
    return mod * std::exp(std::complex<double>(0.0, 0.5 * std::sin(kPi * x) * y));
  });
  for (int k = 0; k < 40; ++k) sim.step(st, 5e-4);  // settle the stiff modes
  const double dt = 1e-3;
  auto u_prev = st.u;
  sim.step(st, dt);
  const double defect = continuity_defect(u_prev, st.u, dt);
  // scale of the two balancing terms
  auto m0 = vorticity(u_prev), m1 = vorticity(st.u);
  double scale = 0.0;
  for (std::size_t k = 0; k < m0.v.size(); ++k)
    scale = std::max(scale, std::abs((m1.v[k] - m0.v[k]) / dt));
  // the midpoint pairing cancels in time; only spatial commutators remain
  REQUIRE(defect < 0.05 * scale);
}
