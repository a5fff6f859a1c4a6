#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace vortexlab {

/// Uniform node-centered grid on the closed rectangle [0,lx] x [0,ly].
/// Node (i,j) sits at (i*hx, j*hy); data are stored row-major, x fastest.
struct Grid {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;

  Grid() = default;
  Grid(int nx, int ny, double lx, double ly) : nx(nx), ny(ny), lx(lx), ly(ly) {
    assert(nx >= 2 && ny >= 2 && lx > 0.0 && ly > 0.0);
  }

  double hx() const { return lx / (nx - 1); }
  double hy() const { return ly / (ny - 1); }
  std::size_t size() const { return std::size_t(nx) * std::size_t(ny); }
  std::size_t idx(int i, int j) const { return std::size_t(j) * nx + i; }
  double x(int i) const { return i * hx(); }
  double y(int j) const { return j * hy(); }
  bool on_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  /// Distance from a point to the boundary of the rectangle (interior >= 0).
  double boundary_distance(double px, double py) const {
    return std::min(std::min(px, lx - px), std::min(py, ly - py));
  }
  bool contains(double px, double py) const {
    return px >= 0.0 && px <= lx && py >= 0.0 && py <= ly;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.nx == b.nx && a.ny == b.ny && a.lx == b.lx && a.ly == b.ly;
  }
};

struct ScalarField {
  Grid grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0)
      : grid(g), v(g.size(), fill) {}

  double& operator()(int i, int j) { return v[grid.idx(i, j)]; }
  double operator()(int i, int j) const { return v[grid.idx(i, j)]; }

  static ScalarField sample(const Grid& g,
                            const std::function<double(double, double)>& f) {
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) out(i, j) = f(g.x(i), g.y(j));
    return out;
  }
};

struct VectorField {
  Grid grid;
  std::vector<double> x;
  std::vector<double> y;

  VectorField() = default;
  explicit VectorField(const Grid& g)
      : grid(g), x(g.size(), 0.0), y(g.size(), 0.0) {}

  static VectorField sample(const Grid& g,
                            const std::function<double(double, double)>& fx,
                            const std::function<double(double, double)>& fy) {
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        out.x[g.idx(i, j)] = fx(g.x(i), g.y(j));
        out.y[g.idx(i, j)] = fy(g.x(i), g.y(j));
      }
    return out;
  }
};

/// Complex field u: Omega -> C stored as separate real and imaginary parts.
struct ComplexField {
  Grid grid;
  std::vector<double> re;
  std::vector<double> im;

  ComplexField() = default;
  explicit ComplexField(const Grid& g)
      : grid(g), re(g.size(), 0.0), im(g.size(), 0.0) {}

  std::complex<double> at(int i, int j) const {
    auto k = grid.idx(i, j);
    return {re[k], im[k]};
  }
  void set(int i, int j, std::complex<double> z) {
    auto k = grid.idx(i, j);
    re[k] = z.real();
    im[k] = z.imag();
  }
  double abs2(int i, int j) const {
    auto k = grid.idx(i, j);
    return re[k] * re[k] + im[k] * im[k];
  }

  static ComplexField sample(
      const Grid& g,
      const std::function<std::complex<double>(double, double)>& f) {
    ComplexField out(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) out.set(i, j, f(g.x(i), g.y(j)));
    return out;
  }
};

namespace detail {

// d/dx along rows: centered in the interior, one-sided second order on the
// first/last column.
inline void ddx_raw(const Grid& g, const double* f, double* out) {
  const double h = g.hx();
  const int nx = g.nx;
  for (int j = 0; j < g.ny; ++j) {
    const double* r = f + std::size_t(j) * nx;
    double* o = out + std::size_t(j) * nx;
    o[0] = (-3.0 * r[0] + 4.0 * r[1] - r[2]) / (2.0 * h);
    for (int i = 1; i < nx - 1; ++i) o[i] = (r[i + 1] - r[i - 1]) / (2.0 * h);
    o[nx - 1] = (3.0 * r[nx - 1] - 4.0 * r[nx - 2] + r[nx - 3]) / (2.0 * h);
  }
}

inline void ddy_raw(const Grid& g, const double* f, double* out) {
  const double h = g.hy();
  const int nx = g.nx, ny = g.ny;
  auto row = [&](int j) { return f + std::size_t(j) * nx; };
  for (int i = 0; i < nx; ++i) {
    out[i] = (-3.0 * row(0)[i] + 4.0 * row(1)[i] - row(2)[i]) / (2.0 * h);
    out[std::size_t(ny - 1) * nx + i] =
        (3.0 * row(ny - 1)[i] - 4.0 * row(ny - 2)[i] + row(ny - 3)[i]) /
        (2.0 * h);
  }
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 0; i < nx; ++i)
      out[std::size_t(j) * nx + i] = (row(j + 1)[i] - row(j - 1)[i]) / (2.0 * h);
}

// Second derivative along x: 5-point interior, one-sided second order at the
// first/last column (4-point stencil), so no ghost data is needed.
inline void d2dx2_raw(const Grid& g, const double* f, double* out) {
  const double h2 = g.hx() * g.hx();
  const int nx = g.nx;
  for (int j = 0; j < g.ny; ++j) {
    const double* r = f + std::size_t(j) * nx;
    double* o = out + std::size_t(j) * nx;
    o[0] = (2.0 * r[0] - 5.0 * r[1] + 4.0 * r[2] - r[3]) / h2;
    for (int i = 1; i < nx - 1; ++i)
      o[i] = (r[i + 1] - 2.0 * r[i] + r[i - 1]) / h2;
    o[nx - 1] =
        (2.0 * r[nx - 1] - 5.0 * r[nx - 2] + 4.0 * r[nx - 3] - r[nx - 4]) / h2;
  }
}

inline void d2dy2_raw(const Grid& g, const double* f, double* out) {
  const double h2 = g.hy() * g.hy();
  const int nx = g.nx, ny = g.ny;
  auto row = [&](int j) { return f + std::size_t(j) * nx; };
  for (int i = 0; i < nx; ++i) {
    out[i] = (2.0 * row(0)[i] - 5.0 * row(1)[i] + 4.0 * row(2)[i] -
              row(3)[i]) / h2;
    out[std::size_t(ny - 1) * nx + i] =
        (2.0 * row(ny - 1)[i] - 5.0 * row(ny - 2)[i] + 4.0 * row(ny - 3)[i] -
         row(ny - 4)[i]) / h2;
  }
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 0; i < nx; ++i)
      out[std::size_t(j) * nx + i] =
          (row(j + 1)[i] - 2.0 * row(j)[i] + row(j - 1)[i]) / h2;
}

}  // namespace detail

inline ScalarField ddx(const ScalarField& f) {
  ScalarField out(f.grid);
  detail::ddx_raw(f.grid, f.v.data(), out.v.data());
  return out;
}

inline ScalarField ddy(const ScalarField& f) {
  ScalarField out(f.grid);
  detail::ddy_raw(f.grid, f.v.data(), out.v.data());
  return out;
}

inline VectorField gradient(const ScalarField& f) {
  VectorField out(f.grid);
  detail::ddx_raw(f.grid, f.v.data(), out.x.data());
  detail::ddy_raw(f.grid, f.v.data(), out.y.data());
  return out;
}

inline ScalarField laplacian(const ScalarField& f) {
  ScalarField out(f.grid);
  std::vector<double> tmp(f.grid.size());
  detail::d2dx2_raw(f.grid, f.v.data(), out.v.data());
  detail::d2dy2_raw(f.grid, f.v.data(), tmp.data());
  for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] += tmp[k];
  return out;
}

inline ScalarField divergence(const VectorField& X) {
  ScalarField out(X.grid);
  std::vector<double> tmp(X.grid.size());
  detail::ddx_raw(X.grid, X.x.data(), out.v.data());
  detail::ddy_raw(X.grid, X.y.data(), tmp.data());
  for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] += tmp[k];
  return out;
}

/// curl X = d1 X2 - d2 X1.
inline ScalarField curl(const VectorField& X) {
  ScalarField out(X.grid);
  std::vector<double> tmp(X.grid.size());
  detail::ddx_raw(X.grid, X.y.data(), out.v.data());
  detail::ddy_raw(X.grid, X.x.data(), tmp.data());
  for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] -= tmp[k];
  return out;
}

/// X_perp = (-X2, X1), the pointwise rotation by +pi/2.
inline VectorField perp(const VectorField& X) {
  VectorField out(X.grid);
  for (std::size_t k = 0; k < X.x.size(); ++k) {
    out.x[k] = -X.y[k];
    out.y[k] = X.x[k];
  }
  return out;
}

inline VectorField perp_gradient(const ScalarField& f) {
  VectorField g = gradient(f);
  return perp(g);
}

inline ComplexField ddx(const ComplexField& u) {
  ComplexField out(u.grid);
  detail::ddx_raw(u.grid, u.re.data(), out.re.data());
  detail::ddx_raw(u.grid, u.im.data(), out.im.data());
  return out;
}

inline ComplexField ddy(const ComplexField& u) {
  ComplexField out(u.grid);
  detail::ddy_raw(u.grid, u.re.data(), out.re.data());
  detail::ddy_raw(u.grid, u.im.data(), out.im.data());
  return out;
}

inline ComplexField laplacian(const ComplexField& u) {
  ComplexField out(u.grid);
  std::vector<double> tmp(u.grid.size());
  detail::d2dx2_raw(u.grid, u.re.data(), out.re.data());
  detail::d2dy2_raw(u.grid, u.re.data(), tmp.data());
  for (std::size_t k = 0; k < tmp.size(); ++k) out.re[k] += tmp[k];
  detail::d2dx2_raw(u.grid, u.im.data(), out.im.data());
  detail::d2dy2_raw(u.grid, u.im.data(), tmp.data());
  for (std::size_t k = 0; k < tmp.size(); ++k) out.im[k] += tmp[k];
  return out;
}

/// Covariant gradient nabla_A u = (d1 u - i A1 u, d2 u - i A2 u),
/// component-wise with the same stencils as gradient.
inline std::pair<ComplexField, ComplexField> covariant_gradient(
    const ComplexField& u, const VectorField& A) {
  assert(u.grid == A.grid);
  ComplexField gx = ddx(u), gy = ddy(u);
  for (std::size_t k = 0; k < u.re.size(); ++k) {
    // -i A u = -i A (re + i im) = A im - i A re
    gx.re[k] += A.x[k] * u.im[k];
    gx.im[k] -= A.x[k] * u.re[k];
    gy.re[k] += A.y[k] * u.im[k];
    gy.im[k] -= A.y[k] * u.re[k];
  }
  return {std::move(gx), std::move(gy)};
}

/// Pointwise real inner product (a,b) = Re(a)Re(b) + Im(a)Im(b).
inline ScalarField inner_product(const ComplexField& a,
                                 const ComplexField& b) {
  assert(a.grid == b.grid);
  ScalarField out(a.grid);
  for (std::size_t k = 0; k < out.v.size(); ++k)
    out.v[k] = a.re[k] * b.re[k] + a.im[k] * b.im[k];
  return out;
}

/// Vector variant (a, X) for a complex-vector X = (X1, X2).
inline VectorField inner_product(const ComplexField& a, const ComplexField& X1,
                                 const ComplexField& X2) {
  VectorField out(a.grid);
  for (std::size_t k = 0; k < out.x.size(); ++k) {
    out.x[k] = a.re[k] * X1.re[k] + a.im[k] * X1.im[k];
    out.y[k] = a.re[k] * X2.re[k] + a.im[k] * X2.im[k];
  }
  return out;
}

/// Trapezoidal quadrature over the rectangle.
inline double integrate(const ScalarField& f) {
  const Grid& g = f.grid;
  double sum = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    double rowsum = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      const double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      rowsum += wx * f(i, j);
    }
    sum += wy * rowsum;
  }
  return sum * g.hx() * g.hy();
}

/// Trapezoidal quadrature of the boundary trace over the four edges;
/// corner nodes carry weight 1/2 within each adjacent edge.
inline double integrate_boundary(const ScalarField& f) {
  const Grid& g = f.grid;
  auto edge_w = [](int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
  double sum = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const double w = edge_w(i, g.nx) * g.hx();
    sum += w * (f(i, 0) + f(i, g.ny - 1));
  }
  for (int j = 0; j < g.ny; ++j) {
    const double w = edge_w(j, g.ny) * g.hy();
    sum += w * (f(0, j) + f(g.nx - 1, j));
  }
  return sum;
}

inline double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const VectorField& X) {
  double m = 0.0;
  for (std::size_t k = 0; k < X.x.size(); ++k)
    m = std::max(m, std::hypot(X.x[k], X.y[k]));
  return m;
}

inline double max_abs(const ComplexField& u) {
  double m = 0.0;
  for (std::size_t k = 0; k < u.re.size(); ++k)
    m = std::max(m, std::sqrt(u.re[k] * u.re[k] + u.im[k] * u.im[k]));
  return m;
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace vortexlab
