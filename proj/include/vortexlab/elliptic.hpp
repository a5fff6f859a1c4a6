#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vortexlab/errors.hpp"
#include "vortexlab/grid.hpp"

namespace vortexlab {

/// Per-edge boundary values at the grid's boundary nodes.
/// bottom/top are indexed by i (length nx), left/right by j (length ny).
struct EdgeValues {
  std::vector<double> bottom, top, left, right;

  static EdgeValues zero(const Grid& g) {
    EdgeValues e;
    e.bottom.assign(g.nx, 0.0);
    e.top.assign(g.nx, 0.0);
    e.left.assign(g.ny, 0.0);
    e.right.assign(g.ny, 0.0);
    return e;
  }

  static EdgeValues trace_of(const ScalarField& f) {
    const Grid& g = f.grid;
    EdgeValues e = zero(g);
    for (int i = 0; i < g.nx; ++i) {
      e.bottom[i] = f(i, 0);
      e.top[i] = f(i, g.ny - 1);
    }
    for (int j = 0; j < g.ny; ++j) {
      e.left[j] = f(0, j);
      e.right[j] = f(g.nx - 1, j);
    }
    return e;
  }
};

enum class BcKind { dirichlet, neumann };

/// Control-volume discretization of L u = -div(c grad u) + q u on the
/// node-centered grid. Face conductances use the arithmetic mean of c at the
/// two adjacent nodes; boundary control volumes are half (quarter) cells.
/// The resulting matrix is symmetric positive (semi-)definite.
class FvOperator {
public:
  FvOperator(const ScalarField& c, const ScalarField& q, BcKind bc)
      : grid_(c.grid), bc_(bc) {
    const Grid& g = grid_;
    const double hx = g.hx(), hy = g.hy();
    fe_.assign(g.size(), 0.0);
    fn_.assign(g.size(), 0.0);
    diag_.assign(g.size(), 0.0);
    cellw_.assign(g.size(), 0.0);

    auto wx = [&](int i) { return (i == 0 || i == g.nx - 1) ? 0.5 * hx : hx; };
    auto wy = [&](int j) { return (j == 0 || j == g.ny - 1) ? 0.5 * hy : hy; };

    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto k = g.idx(i, j);
        cellw_[k] = wx(i) * wy(j);
        if (i + 1 < g.nx)
          fe_[k] = 0.5 * (c(i, j) + c(i + 1, j)) * wy(j) / hx;
        if (j + 1 < g.ny)
          fn_[k] = 0.5 * (c(i, j) + c(i, j + 1)) * wx(i) / hy;
      }
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto k = g.idx(i, j);
        double d = q(i, j) * cellw_[k];
        if (i + 1 < g.nx) d += fe_[k];
        if (i > 0) d += fe_[g.idx(i - 1, j)];
        if (j + 1 < g.ny) d += fn_[k];
        if (j > 0) d += fn_[g.idx(i, j - 1)];
        diag_[k] = d;
      }
  }

  const Grid& grid() const { return grid_; }
  BcKind bc() const { return bc_; }
  bool is_unknown(int i, int j) const {
    return bc_ == BcKind::neumann || !grid_.on_boundary(i, j);
  }
  double cell_weight(std::size_t k) const { return cellw_[k]; }
  double diag(std::size_t k) const { return diag_[k]; }

  /// y = A x over unknown rows. For Dirichlet problems the caller keeps
  /// boundary entries of x at zero; boundary rows of y are set to zero.
  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const Grid& g = grid_;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto k = g.idx(i, j);
        if (!is_unknown(i, j)) {
          y[k] = 0.0;
          continue;
        }
        double r = diag_[k] * x[k];
        if (i + 1 < g.nx) r -= fe_[k] * x[k + 1];
        if (i > 0) r -= fe_[k - 1] * x[k - 1];
        if (j + 1 < g.ny) r -= fn_[k] * x[k + g.nx];
        if (j > 0) r -= fn_[k - g.nx] * x[k - g.nx];
        y[k] = r;
      }
  }

  /// Right-hand side from a volumetric source: s integrated over control
  /// volumes (unknown rows only).
  std::vector<double> source_rhs(const ScalarField& s) const {
    std::vector<double> rhs(grid_.size(), 0.0);
    for (int j = 0; j < grid_.ny; ++j)
      for (int i = 0; i < grid_.nx; ++i)
        if (is_unknown(i, j)) {
          const auto k = grid_.idx(i, j);
          rhs[k] = s.v[k] * cellw_[k];
        }
    return rhs;
  }

  /// Adds the natural-boundary flux term for Neumann problems:
  /// g = c du/dnu given on each edge; corners take both adjacent edges.
  void add_neumann_flux(const EdgeValues& g, std::vector<double>& rhs) const {
    const Grid& gr = grid_;
    const double hx = gr.hx(), hy = gr.hy();
    auto seg = [&](int k, int n, double h) {
      return (k == 0 || k == n - 1) ? 0.5 * h : h;
    };
    for (int i = 0; i < gr.nx; ++i) {
      rhs[gr.idx(i, 0)] += g.bottom[i] * seg(i, gr.nx, hx);
      rhs[gr.idx(i, gr.ny - 1)] += g.top[i] * seg(i, gr.nx, hx);
    }
    for (int j = 0; j < gr.ny; ++j) {
      rhs[gr.idx(0, j)] += g.left[j] * seg(j, gr.ny, hy);
      rhs[gr.idx(gr.nx - 1, j)] += g.right[j] * seg(j, gr.ny, hy);
    }
  }

  /// Moves known Dirichlet boundary values into the right-hand side.
  void add_dirichlet_data(const EdgeValues& trace,
                          std::vector<double>& rhs) const {
    const Grid& g = grid_;
    auto bval = [&](int i, int j) -> double {
      if (j == 0) return trace.bottom[i];
      if (j == g.ny - 1) return trace.top[i];
      if (i == 0) return trace.left[j];
      return trace.right[j];
    };
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) {
        const auto k = g.idx(i, j);
        if (i - 1 == 0) rhs[k] += fe_[k - 1] * bval(i - 1, j);
        if (i + 1 == g.nx - 1) rhs[k] += fe_[k] * bval(i + 1, j);
        if (j - 1 == 0) rhs[k] += fn_[k - g.nx] * bval(i, j - 1);
        if (j + 1 == g.ny - 1) rhs[k] += fn_[k] * bval(i, j + 1);
      }
  }

private:
  Grid grid_;
  BcKind bc_;
  std::vector<double> fe_, fn_, diag_, cellw_;
};

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. `singular` marks the pure
/// Neumann case: the right-hand side and residuals are kept orthogonal to
/// constants over the unknown rows.
inline SolveStats pcg(const FvOperator& A, std::vector<double> rhs,
                      std::vector<double>& x, double tol, int max_iter,
                      bool singular, const std::string& what) {
  const Grid& g = A.grid();
  const std::size_t n = g.size();
  x.assign(n, 0.0);

  std::vector<char> unknown(n, 0);
  std::size_t n_unknown = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (A.is_unknown(i, j)) {
        unknown[g.idx(i, j)] = 1;
        ++n_unknown;
      }

  auto project = [&](std::vector<double>& v) {
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (unknown[k]) mean += v[k];
    mean /= double(n_unknown);
    for (std::size_t k = 0; k < n; ++k)
      if (unknown[k]) v[k] -= mean;
  };
  if (singular) project(rhs);

  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (unknown[k]) s += a[k] * b[k];
    return s;
  };

  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) return {0, 0.0};

  std::vector<double> r = rhs, z(n, 0.0), p(n, 0.0), Ap(n, 0.0);
  auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    for (std::size_t k = 0; k < n; ++k)
      zz[k] = unknown[k] ? rr[k] / A.diag(k) : 0.0;
    if (singular) project(zz);
  };

  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    A.apply(p, Ap);
    const double pAp = dot(p, Ap);
    const double alpha = rz / pAp;
    for (std::size_t k = 0; k < n; ++k)
      if (unknown[k]) {
        x[k] += alpha * p[k];
        r[k] -= alpha * Ap[k];
      }
    if (singular) project(r);
    rel = std::sqrt(dot(r, r)) / rhs_norm;
    if (rel <= tol) return {it, rel};
    precondition(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k)
      if (unknown[k]) p[k] = z[k] + beta * p[k];
  }
  throw NonConvergence(what + ": conjugate-gradient iteration stalled", rel);
}

struct EllipticOptions {
  double tol = 1e-10;
  int max_iter_factor = 50;  // cap = factor * max(nx, ny)
};

/// -div(c grad u) + q u = s with flux data c du/dnu = g (natural Neumann).
/// Pass singular = true when q = 0 so the compatible projection applies.
inline ScalarField solve_neumann(const ScalarField& c, const ScalarField& q,
                                 const ScalarField& s, const EdgeValues& g,
                                 bool singular, const std::string& what,
                                 const EllipticOptions& opt = {}) {
  FvOperator A(c, q, BcKind::neumann);
  auto rhs = A.source_rhs(s);
  A.add_neumann_flux(g, rhs);
  ScalarField u(c.grid);
  pcg(A, std::move(rhs), u.v, opt.tol,
      opt.max_iter_factor * std::max(c.grid.nx, c.grid.ny), singular, what);
  return u;
}

/// -div(c grad u) + q u = s with Dirichlet trace u = g on the boundary.
inline ScalarField solve_dirichlet(const ScalarField& c, const ScalarField& q,
                                   const ScalarField& s, const EdgeValues& g,
                                   const std::string& what,
                                   const EllipticOptions& opt = {}) {
  FvOperator A(c, q, BcKind::dirichlet);
  auto rhs = A.source_rhs(s);
  A.add_dirichlet_data(g, rhs);
  ScalarField u(c.grid);
  pcg(A, std::move(rhs), u.v, opt.tol,
      opt.max_iter_factor * std::max(c.grid.nx, c.grid.ny), false, what);
  const Grid& gr = c.grid;
  for (int i = 0; i < gr.nx; ++i) {
    u(i, 0) = g.bottom[i];
    u(i, gr.ny - 1) = g.top[i];
  }
  for (int j = 0; j < gr.ny; ++j) {
    u(0, j) = g.left[j];
    u(gr.nx - 1, j) = g.right[j];
  }
  return u;
}

}  // namespace vortexlab
