#include "cyvortex/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cyvortex/parallel.hpp"

namespace cyv {

const char* to_string(PreconditionerKind kind) { return kind == PreconditionerKind::modal ? "modal" : "jacobi"; }

void apply_chart_operator(const StripGrid& g, const GridField& coeff, const GridField& v, GridField& out) {
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  const double it2 = 1.0 / (g.dt() * g.dt());
  const double iq2 = 1.0 / (g.dtheta() * g.dtheta());
  if (!out.matches(g)) out = GridField(g);
  parallel_for(nt, [&](std::size_t i) {
    double* o = &out(i, 0);
    if (i == 0 || i + 1 == nt) {
      std::fill(o, o + nq, 0.0);
      return;
    }
    const double* up = &v(i + 1, 0);
    const double* mid = &v(i, 0);
    const double* dn = &v(i - 1, 0);
    const double* c = &coeff(i, 0);
    for (std::size_t j = 0; j < nq; ++j) {
      const std::size_t jl = j == 0 ? nq - 1 : j - 1;
      const std::size_t jr = j + 1 == nq ? 0 : j + 1;
      o[j] = (up[j] - 2.0 * mid[j] + dn[j]) * it2 + (mid[jr] - 2.0 * mid[j] + mid[jl]) * iq2 - c[j] * mid[j];
    }
  });
}

namespace {

class ModalPreconditioner final : public Preconditioner {
 public:
  ModalPreconditioner(const StripGrid& g, const GridField& coeff) : g_(g) {
    const std::size_t n = g.n_theta();
    const std::size_t nt = g.n_t();
    basis_.assign(n * n, 0.0);
    eig_.assign(n, 0.0);
    const double norm0 = 1.0 / std::sqrt(static_cast<double>(n));
    const double norm1 = std::sqrt(2.0 / static_cast<double>(n));
    const double iq2 = 1.0 / (g.dtheta() * g.dtheta());
    // Mode layout: 0 -> constant, 2k-1 -> cos k, 2k -> sin k, n-1 -> Nyquist.
    for (std::size_t m = 0; m < n; ++m) {
      std::size_t k;
      if (m == 0) k = 0;
      else if (m == n - 1) k = n / 2;
      else k = (m + 1) / 2;
      const double s = std::sin(0.5 * static_cast<double>(k) * g.dtheta());
      eig_[m] = 4.0 * iq2 * s * s;
      for (std::size_t j = 0; j < n; ++j) {
        const double phase = static_cast<double>(k) * g.theta(j);
        double q;
        if (m == 0) q = norm0;
        else if (m == n - 1) q = (j % 2 == 0 ? norm0 : -norm0);
        else if (m % 2 == 1) q = norm1 * std::cos(phase);
        else q = norm1 * std::sin(phase);
        basis_[j * n + m] = q;
      }
    }
    // Row shifts a_i = mean_j max(coeff, 0).
    shift_.assign(nt, 0.0);
    for (std::size_t i = 1; i + 1 < nt; ++i) {
      double s = 0.0;
      for (double c : coeff.row(i)) s += std::max(c, 0.0);
      shift_[i] = s / static_cast<double>(n);
    }
    // Thomas factorisation per mode for interior rows 1..nt-2.
    const double it2 = 1.0 / (g.dt() * g.dt());
    const std::size_t ni = nt - 2;
    inv_pivot_.assign(n * ni, 0.0);
    upper_.assign(n * ni, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
      double prev_upper = 0.0;
      for (std::size_t k = 0; k < ni; ++k) {
        const double diag = -2.0 * it2 - eig_[m] - shift_[k + 1];
        const double pivot = diag - (k == 0 ? 0.0 : it2 * prev_upper);
        inv_pivot_[m * ni + k] = 1.0 / pivot;
        prev_upper = it2 / pivot;
        upper_[m * ni + k] = prev_upper;
      }
    }
  }

  void apply(const GridField& in, GridField& out) const override {
    const std::size_t n = g_.n_theta();
    const std::size_t nt = g_.n_t();
    const std::size_t ni = nt - 2;
    GridField hat(g_);
    parallel_for(ni, [&](std::size_t k) {
      const std::size_t i = k + 1;
      const double* r = &in(i, 0);
      double* h = &hat(i, 0);
      std::fill(h, h + n, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double rj = r[j];
        const double* q = &basis_[j * n];
        for (std::size_t m = 0; m < n; ++m) h[m] += rj * q[m];
      }
    });
    const double it2 = 1.0 / (g_.dt() * g_.dt());
    parallel_for(n, [&](std::size_t m) {
      const double* ip = &inv_pivot_[m * ni];
      const double* up = &upper_[m * ni];
      // forward elimination
      double prev = 0.0;
      for (std::size_t k = 0; k < ni; ++k) {
        const double v = (hat(k + 1, m) - (k == 0 ? 0.0 : it2 * prev)) * ip[k];
        hat(k + 1, m) = v;
        prev = v;
      }
      // back substitution
      for (std::size_t k = ni - 1; k-- > 0;) hat(k + 1, m) -= up[k] * hat(k + 2, m);
    });
    if (!out.matches(g_)) out = GridField(g_);
    parallel_for(nt, [&](std::size_t i) {
      double* o = &out(i, 0);
      if (i == 0 || i + 1 == nt) {
        std::fill(o, o + n, 0.0);
        return;
      }
      const double* h = &hat(i, 0);
      for (std::size_t j = 0; j < n; ++j) {
        const double* q = &basis_[j * n];
        double s = 0.0;
        for (std::size_t m = 0; m < n; ++m) s += h[m] * q[m];
        o[j] = s;
      }
    });
  }

 private:
  StripGrid g_;
  std::vector<double> basis_;
  std::vector<double> eig_;
  std::vector<double> shift_;
  std::vector<double> inv_pivot_;
  std::vector<double> upper_;
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  JacobiPreconditioner(const StripGrid& g, const GridField& coeff) : g_(g), inv_diag_(g) {
    const double base = 2.0 / (g.dt() * g.dt()) + 2.0 / (g.dtheta() * g.dtheta());
    for (std::size_t k = 0; k < coeff.size(); ++k) inv_diag_.values()[k] = -1.0 / (base + std::abs(coeff.values()[k]));
  }

  void apply(const GridField& in, GridField& out) const override {
    if (!out.matches(g_)) out = GridField(g_);
    const std::size_t nt = g_.n_t(), nq = g_.n_theta();
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = 0; j < nq; ++j) {
        out(i, j) = (i == 0 || i + 1 == nt) ? 0.0 : in(i, j) * inv_diag_(i, j);
      }
    }
  }

 private:
  StripGrid g_;
  GridField inv_diag_;
};

void axpy(double a, const GridField& x, GridField& y) {
  auto& yv = y.values();
  const auto& xv = x.values();
  for (std::size_t k = 0; k < yv.size(); ++k) yv[k] += a * xv[k];
}

}  // namespace

std::unique_ptr<Preconditioner> make_modal_preconditioner(const StripGrid& g, const GridField& coeff) {
  return std::make_unique<ModalPreconditioner>(g, coeff);
}

std::unique_ptr<Preconditioner> make_jacobi_preconditioner(const StripGrid& g, const GridField& coeff) {
  return std::make_unique<JacobiPreconditioner>(g, coeff);
}

std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const StripGrid& g,
                                                    const GridField& coeff) {
  if (kind == PreconditionerKind::jacobi) return make_jacobi_preconditioner(g, coeff);
  return make_modal_preconditioner(g, coeff);
}

KrylovResult gmres(const StripGrid& g, const LinearOperator& A, const Preconditioner& M, const GridField& b,
                   GridField& x, const KrylovOptions& options) {
  KrylovResult result;
  if (!x.matches(g)) x = GridField(g);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    x = GridField(g);
    result.converged = true;
    result.relative_residual = 0.0;
    return result;
  }
  const int m = std::max(1, options.restart);
  std::vector<GridField> V(m + 1, GridField(g));
  std::vector<GridField> Z(m, GridField(g));
  std::vector<double> H((m + 1) * m, 0.0);
  std::vector<double> cs(m), sn(m), s(m + 1);
  auto h = [&](int i, int j) -> double& { return H[i * m + j]; };

  GridField r(g), w(g);
  double last_cycle_residual = std::numeric_limits<double>::infinity();
  while (result.iterations < options.max_iter) {
    A(x, w);
    r = b;
    axpy(-1.0, w, r);
    double beta = std::sqrt(dot(r, r));
    result.relative_residual = beta / bnorm;
    if (!std::isfinite(beta)) {
      result.breakdown = true;
      result.message = "non-finite residual in GMRES";
      return result;
    }
    if (result.relative_residual <= options.tol) {
      result.converged = true;
      return result;
    }
    if (beta > 0.999 * last_cycle_residual) {
      result.breakdown = true;
      result.message = "GMRES stagnated across a restart cycle";
      return result;
    }
    last_cycle_residual = beta;
    V[0] = r;
    for (double& v : V[0].values()) v /= beta;
    std::fill(s.begin(), s.end(), 0.0);
    s[0] = beta;
    int k = 0;
    for (; k < m && result.iterations < options.max_iter; ++k) {
      ++result.iterations;
      M.apply(V[k], Z[k]);
      A(Z[k], w);
      for (int i = 0; i <= k; ++i) {
        h(i, k) = dot(w, V[i]);
        axpy(-h(i, k), V[i], w);
      }
      h(k + 1, k) = std::sqrt(dot(w, w));
      const bool lucky = h(k + 1, k) <= 1e-14 * beta;
      if (!lucky) {
        V[k + 1] = w;
        for (double& v : V[k + 1].values()) v /= h(k + 1, k);
      }
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double den = std::hypot(h(k, k), h(k + 1, k));
      if (den == 0.0 || !std::isfinite(den)) {
        result.breakdown = true;
        result.message = "GMRES Hessenberg breakdown";
        return result;
      }
      cs[k] = h(k, k) / den;
      sn[k] = h(k + 1, k) / den;
      h(k, k) = den;
      h(k + 1, k) = 0.0;
      s[k + 1] = -sn[k] * s[k];
      s[k] = cs[k] * s[k];
      result.relative_residual = std::abs(s[k + 1]) / bnorm;
      if (result.relative_residual <= options.tol || lucky) {
        ++k;
        break;
      }
    }
    // Solve the triangular system and update x.
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double t = s[i];
      for (int j = i + 1; j < k; ++j) t -= h(i, j) * y[j];
      y[i] = t / h(i, i);
    }
    for (int i = 0; i < k; ++i) axpy(y[i], Z[i], x);
    if (result.relative_residual <= options.tol) {
      // confirm with the true residual on the next pass
      A(x, w);
      r = b;
      axpy(-1.0, w, r);
      result.relative_residual = std::sqrt(dot(r, r)) / bnorm;
      if (result.relative_residual <= 10.0 * options.tol) {
        result.converged = true;
        return result;
      }
    }
  }
  std::ostringstream msg;
  msg << "GMRES reached " << result.iterations << " iterations at relative residual " << result.relative_residual;
  result.message = msg.str();
  return result;
}

}  // namespace cyv
