#include "cyvortex/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cyvortex/error.hpp"
#include "cyvortex/parallel.hpp"

namespace cyv {

StripGrid::StripGrid(double T, std::size_t n_t, std::size_t n_theta) : T_(T), n_t_(n_t), n_theta_(n_theta) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::invalid_argument, "grid half-length T must be positive");
  if (n_t < 9) throw Error(ErrorCode::invalid_argument, "grid needs n_t >= 9");
  if (n_theta < 8 || n_theta % 2 != 0) throw Error(ErrorCode::invalid_argument, "grid needs an even n_theta >= 8");
  dt_ = 2.0 * T / static_cast<double>(n_t - 1);
  dtheta_ = two_pi / static_cast<double>(n_theta);
}

StripPoint StripGrid::snap_to_cell_center(const StripPoint& p) const {
  const double cells_t = static_cast<double>(n_t_ - 1);
  double ci = std::floor((p.t + T_) / dt_);
  ci = std::clamp(ci, 0.0, cells_t - 1.0);
  const double t = -T_ + (ci + 0.5) * dt_;
  double cj = std::floor(p.theta / dtheta_);
  cj = std::clamp(cj, 0.0, static_cast<double>(n_theta_ - 1));
  return {t, (cj + 0.5) * dtheta_};
}

std::string StripGrid::aspect_warning() const {
  const double ratio = dt_ / dtheta_;
  if (ratio < 0.25 || ratio > 4.0) {
    std::ostringstream msg;
    msg << "grid aspect ratio dt/dtheta = " << ratio << " outside [1/4, 4]";
    return msg.str();
  }
  return {};
}

bool GridField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_shape(const StripGrid& g, const GridField& f, const char* what) {
  if (!f.matches(g)) {
    std::ostringstream msg;
    msg << what << ": field shape " << f.n_t() << "x" << f.n_theta() << " does not match grid " << g.n_t() << "x"
        << g.n_theta();
    throw Error(ErrorCode::shape_mismatch, msg.str());
  }
}

GridField sample(const StripGrid& g, const std::function<double(const StripPoint&)>& sampler) {
  GridField out(g);
  parallel_for(g.n_t(), [&](std::size_t i) {
    for (std::size_t j = 0; j < g.n_theta(); ++j) out(i, j) = sampler(g.node(i, j));
  });
  for (std::size_t i = 0; i < g.n_t(); ++i) {
    for (std::size_t j = 0; j < g.n_theta(); ++j) {
      if (!std::isfinite(out(i, j))) {
        std::ostringstream msg;
        msg << "sampler returned " << out(i, j) << " at node (t = " << g.t(i) << ", theta = " << g.theta(j) << ")";
        throw Error(ErrorCode::invalid_argument, msg.str());
      }
    }
  }
  return out;
}

GridField sample_conformal_factor(const StripGrid& g, const CylinderMetric& metric) {
  if (!metric.covers(g.T())) {
    throw Error(ErrorCode::out_of_range, "metric does not cover the truncated strip [-T, T]");
  }
  return sample(g, [&](const StripPoint& p) { return metric.conformal_factor(p); });
}

GridField chart_laplacian(const StripGrid& g, const GridField& f) {
  require_shape(g, f, "chart_laplacian");
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  const double it2 = 1.0 / (g.dt() * g.dt());
  const double iq2 = 1.0 / (g.dtheta() * g.dtheta());
  GridField out(g);
  parallel_for(nt - 2, [&](std::size_t k) {
    const std::size_t i = k + 1;
    const double* up = &f(i + 1, 0);
    const double* mid = &f(i, 0);
    const double* dn = &f(i - 1, 0);
    double* o = &out(i, 0);
    for (std::size_t j = 0; j < nq; ++j) {
      const std::size_t jl = j == 0 ? nq - 1 : j - 1;
      const std::size_t jr = j + 1 == nq ? 0 : j + 1;
      o[j] = (up[j] - 2.0 * mid[j] + dn[j]) * it2 + (mid[jr] - 2.0 * mid[j] + mid[jl]) * iq2;
    }
  });
  return out;
}

GridField laplacian_apply(const StripGrid& g, const GridField& lambda, const GridField& f) {
  require_shape(g, lambda, "laplacian_apply(lambda)");
  GridField out = chart_laplacian(g, f);
  auto& v = out.values();
  const auto& l = lambda.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] /= l[k];
  return out;
}

GridField laplacian_apply(const StripGrid& g, const CylinderMetric& metric, const GridField& f) {
  return laplacian_apply(g, sample_conformal_factor(g, metric), f);
}

double integrate(const StripGrid& g, const GridField& lambda, const GridField& f) {
  require_shape(g, f, "integrate");
  require_shape(g, lambda, "integrate(lambda)");
  const double cell = g.dt() * g.dtheta();
  return parallel_row_sum(g.n_t(), [&](std::size_t i) {
           double s = 0.0;
           auto fr = f.row(i);
           auto lr = lambda.row(i);
           for (std::size_t j = 0; j < g.n_theta(); ++j) s += fr[j] * lr[j];
           return s * trapezoid_weight(g, i);
         }) *
         cell;
}

double integrate(const StripGrid& g, const CylinderMetric& metric, const GridField& f) {
  return integrate(g, sample_conformal_factor(g, metric), f);
}

double integrate_chart(const StripGrid& g, const GridField& f) {
  require_shape(g, f, "integrate_chart");
  const double cell = g.dt() * g.dtheta();
  return parallel_row_sum(g.n_t(), [&](std::size_t i) {
           double s = 0.0;
           for (double v : f.row(i)) s += v;
           return s * trapezoid_weight(g, i);
         }) *
         cell;
}

double chart_dirichlet_energy(const StripGrid& g, const GridField& f) {
  require_shape(g, f, "chart_dirichlet_energy");
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  const double it2 = 1.0 / (g.dt() * g.dt());
  const double iq2 = 1.0 / (g.dtheta() * g.dtheta());
  const double cell = g.dt() * g.dtheta();
  // Row i owns the t-edge (i, i+1) and its own theta-edges.
  return parallel_row_sum(nt, [&](std::size_t i) {
           double s = 0.0;
           if (i + 1 < nt) {
             for (std::size_t j = 0; j < nq; ++j) {
               const double d = f(i + 1, j) - f(i, j);
               s += d * d * it2;
             }
           }
           double q = 0.0;
           for (std::size_t j = 0; j < nq; ++j) {
             const double d = f(i, j + 1 == nq ? 0 : j + 1) - f(i, j);
             q += d * d * iq2;
           }
           return s + q * trapezoid_weight(g, i);
         }) *
         cell;
}

GridField derivative_t(const StripGrid& g, const GridField& f) {
  require_shape(g, f, "derivative_t");
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  const double h = g.dt();
  GridField out(g);
  parallel_for(nt, [&](std::size_t i) {
    for (std::size_t j = 0; j < nq; ++j) {
      if (i == 0) {
        out(i, j) = (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j)) / (2.0 * h);
      } else if (i + 1 == nt) {
        out(i, j) = (3.0 * f(i, j) - 4.0 * f(i - 1, j) + f(i - 2, j)) / (2.0 * h);
      } else {
        out(i, j) = (f(i + 1, j) - f(i - 1, j)) / (2.0 * h);
      }
    }
  });
  return out;
}

GridField derivative_theta(const StripGrid& g, const GridField& f) {
  require_shape(g, f, "derivative_theta");
  const std::size_t nq = g.n_theta();
  const double h = g.dtheta();
  GridField out(g);
  parallel_for(g.n_t(), [&](std::size_t i) {
    for (std::size_t j = 0; j < nq; ++j) {
      out(i, j) = (f(i, j + 1 == nq ? 0 : j + 1) - f(i, j == 0 ? nq - 1 : j - 1)) / (2.0 * h);
    }
  });
  return out;
}

double dot(const GridField& a, const GridField& b) {
  return parallel_row_sum(a.n_t(), [&](std::size_t i) {
    double s = 0.0;
    auto ar = a.row(i);
    auto br = b.row(i);
    for (std::size_t j = 0; j < ar.size(); ++j) s += ar[j] * br[j];
    return s;
  });
}

double max_abs(const GridField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace cyv
