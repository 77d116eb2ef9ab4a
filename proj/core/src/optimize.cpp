#include "invopt/opt/optimize.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace invopt::opt {

namespace {

double norm2(const RealVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const RealVector& a, const RealVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

RealVector eval_gradient(const Objective& obj, const RealVector& x) {
  if (obj.gradient) {
    RealVector g = obj.gradient(x);
    require(g.size() == x.size(), "gradient length does not match the point");
    return g;
  }
  return fd_gradient(obj, x);
}

void check_start(const Objective& obj, const RealVector& x0) {
  obj.validate();
  require(x0.size() == obj.bounds.dim(), "start point/bounds dimension mismatch");
  require(all_finite(x0), "start point is not finite");
}

// Row-major square matrix acting as the inverse-Hessian approximation.
struct DenseMatrix {
  std::size_t n;
  RealVector a;

  explicit DenseMatrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {
    for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] = 1.0;
  }
  void reset_identity() {
    std::fill(a.begin(), a.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  }
  RealVector multiply(const RealVector& v) const {
    RealVector out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i] += a[i * n + j] * v[j];
    return out;
  }
  // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
  void bfgs_update(const RealVector& s, const RealVector& y, double rho) {
    const RealVector hy = multiply(y);
    RealVector yth(n, 0.0);  // y^T H
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) yth[j] += y[i] * a[i * n + j];
    const double yhy = dot(y, hy);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a[i * n + j] += -rho * (s[i] * yth[j] + hy[i] * s[j]) +
                        rho * rho * yhy * s[i] * s[j] + rho * s[i] * s[j];
  }
};

struct LineSearchResult {
  bool accepted = false;
  RealVector x;
  double value = 0.0;
  bool clamped = false;
  bool pinned = true;  // no trial step escaped the clamp at all
};

LineSearchResult armijo_search(const Objective& obj, const RealVector& x, double f,
                               const RealVector& g, const RealVector& direction,
                               const BfgsOptions& opt) {
  LineSearchResult r;
  double t = 1.0;
  while (t >= opt.min_step) {
    RealVector raw(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) raw[i] = x[i] + t * direction[i];
    RealVector candidate = obj.bounds.clamp(raw);
    RealVector step(x.size());
    bool moved = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      step[i] = candidate[i] - x[i];
      moved = moved || step[i] != 0.0;
    }
    if (moved) {
      r.pinned = false;
      // A candidate the objective cannot evaluate is rejected like a
      // non-decreasing one; only the shrunken trials below it matter.
      double f_new;
      try {
        f_new = obj.evaluate(candidate);
      } catch (const NumericError&) {
        t *= opt.shrink;
        continue;
      }
      if (std::isfinite(f_new) && f_new < f &&
          f_new <= f + opt.armijo_c * dot(g, step)) {
        r.accepted = true;
        r.clamped = candidate != raw;
        r.x = std::move(candidate);
        r.value = f_new;
        return r;
      }
    }
    t *= opt.shrink;
  }
  return r;
}

}  // namespace

RealVector fd_gradient(const Objective& obj, const RealVector& x) {
  RealVector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-4 * obj.bounds.width(i);
    RealVector xp = x, xm = x;
    xp[i] = std::min(x[i] + h, obj.bounds.high[i]);
    xm[i] = std::max(x[i] - h, obj.bounds.low[i]);
    const double span = xp[i] - xm[i];
    require(span > 0.0, "degenerate bounds for finite differences");
    g[i] = (obj.evaluate(xp) - obj.evaluate(xm)) / span;
  }
  return g;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::gradient_tol: return "gradient_tol";
    case Termination::max_iter: return "max_iter";
    case Termination::line_search_fail: return "line_search_fail";
    case Termination::bound_hit: return "bound_hit";
  }
  throw ConfigError("unknown termination");
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::primary: return "primary";
    case Stage::secondary: return "secondary";
    case Stage::baseline: return "baseline";
  }
  throw ConfigError("unknown stage");
}

OptTrace bfgs(const Objective& obj, const RealVector& x0, const BfgsOptions& options,
              Stage stage) {
  check_start(obj, x0);
  const std::size_t n = x0.size();

  RealVector x = obj.bounds.clamp(x0);
  double f = obj.evaluate(x);
  if (!std::isfinite(f)) throw NumericError("objective is not finite at the start point");
  RealVector g = eval_gradient(obj, x);

  OptTrace trace;
  trace.stage = stage;
  trace.termination = Termination::max_iter;
  trace.iterates.push_back({x, f, norm2(g)});

  DenseMatrix h(n);
  int consecutive_clamps = 0;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (norm2(g) < options.gradient_tol) {
      trace.termination = Termination::gradient_tol;
      return trace;
    }
    RealVector direction = h.multiply(g);
    for (double& d : direction) d = -d;
    if (dot(direction, g) >= 0.0) {  // not a descent direction, restart curvature
      h.reset_identity();
      direction = g;
      for (double& d : direction) d = -d;
    }

    const LineSearchResult ls = armijo_search(obj, x, f, g, direction, options);
    if (!ls.accepted) {
      trace.termination =
          ls.pinned ? Termination::bound_hit : Termination::line_search_fail;
      return trace;
    }

    RealVector g_new = eval_gradient(obj, ls.x);
    RealVector s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ls.x[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12)
      h.bfgs_update(s, y, 1.0 / sy);
    else
      ++trace.curvature_skips;

    x = ls.x;
    f = ls.value;
    g = std::move(g_new);
    trace.iterates.push_back({x, f, norm2(g)});

    consecutive_clamps = ls.clamped ? consecutive_clamps + 1 : 0;
    if (consecutive_clamps >= options.clamp_limit) {
      trace.termination = Termination::bound_hit;
      return trace;
    }
  }
  return trace;
}

OptTrace gradient_descent(const Objective& obj, const RealVector& x0,
                          double learning_rate, int max_iter,
                          const BfgsOptions& options, Stage stage) {
  check_start(obj, x0);
  require(learning_rate > 0.0, "learning rate must be positive");

  RealVector x = obj.bounds.clamp(x0);
  double f = obj.evaluate(x);
  if (!std::isfinite(f)) throw NumericError("objective is not finite at the start point");
  RealVector g = eval_gradient(obj, x);

  OptTrace trace;
  trace.stage = stage;
  trace.termination = Termination::max_iter;
  trace.iterates.push_back({x, f, norm2(g)});

  int consecutive_clamps = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (norm2(g) < options.gradient_tol) {
      trace.termination = Termination::gradient_tol;
      return trace;
    }
    RealVector raw(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) raw[i] = x[i] - learning_rate * g[i];
    RealVector candidate = obj.bounds.clamp(raw);
    if (candidate == x) {
      trace.termination = Termination::bound_hit;
      return trace;
    }
    // Fixed-step descent cannot shrink past a failed evaluation, so a
    // candidate that blows up ends the run at the last good iterate.
    double f_new;
    try {
      f_new = obj.evaluate(candidate);
    } catch (const NumericError&) {
      trace.termination = Termination::line_search_fail;
      return trace;
    }
    if (!std::isfinite(f_new) || f_new >= f) {
      trace.termination = Termination::line_search_fail;
      return trace;
    }
    const bool clamped = candidate != raw;
    x = std::move(candidate);
    f = f_new;
    g = eval_gradient(obj, x);
    trace.iterates.push_back({x, f, norm2(g)});
    consecutive_clamps = clamped ? consecutive_clamps + 1 : 0;
    if (consecutive_clamps >= options.clamp_limit) {
      trace.termination = Termination::bound_hit;
      return trace;
    }
  }
  return trace;
}

OptResult two_step_core(const Objective& primary, const Objective& secondary,
                        const RealVector& x0, const BfgsOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  OptResult result;
  result.primary_trace = bfgs(primary, x0, options, Stage::primary);
  result.secondary_trace =
      bfgs(secondary, result.primary_trace.final_params(), options, Stage::secondary);
  result.has_secondary = true;
  result.x_predicted.values = result.secondary_trace.final_params();
  result.x_predicted.bounds = secondary.bounds;
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void save_traces_csv(const std::string& path, const std::vector<OptTrace>& traces,
                     const std::vector<std::string>& param_names) {
  require(!traces.empty(), "no traces to save");
  for (const OptTrace& t : traces) {
    require(!t.iterates.empty(), "trace has no iterates");
    require(t.iterates.front().params.size() == param_names.size(),
            "trace/parameter-name dimension mismatch");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "stage,iteration";
  for (const std::string& name : param_names) out << ',' << name;
  out << ",value,grad_norm\n";
  char buf[64];
  for (const OptTrace& t : traces) {
    for (std::size_t i = 0; i < t.iterates.size(); ++i) {
      const OptIterate& it = t.iterates[i];
      out << to_string(t.stage) << ',' << i;
      for (double v : it.params) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
      }
      std::snprintf(buf, sizeof buf, "%.17g", it.value);
      out << ',' << buf;
      std::snprintf(buf, sizeof buf, "%.17g", it.grad_norm);
      out << ',' << buf << '\n';
    }
  }
  if (!out.good()) throw IoError("failed writing " + path);
}

}  // namespace invopt::opt
