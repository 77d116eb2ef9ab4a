#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace invopt {

using RealVector = std::vector<double>;

// Numerical failures (blow-ups, unstable steps, non-finite values).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / serialization failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration or shapes.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline bool all_finite(const RealVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

// Axis-aligned search box; low[i] < high[i] for every dimension.
struct Box {
  RealVector low, high;

  std::size_t dim() const { return low.size(); }

  void validate() const {
    require(low.size() == high.size(), "box: low/high dimension mismatch");
    require(!low.empty(), "box: empty");
    for (std::size_t i = 0; i < low.size(); ++i)
      require(low[i] < high[i], "box: low >= high in dimension " + std::to_string(i));
  }

  bool contains(const RealVector& x) const {
    if (x.size() != low.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < low[i] || x[i] > high[i]) return false;
    return true;
  }

  RealVector clamp(const RealVector& x) const {
    RealVector out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] < low[i]) out[i] = low[i];
      if (out[i] > high[i]) out[i] = high[i];
    }
    return out;
  }

  double width(std::size_t i) const { return high[i] - low[i]; }

  double max_width() const {
    double w = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) w = std::max(w, width(i));
    return w;
  }

  RealVector center() const {
    RealVector c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (low[i] + high[i]);
    return c;
  }
};

// Control parameters X_s tied to their search box Z. Clamping is always an
// explicit caller action; validate() rejects out-of-box values instead.
struct ControlParams {
  RealVector values;
  Box bounds;

  void validate() const {
    bounds.validate();
    require(values.size() == bounds.dim(), "control params: dimension mismatch");
    if (!all_finite(values)) throw NumericError("control params: non-finite value");
    require(bounds.contains(values), "control params: value outside bounds");
  }
};

}  // namespace invopt
