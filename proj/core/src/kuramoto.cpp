#include "invopt/sim/kuramoto.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "invopt/rng.hpp"

namespace invopt::sim {

namespace {

using Complex = std::complex<double>;

// FFTW plan creation is not thread safe; execution via fftw_execute_dft is.
// Plans are cached per grid size and built with FFTW_UNALIGNED so they can
// run on ordinary vector storage.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit PlanPair(int n) {
    std::vector<Complex> a(n), b(n);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft_1d(n, pa, pb, FFTW_FORWARD, flags);
    backward = fftw_plan_dft_1d(n, pa, pb, FFTW_BACKWARD, flags);
    if (!forward || !backward) throw NumericError("fftw plan creation failed");
  }
  ~PlanPair() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
};

const PlanPair& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<PlanPair>> cache;
  std::scoped_lock lock(mutex);
  auto& entry = cache[n];
  if (!entry) entry = std::make_unique<PlanPair>(n);
  return *entry;
}

void run_fft(const fftw_plan plan, std::vector<Complex>& in, std::vector<Complex>& out) {
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

// ETDRK4 scalar coefficients for one linear eigenvalue, averaged over a
// contour of 32 points around z = l*h to keep the phi functions stable
// near zero.
struct EtdCoeffs {
  double e, e2, q, f1, f2, f3;
};

EtdCoeffs etd_coeffs(double l, double h) {
  const int m = 32;
  const double z = l * h;
  Complex q{}, f1{}, f2{}, f3{};
  for (int j = 0; j < m; ++j) {
    const double theta = std::numbers::pi * (j + 0.5) / m;
    const Complex lr = z + std::polar(1.0, theta);
    const Complex elr = std::exp(lr);
    const Complex elr2 = std::exp(0.5 * lr);
    const Complex lr3 = lr * lr * lr;
    q += (elr2 - 1.0) / lr;
    f1 += (-4.0 - lr + elr * (4.0 - 3.0 * lr + lr * lr)) / lr3;
    f2 += (2.0 + lr + elr * (-2.0 + lr)) / lr3;
    f3 += (-4.0 - 3.0 * lr - lr * lr + elr * (4.0 - lr)) / lr3;
  }
  const double scale = h / m;
  return {std::exp(z), std::exp(0.5 * z), scale * q.real(), scale * f1.real(),
          scale * f2.real(), scale * f3.real()};
}

}  // namespace

void KSSpec::validate() const {
  require(grid_points >= 16, "ks grid needs at least 16 points");
  require((grid_points & (grid_points - 1)) == 0, "ks grid size must be a power of two");
  require(domain_length > 0.0, "ks domain length must be positive");
  require(end_time > 0.0, "ks end time must be positive");
  require(frame_interval > 0.0 && internal_dt > 0.0, "ks time steps must be positive");
  double ratio = frame_interval / internal_dt;
  require(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio,
          "frame_interval must be an integer multiple of internal_dt");
  ratio = end_time / frame_interval;
  require(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio,
          "end_time must be an integer multiple of frame_interval");
  if (!forcing.empty()) {
    require(static_cast<int>(forcing.size()) == grid_points, "forcing size mismatch");
    require(all_finite(forcing), "forcing is not finite");
  }
}

int KSSpec::frame_count() const {
  return static_cast<int>(std::round(end_time / frame_interval)) + 1;
}

int KSSpec::steps_per_frame() const {
  return static_cast<int>(std::round(frame_interval / internal_dt));
}

RealVector KSSpec::resolved_forcing() const {
  if (!forcing.empty()) return forcing;
  RealVector g(grid_points);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < grid_points; ++i)
    g[i] = std::sin(two_pi * i / grid_points);
  return g;
}

Trajectory ks_simulate(const KSSpec& spec, const RealVector& u0, double alpha, double beta) {
  spec.validate();
  const int n = spec.grid_points;
  require(static_cast<int>(u0.size()) == n, "initial state size mismatch");
  require(all_finite(u0), "initial state is not finite");
  require(alpha >= -1.0 && alpha <= 1.0, "alpha out of range [-1, 1]");
  require(beta >= 0.25 && beta <= 0.75, "beta out of range [1/4, 3/4]");

  const PlanPair& plans = plans_for(n);
  const double two_pi = 2.0 * std::numbers::pi;
  const double inv_n = 1.0 / n;

  std::vector<double> k(n);
  for (int i = 0; i < n; ++i) {
    const int m = (i <= n / 2) ? i : i - n;
    k[i] = two_pi * m / spec.domain_length;
  }
  std::vector<EtdCoeffs> coef(n);
  for (int i = 0; i < n; ++i) {
    const double l = k[i] * k[i] - std::pow(k[i], 4);
    coef[i] = etd_coeffs(l, spec.internal_dt);
  }
  // 2/3 rule: drop the top third of modes from the nonlinear product.
  std::vector<double> mask(n, 1.0);
  for (int i = 0; i < n; ++i) {
    const int m = (i <= n / 2) ? i : n - i;
    if (m > n / 3) mask[i] = 0.0;
  }

  std::vector<Complex> scratch(n), spectrum(n), field(n);
  auto to_spectrum = [&](const std::vector<Complex>& phys, std::vector<Complex>& spec_out) {
    scratch = phys;
    run_fft(plans.forward, scratch, spec_out);
  };
  auto to_field = [&](const std::vector<Complex>& spec_in, std::vector<Complex>& phys) {
    scratch = spec_in;
    run_fft(plans.backward, scratch, phys);
    for (Complex& c : phys) c *= inv_n;
  };

  const RealVector g = spec.resolved_forcing();
  for (int i = 0; i < n; ++i) field[i] = g[i];
  std::vector<Complex> g_hat(n);
  to_spectrum(field, g_hat);

  for (int i = 0; i < n; ++i) field[i] = u0[i];
  std::vector<Complex> v(n);
  to_spectrum(field, v);

  // N(v) = alpha*G_hat - (beta/2)*i*k*fft(ifft(v)^2), dealiased.
  std::vector<Complex> nl_field(n), nl_spec(n);
  auto nonlinear = [&](const std::vector<Complex>& v_in, std::vector<Complex>& out) {
    to_field(v_in, nl_field);
    for (int i = 0; i < n; ++i) {
      const double ur = nl_field[i].real();
      nl_field[i] = Complex(ur * ur, 0.0);
    }
    to_spectrum(nl_field, nl_spec);
    for (int i = 0; i < n; ++i) {
      const Complex deriv = Complex(0.0, k[i]) * nl_spec[i] * mask[i];
      out[i] = alpha * g_hat[i] - 0.5 * beta * deriv;
    }
  };

  Trajectory out;
  out.system_id = "kuramoto_sivashinsky";
  out.frames.reserve(spec.frame_count());
  out.frame_times.reserve(spec.frame_count());
  out.frames.push_back(u0);
  out.frame_times.push_back(0.0);

  std::vector<Complex> nv(n), na(n), nb(n), nc(n), va(n), vb(n), vc(n);
  const int steps = spec.steps_per_frame();
  double t = 0.0;
  for (int frame = 1; frame < spec.frame_count(); ++frame) {
    for (int s = 0; s < steps; ++s) {
      nonlinear(v, nv);
      for (int i = 0; i < n; ++i) va[i] = coef[i].e2 * v[i] + coef[i].q * nv[i];
      nonlinear(va, na);
      for (int i = 0; i < n; ++i) vb[i] = coef[i].e2 * v[i] + coef[i].q * na[i];
      nonlinear(vb, nb);
      for (int i = 0; i < n; ++i)
        vc[i] = coef[i].e2 * va[i] + coef[i].q * (2.0 * nb[i] - nv[i]);
      nonlinear(vc, nc);
      for (int i = 0; i < n; ++i)
        v[i] = coef[i].e * v[i] + coef[i].f1 * nv[i] + 2.0 * coef[i].f2 * (na[i] + nb[i]) +
               coef[i].f3 * nc[i];
      t += spec.internal_dt;
      double energy = 0.0;
      for (const Complex& c : v) energy += std::norm(c);
      if (!std::isfinite(energy) || energy > 1e16) {
        std::ostringstream msg;
        msg << "kuramoto-sivashinsky state diverged near t = " << t;
        throw NumericError(msg.str());
      }
    }
    to_field(v, field);
    RealVector u(n);
    for (int i = 0; i < n; ++i) u[i] = field[i].real();
    out.frames.push_back(std::move(u));
    out.frame_times.push_back(spec.frame_interval * frame);
  }
  return out;
}

RealVector ks_random_initial_state(const KSSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = make_rng(derive_seed(seed, "ks-u0"));
  const double two_pi = 2.0 * std::numbers::pi;
  RealVector u(spec.grid_points, 0.0);
  for (int mode = 1; mode <= 6; ++mode) {
    const double amp = uniform(rng, -0.6, 0.6);
    const double phase = uniform(rng, 0.0, two_pi);
    for (int i = 0; i < spec.grid_points; ++i)
      u[i] += amp * std::cos(two_pi * mode * i / spec.grid_points + phase);
  }
  return u;
}

}  // namespace invopt::sim
