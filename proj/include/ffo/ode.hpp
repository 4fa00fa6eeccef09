#ifndef FFO_ODE_HPP
#define FFO_ODE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ffo {

struct OdeError : std::runtime_error {
  double t;
  OdeError(const std::string& msg, double t_) : std::runtime_error(msg), t(t_) {}
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
};

template <std::size_t N>
using OdeState = std::array<std::complex<double>, N>;

// Embedded Dormand-Prince 5(4) pair with PI step control. The integrator
// never steps past the next sample time, so every sample is hit exactly and
// the effective step is bounded by the output spacing.
//
// rhs:      void(double t, const OdeState<N>& y, OdeState<N>& dydt)
// observe:  void(std::size_t sample_index, double t, const OdeState<N>& y)
//           called for every entry of sample_times, including the first.
template <std::size_t N, class Rhs, class Observer>
void integrate_dopri5(Rhs&& rhs, OdeState<N> y, std::span<const double> sample_times,
                      const OdeOptions& opt, Observer&& observe) {
  if (sample_times.size() < 2) throw OdeError("need at least two sample times", 0.0);
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (!(sample_times[i] > sample_times[i - 1]))
      throw OdeError("sample times must be strictly increasing", sample_times[i]);

  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b(5th) - b(4th)
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

  double t = sample_times[0];
  observe(0, t, y);

  OdeState<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  rhs(t, y, k1);
  bool k1_valid = true;

  double err_prev = 1.0;
  for (std::size_t target = 1; target < sample_times.size(); ++target) {
    const double t_target = sample_times[target];
    double h = t_target - t;

    while (t < t_target) {
      if (h > t_target - t) h = t_target - t;
      if (!(h > 1e-14 * std::max(1.0, std::abs(t))))
        throw OdeError("step size underflow", t);

      if (!k1_valid) {
        rhs(t, y, k1);
        k1_valid = true;
      }

      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a21 * k1[i]);
      rhs(t + c2 * h, ytmp, k2);
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      rhs(t + c3 * h, ytmp, k3);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(t + c4 * h, ytmp, k4);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhs(t + c5 * h, ytmp, k5);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      rhs(t + h, ytmp, k6);
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      rhs(t + h, ynew, k7);

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const std::complex<double> de =
            h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double scale =
            opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double r = std::abs(de) / scale;
        err += r * r;
      }
      err = std::sqrt(err / static_cast<double>(N));

      if (err <= 1.0) {
        const bool hit = (t + h >= t_target);
        t = hit ? t_target : t + h;
        y = ynew;
        k1 = k7;  // FSAL
        k1_valid = true;
        const double e = std::max(err, 1e-10);
        double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
        fac = std::min(5.0, std::max(0.2, fac));
        err_prev = e;
        h *= fac;
      } else {
        double fac = 0.9 * std::pow(err, -0.2);
        h *= std::min(1.0, std::max(0.2, fac));
        // k1 unchanged, step retried from same point
      }
    }
    observe(target, t, y);
  }
}

// Uniform output grid: t0 + k*dt_out for k = 0..K with the last point forced
// to t1 exactly.
std::vector<double> make_grid(double t0, double t1, double dt_out);

}  // namespace ffo

#endif
