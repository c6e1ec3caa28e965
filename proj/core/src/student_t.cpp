#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "adaptd/confidence.hpp"

namespace adaptd {
namespace {

// Continued fraction for I_x(a, b), modified Lentz. Converges fast for
// x < (a + 1) / (a + b + 2); callers use the symmetry relation otherwise.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_central_probability(double df, double t) {
  if (!(df > 0.0)) throw std::invalid_argument("student t: df must be positive");
  if (std::isnan(t)) throw std::invalid_argument("student t: t is NaN");
  t = std::abs(t);
  if (std::isinf(t)) return 1.0;
  // P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  return 1.0 - incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double t_quantile(double df, double alpha) {
  if (!(df >= 1.0) || !std::isfinite(df)) throw std::invalid_argument("t_quantile: df must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("t_quantile: alpha must lie in (0, 1)");

  static std::mutex cache_mutex;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find({df, alpha}); it != cache.end()) return it->second;
  }

  double lo = 0.0;
  double hi = 1.0;
  while (student_t_central_probability(df, hi) < alpha) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::runtime_error("t_quantile: quantile overflow");
  }
  for (int i = 0; i < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_central_probability(df, mid) < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double q = 0.5 * (lo + hi);

  std::lock_guard lock(cache_mutex);
  cache.emplace(std::make_pair(df, alpha), q);
  return q;
}

}  // namespace adaptd
