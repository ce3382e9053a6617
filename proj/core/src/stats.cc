#include "coprotector/stats.h"

#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "coprotector/error.h"

namespace coprotector {
namespace {

constexpr double kTolerance = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10000;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double BetaContinuedFraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kTolerance) break;
  }
  return h;
}

double Mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double SampleVariance(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double RegularizedIncompleteBeta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "incomplete beta needs a > 0 and b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, y) / b;
}

double RegularizedIncompleteBeta(double a, double b, double x) {
  return RegularizedIncompleteBeta(a, b, x, 1.0 - x);
}

double StudentTTwoTailedP(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double denom = df + t2;
  return RegularizedIncompleteBeta(df / 2.0, 0.5, df / denom, t2 / denom);
}

double StudentTCdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double half_tail = 0.5 * StudentTTwoTailedP(t, df);
  return t > 0 ? 1.0 - half_tail : half_tail;
}

double StudentTUpperTail(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double half_tail = 0.5 * StudentTTwoTailedP(t, df);
  return t > 0 ? half_tail : 1.0 - half_tail;
}

std::string_view AlternativeName(Alternative alternative) {
  return alternative == Alternative::kTwoSided ? "two-sided" : "greater";
}

Alternative ParseAlternative(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "two-sided" || lower == "two_sided") return Alternative::kTwoSided;
  if (lower == "greater") return Alternative::kGreater;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown alternative '" + std::string(name) + "' (expected two-sided or greater)");
}

WelchResult WelchTTest(const std::vector<double>& g, const std::vector<double>& g_prime,
                       Alternative alternative) {
  if (g.size() < 2 || g_prime.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "t-test needs at least two observations per group");
  }
  const double n1 = static_cast<double>(g.size());
  const double n2 = static_cast<double>(g_prime.size());
  WelchResult r;
  r.mean_g = Mean(g);
  r.mean_g_prime = Mean(g_prime);
  const double q1 = SampleVariance(g, r.mean_g) / n1;
  const double q2 = SampleVariance(g_prime, r.mean_g_prime) / n2;
  const double diff = r.mean_g_prime - r.mean_g;
  const double se2 = q1 + q2;

  if (se2 == 0.0) {
    r.df = n1 + n2 - 2.0;
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = diff > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
      r.p = (alternative == Alternative::kGreater && diff < 0) ? 1.0 : 0.0;
    }
    return r;
  }

  r.t = diff / std::sqrt(se2);
  r.df = se2 * se2 / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
  r.p = alternative == Alternative::kTwoSided ? StudentTTwoTailedP(r.t, r.df)
                                              : StudentTUpperTail(r.t, r.df);
  if (r.p < 0.0) r.p = 0.0;
  if (r.p > 1.0) r.p = 1.0;
  return r;
}

WelchResult WelchTTest(const std::vector<int>& g, const std::vector<int>& g_prime,
                       Alternative alternative) {
  return WelchTTest(std::vector<double>(g.begin(), g.end()),
                    std::vector<double>(g_prime.begin(), g_prime.end()), alternative);
}

}  // namespace coprotector
