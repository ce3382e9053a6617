#ifndef COPROTECTOR_STATS_H_
#define COPROTECTOR_STATS_H_

#include <cstddef>
#include <string_view>
#include <vector>

namespace coprotector {

// Regularized incomplete beta I_x(a, b), evaluated with a continued fraction.
// `y` must equal 1 - x; pass it separately when it is known more precisely.
double RegularizedIncompleteBeta(double a, double b, double x, double y);
double RegularizedIncompleteBeta(double a, double b, double x);

// Student's t distribution with `df` degrees of freedom (df > 0, may be
// fractional).
double StudentTCdf(double t, double df);
double StudentTTwoTailedP(double t, double df);
double StudentTUpperTail(double t, double df);  // P(T > t)

enum class Alternative {
  kTwoSided,
  kGreater,  // mean(g') > mean(g)
};

std::string_view AlternativeName(Alternative alternative);
Alternative ParseAlternative(std::string_view name);  // Error(kInvalidArgument)

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  double mean_g = 0.0;
  double mean_g_prime = 0.0;
};

// Welch's unequal-variance t-test of mean(g') against mean(g), with
// t = (mean(g') - mean(g)) / sqrt(s1^2/n1 + s2^2/n2) and Welch-Satterthwaite
// degrees of freedom. When both sample variances are zero: equal means give
// t = 0, p = 1; unequal means give t = +-infinity, p = 0 (p = 1 under the
// one-sided alternative when the difference points the other way).
// Requires at least two observations per group (Error(kInvalidArgument)).
WelchResult WelchTTest(const std::vector<double>& g, const std::vector<double>& g_prime,
                       Alternative alternative = Alternative::kTwoSided);
WelchResult WelchTTest(const std::vector<int>& g, const std::vector<int>& g_prime,
                       Alternative alternative = Alternative::kTwoSided);

}  // namespace coprotector

#endif  // COPROTECTOR_STATS_H_
