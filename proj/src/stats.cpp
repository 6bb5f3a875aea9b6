#include "semlabel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "semlabel/error.hpp"

namespace semlabel::stats {

const char* test_kind_name(TestKind kind) {
  switch (kind) {
    case TestKind::ShapiroWilk: return "shapiro-wilk";
    case TestKind::PairedT: return "paired-t";
    case TestKind::Wilcoxon: return "wilcoxon";
  }
  return "unknown";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Wichura's AS 241 (PPND16), accurate to ~1e-16 over (0, 1).
double normal_ppf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error("bad-probability", "normal_ppf needs p in (0, 1)");
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return num / den;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
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
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5);
  return t > 0.0 ? 1.0 - tail : tail;
}

TestResult shapiro_wilk(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3 || n > 5000)
    throw Error("bad-n", "shapiro_wilk needs 3 <= n <= 5000, got " + std::to_string(n));

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back())
    throw Error("zero-variance", "shapiro_wilk: all values identical");

  const double dn = static_cast<double>(n);
  std::vector<double> weights(n, 0.0);
  if (n == 3) {
    weights[0] = -std::sqrt(0.5);
    weights[2] = std::sqrt(0.5);
  } else {
    // Expected normal order statistics (Blom approximation), antisymmetric.
    std::vector<double> m(n);
    double ssq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = normal_ppf((static_cast<double>(i + 1) - 0.375) / (dn + 0.25));
      ssq += m[i] * m[i];
    }
    const double rsn = 1.0 / std::sqrt(dn);
    auto poly = [rsn](double c1, double c2, double c3, double c4, double c5) {
      return ((((c5 * rsn + c4) * rsn + c3) * rsn + c2) * rsn + c1) * rsn;
    };
    const double an =
        m[n - 1] / std::sqrt(ssq) + poly(0.221157, -0.147981, -2.071190, 4.434685, -2.706056);
    if (n > 5) {
      const double an1 = m[n - 2] / std::sqrt(ssq) +
                         poly(0.042981, -0.293762, -1.752461, 5.682633, -3.582633);
      const double phi = (ssq - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                         (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      const double sf = std::sqrt(phi);
      weights[n - 1] = an;
      weights[n - 2] = an1;
      weights[0] = -an;
      weights[1] = -an1;
      for (std::size_t i = 2; i < n - 2; ++i) weights[i] = m[i] / sf;
    } else {
      const double phi =
          (ssq - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
      const double sf = std::sqrt(phi);
      weights[n - 1] = an;
      weights[0] = -an;
      for (std::size_t i = 1; i < n - 1; ++i) weights[i] = m[i] / sf;
    }
  }

  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= dn;
  double numerator = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    numerator += weights[i] * sorted[i];
    const double dc = sorted[i] - mean;
    ss += dc * dc;
  }
  double W = numerator * numerator / ss;
  if (W > 1.0) W = 1.0;

  double p;
  if (n == 3) {
    constexpr double kPi6 = 1.90985931710274;   // 6/pi
    constexpr double kStqr = 1.04719755119660;  // asin(sqrt(3/4))
    p = kPi6 * (std::asin(std::sqrt(W)) - kStqr);
    p = std::clamp(p, 0.0, 1.0);
  } else if (n <= 11) {
    const double gamma = -2.273 + 0.459 * dn;
    const double y = -std::log(gamma - std::log1p(-W));
    const double mu = 0.5440 + dn * (-0.39978 + dn * (0.025054 - dn * 0.0006714));
    const double sigma =
        std::exp(1.3822 + dn * (-0.77857 + dn * (0.062767 - dn * 0.0020322)));
    p = 1.0 - normal_cdf((y - mu) / sigma);
  } else {
    const double ln = std::log(dn);
    const double y = std::log1p(-W);
    const double mu = -1.5861 + ln * (-0.31082 + ln * (-0.083751 + ln * 0.0038915));
    const double sigma = std::exp(-0.4803 + ln * (-0.082676 + ln * 0.0030302));
    p = 1.0 - normal_cdf((y - mu) / sigma);
  }
  return {TestKind::ShapiroWilk, W, p, static_cast<int>(n)};
}

TestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("dim-mismatch", "paired_t_test: samples differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw Error("bad-n", "paired_t_test needs n >= 2");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (x[i] - y[i]) - mean;
    ss += d * d;
  }
  if (ss == 0.0)
    throw Error("zero-variance", "paired_t_test: differences have zero variance");
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const double df = static_cast<double>(n - 1);
  const double p = regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5);
  return {TestKind::PairedT, t, p, static_cast<int>(n)};
}

TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                const WilcoxonOptions& options) {
  if (x.size() != y.size())
    throw Error("dim-mismatch", "wilcoxon: samples differ in length");
  std::vector<double> d;
  std::size_t n_zero = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double di = x[i] - y[i];
    if (di == 0.0) {
      ++n_zero;
      if (options.zero_policy == WilcoxonOptions::ZeroPolicy::Pratt) d.push_back(di);
    } else {
      d.push_back(di);
    }
  }
  const std::size_t n_nonzero = d.size() - (options.zero_policy ==
                                            WilcoxonOptions::ZeroPolicy::Pratt
                                                ? n_zero
                                                : 0);
  if (n_nonzero == 0)
    throw Error("all-zero-differences", "wilcoxon: every difference is zero");

  // Midranks over |d| (zeros participate in the ranking under Pratt only).
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(d[a]) < std::fabs(d[b]);
  });
  std::vector<double> rank(n, 0.0);
  double tie_correction = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    const auto t = static_cast<double>(j - i + 1);
    // The zero group's removal is already in the Pratt moment adjustment.
    if (j > i && d[order[i]] != 0.0) tie_correction += t * t * t - t;
    i = j + 1;
  }

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0.0) w_plus += rank[i];

  const double dn = static_cast<double>(n);
  double mu = dn * (dn + 1.0) / 4.0;
  double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
  if (options.zero_policy == WilcoxonOptions::ZeroPolicy::Pratt && n_zero > 0) {
    // Pratt: zeros rank lowest, then their ranks are discarded from W+ and
    // the moments.
    const auto z = static_cast<double>(n_zero);
    mu -= z * (z + 1.0) / 4.0;
    var -= z * (z + 1.0) * (2.0 * z + 1.0) / 24.0;
  }
  var -= tie_correction / 48.0;
  if (var <= 0.0)
    throw Error("zero-variance", "wilcoxon: degenerate rank variance");

  double num = w_plus - mu;
  if (options.continuity_correction) {
    if (num > 0.5) num -= 0.5;
    else if (num < -0.5) num += 0.5;
    else num = 0.0;
  }
  const double z = num / std::sqrt(var);
  const double p = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::fabs(z))));
  return {TestKind::Wilcoxon, z, p, static_cast<int>(n_nonzero)};
}

ComparisonResult compare_encodings(std::span<const double> x,
                                   std::span<const double> y, double alpha,
                                   const WilcoxonOptions& options) {
  if (x.size() != y.size())
    throw Error("dim-mismatch", "compare_encodings: samples differ in length");
  if (x.size() < 3) throw Error("bad-n", "compare_encodings needs n >= 3");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];

  ComparisonResult result;
  result.alpha = alpha;
  result.normality = shapiro_wilk(d);
  result.normal_path_taken = result.normality.p_value > alpha;
  result.significance = result.normal_path_taken
                            ? paired_t_test(x, y)
                            : wilcoxon_signed_rank(x, y, options);
  result.significant = result.significance.p_value <= alpha;
  return result;
}

}  // namespace semlabel::stats
