#pragma once

#include <span>
#include <string>

namespace semlabel::stats {

enum class TestKind { ShapiroWilk, PairedT, Wilcoxon };

const char* test_kind_name(TestKind kind);

struct TestResult {
  TestKind test = TestKind::ShapiroWilk;
  double statistic = 0.0;  // W, t or z
  double p_value = 0.0;    // two-sided for t / Wilcoxon
  int n_effective = 0;
};

/// Royston's AS R94 approximation: W statistic from polynomial-corrected
/// expected normal order statistics, p-value from the normalizing transform.
/// Valid for 3 <= n <= 5000 and non-constant samples.
TestResult shapiro_wilk(std::span<const double> x);

/// Two-sided paired t-test on d = x - y with sample (n-1) standard deviation.
TestResult paired_t_test(std::span<const double> x, std::span<const double> y);

struct WilcoxonOptions {
  enum class ZeroPolicy { Drop, Pratt };
  bool continuity_correction = false;
  ZeroPolicy zero_policy = ZeroPolicy::Drop;
};

/// Signed-rank test on d = x - y: zero differences dropped (or Pratt-ranked),
/// midranks for ties, z from the tie-corrected normal approximation, two-sided
/// p from the normal tail.
TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                const WilcoxonOptions& options = {});

struct ComparisonResult {
  TestResult normality;
  TestResult significance;
  double alpha = 0.05;
  bool normal_path_taken = false;
  bool significant = false;
};

/// Normality-gated significance pipeline: Shapiro-Wilk on x - y, then the
/// paired t-test when normality.p > alpha, the Wilcoxon signed-rank test
/// otherwise.
ComparisonResult compare_encodings(std::span<const double> x,
                                   std::span<const double> y, double alpha = 0.05,
                                   const WilcoxonOptions& options = {});

// Probability primitives, exposed for the tests.
double normal_cdf(double x);
double normal_ppf(double p);
double regularized_incomplete_beta(double x, double a, double b);
double student_t_cdf(double t, double df);

}  // namespace semlabel::stats
