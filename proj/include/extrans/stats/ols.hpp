#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "extrans/error.hpp"
#include "extrans/stats/correctness.hpp"

namespace extrans::stats {

class SingularDesignError : public Error {
 public:
  SingularDesignError(std::vector<std::string> dependent, const std::string& message)
      : Error(message), dependent_(std::move(dependent)) {}
  const std::vector<std::string>& dependent_columns() const noexcept { return dependent_; }

 private:
  std::vector<std::string> dependent_;
};

struct DesignMatrix {
  Eigen::MatrixXd x;
  std::vector<std::string> names;

  Eigen::Index rows() const noexcept { return x.rows(); }
  Eigen::Index cols() const noexcept { return x.cols(); }
};

struct Design {
  Eigen::VectorXd y;
  DesignMatrix x;
  std::vector<int> trial_ids;  // per row
  std::vector<Agent> agents;   // per row
};

/// Linear probability design for one filter. Columns: intercept
/// ("Humans"), then dummies VOneResNet50, ResNet101, ResNet50. Rows: all
/// human rows, then vone, resnet101, resnet50, each in trial_id order.
/// Throws Error when the filter selects nothing.
Design build_design(const CorrectnessTable& table, const TransformFilter& filter);

struct JarqueBera {
  double statistic = 0;
  double p_value = 0;
  double skew = 0;
  double kurtosis = 0;  // non-excess
};

/// sum_{t>=2} (r_t - r_{t-1})^2 / sum r_t^2. Throws Error when all
/// residuals are zero.
double durbin_watson(std::span<const double> residuals);

/// Population moments m_k about the mean; skew = m3/m2^1.5, kurtosis =
/// m4/m2^2, JB = n/6 (skew^2 + (kurtosis-3)^2/4), p from chi-square(2).
/// Throws Error when m2 == 0.
JarqueBera jarque_bera(std::span<const double> residuals);

struct OlsReport {
  std::vector<std::string> names;
  std::vector<double> coef;
  std::vector<double> std_err;
  std::vector<double> t;
  std::vector<double> p;
  std::vector<double> ci_low;   // 2.5%
  std::vector<double> ci_high;  // 97.5%

  int n = 0;
  int k = 0;
  int df_model = 0;
  int df_resid = 0;
  bool has_intercept = false;

  double ssr = 0;
  double r_squared = 0;
  double adj_r_squared = 0;
  double f_statistic = 0;
  double f_p_value = 0;
  double log_likelihood = 0;
  double aic = 0;
  double bic = 0;

  /// Residual diagnostics; absent when the residuals are identically zero.
  std::optional<double> durbin_watson;
  std::optional<JarqueBera> jarque_bera;
  double condition_number = 0;

  std::vector<double> residuals;
};

/// Least squares by Householder QR. Rank is checked against singular
/// values: columns count as dependent below 1e-10 x the largest one.
/// Standard errors use sigma^2 = SSR/(n-k) and (X'X)^-1 = R^-1 R^-T;
/// p values and the 95% interval use Student t with n-k degrees of
/// freedom; the log-likelihood is Gaussian with variance SSR/n.
OlsReport fit_ols(const Eigen::VectorXd& y, const DesignMatrix& x);

nlohmann::json to_json(const OlsReport& report);

/// Fixed-width summary laid out like the familiar statsmodels summary.
std::string format_report(const OlsReport& report, const std::string& title);

}  // namespace extrans::stats
