#include "extrans/stats/ols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace extrans::stats {

namespace {

constexpr double kRankTolerance = 1e-10;

bool is_constant_column(const Eigen::MatrixXd& x, Eigen::Index col) {
  const double first = x(0, col);
  return first != 0.0 && (x.col(col).array() == first).all();
}

double two_sided_t_p(double t, int df) {
  if (!std::isfinite(t)) return std::isnan(t) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// statsmodels-style %#.4g: four significant digits, switching to exponent
// form for very small or large magnitudes.
std::string sig4(double v) {
  if (!std::isfinite(v)) return fmt("%g", v);
  const double a = std::abs(v);
  if (a != 0.0 && (a < 1e-3 || a >= 1e5)) return fmt("%.3g", v);
  return fmt("%#.4g", v);
}

}  // namespace

Design build_design(const CorrectnessTable& table, const TransformFilter& filter) {
  std::vector<const CorrectnessRow*> selected;
  for (const auto& row : table.rows) {
    if (filter.accepts(row.condition)) selected.push_back(&row);
  }
  if (selected.empty()) throw Error("filter '" + filter.name + "' selects no observations");
  std::stable_sort(selected.begin(), selected.end(), [](const auto* a, const auto* b) {
    return std::pair(static_cast<int>(a->agent), a->trial_id) <
           std::pair(static_cast<int>(b->agent), b->trial_id);
  });

  const auto n = static_cast<Eigen::Index>(selected.size());
  Design d;
  d.y.resize(n);
  d.x.x = Eigen::MatrixXd::Zero(n, 4);
  for (Agent a : kAllAgents) d.x.names.emplace_back(agent_label(a));
  for (Eigen::Index i = 0; i < n; ++i) {
    const CorrectnessRow& row = *selected[static_cast<std::size_t>(i)];
    d.y(i) = row.correct ? 1.0 : 0.0;
    d.x.x(i, 0) = 1.0;
    if (row.agent != Agent::kHuman) d.x.x(i, static_cast<int>(row.agent)) = 1.0;
    d.trial_ids.push_back(row.trial_id);
    d.agents.push_back(row.agent);
  }
  return d;
}

double durbin_watson(std::span<const double> r) {
  double num = 0, den = 0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    den += r[t] * r[t];
    if (t > 0) num += (r[t] - r[t - 1]) * (r[t] - r[t - 1]);
  }
  if (den == 0.0) throw Error("Durbin-Watson undefined for all-zero residuals");
  return num / den;
}

JarqueBera jarque_bera(std::span<const double> r) {
  if (r.empty()) throw Error("Jarque-Bera needs at least one residual");
  const double n = static_cast<double>(r.size());
  double mean = 0;
  for (double v : r) mean += v;
  mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : r) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0) throw Error("Jarque-Bera undefined: residual variance is zero");
  JarqueBera jb;
  jb.skew = m3 / std::pow(m2, 1.5);
  jb.kurtosis = m4 / (m2 * m2);
  jb.statistic = n / 6.0 * (jb.skew * jb.skew + (jb.kurtosis - 3.0) * (jb.kurtosis - 3.0) / 4.0);
  jb.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(2.0), jb.statistic));
  return jb;
}

OlsReport fit_ols(const Eigen::VectorXd& y, const DesignMatrix& design) {
  const Eigen::MatrixXd& x = design.x;
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (y.size() != n) throw Error("response length does not match design rows");
  if (static_cast<Eigen::Index>(design.names.size()) != k) throw Error("design names/columns mismatch");
  if (n <= k) {
    throw Error("need more observations than regressors (n=" + std::to_string(n) +
                ", k=" + std::to_string(k) + ")");
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if ((x.col(j).array() == 0.0).all()) {
      throw SingularDesignError({design.names[static_cast<std::size_t>(j)]},
                                "design column '" + design.names[static_cast<std::size_t>(j)] +
                                    "' is all zero");
    }
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  const auto& sv = svd.singularValues();
  const double sv_max = sv(0);
  const double sv_min = sv(sv.size() - 1);
  if (sv_min <= kRankTolerance * sv_max) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(x);
    pivoted.setThreshold(kRankTolerance);
    const Eigen::Index rank = std::min<Eigen::Index>(
        pivoted.rank(), (sv.array() > kRankTolerance * sv_max).count());
    std::vector<std::string> dependent;
    std::string list;
    for (Eigen::Index i = rank; i < k; ++i) {
      dependent.push_back(design.names[static_cast<std::size_t>(pivoted.colsPermutation().indices()(i))]);
      list += (list.empty() ? "" : ", ") + dependent.back();
    }
    throw SingularDesignError(dependent, "singular design (rank " + std::to_string(rank) + " < " +
                                             std::to_string(k) + "); dependent: " + list);
  }

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xtx_inv = r_inv * r_inv.transpose();

  OlsReport rep;
  rep.names = design.names;
  rep.n = static_cast<int>(n);
  rep.k = static_cast<int>(k);
  rep.df_resid = static_cast<int>(n - k);
  for (Eigen::Index j = 0; j < k; ++j) rep.has_intercept |= is_constant_column(x, j);
  rep.df_model = rep.k - (rep.has_intercept ? 1 : 0);

  const Eigen::VectorXd resid = y - x * beta;
  rep.residuals.assign(resid.data(), resid.data() + resid.size());
  rep.ssr = resid.squaredNorm();
  const double sigma2 = rep.ssr / rep.df_resid;

  const boost::math::students_t t_dist(rep.df_resid);
  const double t_crit = boost::math::quantile(t_dist, 0.975);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double b = beta(j);
    const double se = std::sqrt(sigma2 * xtx_inv(j, j));
    rep.coef.push_back(b);
    rep.std_err.push_back(se);
    rep.t.push_back(b / se);
    rep.p.push_back(two_sided_t_p(b / se, rep.df_resid));
    rep.ci_low.push_back(b - t_crit * se);
    rep.ci_high.push_back(b + t_crit * se);
  }

  const double tss = rep.has_intercept ? (y.array() - y.mean()).matrix().squaredNorm()
                                       : y.squaredNorm();
  rep.r_squared = tss > 0 ? 1.0 - rep.ssr / tss : std::numeric_limits<double>::quiet_NaN();
  const double k_const = rep.has_intercept ? 1.0 : 0.0;
  rep.adj_r_squared = 1.0 - (static_cast<double>(n) - k_const) / rep.df_resid * (1.0 - rep.r_squared);
  if (rep.df_model > 0) {
    rep.f_statistic = (rep.r_squared / rep.df_model) / ((1.0 - rep.r_squared) / rep.df_resid);
    if (std::isfinite(rep.f_statistic)) {
      const boost::math::fisher_f f_dist(rep.df_model, rep.df_resid);
      rep.f_p_value = boost::math::cdf(boost::math::complement(f_dist, rep.f_statistic));
    } else {
      rep.f_p_value = rep.ssr == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    rep.f_statistic = rep.f_p_value = std::numeric_limits<double>::quiet_NaN();
  }

  const double nd = static_cast<double>(n);
  rep.log_likelihood =
      rep.ssr > 0 ? -nd / 2.0 * (std::log(2.0 * std::numbers::pi) + std::log(rep.ssr / nd) + 1.0)
                  : std::numeric_limits<double>::infinity();
  rep.aic = 2.0 * rep.k - 2.0 * rep.log_likelihood;
  rep.bic = rep.k * std::log(nd) - 2.0 * rep.log_likelihood;
  rep.condition_number = sv_max / sv_min;

  if (rep.ssr > 0) {
    rep.durbin_watson = durbin_watson(rep.residuals);
    // Residuals can have nonzero sum of squares yet zero variance only
    // without an intercept.
    try {
      rep.jarque_bera = jarque_bera(rep.residuals);
    } catch (const Error&) {
    }
  }
  return rep;
}

nlohmann::json to_json(const OlsReport& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t j = 0; j < r.coef.size(); ++j) {
    params.push_back({{"name", r.names[j]},
                      {"coef", num(r.coef[j])},
                      {"std_err", num(r.std_err[j])},
                      {"t", num(r.t[j])},
                      {"p", num(r.p[j])},
                      {"ci_low", num(r.ci_low[j])},
                      {"ci_high", num(r.ci_high[j])}});
  }
  nlohmann::json diag = {{"condition_number", num(r.condition_number)}};
  diag["durbin_watson"] = r.durbin_watson ? num(*r.durbin_watson) : nlohmann::json(nullptr);
  if (r.jarque_bera) {
    diag["jarque_bera"] = num(r.jarque_bera->statistic);
    diag["jarque_bera_p"] = num(r.jarque_bera->p_value);
    diag["skew"] = num(r.jarque_bera->skew);
    diag["kurtosis"] = num(r.jarque_bera->kurtosis);
  } else {
    diag["jarque_bera"] = diag["jarque_bera_p"] = diag["skew"] = diag["kurtosis"] = nullptr;
  }
  return {{"n", r.n},
          {"k", r.k},
          {"df_model", r.df_model},
          {"df_resid", r.df_resid},
          {"r_squared", num(r.r_squared)},
          {"adj_r_squared", num(r.adj_r_squared)},
          {"f_statistic", num(r.f_statistic)},
          {"f_p_value", num(r.f_p_value)},
          {"log_likelihood", num(r.log_likelihood)},
          {"aic", num(r.aic)},
          {"bic", num(r.bic)},
          {"ssr", num(r.ssr)},
          {"params", params},
          {"diagnostics", diag}};
}

std::string format_report(const OlsReport& r, const std::string& title) {
  constexpr int kWidth = 78;
  const std::string heavy(kWidth, '=');
  const std::string light(kWidth, '-');
  std::ostringstream out;
  auto line = [&](const std::string& lk, const std::string& lv, const std::string& rk,
                  const std::string& rv) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-20s%18s   %-20s%17s\n", lk.c_str(), lv.c_str(), rk.c_str(),
                  rv.c_str());
    out << buf;
  };
  const int pad = std::max(0, (kWidth - static_cast<int>(title.size())) / 2);
  out << std::string(static_cast<std::size_t>(pad), ' ') << title << '\n' << heavy << '\n';
  line("Dep. Variable:", "y", "R-squared:", fmt("%.3f", r.r_squared));
  line("Model:", "OLS", "Adj. R-squared:", fmt("%.3f", r.adj_r_squared));
  line("Method:", "Least Squares", "F-statistic:", sig4(r.f_statistic));
  line("No. Observations:", std::to_string(r.n), "Prob (F-statistic):", sig4(r.f_p_value));
  line("Df Residuals:", std::to_string(r.df_resid), "Log-Likelihood:", fmt("%.3f", r.log_likelihood));
  line("Df Model:", std::to_string(r.df_model), "AIC:", sig4(r.aic));
  line("", "", "BIC:", sig4(r.bic));
  out << heavy << '\n';
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s%10s%11s%11s%9s%11s%11s\n", "", "coef", "std err", "t",
                "P>|t|", "[0.025", "0.975]");
  out << buf << light << '\n';
  for (std::size_t j = 0; j < r.coef.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%-14s%10.4f%11.3f%11.3f%9.3f%11.3f%11.3f\n", r.names[j].c_str(),
                  r.coef[j], r.std_err[j], r.t[j], r.p[j], r.ci_low[j], r.ci_high[j]);
    out << buf;
  }
  out << heavy << '\n';
  const auto opt = [](const std::optional<double>& v, const char* spec) {
    return v ? fmt(spec, *v) : std::string("nan");
  };
  const auto& jb = r.jarque_bera;
  line("Durbin-Watson:", opt(r.durbin_watson, "%.3f"), "Jarque-Bera (JB):",
       jb ? fmt("%.3f", jb->statistic) : "nan");
  line("Skew:", jb ? fmt("%.3f", jb->skew) : "nan", "Prob(JB):", jb ? sig4(jb->p_value) : "nan");
  line("Kurtosis:", jb ? fmt("%.3f", jb->kurtosis) : "nan", "Cond. No.", sig4(r.condition_number));
  out << heavy << '\n';
  return out.str();
}

}  // namespace extrans::stats
