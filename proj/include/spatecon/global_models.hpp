#ifndef SPATECON_GLOBAL_MODELS_HPP
#define SPATECON_GLOBAL_MODELS_HPP

#include <cmath>
#include <string>
#include <vector>

#include <armadillo>

#include "spatecon/weights.hpp"

namespace spatecon {

/// Named covariate columns behind an implicit leading intercept column.
/// X is n x (p+1) with column 0 all ones.
struct DesignMatrix {
    std::vector<std::string> names; // covariates only
    arma::mat X;

    std::size_t n() const { return X.n_rows; }
    std::size_t p() const { return names.size(); }

    static DesignMatrix from_columns(std::vector<std::string> names, const arma::mat& covariates);
    DesignMatrix with_columns(const std::vector<std::string>& subset) const;

    /// Throws naming the collinear columns when X is rank-deficient.
    void require_full_rank() const;
};

enum class GlobalModel {
    Ols,
    Slm,
    Sem,
};

std::string_view to_string(GlobalModel model);

struct FitStats {
    double r2 = NAN;
    double adj_r2 = NAN;
    double f_stat = NAN;
    double f_prob = NAN;
    double aic = NAN;
    double sic = NAN;
};

struct GlobalFit {
    GlobalModel model = GlobalModel::Ols;
    std::vector<std::string> coefficient_names; // CONSTANT first
    arma::vec coefficients;
    arma::vec std_errors;
    arma::vec t_or_z;
    arma::vec probabilities;

    double rho = NAN, rho_std_error = NAN, rho_z = NAN, rho_probability = NAN;
    double lambda = NAN, lambda_std_error = NAN, lambda_z = NAN, lambda_probability = NAN;

    arma::vec residuals; // OLS/SLM: regression error; SEM: whitened error v
    arma::vec fitted;
    double sigma2 = NAN; // ML estimate
    double log_likelihood = NAN;
    FitStats stats;

    /// Concentrated log-likelihood over the grid scanned before refinement
    /// (SLM/SEM only). Kept so callers can audit the line search.
    arma::vec profile_param;
    arma::vec profile_loglik;
};

/// Classical least squares with t inference, F test, and Gaussian
/// log-likelihood based AIC/SIC (k = p + 1).
GlobalFit fit_ols(const DesignMatrix& X, const arma::vec& y);

struct TestStat {
    double df = 0.0;
    double value = 0.0;
    double probability = 1.0;
};

struct MoranTest {
    double statistic = 0.0;
    double z_value = 0.0;
    double probability = 1.0;
};

struct DependenceDiagnostics {
    MoranTest morans_i_error;
    TestStat lm_lag;
    TestStat robust_lm_lag;
    TestStat lm_error;
    TestStat robust_lm_error;
    TestStat lm_sarma;
};

/// Residual spatial dependence tests for an OLS fit: Moran's I with
/// randomization moments, the LM lag/error score tests, their robust
/// variants, and the joint SARMA statistic.
DependenceDiagnostics dependence_diagnostics(const GlobalFit& ols, const DesignMatrix& X,
                                             const arma::vec& y, const WeightMatrix& w);

/// Maximum-likelihood spatial lag model y = rho*W*y + X*beta + eps. The
/// autoregressive coefficient is profiled on a 100-point grid and refined
/// by golden section; z statistics come from the analytic information
/// matrix. AIC/SIC use k = p + 2.
GlobalFit fit_slm(const DesignMatrix& X, const arma::vec& y, const WeightMatrix& w,
                  const WeightEigen* eigen = nullptr);

/// Maximum-likelihood spatial error model y = X*beta + u, u = lambda*W*u + v,
/// estimated on spatially filtered variables. The residuals field holds the
/// whitened errors v. z statistics come from a central-difference Hessian of
/// the full log-likelihood.
GlobalFit fit_sem(const DesignMatrix& X, const arma::vec& y, const WeightMatrix& w,
                  const WeightEigen* eigen = nullptr);

struct InformationCriteria {
    double aic = NAN;
    double aicc = NAN;
    double sic = NAN;
    bool aicc_defined = false;
};

InformationCriteria information_criteria(double log_likelihood, int k, int n);

} // namespace spatecon

#endif
