#include "spatecon/global_models.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "spatecon/stats.hpp"

namespace spatecon {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453; // log(2*pi)
}

DesignMatrix DesignMatrix::from_columns(std::vector<std::string> names, const arma::mat& covariates)
{
    if (names.size() != covariates.n_cols)
        throw std::invalid_argument("DesignMatrix: name/column count mismatch");
    DesignMatrix d;
    d.names = std::move(names);
    d.X.set_size(covariates.n_rows, covariates.n_cols + 1);
    d.X.col(0).ones();
    if (covariates.n_cols > 0)
        d.X.cols(1, covariates.n_cols) = covariates;
    if (!d.X.is_finite())
        throw std::invalid_argument("DesignMatrix: non-finite or missing values");
    return d;
}

DesignMatrix DesignMatrix::with_columns(const std::vector<std::string>& subset) const
{
    arma::mat cols(n(), subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) {
        auto it = std::find(names.begin(), names.end(), subset[j]);
        if (it == names.end())
            throw std::invalid_argument("DesignMatrix: unknown column '" + subset[j] + "'");
        cols.col(j) = X.col(1 + std::size_t(it - names.begin()));
    }
    return from_columns(subset, cols);
}

void DesignMatrix::require_full_rank() const
{
    if (arma::rank(X) == X.n_cols)
        return;
    // name the offenders: columns explained almost exactly by the others
    std::vector<std::string> collinear;
    std::vector<std::string> all_names;
    all_names.push_back("CONSTANT");
    all_names.insert(all_names.end(), names.begin(), names.end());
    for (std::size_t j = 0; j < X.n_cols; ++j) {
        arma::mat others = X;
        others.shed_col(j);
        arma::vec target = X.col(j);
        arma::vec beta;
        if (!arma::solve(beta, others, target, arma::solve_opts::no_approx))
            continue;
        arma::vec resid = target - others * beta;
        double sst = arma::dot(target - arma::mean(target), target - arma::mean(target));
        double sse = arma::dot(resid, resid);
        double scale = std::max(sst, arma::dot(target, target));
        if (scale <= 0.0 || sse / scale < 1e-10)
            collinear.push_back(all_names[j]);
    }
    std::ostringstream msg;
    msg << "design matrix is rank deficient; collinear columns:";
    if (collinear.empty())
        msg << " (undetermined)";
    for (const auto& c : collinear)
        msg << ' ' << c;
    throw std::runtime_error(msg.str());
}

std::string_view to_string(GlobalModel model)
{
    switch (model) {
    case GlobalModel::Ols: return "ols";
    case GlobalModel::Slm: return "slm";
    case GlobalModel::Sem: return "sem";
    }
    return "?";
}

namespace {

std::vector<std::string> coefficient_names_for(const DesignMatrix& X)
{
    std::vector<std::string> out;
    out.reserve(X.p() + 1);
    out.push_back("CONSTANT");
    out.insert(out.end(), X.names.begin(), X.names.end());
    return out;
}

void check_global_preconditions(const DesignMatrix& X, const arma::vec& y)
{
    if (y.n_elem != X.n())
        throw std::invalid_argument("fit: response length does not match design rows");
    if (!y.is_finite())
        throw std::invalid_argument("fit: response contains non-finite values");
    if (X.n() <= X.p() + 1)
        throw std::runtime_error("fit: need n > p + 1 observations");
    X.require_full_rank();
}

double gaussian_log_likelihood(double sse, std::size_t n)
{
    double nd = double(n);
    return -0.5 * nd * (kLogTwoPi + std::log(sse / nd) + 1.0);
}

/// Maximize a unimodal-ish objective: best point of a fixed grid, then
/// golden-section refinement inside the bracketing interval.
struct LineSearchResult {
    double argmax = 0.0;
    double value = -std::numeric_limits<double>::infinity();
    arma::vec grid;
    arma::vec grid_values;
};

LineSearchResult grid_then_golden(const std::function<double(double)>& objective, double lo, double hi,
                                  int grid_points, double tol)
{
    LineSearchResult out;
    out.grid.set_size(grid_points);
    out.grid_values.set_size(grid_points);
    int best = 0;
    for (int g = 0; g < grid_points; ++g) {
        double x = lo + (hi - lo) * double(g) / double(grid_points - 1);
        double v = objective(x);
        out.grid(g) = x;
        out.grid_values(g) = v;
        if (v > out.grid_values(best))
            best = g;
    }
    if (!std::isfinite(out.grid_values(best)))
        throw std::runtime_error("line search: objective non-finite on entire grid");

    double a = out.grid(std::max(0, best - 1));
    double b = out.grid(std::min(grid_points - 1, best + 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        }
    }
    double xm = 0.5 * (a + b);
    double fm = objective(xm);
    out.argmax = xm;
    out.value = fm;
    if (f1 > out.value) {
        out.argmax = x1;
        out.value = f1;
    }
    if (f2 > out.value) {
        out.argmax = x2;
        out.value = f2;
    }
    // refinement must never land below the scanned grid
    if (out.grid_values(best) > out.value) {
        out.argmax = out.grid(best);
        out.value = out.grid_values(best);
    }
    return out;
}

} // namespace

GlobalFit fit_ols(const DesignMatrix& X, const arma::vec& y)
{
    check_global_preconditions(X, y);
    const std::size_t n = X.n();
    const std::size_t k = X.p() + 1;

    arma::vec beta;
    if (!arma::solve(beta, X.X, y))
        throw std::runtime_error("fit_ols: least-squares solve failed");
    arma::vec fitted = X.X * beta;
    arma::vec resid = y - fitted;

    double sse = arma::dot(resid, resid);
    double ybar = arma::mean(y);
    double sst = arma::dot(y - ybar, y - ybar);

    GlobalFit fit;
    fit.model = GlobalModel::Ols;
    fit.coefficient_names = coefficient_names_for(X);
    fit.coefficients = beta;
    fit.residuals = resid;
    fit.fitted = fitted;
    fit.sigma2 = sse / double(n);

    double sigma2_unbiased = sse / double(n - k);
    arma::mat xtx_inv;
    if (!arma::inv_sympd(xtx_inv, X.X.t() * X.X))
        throw std::runtime_error("fit_ols: X'X not invertible");
    fit.std_errors = arma::sqrt(sigma2_unbiased * xtx_inv.diag());
    fit.t_or_z.set_size(k);
    fit.probabilities.set_size(k);
    for (std::size_t j = 0; j < k; ++j) {
        fit.t_or_z(j) = beta(j) / fit.std_errors(j);
        fit.probabilities(j) = stats::student_t_two_sided_p(fit.t_or_z(j), double(n - k));
    }

    fit.log_likelihood = gaussian_log_likelihood(sse, n);
    fit.stats.r2 = sst > 0.0 ? 1.0 - sse / sst : NAN;
    fit.stats.adj_r2 =
        sst > 0.0 ? 1.0 - (1.0 - fit.stats.r2) * double(n - 1) / double(n - k) : NAN;
    if (X.p() > 0 && sse > 0.0 && sst > sse) {
        fit.stats.f_stat = ((sst - sse) / double(X.p())) / (sse / double(n - k));
        fit.stats.f_prob = stats::f_sf(fit.stats.f_stat, double(X.p()), double(n - k));
    }
    fit.stats.aic = 2.0 * double(k) - 2.0 * fit.log_likelihood;
    fit.stats.sic = double(k) * std::log(double(n)) - 2.0 * fit.log_likelihood;
    return fit;
}

DependenceDiagnostics dependence_diagnostics(const GlobalFit& ols, const DesignMatrix& X,
                                             const arma::vec& y, const WeightMatrix& w)
{
    if (ols.model != GlobalModel::Ols)
        throw std::invalid_argument("dependence_diagnostics: fit must be OLS");
    if (!w.row_standardized)
        throw std::invalid_argument("dependence_diagnostics: weights must be row-standardized");
    if (w.n != X.n() || y.n_elem != X.n() || ols.residuals.n_elem != X.n())
        throw std::invalid_argument("dependence_diagnostics: dimension mismatch");

    const arma::vec& e = ols.residuals;
    const std::size_t n = w.n;
    double ete = arma::dot(e, e);
    double e_var = ete / double(n) - std::pow(arma::mean(e), 2);
    double y_scale = arma::dot(y, y) / double(n);
    if (!(e_var > 1e-20 * (y_scale + 1.0)))
        throw std::runtime_error("dependence_diagnostics: residual vector is constant");

    double s0, s1, s2;
    w.moment_sums(s0, s1, s2);
    if (s0 <= 0.0)
        throw std::runtime_error("dependence_diagnostics: weight matrix has no links");

    arma::vec we = w.spmv(e);
    double nd = double(n);

    DependenceDiagnostics out;

    // Moran's I on residuals, normal approximation with randomization moments
    double moran = (nd / s0) * arma::dot(e, we) / ete;
    double expected = -1.0 / (nd - 1.0);
    double b2 = nd * arma::accu(arma::pow(e, 4)) / (ete * ete);
    double num = nd * ((nd * nd - 3.0 * nd + 3.0) * s1 - nd * s2 + 3.0 * s0 * s0) -
                 b2 * ((nd * nd - nd) * s1 - 2.0 * nd * s2 + 6.0 * s0 * s0);
    double den = (nd - 1.0) * (nd - 2.0) * (nd - 3.0) * s0 * s0;
    double variance = num / den - expected * expected;
    if (!(variance > 0.0))
        throw std::runtime_error("dependence_diagnostics: Moran variance not positive");
    out.morans_i_error.statistic = moran;
    out.morans_i_error.z_value = (moran - expected) / std::sqrt(variance);
    out.morans_i_error.probability = stats::normal_two_sided_p(out.morans_i_error.z_value);

    // score statistics (sigma^2 is the ML estimate)
    double sigma2 = ete / nd;
    double d_err = arma::dot(e, we) / sigma2;
    double d_lag = arma::dot(e, w.spmv(y)) / sigma2;

    // T = tr(W'W + WW)
    double tr_wtw = 0.0, tr_ww = 0.0;
    {
        std::vector<std::unordered_map<std::uint32_t, double>> lookup(n);
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& entry : w.rows[i])
                lookup[i][entry.col] = entry.weight;
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& entry : w.rows[i]) {
                tr_wtw += entry.weight * entry.weight;
                auto it = lookup[entry.col].find(std::uint32_t(i));
                if (it != lookup[entry.col].end())
                    tr_ww += entry.weight * it->second;
            }
    }
    double t_sum = tr_wtw + tr_ww;

    // D = (W X beta)' M (W X beta) / sigma^2 + T
    arma::vec wxb = w.spmv(ols.fitted);
    arma::vec gamma;
    if (!arma::solve(gamma, X.X, wxb))
        throw std::runtime_error("dependence_diagnostics: projection solve failed");
    arma::vec m_wxb = wxb - X.X * gamma;
    double d_term = arma::dot(m_wxb, m_wxb) / sigma2 + t_sum;

    out.lm_error = {1.0, d_err * d_err / t_sum, 0.0};
    out.lm_lag = {1.0, d_lag * d_lag / d_term, 0.0};
    if (d_term - t_sum <= 1e-12)
        throw std::runtime_error("dependence_diagnostics: robust LM undefined (W*X*beta lies in the column space of X)");
    out.robust_lm_lag = {1.0, std::pow(d_lag - d_err, 2) / (d_term - t_sum), 0.0};
    out.robust_lm_error = {1.0,
                           std::pow(d_err - (t_sum / d_term) * d_lag, 2) /
                               (t_sum * (1.0 - t_sum / d_term)),
                           0.0};
    out.lm_sarma = {2.0, out.lm_error.value + out.robust_lm_lag.value, 0.0};

    for (TestStat* t : {&out.lm_lag, &out.robust_lm_lag, &out.lm_error, &out.robust_lm_error, &out.lm_sarma})
        t->probability = stats::chi_squared_sf(t->value, t->df);
    return out;
}

namespace {

bool has_links(const WeightMatrix& w)
{
    for (const auto& row : w.rows)
        if (!row.empty())
            return true;
    return false;
}

/// All-island W: the likelihood is free of the autoregressive parameter
/// and the model collapses onto OLS with z inference.
GlobalFit degenerate_spatial_fit(const DesignMatrix& X, const arma::vec& y, GlobalModel model)
{
    GlobalFit fit = fit_ols(X, y);
    fit.model = model;
    const double k = double(X.p()) + 2.0;
    const double nd = double(X.n());
    for (std::size_t j = 0; j < fit.t_or_z.n_elem; ++j)
        fit.probabilities(j) = stats::normal_two_sided_p(fit.t_or_z(j));
    if (model == GlobalModel::Slm)
        fit.rho = 0.0;
    else
        fit.lambda = 0.0;
    fit.stats.adj_r2 = NAN;
    fit.stats.f_stat = NAN;
    fit.stats.f_prob = NAN;
    fit.stats.aic = 2.0 * k - 2.0 * fit.log_likelihood;
    fit.stats.sic = k * std::log(nd) - 2.0 * fit.log_likelihood;
    return fit;
}

struct SpatialFitInputs {
    const DesignMatrix& X;
    const arma::vec& y;
    const WeightMatrix& w;
    WeightEigen eigen;
    double lo, hi; // search interval after shrinkage
    double shrink;
};

SpatialFitInputs prepare_spatial_fit(const DesignMatrix& X, const arma::vec& y, const WeightMatrix& w,
                                     const WeightEigen* eigen)
{
    check_global_preconditions(X, y);
    if (!w.row_standardized)
        throw std::invalid_argument("spatial fit: weights must be row-standardized");
    if (w.n != X.n())
        throw std::invalid_argument("spatial fit: weights dimension mismatch");
    WeightEigen eig = eigen ? *eigen : weight_eigenvalues(w);
    double lo = eig.bounds.lower, hi = eig.bounds.upper;
    double shrink = 1e-4 * (hi - lo);
    return {X, y, w, std::move(eig), lo + shrink, hi - shrink, shrink};
}

void check_interior(double value, const SpatialFitInputs& in, const char* param)
{
    if (value - in.lo <= 1e-6 || in.hi - value <= 1e-6)
        throw std::runtime_error(std::string("fit: boundary solution for ") + param +
                                 "; autoregressive parameter pinned at its stationarity bound");
}

} // namespace

GlobalFit fit_slm(const DesignMatrix& X, const arma::vec& y, const WeightMatrix& w,
                  const WeightEigen* eigen)
{
    if (!has_links(w))
        return degenerate_spatial_fit(X, y, GlobalModel::Slm);
    SpatialFitInputs in = prepare_spatial_fit(X, y, w, eigen);
    const std::size_t n = X.n();
    const std::size_t k = X.p() + 2;
    const double nd = double(n);

    arma::vec wy = w.spmv(y);
    arma::vec beta0, beta_lag;
    if (!arma::solve(beta0, X.X, y) || !arma::solve(beta_lag, X.X, wy))
        throw std::runtime_error("fit_slm: auxiliary least-squares solve failed");
    arma::vec e0 = y - X.X * beta0;
    arma::vec el = wy - X.X * beta_lag;
    double a = arma::dot(e0, e0), b = arma::dot(e0, el), c = arma::dot(el, el);

    auto concentrated = [&](double rho) {
        double sse = a - 2.0 * rho * b + rho * rho * c;
        if (sse <= 0.0)
            return -std::numeric_limits<double>::infinity();
        return -0.5 * nd * (kLogTwoPi + 1.0) - 0.5 * nd * std::log(sse / nd) + in.eigen.log_det(rho);
    };

    LineSearchResult search = grid_then_golden(concentrated, in.lo, in.hi, 100, 1e-7);
    if (!std::isfinite(search.value))
        throw std::runtime_error("fit_slm: non-finite likelihood at optimum");
    double rho = search.argmax;
    check_interior(rho, in, "rho");

    arma::vec beta = beta0 - rho * beta_lag;
    arma::vec resid = e0 - rho * el;
    double sse = arma::dot(resid, resid);
    double sigma2 = sse / nd;

    GlobalFit fit;
    fit.model = GlobalModel::Slm;
    fit.coefficient_names = coefficient_names_for(X);
    fit.coefficients = beta;
    fit.rho = rho;
    fit.residuals = resid;
    fit.fitted = y - resid;
    fit.sigma2 = sigma2;
    fit.log_likelihood = search.value;
    fit.profile_param = search.grid;
    fit.profile_loglik = search.grid_values;

    // analytic information matrix for (beta, rho, sigma^2)
    arma::mat a_mat = arma::eye(n, n) - rho * w.dense();
    arma::mat a_inv;
    if (!arma::inv(a_inv, a_mat))
        throw std::runtime_error("fit_slm: (I - rho W) not invertible at optimum");
    arma::mat g = w.dense() * a_inv;
    arma::vec h = g * (X.X * beta);

    arma::mat info(k + 1, k + 1, arma::fill::zeros);
    const std::size_t kb = X.p() + 1;
    info.submat(0, 0, kb - 1, kb - 1) = X.X.t() * X.X / sigma2;
    arma::vec xth = X.X.t() * h / sigma2;
    info.submat(0, kb, kb - 1, kb) = xth;
    info.submat(kb, 0, kb, kb - 1) = xth.t();
    info(kb, kb) = arma::trace(g * g) + arma::trace(g.t() * g) + arma::dot(h, h) / sigma2;
    info(kb, kb + 1) = info(kb + 1, kb) = arma::trace(g) / sigma2;
    info(kb + 1, kb + 1) = nd / (2.0 * sigma2 * sigma2);

    arma::mat cov;
    if (!arma::inv(cov, info))
        throw std::runtime_error("fit_slm: information matrix not invertible");

    fit.std_errors.set_size(kb);
    fit.t_or_z.set_size(kb);
    fit.probabilities.set_size(kb);
    for (std::size_t j = 0; j < kb; ++j) {
        fit.std_errors(j) = std::sqrt(cov(j, j));
        fit.t_or_z(j) = beta(j) / fit.std_errors(j);
        fit.probabilities(j) = stats::normal_two_sided_p(fit.t_or_z(j));
    }
    fit.rho_std_error = std::sqrt(cov(kb, kb));
    fit.rho_z = rho / fit.rho_std_error;
    fit.rho_probability = stats::normal_two_sided_p(fit.rho_z);

    double ybar = arma::mean(y);
    double sst = arma::dot(y - ybar, y - ybar);
    fit.stats.r2 = sst > 0.0 ? 1.0 - sse / sst : NAN; // pseudo R^2
    fit.stats.aic = 2.0 * double(k) - 2.0 * fit.log_likelihood;
    fit.stats.sic = double(k) * std::log(nd) - 2.0 * fit.log_likelihood;
    return fit;
}

GlobalFit fit_sem(const DesignMatrix& X, const arma::vec& y, const WeightMatrix& w,
                  const WeightEigen* eigen)
{
    if (!has_links(w))
        return degenerate_spatial_fit(X, y, GlobalModel::Sem);
    SpatialFitInputs in = prepare_spatial_fit(X, y, w, eigen);
    const std::size_t n = X.n();
    const std::size_t k = X.p() + 2;
    const std::size_t kb = X.p() + 1;
    const double nd = double(n);

    arma::vec wy = w.spmv(y);
    arma::mat wx = w.spmm(X.X);

    struct FilteredFit {
        arma::vec beta;
        arma::vec v;
        double sse;
    };
    auto filtered_fit = [&](double lambda) -> FilteredFit {
        arma::mat xs = X.X - lambda * wx;
        arma::vec ys = y - lambda * wy;
        arma::vec beta;
        if (!arma::solve(beta, xs, ys))
            throw std::runtime_error("fit_sem: filtered least-squares solve failed");
        arma::vec v = ys - xs * beta;
        return {beta, v, arma::dot(v, v)};
    };
    auto concentrated = [&](double lambda) {
        FilteredFit f = filtered_fit(lambda);
        if (f.sse <= 0.0)
            return -std::numeric_limits<double>::infinity();
        return -0.5 * nd * (kLogTwoPi + 1.0) - 0.5 * nd * std::log(f.sse / nd) + in.eigen.log_det(lambda);
    };

    LineSearchResult search = grid_then_golden(concentrated, in.lo, in.hi, 100, 1e-7);
    if (!std::isfinite(search.value))
        throw std::runtime_error("fit_sem: non-finite likelihood at optimum");
    double lambda = search.argmax;
    check_interior(lambda, in, "lambda");

    FilteredFit best = filtered_fit(lambda);
    double sigma2 = best.sse / nd;

    GlobalFit fit;
    fit.model = GlobalModel::Sem;
    fit.coefficient_names = coefficient_names_for(X);
    fit.coefficients = best.beta;
    fit.lambda = lambda;
    fit.residuals = best.v;
    fit.fitted = y - best.v;
    fit.sigma2 = sigma2;
    fit.log_likelihood = search.value;
    fit.profile_param = search.grid;
    fit.profile_loglik = search.grid_values;

    // observed information from a central-difference Hessian of the full
    // log-likelihood in (beta, lambda, sigma^2)
    auto full_loglik = [&](const arma::vec& theta) {
        arma::vec beta = theta.subvec(0, kb - 1);
        double lam = theta(kb);
        double s2 = theta(kb + 1);
        if (s2 <= 0.0)
            return -std::numeric_limits<double>::infinity();
        arma::vec u = y - X.X * beta;
        arma::vec v = u - lam * w.spmv(u);
        return -0.5 * nd * (kLogTwoPi + std::log(s2)) + in.eigen.log_det(lam) -
               arma::dot(v, v) / (2.0 * s2);
    };

    arma::vec theta(kb + 2);
    theta.subvec(0, kb - 1) = best.beta;
    theta(kb) = lambda;
    theta(kb + 1) = sigma2;

    const std::size_t dim = theta.n_elem;
    arma::vec step(dim);
    for (std::size_t i = 0; i < dim; ++i)
        step(i) = 1e-5 * std::max(std::fabs(theta(i)), 1.0);

    arma::mat hessian(dim, dim);
    double f0 = full_loglik(theta);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            double hij;
            if (i == j) {
                arma::vec tp = theta, tm = theta;
                tp(i) += step(i);
                tm(i) -= step(i);
                hij = (full_loglik(tp) - 2.0 * f0 + full_loglik(tm)) / (step(i) * step(i));
            } else {
                arma::vec tpp = theta, tpm = theta, tmp = theta, tmm = theta;
                tpp(i) += step(i); tpp(j) += step(j);
                tpm(i) += step(i); tpm(j) -= step(j);
                tmp(i) -= step(i); tmp(j) += step(j);
                tmm(i) -= step(i); tmm(j) -= step(j);
                hij = (full_loglik(tpp) - full_loglik(tpm) - full_loglik(tmp) + full_loglik(tmm)) /
                      (4.0 * step(i) * step(j));
            }
            hessian(i, j) = hessian(j, i) = hij;
        }
    }

    arma::mat cov;
    if (!arma::inv(cov, -hessian))
        throw std::runtime_error("fit_sem: observed information not invertible");

    fit.std_errors.set_size(kb);
    fit.t_or_z.set_size(kb);
    fit.probabilities.set_size(kb);
    for (std::size_t j = 0; j < kb; ++j) {
        fit.std_errors(j) = std::sqrt(cov(j, j));
        fit.t_or_z(j) = best.beta(j) / fit.std_errors(j);
        fit.probabilities(j) = stats::normal_two_sided_p(fit.t_or_z(j));
    }
    fit.lambda_std_error = std::sqrt(cov(kb, kb));
    fit.lambda_z = lambda / fit.lambda_std_error;
    fit.lambda_probability = stats::normal_two_sided_p(fit.lambda_z);

    double ybar = arma::mean(y);
    double sst = arma::dot(y - ybar, y - ybar);
    fit.stats.r2 = sst > 0.0 ? 1.0 - best.sse / sst : NAN; // pseudo R^2
    fit.stats.aic = 2.0 * double(k) - 2.0 * fit.log_likelihood;
    fit.stats.sic = double(k) * std::log(nd) - 2.0 * fit.log_likelihood;
    return fit;
}

InformationCriteria information_criteria(double log_likelihood, int k, int n)
{
    InformationCriteria out;
    out.aic = 2.0 * double(k) - 2.0 * log_likelihood;
    out.sic = double(k) * std::log(double(n)) - 2.0 * log_likelihood;
    if (n > k + 1) {
        out.aicc = out.aic + 2.0 * double(k) * double(k + 1) / double(n - k - 1);
        out.aicc_defined = true;
    }
    return out;
}

} // namespace spatecon
