#include "spatecon/local_models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "spatecon/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spatecon {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

arma::vec bisquare_weights(const arma::vec& distances, int k)
{
    const std::size_t n = distances.n_elem;
    if (k < 1)
        throw std::invalid_argument("bisquare_weights: bandwidth must be at least 1");
    if (std::size_t(k) > n)
        throw std::invalid_argument("bisquare_weights: bandwidth exceeds point count");
    arma::vec sorted = arma::sort(distances);
    double b = sorted(std::size_t(k) - 1);
    arma::vec w(n, arma::fill::zeros);
    if (b <= 0.0) {
        // k-th neighbor coincides with the focal point
        for (std::size_t i = 0; i < n; ++i)
            w(i) = distances(i) == 0.0 ? 1.0 : 0.0;
        return w;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double d = distances(i);
        if (d < b) {
            double u = 1.0 - (d / b) * (d / b);
            w(i) = u * u;
        }
    }
    return w;
}

arma::mat pairwise_distances(std::span<const LonLat> coords, DistanceMetric metric, const ExecSpec& exec)
{
    const std::size_t n = coords.size();
    arma::mat dist(n, n, arma::fill::zeros);
    auto one_row = [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = point_distance(coords[i], coords[j], metric);
            dist(i, j) = d;
            dist(j, i) = d;
        }
    };
    const long nl = static_cast<long>(n);
    if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(dynamic, 8) num_threads(exec.resolved_threads())
        for (long i = 0; i < nl; ++i)
            one_row(std::size_t(i));
    } else {
        for (long i = 0; i < nl; ++i)
            one_row(std::size_t(i));
    }
    return dist;
}

arma::vec weighted_least_squares(const arma::mat& X, const arma::vec& y, const arma::vec& w)
{
    arma::mat xtw = X.t();
    xtw.each_row() %= w.t();
    arma::mat xtwx = xtw * X;
    arma::mat inv;
    if (!arma::inv_sympd(inv, xtwx))
        throw std::runtime_error("weighted_least_squares: weighted design is rank deficient");
    return inv * (xtw * y);
}

namespace {

double smoother_aicc(double rss, double trace, std::size_t n)
{
    double nd = double(n);
    double denom = nd - 2.0 - trace;
    if (!(rss > 0.0) || denom <= 0.0)
        return kInf;
    return nd * std::log(rss / nd) + nd * kLogTwoPi + nd * (nd + trace) / denom;
}

double smoother_aic(double rss, double trace, std::size_t n)
{
    double nd = double(n);
    return nd * std::log(rss / nd) + nd * kLogTwoPi + nd + trace;
}

double smoother_bic(double rss, double trace, std::size_t n)
{
    double nd = double(n);
    return nd * std::log(rss / nd) + nd * kLogTwoPi + nd + trace * std::log(nd);
}

struct GwrPass {
    arma::mat betas; // n x m
    arma::vec leverage; // n
    arma::vec fitted; // n
    arma::vec local_r2; // n, only when requested
    double rss = NAN;
    double hat_trace = NAN;
    long failed_at = -1;
};

/// One sweep of per-location weighted fits. All outputs are written by
/// location index, so serial and OpenMP schedules agree bit for bit.
GwrPass gwr_pass(const arma::mat& X, const arma::vec& y, const arma::mat& dist, int k,
                 const ExecSpec& exec, bool want_local_r2,
                 std::vector<arma::mat>* term_smoothers)
{
    const std::size_t n = X.n_rows;
    const std::size_t m = X.n_cols;
    GwrPass pass;
    pass.betas.set_size(n, m);
    pass.leverage.set_size(n);
    pass.fitted.set_size(n);
    if (want_local_r2)
        pass.local_r2.set_size(n);
    if (term_smoothers) {
        term_smoothers->assign(m, arma::mat(n, n, arma::fill::zeros));
    }

    std::atomic<long> failed_at{-1};
    auto process = [&](std::size_t i) {
        arma::vec w = bisquare_weights(dist.col(i), k);
        arma::mat xtw = X.t();
        xtw.each_row() %= w.t();
        arma::mat xtwx = xtw * X;
        arma::mat inv;
        if (!arma::inv_sympd(inv, xtwx)) {
            long expected = -1;
            failed_at.compare_exchange_strong(expected, long(i));
            return;
        }
        arma::vec beta = inv * (xtw * y);
        pass.betas.row(i) = beta.t();
        arma::vec xi = X.row(i).t();
        pass.leverage(i) = arma::dot(xi, inv * xi) * w(i);
        pass.fitted(i) = arma::dot(xi, beta);
        if (term_smoothers) {
            arma::mat c = inv * xtw; // m x n
            for (std::size_t j = 0; j < m; ++j)
                (*term_smoothers)[j].row(i) = X(i, j) * c.row(j);
        }
        if (want_local_r2) {
            double wsum = arma::accu(w);
            double ybar = arma::dot(w, y) / wsum;
            arma::vec r = y - X * beta;
            double sse = arma::dot(w, r % r);
            double sst = arma::dot(w, arma::square(y - ybar));
            pass.local_r2(i) = sst > 0.0 ? 1.0 - sse / sst : NAN;
        }
    };

    const long nl = static_cast<long>(n);
    if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(static) num_threads(exec.resolved_threads())
        for (long i = 0; i < nl; ++i) {
            if (failed_at.load(std::memory_order_relaxed) >= 0)
                continue;
            process(std::size_t(i));
        }
    } else {
        for (long i = 0; i < nl; ++i) {
            if (failed_at.load(std::memory_order_relaxed) >= 0)
                break;
            process(std::size_t(i));
        }
    }
    pass.failed_at = failed_at.load();
    if (pass.failed_at >= 0)
        return pass;

    double rss = 0.0, trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y(i) - pass.fitted(i);
        rss += r * r;
        trace += pass.leverage(i);
    }
    pass.rss = rss;
    pass.hat_trace = trace;
    return pass;
}

struct TermPass {
    arma::vec beta; // n
    double rss = NAN;
    double hat_trace = NAN;
    long failed_at = -1;
};

/// Single-covariate weighted fit (no intercept); the smoother matrix rows
/// are captured when `smoother` is non-null.
TermPass term_pass(const arma::vec& x, const arma::vec& target, const arma::mat& dist, int k,
                   const ExecSpec& exec, arma::mat* smoother)
{
    const std::size_t n = x.n_elem;
    TermPass pass;
    pass.beta.set_size(n);
    arma::vec fitted(n), leverage(n);

    std::atomic<long> failed_at{-1};
    auto process = [&](std::size_t i) {
        arma::vec w = bisquare_weights(dist.col(i), k);
        double sxx = arma::dot(w, x % x);
        if (!(sxx > 1e-300)) {
            long expected = -1;
            failed_at.compare_exchange_strong(expected, long(i));
            return;
        }
        double beta = arma::dot(w, x % target) / sxx;
        pass.beta(i) = beta;
        fitted(i) = x(i) * beta;
        leverage(i) = x(i) * x(i) * w(i) / sxx;
        if (smoother)
            smoother->row(i) = (x(i) / sxx) * (w % x).t();
    };

    const long nl = static_cast<long>(n);
    if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(static) num_threads(exec.resolved_threads())
        for (long i = 0; i < nl; ++i) {
            if (failed_at.load(std::memory_order_relaxed) >= 0)
                continue;
            process(std::size_t(i));
        }
    } else {
        for (long i = 0; i < nl; ++i) {
            if (failed_at.load(std::memory_order_relaxed) >= 0)
                break;
            process(std::size_t(i));
        }
    }
    pass.failed_at = failed_at.load();
    if (pass.failed_at >= 0)
        return pass;

    double rss = 0.0, trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = target(i) - fitted(i);
        rss += r * r;
        trace += leverage(i);
    }
    pass.rss = rss;
    pass.hat_trace = trace;
    return pass;
}

void check_local_preconditions(const DesignMatrix& X, const arma::vec& y,
                               std::span<const LonLat> coords)
{
    if (coords.size() != X.n())
        throw std::invalid_argument("local fit: coordinate count does not match design rows");
    if (y.n_elem != X.n())
        throw std::invalid_argument("local fit: response length does not match design rows");
    if (!y.is_finite())
        throw std::invalid_argument("local fit: response contains non-finite values");
    if (X.n() <= X.p() + 2)
        throw std::runtime_error("local fit: need n > p + 2 observations");
    X.require_full_rank();
}

} // namespace

int golden_search_bandwidth(const std::function<double(int)>& objective, int k_min, int k_max)
{
    if (k_min >= k_max)
        throw std::invalid_argument("golden_search_bandwidth: k_min must be below k_max");

    std::map<int, double> memo;
    auto eval = [&](double x) {
        int k = int(std::llround(x));
        k = std::clamp(k, k_min, k_max);
        auto it = memo.find(k);
        if (it != memo.end())
            return it->second;
        double v = objective(k);
        memo.emplace(k, v);
        return v;
    };

    eval(double(k_min));
    eval(double(k_max));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = double(k_min), b = double(k_max);
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    while (b - a >= 1.0) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        }
    }

    int best_k = k_min;
    double best_v = kInf;
    for (const auto& [k, v] : memo) {
        if (v < best_v) { // ascending keys: ties keep the smaller k
            best_v = v;
            best_k = k;
        }
    }
    if (!std::isfinite(best_v))
        throw std::runtime_error("golden_search_bandwidth: objective non-finite on the entire interval");
    return best_k;
}

GwrFit fit_gwr(const DesignMatrix& X, const arma::vec& y, std::span<const LonLat> coords,
               const GwrOptions& options)
{
    check_local_preconditions(X, y, coords);
    const std::size_t n = X.n();
    const std::size_t m = X.p() + 1;
    const int k_min = int(m) + 1; // p + 2
    const int k_max = int(n);

    arma::mat dist = pairwise_distances(coords, options.metric, options.exec);

    int k;
    if (options.bandwidth) {
        k = *options.bandwidth;
        if (k < k_min || k > k_max)
            throw std::invalid_argument("fit_gwr: bandwidth outside [p + 2, n]");
    } else {
        auto objective = [&](int kk) {
            GwrPass pass = gwr_pass(X.X, y, dist, kk, options.exec, false, nullptr);
            if (pass.failed_at >= 0)
                return kInf;
            return smoother_aicc(pass.rss, pass.hat_trace, n);
        };
        k = golden_search_bandwidth(objective, k_min, k_max);
    }

    GwrPass pass = gwr_pass(X.X, y, dist, k, options.exec, true, nullptr);
    if (pass.failed_at >= 0)
        throw std::runtime_error("fit_gwr: weighted design rank-deficient at location " +
                                 std::to_string(pass.failed_at) + "; increase the bandwidth");

    GwrFit fit;
    fit.local_coefficients = std::move(pass.betas);
    fit.local_r2 = std::move(pass.local_r2);
    fit.bandwidth = k;
    fit.hat_trace = pass.hat_trace;
    fit.fitted = std::move(pass.fitted);
    fit.residuals = y - fit.fitted;
    fit.rss = pass.rss;
    fit.sigma2 = fit.rss / double(n);
    double ybar = arma::mean(y);
    double sst = arma::dot(y - ybar, y - ybar);
    fit.r2 = sst > 0.0 ? 1.0 - fit.rss / sst : NAN;
    fit.adj_r2 = sst > 0.0
                     ? 1.0 - (1.0 - fit.r2) * (double(n) - 1.0) / (double(n) - fit.hat_trace - 1.0)
                     : NAN;
    fit.aic = smoother_aic(fit.rss, fit.hat_trace, n);
    fit.aicc = smoother_aicc(fit.rss, fit.hat_trace, n);
    fit.bic = smoother_bic(fit.rss, fit.hat_trace, n);
    CorrectedInference ci = corrected_inference(fit.hat_trace, m, n, options.alpha);
    fit.adj_alpha = ci.adj_alpha;
    fit.critical_t = ci.critical_t;
    return fit;
}

MgwrFit fit_mgwr(const DesignMatrix& X, const arma::vec& y, std::span<const LonLat> coords,
                 const MgwrOptions& options)
{
    check_local_preconditions(X, y, coords);
    const std::size_t n = X.n();
    const std::size_t m = X.p() + 1;
    const int k_min = int(m) + 1;
    const int k_max = int(n);

    if (options.fixed_bandwidths && options.fixed_bandwidths->size() != m)
        throw std::invalid_argument("fit_mgwr: fixed_bandwidths must have one entry per term");

    arma::mat dist = pairwise_distances(coords, options.metric, options.exec);

    // starting fit: optimal single-bandwidth GWR with per-term smoothers
    auto init_objective = [&](int kk) {
        GwrPass pass = gwr_pass(X.X, y, dist, kk, options.exec, false, nullptr);
        if (pass.failed_at >= 0)
            return kInf;
        return smoother_aicc(pass.rss, pass.hat_trace, n);
    };
    int k0 = golden_search_bandwidth(init_objective, k_min, k_max);

    std::vector<arma::mat> term_smoothers;
    GwrPass init = gwr_pass(X.X, y, dist, k0, options.exec, false, &term_smoothers);
    if (init.failed_at >= 0)
        throw std::runtime_error("fit_mgwr: weighted design rank-deficient at location " +
                                 std::to_string(init.failed_at) + " in the starting fit");

    arma::mat total_smoother(n, n, arma::fill::zeros);
    for (const auto& s : term_smoothers)
        total_smoother += s;

    arma::mat betas = init.betas; // n x m
    arma::mat terms(n, m); // f_j = beta_j .* x_j
    for (std::size_t j = 0; j < m; ++j)
        terms.col(j) = betas.col(j) % X.X.col(j);

    std::vector<int> bandwidths(m, k0);
    if (options.fixed_bandwidths)
        for (std::size_t j = 0; j < m; ++j) {
            int kj = (*options.fixed_bandwidths)[j];
            if (kj < k_min || kj > k_max)
                throw std::invalid_argument("fit_mgwr: fixed bandwidth outside [p + 2, n]");
            bandwidths[j] = kj;
        }

    MgwrFit fit;
    fit.init_bandwidth = k0;
    fit.converged = false;
    fit.backfit_iterations = 0;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        arma::mat terms_before = terms;
        for (std::size_t j = 0; j < m; ++j) {
            arma::vec resid = y - arma::sum(terms, 1);
            arma::vec target = resid + terms.col(j);
            arma::vec xj = X.X.col(j);

            if (!options.fixed_bandwidths) {
                auto objective = [&](int kk) {
                    TermPass tp = term_pass(xj, target, dist, kk, options.exec, nullptr);
                    if (tp.failed_at >= 0)
                        return kInf;
                    return smoother_aicc(tp.rss, tp.hat_trace, n);
                };
                bandwidths[j] = golden_search_bandwidth(objective, k_min, k_max);
            }

            arma::mat sj(n, n);
            TermPass tp = term_pass(xj, target, dist, bandwidths[j], options.exec, &sj);
            if (tp.failed_at >= 0)
                throw std::runtime_error("fit_mgwr: degenerate term fit for '" +
                                         (j == 0 ? std::string("CONSTANT") : X.names[j - 1]) +
                                         "' at location " + std::to_string(tp.failed_at));

            arma::mat rj_new = sj * (term_smoothers[j] - total_smoother) + sj;
            total_smoother += rj_new - term_smoothers[j];
            term_smoothers[j] = std::move(rj_new);

            betas.col(j) = tp.beta;
            terms.col(j) = tp.beta % xj;
        }
        fit.backfit_iterations = iter;

        double num = arma::accu(arma::square(terms - terms_before)) / double(n);
        arma::vec row_sums = arma::sum(terms, 1);
        double den = arma::accu(arma::square(row_sums));
        double soc = den > 0.0 ? std::sqrt(num / den) : 0.0;
        if (soc < options.soc_tolerance) {
            fit.converged = true;
            break;
        }
    }

    fit.local_coefficients = betas;
    fit.covariate_bandwidths = bandwidths;
    fit.fitted = arma::sum(terms, 1);
    fit.residuals = y - fit.fitted;
    fit.rss = arma::dot(fit.residuals, fit.residuals);
    fit.sigma2 = fit.rss / double(n);
    fit.hat_trace = arma::trace(total_smoother);

    double ybar = arma::mean(y);
    double sst = arma::dot(y - ybar, y - ybar);
    fit.r2 = sst > 0.0 ? 1.0 - fit.rss / sst : NAN;
    fit.adj_r2 = sst > 0.0
                     ? 1.0 - (1.0 - fit.r2) * (double(n) - 1.0) / (double(n) - fit.hat_trace - 1.0)
                     : NAN;
    fit.aic = smoother_aic(fit.rss, fit.hat_trace, n);
    fit.aicc = smoother_aicc(fit.rss, fit.hat_trace, n);
    fit.bic = smoother_bic(fit.rss, fit.hat_trace, n);
    CorrectedInference ci = corrected_inference(fit.hat_trace, m, n, options.alpha);
    fit.adj_alpha = ci.adj_alpha;
    fit.critical_t = ci.critical_t;

    // local goodness of fit against the starting kernel's weighting
    fit.local_r2.set_size(n);
    {
        const long nl = static_cast<long>(n);
        auto one = [&](std::size_t i) {
            arma::vec w = bisquare_weights(dist.col(i), k0);
            double wsum = arma::accu(w);
            double ybar_w = arma::dot(w, y) / wsum;
            double sse = arma::dot(w, arma::square(fit.residuals));
            double sst_w = arma::dot(w, arma::square(y - ybar_w));
            fit.local_r2(i) = sst_w > 0.0 ? std::max(0.0, 1.0 - sse / sst_w) : NAN;
        };
        if (options.exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(static) num_threads(options.exec.resolved_threads())
            for (long i = 0; i < nl; ++i)
                one(std::size_t(i));
        } else {
            for (long i = 0; i < nl; ++i)
                one(std::size_t(i));
        }
    }

    if (options.compute_bandwidth_intervals) {
        std::vector<std::pair<int, int>> intervals(m);
        arma::vec resid = y - arma::sum(terms, 1);
        for (std::size_t j = 0; j < m; ++j) {
            arma::vec target = resid + terms.col(j);
            arma::vec xj = X.X.col(j);
            auto objective = [&](int kk) {
                TermPass tp = term_pass(xj, target, dist, kk, options.exec, nullptr);
                if (tp.failed_at >= 0)
                    return kInf;
                return smoother_aicc(tp.rss, tp.hat_trace, n);
            };
            intervals[j] = bandwidth_interval(objective, bandwidths[j], k_min, k_max);
        }
        fit.bandwidth_intervals = std::move(intervals);
    }
    return fit;
}

CorrectedInference corrected_inference(double hat_trace, std::size_t n_terms, std::size_t n,
                                       double alpha)
{
    if (!(hat_trace > 0.0))
        throw std::invalid_argument("corrected_inference: hat trace must be positive");
    if (hat_trace >= double(n) - 1.0)
        throw std::runtime_error("corrected_inference: hat trace leaves no residual degrees of freedom");
    double effective_tests = hat_trace / double(n_terms);
    CorrectedInference out;
    out.adj_alpha = alpha / effective_tests;
    out.critical_t = stats::student_t_critical(out.adj_alpha, double(n) - hat_trace);
    return out;
}

LocalCollinearityAt local_collinearity_at(const DesignMatrix& X, const arma::vec& weights)
{
    const std::size_t m = X.p() + 1;
    if (weights.n_elem != X.n())
        throw std::invalid_argument("local_collinearity_at: weight length mismatch");

    LocalCollinearityAt out;
    arma::vec sw = arma::sqrt(weights);
    arma::mat xw = X.X.each_col() % sw;

    arma::mat z = xw;
    for (std::size_t j = 0; j < m; ++j) {
        double nrm = arma::norm(z.col(j));
        if (nrm > 0.0)
            z.col(j) /= nrm;
        else
            out.degenerate = true;
    }

    arma::mat u, v;
    arma::vec s;
    if (!arma::svd_econ(u, s, v, z))
        throw std::runtime_error("local_collinearity_at: SVD failed");

    double smin = s(s.n_elem - 1);
    out.condition_number = smin > 0.0 ? s(0) / smin : kInf;

    out.vdp.set_size(m, m);
    for (std::size_t j = 0; j < m; ++j) {
        arma::vec phi(m);
        for (std::size_t c = 0; c < m; ++c) {
            double sv = std::max(s(c), 1e-154);
            double ratio = v(j, c) / sv;
            phi(c) = ratio * ratio;
        }
        double total = arma::accu(phi);
        for (std::size_t c = 0; c < m; ++c)
            out.vdp(c, j) = total > 0.0 ? phi(c) / total : 0.0;
    }

    const std::size_t p = X.p();
    out.vif.set_size(p);
    if (p <= 1) {
        out.vif.fill(1.0);
        if (p == 1) {
            double wsum = arma::accu(weights);
            arma::vec col = X.X.col(1);
            double mean = arma::dot(weights, col) / wsum;
            double var = arma::dot(weights, arma::square(col - mean)) / wsum;
            if (!(var > 0.0)) {
                out.degenerate = true;
                out.vif(0) = kInf;
            }
        }
    } else {
        double wsum = arma::accu(weights);
        arma::mat centered(X.n(), p);
        arma::vec sd(p);
        bool zero_var = false;
        for (std::size_t j = 0; j < p; ++j) {
            arma::vec col = X.X.col(j + 1);
            double mean = arma::dot(weights, col) / wsum;
            centered.col(j) = col - mean;
            double var = arma::dot(weights, arma::square(centered.col(j))) / wsum;
            sd(j) = std::sqrt(var);
            if (!(var > 0.0))
                zero_var = true;
        }
        if (zero_var) {
            out.degenerate = true;
            out.vif.fill(kInf);
        } else {
            arma::mat corr(p, p);
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b < p; ++b)
                    corr(a, b) =
                        arma::dot(weights, centered.col(a) % centered.col(b)) / (wsum * sd(a) * sd(b));
            arma::mat rinv;
            if (arma::inv_sympd(rinv, corr))
                out.vif = rinv.diag();
            else
                out.vif.fill(kInf);
        }
    }
    return out;
}

LocalCollinearity local_collinearity(const DesignMatrix& X, std::span<const LonLat> coords,
                                     KernelSpec kernel, const ExecSpec& exec)
{
    // no rank requirement here: exact collinearity is what this reports
    if (coords.size() != X.n())
        throw std::invalid_argument("local_collinearity: coordinate count does not match design rows");
    const std::size_t n = X.n();
    const int k_min = int(X.p() + 2);
    if (kernel.bandwidth < k_min || std::size_t(kernel.bandwidth) > n)
        throw std::invalid_argument("local_collinearity: bandwidth outside [p + 2, n]");

    arma::mat dist = pairwise_distances(coords, DistanceMetric::Euclidean, exec);

    LocalCollinearity out;
    out.condition_number.set_size(n);
    out.local_vif.set_size(n, X.p());
    out.vdp.resize(n);
    // vector<bool> packs bits; parallel writes need a byte-wide scratch
    std::vector<std::uint8_t> flagged(n, 0);
    std::vector<std::uint8_t> degenerate(n, 0);

    const long nl = static_cast<long>(n);
    auto one = [&](std::size_t i) {
        arma::vec w = bisquare_weights(dist.col(i), kernel.bandwidth);
        LocalCollinearityAt at = local_collinearity_at(X, w);
        out.condition_number(i) = at.condition_number;
        if (X.p() > 0)
            out.local_vif.row(i) = at.vif.t();
        out.vdp[i] = std::move(at.vdp);
        flagged[i] = (at.condition_number > 30.0 || out.vdp[i].max() > 0.5) ? 1 : 0;
        degenerate[i] = at.degenerate ? 1 : 0;
    };
    if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(static) num_threads(exec.resolved_threads())
        for (long i = 0; i < nl; ++i)
            one(std::size_t(i));
    } else {
        for (long i = 0; i < nl; ++i)
            one(std::size_t(i));
    }
    out.flagged.assign(flagged.begin(), flagged.end());
    for (std::size_t i = 0; i < n; ++i)
        if (degenerate[i])
            out.degenerate_locations.push_back(std::uint32_t(i));
    return out;
}

std::pair<int, int> bandwidth_interval(const std::function<double(int)>& objective, int k_star,
                                       int k_min, int k_max)
{
    if (k_star < k_min || k_star > k_max)
        throw std::invalid_argument("bandwidth_interval: k_star outside [k_min, k_max]");
    double base = objective(k_star);
    double limit = base + 2.0;
    int lower = k_star;
    while (lower - 1 >= k_min && objective(lower - 1) <= limit)
        --lower;
    int upper = k_star;
    while (upper + 1 <= k_max && objective(upper + 1) <= limit)
        ++upper;
    return {lower, upper};
}

std::array<std::string, 8> local_r2_bin_labels()
{
    return {"0 - 0.34", "0.34 - 0.66", "0.66 - 0.79", "0.79 - 0.85",
            "0.85 - 0.89", "0.89 - 0.93", "0.93 - 0.96", "0.96 - 1.00"};
}

std::array<std::size_t, 8> bin_local_r2(const arma::vec& local_r2)
{
    std::array<std::size_t, 8> counts{};
    for (double v : local_r2) {
        std::size_t bin = 0;
        while (bin < 7 && v > kLocalR2BinEdges[bin + 1])
            ++bin;
        ++counts[bin];
    }
    return counts;
}

} // namespace spatecon
