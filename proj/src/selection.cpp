#include "spatecon/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spatecon/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spatecon {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(RejectReason reason)
{
    switch (reason) {
    case RejectReason::Vif: return "vif";
    case RejectReason::PValue: return "p_value";
    case RejectReason::Rank: return "rank";
    }
    return "?";
}

arma::vec vif(const DesignMatrix& X)
{
    const std::size_t p = X.p();
    const std::size_t n = X.n();
    if (n <= p + 1)
        throw std::runtime_error("vif: need n > p + 1 observations");
    arma::vec out(p);
    for (std::size_t j = 0; j < p; ++j) {
        arma::vec target = X.X.col(j + 1);
        arma::mat others = X.X;
        others.shed_col(j + 1);
        arma::vec beta;
        if (!arma::solve(beta, others, target, arma::solve_opts::no_approx)) {
            out(j) = kInf;
            continue;
        }
        arma::vec resid = target - others * beta;
        double sse = arma::dot(resid, resid);
        double mean = arma::mean(target);
        double sst = arma::dot(target - mean, target - mean);
        if (!(sst > 0.0)) {
            out(j) = kInf; // constant column
            continue;
        }
        double r2 = 1.0 - sse / sst;
        out(j) = r2 >= 1.0 - 1e-12 ? kInf : 1.0 / (1.0 - r2);
    }
    return out;
}

namespace {

struct CandidateEval {
    double p_value = kInf;
    double adj_r2 = NAN;
    double max_vif = kInf;
    bool rank_ok = false;
};

CandidateEval evaluate_candidate(const DesignMatrix& candidates, const arma::vec& y,
                                 const std::vector<std::size_t>& selected, std::size_t candidate)
{
    CandidateEval eval;
    std::vector<std::string> names;
    for (std::size_t idx : selected)
        names.push_back(candidates.names[idx]);
    names.push_back(candidates.names[candidate]);

    try {
        DesignMatrix trial = candidates.with_columns(names);
        if (trial.n() <= trial.p() + 1 || arma::rank(trial.X) < trial.X.n_cols)
            return eval; // rank_ok stays false

        GlobalFit fit = fit_ols(trial, y);
        eval.rank_ok = true;
        eval.p_value = fit.probabilities(trial.p()); // entering column is last
        eval.adj_r2 = fit.stats.adj_r2;
        arma::vec v = vif(trial);
        eval.max_vif = v.n_elem > 0 ? v.max() : 0.0;
    } catch (const std::exception&) {
        eval.rank_ok = false; // exceptions must not escape the parallel loop
    }
    return eval;
}

} // namespace

SelectionResult stepwise_forward(const DesignMatrix& candidates, const arma::vec& y, double p_enter,
                                 double vif_cap, const ExecSpec& exec)
{
    if (candidates.p() == 0)
        throw std::invalid_argument("stepwise_forward: need at least one candidate");
    if (y.n_elem != candidates.n())
        throw std::invalid_argument("stepwise_forward: response length mismatch");

    SelectionResult result;
    std::vector<std::size_t> selected;
    std::vector<std::size_t> remaining(candidates.p());
    for (std::size_t j = 0; j < candidates.p(); ++j)
        remaining[j] = j;

    // last rejection reason per candidate, refreshed each step
    std::vector<RejectReason> last_reason(candidates.p(), RejectReason::PValue);

    while (!remaining.empty()) {
        std::vector<CandidateEval> evals(remaining.size());
        const long rl = static_cast<long>(remaining.size());
        if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(dynamic) num_threads(exec.resolved_threads())
            for (long r = 0; r < rl; ++r)
                evals[std::size_t(r)] = evaluate_candidate(candidates, y, selected, remaining[std::size_t(r)]);
        } else {
            for (long r = 0; r < rl; ++r)
                evals[std::size_t(r)] = evaluate_candidate(candidates, y, selected, remaining[std::size_t(r)]);
        }

        long best = -1;
        for (std::size_t r = 0; r < remaining.size(); ++r) {
            const CandidateEval& e = evals[r];
            std::size_t idx = remaining[r];
            if (!e.rank_ok) {
                last_reason[idx] = RejectReason::Rank;
                continue;
            }
            if (!(e.p_value < p_enter)) {
                last_reason[idx] = RejectReason::PValue;
                continue;
            }
            if (!(e.max_vif <= vif_cap)) {
                last_reason[idx] = RejectReason::Vif;
                continue;
            }
            if (best < 0)
                best = long(r);
            else {
                const CandidateEval& b = evals[std::size_t(best)];
                if (e.p_value < b.p_value ||
                    (e.p_value == b.p_value &&
                     candidates.names[idx] < candidates.names[remaining[std::size_t(best)]]))
                    best = long(r);
            }
        }
        if (best < 0)
            break;

        std::size_t chosen = remaining[std::size_t(best)];
        const CandidateEval& e = evals[std::size_t(best)];
        result.step_log.push_back({candidates.names[chosen], e.p_value, e.adj_r2, e.max_vif});
        result.selected.push_back(candidates.names[chosen]);
        selected.push_back(chosen);
        remaining.erase(remaining.begin() + best);
    }

    for (std::size_t j = 0; j < candidates.p(); ++j)
        if (std::find(selected.begin(), selected.end(), j) == selected.end())
            result.rejected.emplace_back(candidates.names[j], last_reason[j]);
    return result;
}

std::vector<ColumnCheck> confirm_enter(const DesignMatrix& selected, const arma::vec& y)
{
    if (selected.p() == 0)
        throw std::invalid_argument("confirm_enter: selected set is empty");
    GlobalFit fit = fit_ols(selected, y);
    arma::vec v = vif(selected);
    std::vector<ColumnCheck> out;
    out.reserve(selected.p());
    for (std::size_t j = 0; j < selected.p(); ++j)
        out.push_back({selected.names[j], v(j), fit.t_or_z(j + 1), fit.probabilities(j + 1)});
    return out;
}

} // namespace spatecon
