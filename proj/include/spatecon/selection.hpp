#ifndef SPATECON_SELECTION_HPP
#define SPATECON_SELECTION_HPP

#include <string>
#include <vector>

#include <armadillo>

#include "spatecon/global_models.hpp"
#include "spatecon/parallel.hpp"

namespace spatecon {

/// Variance inflation factors, one per covariate: 1 / (1 - R2_j) from
/// regressing column j on the remaining covariates plus intercept. Exact
/// collinearity yields +infinity, never a crash.
arma::vec vif(const DesignMatrix& X);

enum class RejectReason {
    Vif,
    PValue,
    Rank,
};

std::string_view to_string(RejectReason reason);

struct StepInfo {
    std::string entered;
    double p_value = 0.0;
    double adj_r2 = 0.0;
    double max_vif = 0.0;
};

struct SelectionResult {
    std::vector<std::string> selected;
    std::vector<StepInfo> step_log;
    std::vector<std::pair<std::string, RejectReason>> rejected;
};

/// Forward stepwise selection: each step admits the candidate with the
/// smallest entry p-value subject to p < p_enter and a post-entry VIF cap;
/// ties break by column name. Deterministic for identical inputs.
SelectionResult stepwise_forward(const DesignMatrix& candidates, const arma::vec& y,
                                 double p_enter = 0.05, double vif_cap = 10.0,
                                 const ExecSpec& exec = {});

struct ColumnCheck {
    std::string name;
    double vif = 0.0;
    double t = 0.0;
    double p = 0.0;
};

/// Final confirmation pass: one full OLS on the selected set, reporting
/// each column's VIF, t and p.
std::vector<ColumnCheck> confirm_enter(const DesignMatrix& selected, const arma::vec& y);

} // namespace spatecon

#endif
