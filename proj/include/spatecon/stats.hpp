#ifndef SPATECON_STATS_HPP
#define SPATECON_STATS_HPP

namespace spatecon::stats {

/// P(Z > z) for a standard normal variate.
double normal_sf(double z);

/// Two-sided normal probability, 2 * P(Z > |z|).
double normal_two_sided_p(double z);

/// P(X > x) for a chi-squared variate with `df` degrees of freedom.
double chi_squared_sf(double x, double df);

/// Two-sided Student-t probability: 2 * P(T > |t|) with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Two-sided critical value: the t with P(|T| > t) = alpha.
double student_t_critical(double alpha, double df);

/// P(F > f) for an F variate with (df1, df2) degrees of freedom.
double f_sf(double f, double df1, double df2);

} // namespace spatecon::stats

#endif
