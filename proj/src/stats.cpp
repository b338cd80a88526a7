#include "spatecon/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace spatecon::stats {

double normal_sf(double z)
{
    static const boost::math::normal_distribution<double> dist(0.0, 1.0);
    return boost::math::cdf(boost::math::complement(dist, z));
}

double normal_two_sided_p(double z)
{
    return std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
}

double chi_squared_sf(double x, double df)
{
    if (x <= 0.0)
        return 1.0;
    boost::math::chi_squared_distribution<double> dist(df);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double student_t_two_sided_p(double t, double df)
{
    if (df <= 0.0)
        throw std::invalid_argument("student_t_two_sided_p: df must be positive");
    boost::math::students_t_distribution<double> dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

double student_t_critical(double alpha, double df)
{
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("student_t_critical: alpha must be in (0, 1)");
    if (df <= 0.0)
        throw std::invalid_argument("student_t_critical: df must be positive");
    boost::math::students_t_distribution<double> dist(df);
    return boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
}

double f_sf(double f, double df1, double df2)
{
    if (f <= 0.0)
        return 1.0;
    boost::math::fisher_f_distribution<double> dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

} // namespace spatecon::stats
