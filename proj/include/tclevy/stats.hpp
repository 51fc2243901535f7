#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tclevy {

double mean_of(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);
double median_of(std::vector<double> v);            // copies, uses nth_element
double quantile_of(std::vector<double> v, double q); // q in [0,1], linear interp
double standard_error(const std::vector<double>& v);

double normal_cdf(double z);
// Survival function of the Kolmogorov distribution, Q(lambda) = 2 sum (-1)^{k-1} e^{-2k^2 lambda^2}.
double kolmogorov_sf(double lambda);
// Upper tail of a chi-square with dof degrees of freedom.
double chi_square_sf(double x, int dof);

struct KsResult {
    double statistic = 0.0; // sup |F1 - F2|
    double p_value = 1.0;
    std::size_t n1 = 0, n2 = 0;
    std::string method; // "asymptotic" or "permutation"
};

// Two-sample Kolmogorov-Smirnov test. Uses the asymptotic p-value with the
// small-sample correction when both samples have at least 100 points, and a
// seeded permutation p-value (10^4 shuffles) below that.
KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                       std::uint64_t seed = 0);

// Critical value for the two-sample KS statistic at significance alpha:
// c(alpha) * sqrt((m+n)/(m*n)) with c(alpha) = sqrt(-log(alpha/2)/2).
double ks_critical(double alpha, std::size_t m, std::size_t n);

} // namespace tclevy
