#pragma once

namespace twk {

/// Standard normal CDF, Phi(x) = erfc(-x / sqrt(2)) / 2.
double gaussian_cdf(double x);

/// Standard normal quantile (percent point function), Phi^-1(p).
/// Wichura's AS 241 (PPND16) rational approximations, accurate to roughly
/// one ulp across (0,1). Throws std::domain_error for p outside (0,1).
double gaussian_ppf(double p);

}  // namespace twk
