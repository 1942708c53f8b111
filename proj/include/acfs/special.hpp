#ifndef ACFS_SPECIAL_HPP
#define ACFS_SPECIAL_HPP

// Scalar distribution functions used by the copula samplers and the
// Gaussian-process acquisition: standard normal CDF/quantile/pdf,
// regularised incomplete beta, and the Student-t CDF/quantile.

namespace acfs {

double norm_pdf(double z);
double norm_cdf(double z);

// Inverse standard normal CDF, |Phi(Phi^-1(p)) - p| < 1e-14 over (0,1).
double norm_quantile(double p);

// Regularised incomplete beta I_x(a,b) via Lentz continued fraction.
double reg_inc_beta(double x, double a, double b);

// Inverse of reg_inc_beta in x for fixed (a,b); safeguarded Newton.
double inv_reg_inc_beta(double u, double a, double b);

double student_t_pdf(double t, double nu);
double student_t_cdf(double t, double nu);

// Student-t quantile via the inverse regularised incomplete beta plus
// Newton polishing on the CDF; absolute CDF residual below 1e-10.
double student_t_quantile(double p, double nu);

} // namespace acfs

#endif
