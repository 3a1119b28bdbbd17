#pragma once

namespace minispace::stats {

// Tail probabilities built on the regularized incomplete beta and gamma
// functions.
//
// Incomplete beta: modified Lentz evaluation of the standard continued
// fraction, using I_x(a,b) = 1 - I_{1-x}(b,a) when x > (a+1)/(a+b+2) so the
// fraction is always evaluated where it converges quickly.
//
// Incomplete gamma: power series for P(a,x) when x < a+1, Lentz continued
// fraction for Q(a,x) otherwise. Each tail is computed directly on its
// convergent side and the other obtained by complement.

/// I_x(a, b) for a, b > 0 and x in [0, 1].
double regularized_beta(double a, double b, double x);

/// P(a, x), lower regularized incomplete gamma.
double regularized_gamma_p(double a, double x);
/// Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

double normal_cdf(double z);
/// Upper tail 1 - Phi(z).
double normal_sf(double z);
/// Phi^-1(p) for p in (0, 1): rational approximation refined by Halley steps.
double normal_quantile(double p);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double t_two_sided_p(double t, double df);
/// P(T <= t).
double t_cdf(double t, double df);

/// P(F >= f) for the F(d1, d2) distribution.
double f_sf(double f, double d1, double d2);
double f_cdf(double f, double d1, double d2);
/// Value q with P(F <= q) = p, by bisection on the beta scale.
double f_quantile(double p, double d1, double d2);

/// P(X >= x) for chi-square with k degrees of freedom.
double chi2_sf(double x, double k);

}  // namespace minispace::stats
