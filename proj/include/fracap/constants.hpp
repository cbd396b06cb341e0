#ifndef FRACAP_CONSTANTS_HPP
#define FRACAP_CONSTANTS_HPP

namespace fracap {

/// Gamma function via the g=7, 9-term Lanczos approximation (Godfrey
/// coefficients), reflection formula for z < 1/2. Deterministic across
/// platforms; relative error well below 1e-12 on [0.05, 50].
double gamma_fn(double z);

/// C(n,s) = 4^s s Γ(n/2+s) / (π^{n/2} Γ(1−s)); multiplies the principal-value
/// integral defining the fractional Laplacian. Memoized per (n, s).
double normalization_constant(int n, double s);

/// κ(n,s) = Γ(n/2) / (4^s π^{n/2} Γ(s)^2); multiplies the Green representation
/// of the unit-ball Dirichlet solve. Memoized per (n, s).
double green_constant(int n, double s);

/// surface measure of the unit sphere S^{n-1} (so 2 for n=1, 2π for n=2)
double sphere_measure(int n);

}  // namespace fracap

#endif
