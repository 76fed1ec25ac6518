#pragma once

#include "kawalab/dispersion.hpp"
#include "kawalab/spectral.hpp"

namespace kawalab {

// Exact linear group: multiplies each mode by exp(i t p(xi)).
SpectralField linear_flow(const SpectralField& u, double t,
                          const EquationParams& params);

// Right-hand side of u_t = N(u) after removing the linear part:
// -d/dx(u^2/2) for Kawahara, -d/dx(u^3/3) for the modified equation.
// Products are dealiased under the matching rule.
SpectralField nonlinear_term(const SpectralField& u,
                             const EquationParams& params);

// One integrating-factor RK4 step of size dt. The linear phases are applied
// exactly; only the nonlinear term is integrated by the RK4 stages.
SpectralField step_ifrk4(const SpectralField& u, double dt,
                         const EquationParams& params);

struct Trajectory {
  EquationParams params;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<SpectralField> states;
};

struct SolveOptions {
  std::size_t sample_every = 1;
  // Abort when the L^2 norm exceeds blow_up_factor times its initial value.
  double blow_up_factor = 1e6;
};

// Integrate from t=0 to t=T with step dt (rounded so T is hit exactly);
// samples include t=0 and t=T. Throws NumericalError on blow-up or
// non-finite values.
Trajectory solve(const SpectralField& u0, double T, double dt,
                 const EquationParams& params, const SolveOptions& opt = {});

struct Invariants {
  double mass = 0;         // integral of u
  double l2 = 0;           // integral of u^2
  double hamiltonian = 0;  // energy functional of the matching equation
};

// Kawahara:          H = integral(-u^3/6 + (alpha/2) u_x^2 - (beta/2) u_xx^2)
// ModifiedKawahara:  H = integral(-u^4/12 + (alpha/2) u_x^2 - (beta/2) u_xx^2)
Invariants invariants(const SpectralField& u, const EquationParams& params);

// Full right-hand side -N(u) - alpha u_xxx - beta u_xxxxx used for residual
// and variational checks.
SpectralField full_rhs(const SpectralField& u, const EquationParams& params);

struct TravelingWave {
  SpectralField profile;
  double speed = 0.0;
  double residual = 0.0;   // L^2 norm of the profile equation residual
  std::size_t iterations = 0;
};

struct PetviashviliOptions {
  std::size_t max_iterations = 500;
  double tolerance = 1e-10;     // successive-change stopping threshold
  double residual_goal = 1e-8;
};

// Petviashvili iteration for the once-integrated profile equation
//   -c phi + N(phi) + alpha phi'' + beta phi'''' = 0,
// solved as phi_hat = N(phi)_hat / (c + alpha xi^2 - beta xi^4) with the
// stabilizing power gamma = 2 (quadratic) or 3/2 (cubic nonlinearity).
// Requires the denominator bounded away from zero on the grid.
TravelingWave traveling_wave_petviashvili(const SpectralField& guess,
                                          double speed,
                                          const EquationParams& params,
                                          const PetviashviliOptions& opt = {});

// Residual of the time-independent profile equation for u(x,t) = phi(x - ct):
// r = -c phi' + N-part + alpha phi''' + beta phi''''', reported in L^2.
double traveling_wave_residual(const SpectralField& phi, double speed,
                               const EquationParams& params);

}  // namespace kawalab
