#pragma once

// Direct numerical integration of the model's Riccati system
//   B_j' = -(xi^2 + i xi) / 2 - beta B_j + alpha^2 B_j^2 / 2 + i xi alpha rho_j B_j
//   A'   = i xi (r - q) + beta (theta_+ B_+ + theta_- B_-)
// from zero at tau = 0, with an adaptive Runge-Kutta-Fehlberg 7(8) stepper.

#include <complex>

#include <corrheston/model.hpp>

namespace oracle {

struct RiccatiValues {
    std::complex<double> a;
    std::complex<double> b_plus;
    std::complex<double> b_minus;
};

RiccatiValues riccati_ode(double xi, double tau, const corrheston::ModelParams& p,
                          double tolerance = 1e-13);

}  // namespace oracle
