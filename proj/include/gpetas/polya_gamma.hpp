#pragma once

#include "gpetas/rng.hpp"

namespace gpetas {

// E[omega] for omega ~ PG(b, c): b/(2c) tanh(c/2), with the series limit b/4
// at |c| < 1e-8.
double pg_mean(double b, double c);

// One exact draw from PG(1, c) by alternating-series acceptance-rejection
// (mixture of a truncated exponential tail and a truncated inverse-Gaussian
// body; partial sums of the Jacobi-theta series decide acceptance).  The
// density depends on c only through c^2, so the sign of c is irrelevant.
// Throws NumericalError if the rejection loop exceeds 1e6 iterations (signals
// a bug; the acceptance rate is near 1 for all c).
double sample_pg(double c, RngStream& rng);

}  // namespace gpetas
