#pragma once

#include "orthospec/core.hpp"
#include "orthospec/sensing.hpp"

namespace orthospec {

/// Ground truth for one trial: x_star with |x_star| = sqrt(n), z_star = A x_star,
/// y = |z_star| entrywise.
struct SignalInstance {
  ComplexVector x_star;
  ComplexVector z_star;
  RealVector y;
  OperatorPtr op;
};

SignalInstance make_signal(OperatorPtr op, RandomStream& rng);

}  // namespace orthospec
