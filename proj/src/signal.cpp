#include "orthospec/signal.hpp"

#include <cmath>

#include "orthospec/error.hpp"

namespace orthospec {

SignalInstance make_signal(OperatorPtr op, RandomStream& rng) {
  require(op != nullptr, ErrorCode::kInvalidParameter, "make_signal: null operator");
  const std::size_t n = op->cols();
  SignalInstance s;
  s.x_star = sample_complex_gaussian(rng, n, 1.0);
  s.x_star *= std::sqrt(static_cast<double>(n)) / s.x_star.norm();
  s.z_star = op->apply(s.x_star);
  s.y = s.z_star.cwiseAbs();
  s.op = std::move(op);
  return s;
}

}  // namespace orthospec
