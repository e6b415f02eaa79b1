#include "orthospec/core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "orthospec/error.hpp"

namespace orthospec {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kSingularity: return "singularity";
    case ErrorCode::kAccuracy: return "accuracy";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kNotApplicable: return "not-applicable";
    case ErrorCode::kCapExceeded: return "cap-exceeded";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::RandomStream(Seed seed) : seed_(seed), engine_(splitmix64(seed.value)) {}

RandomStream RandomStream::substream(std::string_view label) const {
  return RandomStream(Seed{splitmix64(seed_.value ^ fnv1a64(label))});
}

double RandomStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t k = engine_() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(phi);
  return r * std::cos(phi);
}

Complex RandomStream::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

RandomStream make_rng(Seed seed) { return RandomStream(seed); }

ComplexVector sample_complex_gaussian(RandomStream& rng, std::size_t n, double variance) {
  require(variance > 0.0 && std::isfinite(variance), ErrorCode::kInvalidParameter,
          "complex Gaussian variance must be positive, got " + std::to_string(variance));
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.complex_normal(variance);
  return v;
}

double cosine_similarity_sq(const ComplexVector& a, const ComplexVector& b) {
  require(a.size() == b.size(), ErrorCode::kInvalidParameter,
          "cosine similarity: length mismatch " + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()));
  const double na = a.squaredNorm();
  const double nb = b.squaredNorm();
  require(na > 0.0 && nb > 0.0, ErrorCode::kInvalidParameter, "cosine similarity of a zero vector");
  const double value = std::norm(a.dot(b)) / (na * nb);
  return std::min(1.0, value);
}

bool all_finite(const ComplexVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  }
  return true;
}

}  // namespace orthospec
