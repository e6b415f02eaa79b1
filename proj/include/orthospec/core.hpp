#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace orthospec {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(Seed, Seed) = default;
};

/// Seedable random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms use the top 53 bits of each draw and normals use the
/// Box-Muller transform, so streams are bit-identical across standard
/// libraries. A substream is a fresh stream whose seed is
/// splitmix64(seed ^ fnv1a64(label)); it depends only on this stream's seed,
/// never on how many draws have been consumed.
class RandomStream {
 public:
  explicit RandomStream(Seed seed);

  RandomStream substream(std::string_view label) const;

  Seed seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Standard normal.
  double normal();

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_normal(double variance);

 private:
  Seed seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

RandomStream make_rng(Seed seed);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// i.i.d. CN(0, variance) entries.
ComplexVector sample_complex_gaussian(RandomStream& rng, std::size_t n, double variance);

/// |a^H b|^2 / (|a|^2 |b|^2).
double cosine_similarity_sq(const ComplexVector& a, const ComplexVector& b);

bool all_finite(const ComplexVector& v);

}  // namespace orthospec
