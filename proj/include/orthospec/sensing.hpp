#pragma once

#include <json.hpp>

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "orthospec/core.hpp"

namespace orthospec {

enum class SensingKind { kHaar, kCdp, kPartialDft };

std::string to_string(SensingKind kind);
SensingKind parse_sensing_kind(std::string_view text);

/// Requested ensemble. For Haar and partial DFT the row count is
/// ceil(delta * n); for CDP delta must be an integer number of masks L >= 2.
struct SensingSpec {
  SensingKind kind = SensingKind::kPartialDft;
  std::size_t n = 0;
  double delta = 2.0;
  std::size_t haar_row_cap = 20000;
};

/// Enough to rebuild an operator bit-for-bit; the Haar matrix itself is
/// regenerated from the seed.
struct SensingDescriptor {
  SensingKind kind = SensingKind::kPartialDft;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t blocks = 0;  // CDP mask count, 0 otherwise
  Seed seed{};

  double delta() const { return static_cast<double>(m) / static_cast<double>(n); }
};

/// Column-orthogonal A in C^{m x n}, A^H A = I.
class SensingOperator {
 public:
  virtual ~SensingOperator() = default;
  SensingOperator(const SensingOperator&) = delete;
  SensingOperator& operator=(const SensingOperator&) = delete;

  std::size_t rows() const { return descriptor_.m; }
  std::size_t cols() const { return descriptor_.n; }
  double delta() const { return descriptor_.delta(); }
  SensingKind kind() const { return descriptor_.kind; }
  const SensingDescriptor& descriptor() const { return descriptor_; }

  /// A x
  ComplexVector apply(const ComplexVector& x) const;
  /// A^H z
  ComplexVector apply_adjoint(const ComplexVector& z) const;

  /// Dense A when the operator stores one (Haar), nullptr otherwise.
  virtual const ComplexMatrix* dense() const { return nullptr; }

 protected:
  explicit SensingOperator(SensingDescriptor descriptor) : descriptor_(descriptor) {}

  virtual ComplexVector do_apply(const ComplexVector& x) const = 0;
  virtual ComplexVector do_apply_adjoint(const ComplexVector& z) const = 0;

 private:
  SensingDescriptor descriptor_;
};

using OperatorPtr = std::shared_ptr<const SensingOperator>;

OperatorPtr build_haar(std::size_t m, std::size_t n, const RandomStream& rng,
                       std::size_t row_cap = 20000);
OperatorPtr build_cdp(std::size_t n, std::size_t masks, const RandomStream& rng);
OperatorPtr build_partial_dft(std::size_t m, std::size_t n, const RandomStream& rng);

/// Row count implied by a spec (CDP: n * L).
std::size_t resolve_rows(const SensingSpec& spec);

OperatorPtr make_operator(const SensingSpec& spec, const RandomStream& rng);
OperatorPtr make_operator(const SensingDescriptor& descriptor);

nlohmann::json to_json(const SensingDescriptor& descriptor);
SensingDescriptor descriptor_from_json(const nlohmann::json& j);

/// A materialized column by column; for tests and small dense analyses.
ComplexMatrix dense_matrix(const SensingOperator& op);

}  // namespace orthospec
