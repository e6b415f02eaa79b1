#include "orthospec/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "fft.hpp"
#include "lapack.hpp"
#include "orthospec/error.hpp"

namespace orthospec {

std::string to_string(SensingKind kind) {
  switch (kind) {
    case SensingKind::kHaar: return "haar";
    case SensingKind::kCdp: return "cdp";
    case SensingKind::kPartialDft: return "partial_dft";
  }
  return "unknown";
}

SensingKind parse_sensing_kind(std::string_view text) {
  if (text == "haar") return SensingKind::kHaar;
  if (text == "cdp") return SensingKind::kCdp;
  if (text == "partial_dft" || text == "pdft") return SensingKind::kPartialDft;
  fail(ErrorCode::kInvalidParameter, "unknown sensing kind '" + std::string(text) + "'");
}

ComplexVector SensingOperator::apply(const ComplexVector& x) const {
  require(static_cast<std::size_t>(x.size()) == cols(), ErrorCode::kInvalidParameter,
          "apply: expected length " + std::to_string(cols()) + ", got " + std::to_string(x.size()));
  return do_apply(x);
}

ComplexVector SensingOperator::apply_adjoint(const ComplexVector& z) const {
  require(static_cast<std::size_t>(z.size()) == rows(), ErrorCode::kInvalidParameter,
          "apply_adjoint: expected length " + std::to_string(rows()) + ", got " +
              std::to_string(z.size()));
  return do_apply_adjoint(z);
}

namespace {

Complex random_phase(RandomStream& rng) {
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  return {std::cos(theta), std::sin(theta)};
}

class HaarOperator final : public SensingOperator {
 public:
  HaarOperator(SensingDescriptor d, ComplexMatrix a) : SensingOperator(d), a_(std::move(a)) {}

  const ComplexMatrix* dense() const override { return &a_; }

 protected:
  ComplexVector do_apply(const ComplexVector& x) const override { return a_ * x; }
  ComplexVector do_apply_adjoint(const ComplexVector& z) const override {
    return a_.adjoint() * z;
  }

 private:
  ComplexMatrix a_;
};

// A = (1/sqrt(L)) [F P_1; ...; F P_L]
class CdpOperator final : public SensingOperator {
 public:
  CdpOperator(SensingDescriptor d, std::vector<ComplexVector> masks)
      : SensingOperator(d), masks_(std::move(masks)), dft_(d.n),
        block_scale_(1.0 / std::sqrt(static_cast<double>(masks_.size()))) {}

 protected:
  ComplexVector do_apply(const ComplexVector& x) const override {
    const auto n = static_cast<Eigen::Index>(cols());
    ComplexVector out(static_cast<Eigen::Index>(rows()));
    ComplexVector masked(n);
    for (std::size_t l = 0; l < masks_.size(); ++l) {
      masked = block_scale_ * masks_[l].cwiseProduct(x);
      dft_.forward(masked.data(), out.data() + static_cast<Eigen::Index>(l) * n);
    }
    return out;
  }

  ComplexVector do_apply_adjoint(const ComplexVector& z) const override {
    const auto n = static_cast<Eigen::Index>(cols());
    ComplexVector out = ComplexVector::Zero(n);
    ComplexVector block(n);
    for (std::size_t l = 0; l < masks_.size(); ++l) {
      dft_.inverse(z.data() + static_cast<Eigen::Index>(l) * n, block.data());
      out += masks_[l].conjugate().cwiseProduct(block);
    }
    return block_scale_ * out;
  }

 private:
  std::vector<ComplexVector> masks_;
  UnitaryDft dft_;
  double block_scale_;
};

// A = F S P: phases on the input, scatter into the selected rows of an
// m-point unitary DFT.
class PartialDftOperator final : public SensingOperator {
 public:
  PartialDftOperator(SensingDescriptor d, std::vector<std::size_t> selected, ComplexVector phases)
      : SensingOperator(d), selected_(std::move(selected)), phases_(std::move(phases)), dft_(d.m) {}

 protected:
  ComplexVector do_apply(const ComplexVector& x) const override {
    ComplexVector scattered = ComplexVector::Zero(static_cast<Eigen::Index>(rows()));
    for (std::size_t j = 0; j < selected_.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      scattered[static_cast<Eigen::Index>(selected_[j])] = phases_[jj] * x[jj];
    }
    ComplexVector out(scattered.size());
    dft_.forward(scattered.data(), out.data());
    return out;
  }

  ComplexVector do_apply_adjoint(const ComplexVector& z) const override {
    ComplexVector full(z.size());
    dft_.inverse(z.data(), full.data());
    ComplexVector out(static_cast<Eigen::Index>(cols()));
    for (std::size_t j = 0; j < selected_.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      out[jj] = std::conj(phases_[jj]) * full[static_cast<Eigen::Index>(selected_[j])];
    }
    return out;
  }

 private:
  std::vector<std::size_t> selected_;
  ComplexVector phases_;
  UnitaryDft dft_;
};

}  // namespace

OperatorPtr build_haar(std::size_t m, std::size_t n, const RandomStream& rng, std::size_t row_cap) {
  require(n > 0 && m > n, ErrorCode::kInvalidParameter,
          "Haar operator needs m > n, got m=" + std::to_string(m) + " n=" + std::to_string(n));
  require(m <= row_cap, ErrorCode::kCapExceeded,
          "Haar operator is stored dense; m=" + std::to_string(m) + " exceeds the cap " +
              std::to_string(row_cap));
  RandomStream local = rng.substream("haar");
  ComplexMatrix g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = local.complex_normal(1.0);
  }
  SensingDescriptor d{SensingKind::kHaar, m, n, 0, rng.seed()};
  return std::make_shared<HaarOperator>(d, lapack::orthonormal_factor(std::move(g)));
}

OperatorPtr build_cdp(std::size_t n, std::size_t masks, const RandomStream& rng) {
  require(masks >= 2, ErrorCode::kInvalidParameter,
          "CDP needs at least two masks, got L=" + std::to_string(masks));
  require(n > 0, ErrorCode::kInvalidParameter, "CDP needs n > 0");
  RandomStream local = rng.substream("cdp");
  std::vector<ComplexVector> phase_masks(masks, ComplexVector(static_cast<Eigen::Index>(n)));
  for (auto& mask : phase_masks) {
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask[i] = random_phase(local);
  }
  SensingDescriptor d{SensingKind::kCdp, n * masks, n, masks, rng.seed()};
  return std::make_shared<CdpOperator>(d, std::move(phase_masks));
}

OperatorPtr build_partial_dft(std::size_t m, std::size_t n, const RandomStream& rng) {
  require(n > 0 && m > n, ErrorCode::kInvalidParameter,
          "partial DFT needs m > n, got m=" + std::to_string(m) + " n=" + std::to_string(n));
  RandomStream local = rng.substream("partial_dft");
  // Partial Fisher-Yates: the first n entries are a uniform random n-subset.
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t span = m - i;
    const std::size_t j = i + static_cast<std::size_t>(local.uniform() * static_cast<double>(span));
    std::swap(perm[i], perm[std::min(j, m - 1)]);
  }
  perm.resize(n);
  ComplexVector phases(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = random_phase(local);
  SensingDescriptor d{SensingKind::kPartialDft, m, n, 0, rng.seed()};
  return std::make_shared<PartialDftOperator>(d, std::move(perm), std::move(phases));
}

std::size_t resolve_rows(const SensingSpec& spec) {
  require(spec.n > 0, ErrorCode::kInvalidParameter, "sensing spec needs n > 0");
  require(spec.delta > 1.0, ErrorCode::kInvalidParameter,
          "oversampling ratio must exceed 1, got " + std::to_string(spec.delta));
  if (spec.kind == SensingKind::kCdp) {
    const double masks = std::round(spec.delta);
    require(std::abs(masks - spec.delta) < 1e-9 && masks >= 2.0, ErrorCode::kInvalidParameter,
            "CDP needs an integer delta >= 2, got " + std::to_string(spec.delta));
    return spec.n * static_cast<std::size_t>(masks);
  }
  return static_cast<std::size_t>(std::ceil(spec.delta * static_cast<double>(spec.n) - 1e-9));
}

OperatorPtr make_operator(const SensingSpec& spec, const RandomStream& rng) {
  const std::size_t m = resolve_rows(spec);
  switch (spec.kind) {
    case SensingKind::kHaar: return build_haar(m, spec.n, rng, spec.haar_row_cap);
    case SensingKind::kCdp: return build_cdp(spec.n, m / spec.n, rng);
    case SensingKind::kPartialDft: return build_partial_dft(m, spec.n, rng);
  }
  fail(ErrorCode::kInvalidParameter, "unknown sensing kind");
}

OperatorPtr make_operator(const SensingDescriptor& d) {
  const RandomStream rng(d.seed);
  switch (d.kind) {
    case SensingKind::kHaar: return build_haar(d.m, d.n, rng, std::max<std::size_t>(d.m, 20000));
    case SensingKind::kCdp: return build_cdp(d.n, d.blocks, rng);
    case SensingKind::kPartialDft: return build_partial_dft(d.m, d.n, rng);
  }
  fail(ErrorCode::kInvalidParameter, "unknown sensing kind");
}

nlohmann::json to_json(const SensingDescriptor& d) {
  nlohmann::json j{{"kind", to_string(d.kind)}, {"m", d.m}, {"n", d.n}, {"seed", d.seed.value},
                   {"delta", d.delta()}};
  if (d.kind == SensingKind::kCdp) j["masks"] = d.blocks;
  return j;
}

SensingDescriptor descriptor_from_json(const nlohmann::json& j) {
  try {
    SensingDescriptor d;
    d.kind = parse_sensing_kind(j.at("kind").get<std::string>());
    d.m = j.at("m").get<std::size_t>();
    d.n = j.at("n").get<std::size_t>();
    d.seed = Seed{j.at("seed").get<std::uint64_t>()};
    if (d.kind == SensingKind::kCdp) {
      d.blocks = j.at("masks").get<std::size_t>();
      require(d.blocks * d.n == d.m, ErrorCode::kInvalidParameter, "CDP descriptor: m != L*n");
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidParameter, std::string("bad sensing descriptor: ") + e.what());
  }
}

ComplexMatrix dense_matrix(const SensingOperator& op) {
  if (const ComplexMatrix* a = op.dense()) return *a;
  const auto n = static_cast<Eigen::Index>(op.cols());
  ComplexMatrix a(static_cast<Eigen::Index>(op.rows()), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    a.col(j) = op.apply(ComplexVector::Unit(n, j));
  }
  return a;
}

}  // namespace orthospec
