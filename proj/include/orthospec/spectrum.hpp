#pragma once

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "orthospec/asymptotics.hpp"
#include "orthospec/core.hpp"
#include "orthospec/pcaep.hpp"
#include "orthospec/sensing.hpp"
#include "orthospec/spectral.hpp"

namespace orthospec {

inline constexpr std::size_t kDenseCap = 1536;

struct DenseD {
  ComplexMatrix d;          // Hermitized
  double asymmetry = 0.0;   // |D - D^H|_max before Hermitizing
};

/// D from n basis probes of apply_D. Asymmetry above 1e-8 means the operator
/// and its adjoint disagree and is an error.
DenseD dense_D(const SensingOperator& op, const WeightDiagonal& w, std::size_t cap = kDenseCap);

/// E(mu) from m basis probes of ep_apply.
ComplexMatrix dense_E(const EPContext& ctx, std::size_t cap = kDenseCap);

/// Ascending eigenvalues; rejects input that is not Hermitian within 1e-8.
RealVector eig_hermitian(const ComplexMatrix& a);

ComplexVector eig_general(const ComplexMatrix& a);

enum class Branch { kMax, kMin };

std::string to_string(Branch b);
Branch parse_branch(const std::string& text);

struct SpectrumSpec {
  SensingSpec sensing;
  ProcessingSpec func;
  Branch branch = Branch::kMax;
  std::size_t cap = kDenseCap;
  bool with_e = true;  // the general eigensolve dominates the cost
  QuadratureSpec quadrature;
};

struct SpectrumReport {
  std::string status = "ok";  // or "not_applicable"
  std::string note;
  Branch branch = Branch::kMax;
  std::size_t n = 0;
  std::size_t m = 0;
  double realized_delta = 0.0;
  double mu = 0.0;
  RealVector d_eigs;           // ascending
  ComplexVector e_eigs;        // empty when with_e is off
  Complex e_top{0.0, 0.0};     // largest-magnitude eigenvalue of E
  double lambda_pred = 0.0;    // 1/mu - ((delta-1)/delta)/G_bar, empirical G_bar
  double lambda_asym = 0.0;    // same with E[G]
  double d_extreme = 0.0;      // lambda_1(D) (max) or lambda_n(D) (min)
  double outlier_gap = 0.0;    // ||e_top| - 1|
  double top_match = 0.0;      // |d_extreme - lambda_pred|
  double asym_match = 0.0;     // |d_extreme - lambda_asym|
  double d_asymmetry = 0.0;
};

/// Dense spectra of D and E(mu_hat) on the requested branch. A branch without
/// a fixed point gives status "not_applicable" and no spectra.
SpectrumReport analyze(const SpectrumSpec& spec, Seed seed);

nlohmann::json to_json(const SpectrumReport& r);

struct Histogram {
  std::vector<double> edges;  // counts.size() + 1
  std::vector<std::size_t> counts;
};

/// Bin width 2 IQR / N^(1/3); a single bin when the IQR vanishes.
Histogram freedman_diaconis(const RealVector& values);

struct EigenpairCheck {
  double mu_n = 0.0;         // finite-n stationary mu
  Complex e_eigenvalue;      // eigenvalue of E(mu_n) closest to 1
  FixedPointReport fixed_point;
};

/// Solves for the mu at which E has an eigenvalue exactly 1 given the
/// extreme eigenvalue of D, takes that eigenvector of dense E and feeds it to
/// fixed_point_check.
EigenpairCheck eigenpair_check(const SignalInstance& signal, const ProcessingFunction& f,
                               double d_extreme, double mu_guess, std::size_t cap = kDenseCap);

}  // namespace orthospec
