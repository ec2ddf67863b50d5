#pragma once

// Branch extraction and spin-weight formulas.
//
// In the adiabatic frame the steady state is approximately a classical
// mixture p_+ rho_+ |+><+| + p_- rho_- |-><-| of the two decoupled branch
// states.  This header extracts that decomposition from a full-model steady
// state (rotation + spin measurement, with either the exact rotation or its
// linearized experimental stand-in), and computes the branch weights
// perturbatively from branch observables alone.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>

#include <json.hpp>

#include "openrabi/core.hpp"
#include "openrabi/errors.hpp"
#include "openrabi/lindblad.hpp"
#include "openrabi/operators.hpp"

namespace openrabi {

enum class ExtractionScheme { ExactUS, LinearUS1 };

inline const char* scheme_name(ExtractionScheme s) {
  return s == ExtractionScheme::ExactUS ? "exact" : "linearized";
}

struct BranchDecomposition {
  double p_plus = 0.0;
  double p_minus = 0.0;
  Eigen::MatrixXcd rho_plus;   // boson-only, trace 1 (zero if branch empty)
  Eigen::MatrixXcd rho_minus;  // boson-only, trace 1 (zero if branch empty)
  ExtractionScheme scheme = ExtractionScheme::ExactUS;
  // Frobenius norm of the discarded inter-branch coherence block; measures
  // the quality of the classical-mixture ansatz.
  double coherence_norm = 0.0;
  int n_c = 0;
};

// Rotate a full-model steady state into the adiabatic frame and project onto
// the spin eigenbasis.  A branch with weight below 1e-12 is returned empty
// (zero matrix) rather than normalized through a vanishing trace.
inline BranchDecomposition extract_branches(const Eigen::MatrixXcd& rho_full,
                                            const ModelParams& p,
                                            ExtractionScheme scheme) {
  if (rho_full.rows() != rho_full.cols() || rho_full.rows() % 2 != 0)
    throw ShapeMismatch("expected a spin-boson density matrix");
  const int n_c = static_cast<int>(rho_full.rows() / 2);

  const UnitaryKind kind = scheme == ExtractionScheme::ExactUS
                               ? UnitaryKind::Exact
                               : UnitaryKind::Linearized;
  const AdiabaticUnitary u = adiabatic_unitary(p, n_c, kind);
  const Eigen::MatrixXcd rho_t =
      u.op.matrix.adjoint() * rho_full * u.op.matrix;

  BranchDecomposition dec;
  dec.scheme = scheme;
  dec.n_c = n_c;
  dec.coherence_norm = rho_t.block(0, n_c, n_c, n_c).norm();

  const Eigen::MatrixXcd up = rho_t.topLeftCorner(n_c, n_c);
  const Eigen::MatrixXcd down = rho_t.bottomRightCorner(n_c, n_c);
  dec.p_plus = up.trace().real();
  dec.p_minus = down.trace().real();
  if (dec.p_plus < 1e-12 && dec.p_minus < 1e-12)
    throw DegenerateWeight("both branch weights vanish");

  auto normalized = [n_c](const Eigen::MatrixXcd& block, double w) {
    if (w < 1e-12) return Eigen::MatrixXcd::Zero(n_c, n_c).eval();
    Eigen::MatrixXcd rho = 0.5 * (block + block.adjoint()) / w;
    return rho;
  };
  dec.rho_plus = normalized(up, dec.p_plus);
  dec.rho_minus = normalized(down, dec.p_minus);
  return dec;
}

// Leading-order branch-weight ratio r_p = p_+/p_- from the branch photon
// numbers alone.
inline double spin_weight_ratio_perturbative(double n_plus, double n_minus,
                                             const ModelParams& p) {
  const double num = 4.0 * p.gamma2 * n_minus / p.eta + p.gamma1;
  const double den = 4.0 * p.gamma2 * n_plus / p.eta + p.gamma1;
  if (den <= 0.0)
    throw ZeroDenominator(
        "branch-weight denominator vanishes (no linear decay and empty (+) "
        "branch)");
  return num / den;
}

// Weight ratio from the full position dependence of the jump corrections:
// O1 = eps(x)^2 and O2 = a^dag eps(x)^2 a evaluated on each branch state.
// Reduces to the perturbative form when eps is effectively constant.
inline double spin_weight_ratio_complete(const Eigen::MatrixXcd& rho_plus,
                                         const Eigen::MatrixXcd& rho_minus,
                                         const ModelParams& p, int n_c) {
  if (rho_plus.rows() != n_c || rho_minus.rows() != n_c)
    throw ShapeMismatch("branch states must match the given cutoff");
  const Eigen::MatrixXcd eps = epsilon_operator(p, n_c).matrix;
  const Eigen::MatrixXcd o1 = eps * eps;
  const Eigen::MatrixXcd a = annihilation(n_c).matrix;
  const Eigen::MatrixXcd o2 = a.adjoint() * o1 * a;

  auto weight_rate = [&](const Eigen::MatrixXcd& rho) {
    return 4.0 * p.gamma2 * (rho * o2).trace().real() / p.eta +
           p.gamma1 * (rho * o1).trace().real();
  };
  const double num = weight_rate(rho_minus);
  const double den = weight_rate(rho_plus);
  if (den <= 0.0)
    throw ZeroDenominator("branch-weight denominator vanishes");
  return num / den;
}

// Convert a weight ratio r_p = p_+/p_- into normalized weights.
inline std::pair<double, double> weights_from_ratio(double r_p) {
  if (!(r_p >= 0.0) || !std::isfinite(r_p))
    throw InvalidParams("weight ratio must be finite and non-negative");
  return {r_p / (1.0 + r_p), 1.0 / (1.0 + r_p)};
}

// Validity diagnostic for the perturbative weight formula: the expansion
// parameter <x^2> g^2 / eta of the dominant branch.  Values approaching 1
// signal breakdown; the caller decides, no automatic switching.
inline double d5_validity_ratio(double x2, const ModelParams& p) {
  return x2 * p.g * p.g / p.eta;
}

struct MixtureObservables {
  double n = 0.0;
  double x2 = 0.0;
  double p2 = 0.0;
  double sigma_z = 0.0;  // full-frame <sigma_z>
};

// Mixture expectation values: boson observables are weight-additive over the
// branch states; sigma_z picks up the rotation-angle cosine on each branch.
inline MixtureObservables mixture_observables(double p_plus, double p_minus,
                                              const Eigen::MatrixXcd& rho_plus,
                                              const Eigen::MatrixXcd& rho_minus,
                                              const ModelParams& p) {
  if (rho_plus.rows() != rho_minus.rows())
    throw ShapeMismatch("branch states must share a cutoff");
  const int n_c = static_cast<int>(rho_plus.rows());

  const Moments mp = boson_moments(rho_plus);
  const Moments mm = boson_moments(rho_minus);
  MixtureObservables out;
  out.n = p_plus * mp.n + p_minus * mm.n;
  out.x2 = p_plus * mp.x2 + p_minus * mm.x2;
  out.p2 = p_plus * mp.p2 + p_minus * mm.p2;

  const auto xe = opdetail::x_eigen(n_c);
  const Eigen::MatrixXd cos_theta =
      opdetail::fn_of_x(xe, [&](double x) {
        return 1.0 / std::sqrt(1.0 + 2.0 * p.g * p.g * x * x / p.eta);
      });
  const Eigen::MatrixXcd ct = cos_theta.cast<std::complex<double>>();
  out.sigma_z = p_plus * (rho_plus * ct).trace().real() -
                p_minus * (rho_minus * ct).trace().real();
  return out;
}

inline MixtureObservables mixture_observables(const BranchDecomposition& dec,
                                              const ModelParams& p) {
  return mixture_observables(dec.p_plus, dec.p_minus, dec.rho_plus,
                             dec.rho_minus, p);
}

inline void to_json(nlohmann::json& j, const BranchDecomposition& dec) {
  const Moments mp = boson_moments(dec.rho_plus);
  const Moments mm = boson_moments(dec.rho_minus);
  j = nlohmann::json{
      {"scheme", scheme_name(dec.scheme)},
      {"p_plus", dec.p_plus},
      {"p_minus", dec.p_minus},
      {"coherence_norm", dec.coherence_norm},
      {"n_c", dec.n_c},
      {"plus", {{"n", mp.n}, {"x2", mp.x2}, {"p2", mp.p2}}},
      {"minus", {{"n", mm.n}, {"x2", mm.x2}, {"p2", mm.p2}}},
  };
}

}  // namespace openrabi
