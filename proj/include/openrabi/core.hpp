#pragma once

// Model parameters, spin-branch labels, and the normalized/raw unit
// conversions used throughout the library.
//
// All formulas downstream are written in the normalized parameter set
// (eta, mu, g, gamma1, gamma2) with the boson frequency omega0 kept explicit,
// so every rate in the system can be restored via raw_rates().

#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "openrabi/errors.hpp"

namespace openrabi {

using json = nlohmann::json;

// Two spin branches of the adiabatically decoupled boson dynamics.
// Minus labels the branch with spin polarization s_z <= 0.
enum class Branch { Plus, Minus };

inline double branch_sign(Branch b) { return b == Branch::Plus ? +1.0 : -1.0; }

inline const char* branch_name(Branch b) {
  return b == Branch::Plus ? "plus" : "minus";
}

inline Branch branch_from_string(const std::string& s) {
  if (s == "plus" || s == "Plus" || s == "+") return Branch::Plus;
  if (s == "minus" || s == "Minus" || s == "-") return Branch::Minus;
  throw InvalidParams("unknown branch label '" + s + "'");
}

// Immutable, validated model parameters.
//
//   omega0  boson frequency (energy units, > 0)
//   eta     frequency ratio Omega/omega0 (> 0)
//   mu      parametric amplification strength
//   g       normalized spin-boson coupling 2*lambda/sqrt(omega0*Omega) (>= 0)
//   gamma1  normalized one-photon loss rate kappa1/omega0 (>= 0)
//   gamma2  normalized two-photon loss rate kappa2*eta/omega0 (>= 0)
struct ModelParams {
  double omega0 = 1.0;
  double eta = 1.0;
  double mu = 0.0;
  double g = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;

  ModelParams() = default;

  ModelParams(double omega0_, double eta_, double mu_, double g_,
              double gamma1_, double gamma2_)
      : omega0(omega0_), eta(eta_), mu(mu_), g(g_), gamma1(gamma1_),
        gamma2(gamma2_) {
    validate();
  }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(omega0) || !finite(eta) || !finite(mu) || !finite(g) ||
        !finite(gamma1) || !finite(gamma2))
      throw InvalidParams("all parameters must be finite");
    if (omega0 <= 0.0) throw InvalidParams("omega0 must be > 0");
    if (eta <= 0.0) throw InvalidParams("eta must be > 0");
    if (g < 0.0) throw InvalidParams("g must be >= 0");
    if (gamma1 < 0.0) throw InvalidParams("gamma1 must be >= 0");
    if (gamma2 < 0.0) throw InvalidParams("gamma2 must be >= 0");
  }

  // Convenience: copy with one field replaced (parameter sweeps).
  ModelParams with_g(double g_) const {
    return ModelParams(omega0, eta, mu, g_, gamma1, gamma2);
  }
  ModelParams with_mu(double mu_) const {
    return ModelParams(omega0, eta, mu_, g, gamma1, gamma2);
  }
  ModelParams with_eta(double eta_) const {
    return ModelParams(omega0, eta_, mu, g, gamma1, gamma2);
  }
  ModelParams with_gamma2(double gamma2_) const {
    return ModelParams(omega0, eta, mu, g, gamma1, gamma2_);
  }
};

// Raw (dimensionful) energies and rates.
struct RawRates {
  double Omega;    // spin splitting, = eta * omega0
  double lambda;   // spin-boson coupling, = g * sqrt(omega0*Omega) / 2
  double kappa1;   // one-photon loss rate, = gamma1 * omega0
  double kappa2;   // two-photon loss rate, = gamma2 * omega0 / eta
};

inline RawRates raw_rates(const ModelParams& p) {
  RawRates r;
  r.Omega = p.eta * p.omega0;
  r.lambda = p.g * std::sqrt(p.omega0 * r.Omega) / 2.0;
  r.kappa1 = p.gamma1 * p.omega0;
  r.kappa2 = p.gamma2 * p.omega0 / p.eta;
  return r;
}

// Inverse of raw_rates: rebuild normalized parameters from raw rates.
inline ModelParams normalize(double omega0, double Omega, double lambda,
                             double kappa1, double kappa2, double mu) {
  if (omega0 <= 0.0 || Omega <= 0.0)
    throw InvalidParams("omega0 and Omega must be > 0");
  const double eta = Omega / omega0;
  const double g = 2.0 * lambda / std::sqrt(omega0 * Omega);
  const double gamma1 = kappa1 / omega0;
  const double gamma2 = kappa2 * eta / omega0;
  return ModelParams(omega0, eta, mu, g, gamma1, gamma2);
}

// Boundary of the inverted regime: mu_c = sqrt(1 + gamma1^2).
inline double critical_mu(const ModelParams& p) {
  return std::sqrt(1.0 + p.gamma1 * p.gamma1);
}

// JSON (de)serialization: flat object with the six parameter keys.  Every
// output artifact echoes this object verbatim so runs are reproducible.
inline void to_json(json& j, const ModelParams& p) {
  j = json{{"omega0", p.omega0}, {"eta", p.eta},       {"mu", p.mu},
           {"g", p.g},           {"gamma1", p.gamma1}, {"gamma2", p.gamma2}};
}

inline void from_json(const json& j, ModelParams& p) {
  ModelParams q(j.at("omega0").get<double>(), j.at("eta").get<double>(),
                j.at("mu").get<double>(), j.at("g").get<double>(),
                j.at("gamma1").get<double>(), j.at("gamma2").get<double>());
  p = q;
}

}  // namespace openrabi
