#pragma once

// Semiclassical steady state of the dissipative parametrically amplified
// oscillator, adiabatically decoupled onto one spin branch.
//
// In the large-frequency-ratio limit the boson quadratures obey a Langevin
// equation with one- and two-photon damping.  When position fluctuations
// dominate momentum fluctuations the stationary phase-space density takes a
// Boltzmann form
//
//   W(x, p) = (1/Z0) exp[-(v^2/2 + U(x)) / T_eff],
//   v       = -omega0 (mu - 1) p - kappa1 x - kappa2 x^3,
//   T_eff   = omega0^2 (mu - 1)^2 / 4,
//
// with an effective potential U(x) whose sextic Landau expansion
// U = omega0^2 (C2 x^2/2 + C4 x^4/4 + C6 x^6/6) organizes the phase diagram:
// C2 = 0 marks the critical coupling, C4 = 0 the tricritical scale.
//
// This header provides
//   * landau_C / effective_potential_U: the Landau coefficients and the
//     exact (non-expanded) potential for either spin branch,
//   * BoltzmannSolution: the normalized stationary density, its reduced
//     x-marginal, and moment quadrature with the momentum integrals
//     eliminated analytically against the conditional Gaussian,
//   * closed_form_moments: single-dominant-term asymptotes for the
//     near-critical, quartic-critical and tricritical regimes,
//   * simulate_ensemble: Euler-Maruyama integration of the full
//     two-variable Ito SDE with four independent white noises.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "openrabi/core.hpp"
#include "openrabi/errors.hpp"
#include "openrabi/quadrature.hpp"

namespace openrabi {

// ---------------------------------------------------------------------------
// Effective potential
// ---------------------------------------------------------------------------

// Exact keeps the full square-root confining term; Sextic truncates U at the
// x^6 Landau term.  The two agree to O(x^8) near the origin.
enum class PotentialForm { Exact, Sextic };

inline const char* potential_form_name(PotentialForm f) {
  return f == PotentialForm::Exact ? "exact" : "sextic";
}

// Landau coefficients of the (-)-branch effective potential together with the
// effective temperature and mass of the reduced stationary density.
struct EffectivePotentialParams {
  double C2 = 0.0;
  double C4 = 0.0;
  double C6 = 0.0;
  double T_eff = 0.0;  // omega0^2 (mu - 1)^2 / 4
  double m = 1.0;      // effective mass, fixed to 1 by the reduction
};

inline void to_json(json& j, const EffectivePotentialParams& c) {
  j = json{{"C2", c.C2},
           {"C4", c.C4},
           {"C6", c.C6},
           {"T_eff", c.T_eff},
           {"m", c.m}};
}

namespace lvdetail {

// Branch-resolved sextic coefficients.  The (+) branch reverses the sign of
// the nonlinear confining term, which flips the sign of its contribution to
// every Landau coefficient; s = +1 selects the (-) branch.
inline std::array<double, 3> branch_sextic(const ModelParams& p, Branch b) {
  const double s = (b == Branch::Minus) ? +1.0 : -1.0;
  const double g2 = p.g * p.g;
  const double c2 = (1.0 - p.mu * p.mu) + p.gamma1 * p.gamma1 +
                    s * (p.mu - 1.0) * g2;
  const double c4 =
      (2.0 * p.gamma1 * p.gamma2 - s * (p.mu - 1.0) * g2 * g2) / p.eta;
  const double c6 = (p.gamma2 * p.gamma2 +
                     s * 1.5 * (p.mu - 1.0) * g2 * g2 * g2) /
                    (p.eta * p.eta);
  return {c2, c4, c6};
}

}  // namespace lvdetail

// Landau coefficients of the (-) branch:
//   C2 = (1 - mu^2) + gamma1^2 + (mu - 1) g^2   [ = -(mu-1)(g_c^2 - g^2) ]
//   C4 = (2 gamma1 gamma2 - (mu - 1) g^4) / eta
//   C6 = (gamma2^2 + 3 (mu - 1) g^6 / 2) / eta^2
inline EffectivePotentialParams landau_C(const ModelParams& p) {
  if (p.mu == 1.0)
    throw DegenerateMu("landau_C: effective temperature vanishes at mu = 1");
  const auto c = lvdetail::branch_sextic(p, Branch::Minus);
  EffectivePotentialParams out;
  out.C2 = c[0];
  out.C4 = c[1];
  out.C6 = c[2];
  out.T_eff = p.omega0 * p.omega0 * (p.mu - 1.0) * (p.mu - 1.0) / 4.0;
  out.m = 1.0;
  return out;
}

// gamma2 at which the quartic Landau coefficient C4 vanishes:
// (mu - 1) g^4 / (2 gamma1).  This tricritical scale of the effective
// potential differs from the mean-field tricritical gamma2 by a factor
// (2 mu - g^2)/(mu - 1); the two coincide when |mu - 1| >> gamma1.
inline double landau_tricritical_gamma2(const ModelParams& p) {
  if (p.mu == 1.0)
    throw DegenerateMu("landau_tricritical_gamma2: undefined at mu = 1");
  if (p.gamma1 <= 0.0)
    throw InvalidParams(
        "landau_tricritical_gamma2: requires gamma1 > 0 to trade off the "
        "quartic terms");
  if (p.mu < 1.0)
    throw InvalidParams(
        "landau_tricritical_gamma2: C4 > 0 for every gamma2 >= 0 when "
        "mu < 1; no tricritical gamma2 exists");
  const double g2 = p.g * p.g;
  return (p.mu - 1.0) * g2 * g2 / (2.0 * p.gamma1);
}

// Effective potential U(x), referenced so that U(0) = 0 exactly.  The
// constant offset drops out of every force and Boltzmann weight, and keeps
// exp(-U/T_eff) overflow-free at large frequency ratios where the raw
// confining term is O(eta).
inline double effective_potential_U(double x, const ModelParams& p, Branch b,
                                    PotentialForm form = PotentialForm::Exact) {
  const double w0 = p.omega0;
  const double x2 = x * x;
  if (form == PotentialForm::Sextic) {
    const auto c = lvdetail::branch_sextic(p, b);
    return w0 * w0 *
           (0.5 * c[0] * x2 + 0.25 * c[1] * x2 * x2 +
            c[2] * x2 * x2 * x2 / 6.0);
  }
  const double s = (b == Branch::Minus) ? +1.0 : -1.0;
  const double w = 2.0 * p.g * p.g * x2 / p.eta;
  // (w0 eta / 2) (sqrt(1 + w) - 1), written in subtraction-free form.
  const double vnl = 0.5 * w0 * p.eta * w / (1.0 + std::sqrt(1.0 + w));
  return w0 * w0 * ((1.0 - p.mu * p.mu) + p.gamma1 * p.gamma1) / 2.0 * x2 +
         w0 * w0 * p.gamma1 * p.gamma2 / (2.0 * p.eta) * x2 * x2 +
         (w0 * p.gamma2) * (w0 * p.gamma2) * x2 * x2 * x2 /
             (6.0 * p.eta * p.eta) +
         s * w0 * (p.mu - 1.0) * vnl;
}

// Location (x >= 0) and value of the global minimum of U over x >= 0.
struct PotentialMinimum {
  double x = 0.0;
  double u = 0.0;
};

namespace lvdetail {

// Throws NormalizationOverflow when U is structurally unbounded below, which
// happens only without two-photon loss.
inline void require_confining(const ModelParams& p, Branch b,
                              PotentialForm form) {
  if (form == PotentialForm::Sextic) {
    const auto c = branch_sextic(p, b);
    const bool bounded = c[2] > 0.0 || (c[2] == 0.0 && c[1] > 0.0) ||
                         (c[2] == 0.0 && c[1] == 0.0 && c[0] > 0.0);
    if (!bounded)
      throw NormalizationOverflow(
          "sextic effective potential unbounded below (C2=" +
          std::to_string(c[0]) + ", C4=" + std::to_string(c[1]) +
          ", C6=" + std::to_string(c[2]) + ")");
    return;
  }
  if (p.gamma2 > 0.0) return;  // x^6 term confines
  const double a2 = (1.0 - p.mu * p.mu) + p.gamma1 * p.gamma1;
  const double s = (b == Branch::Minus) ? +1.0 : -1.0;
  // Without two-photon loss the confining term grows only linearly in |x|
  // and cannot balance a negative quadratic coefficient.
  const bool bounded = a2 > 0.0 || (a2 == 0.0 && s * (p.mu - 1.0) > 0.0 &&
                                    p.g > 0.0);
  if (!bounded)
    throw NormalizationOverflow(
        "effective potential unbounded below at gamma2 = 0 "
        "(quadratic coefficient " +
        std::to_string(a2) + ")");
}

struct SupportScan {
  PotentialMinimum minimum;
  double x_max = 0.0;
};

// Finds the minimum of U on x >= 0 and a truncation radius x_max with
// U(x_max) - U_min > 40 T (relative weight exp(-40) < 1e-17).  The scan
// doubles the window until the minimum is interior and the edge is high.
inline SupportScan support_scan(const ModelParams& p, Branch b,
                                PotentialForm form, double T) {
  require_confining(p, b, form);
  auto U = [&](double x) { return effective_potential_U(x, p, b, form); };
  const int n = 4096;
  double X = 1.0;
  for (;;) {
    int i_min = 0;
    double u_min = U(0.0);
    for (int i = 1; i <= n; ++i) {
      const double u = U(X * i / n);
      if (u < u_min) {
        u_min = u;
        i_min = i;
      }
    }
    if (U(X) - u_min > 40.0 * T && i_min < 3 * n / 4) {
      // Refine the minimum by ternary search in the bracketing cells.
      double lo = X * std::max(0, i_min - 1) / n;
      double hi = X * std::min(n, i_min + 1) / n;
      for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (U(m1) < U(m2))
          hi = m2;
        else
          lo = m1;
      }
      const double x_star = 0.5 * (lo + hi);
      SupportScan out;
      out.minimum.x = (U(x_star) < u_min) ? x_star : X * i_min / n;
      out.minimum.u = std::min(U(x_star), u_min);
      out.x_max = X;
      return out;
    }
    X *= 2.0;
    if (X > 1e12)
      throw NormalizationOverflow(
          "no confining radius found below x = 1e12; potential appears "
          "unbounded");
  }
}

}  // namespace lvdetail

inline PotentialMinimum potential_minimum(const ModelParams& p, Branch b,
                                          PotentialForm form =
                                              PotentialForm::Exact) {
  const auto c = landau_C(p);
  return lvdetail::support_scan(p, b, form, c.T_eff).minimum;
}

// ---------------------------------------------------------------------------
// Stationary Boltzmann density
// ---------------------------------------------------------------------------

// Normalized stationary phase-space density of the reduced Langevin dynamics
// on one spin branch.  The x-marginal normalization is computed once at
// construction by adaptive quadrature over |x| <= x_max(); the momentum
// direction is Gaussian at fixed x and is normalized analytically:
// integrating exp(-v^2/2T) over p gives sqrt(2 pi T)/(omega0 |mu - 1|).
class BoltzmannSolution {
 public:
  explicit BoltzmannSolution(const ModelParams& p,
                             Branch b = Branch::Minus,
                             PotentialForm form = PotentialForm::Exact)
      : params_(p), branch_(b), form_(form), coeffs_(landau_C(p)) {
    const auto rr = raw_rates(p);
    kappa1_ = rr.kappa1;
    kappa2_ = rr.kappa2;
    const auto scan = lvdetail::support_scan(p, b, form, coeffs_.T_eff);
    minimum_ = scan.minimum;
    x_max_ = scan.x_max;
    const double T = coeffs_.T_eff;
    auto weight = [&](double x) {
      return std::exp(-(potential(x) - minimum_.u) / T);
    };
    z_reduced_ = 2.0 * integrate(weight, 0.0, x_max_).value;
    if (!(z_reduced_ > 0.0) || !std::isfinite(z_reduced_))
      throw NormalizationOverflow("reduced normalization is not finite");
    z_full_ = z_reduced_ * std::sqrt(2.0 * M_PI * T) /
              (p.omega0 * std::abs(p.mu - 1.0));
  }

  // Reduced velocity coordinate of the overdamped position dynamics.
  double velocity(double x, double p_coord) const {
    return -params_.omega0 * (params_.mu - 1.0) * p_coord - kappa1_ * x -
           kappa2_ * x * x * x;
  }

  double potential(double x) const {
    return effective_potential_U(x, params_, branch_, form_);
  }

  // Conditional momentum statistics at fixed x: p is Gaussian with this mean
  // and variance 1/4 (independent of every parameter).
  double conditional_p_mean(double x) const {
    return -(params_.gamma1 * x +
             params_.gamma2 * x * x * x / params_.eta) /
           (params_.mu - 1.0);
  }

  // Full phase-space density W(x, p), unit mass over (x, p).
  double operator()(double x, double p_coord) const {
    const double v = velocity(x, p_coord);
    return std::exp(-(0.5 * v * v + potential(x) - minimum_.u) /
                    coeffs_.T_eff) /
           z_full_;
  }

  // Reduced x-marginal W_R(x), unit mass over x.
  double reduced(double x) const {
    return std::exp(-(potential(x) - minimum_.u) / coeffs_.T_eff) /
           z_reduced_;
  }

  // Steady-state symmetric-ordered moments <p^k x^m>.  Momentum powers are
  // integrated out analytically against the conditional Gaussian
  // (mean conditional_p_mean(x), variance 1/4); only k <= 2 arises in the
  // observables of interest and higher powers are rejected.  Odd-parity
  // moments vanish identically and are returned as exact zeros.
  std::vector<double> moments(
      const std::vector<std::pair<int, int>>& requested) const {
    std::vector<double> out;
    out.reserve(requested.size());
    for (const auto& [k, m] : requested) {
      if (k < 0 || m < 0)
        throw InvalidParams("moment powers must be non-negative");
      if (k > 2)
        throw UnsupportedMoment(
            "momentum power " + std::to_string(k) +
            " > 2: the Gaussian elimination is implemented for k <= 2");
      if ((k + m) % 2 != 0) {
        out.push_back(0.0);
        continue;
      }
      const double T = coeffs_.T_eff;
      auto f = [&](double x) {
        double factor = 1.0;
        if (k == 1) factor = conditional_p_mean(x);
        if (k == 2) {
          const double mean = conditional_p_mean(x);
          factor = mean * mean + 0.25;
        }
        return std::pow(x, m) * factor *
               std::exp(-(potential(x) - minimum_.u) / T);
      };
      out.push_back(2.0 * integrate(f, 0.0, x_max_).value / z_reduced_);
    }
    return out;
  }

  double x_max() const { return x_max_; }
  const PotentialMinimum& minimum() const { return minimum_; }
  const EffectivePotentialParams& coefficients() const { return coeffs_; }
  const ModelParams& params() const { return params_; }
  Branch branch() const { return branch_; }
  PotentialForm form() const { return form_; }

 private:
  ModelParams params_;
  Branch branch_;
  PotentialForm form_;
  EffectivePotentialParams coeffs_;
  double kappa1_ = 0.0;
  double kappa2_ = 0.0;
  PotentialMinimum minimum_;
  double x_max_ = 0.0;
  double z_reduced_ = 0.0;
  double z_full_ = 0.0;
};

// Convenience single-point evaluations (each constructs the normalization;
// prefer BoltzmannSolution for sweeps).
inline double boltzmann_wigner(double x, double p_coord, const ModelParams& p,
                               Branch b = Branch::Minus,
                               PotentialForm form = PotentialForm::Exact) {
  return BoltzmannSolution(p, b, form)(x, p_coord);
}

inline double reduced_wigner(double x, const ModelParams& p,
                             Branch b = Branch::Minus,
                             PotentialForm form = PotentialForm::Exact) {
  return BoltzmannSolution(p, b, form).reduced(x);
}

inline std::vector<double> moments_quadrature(
    const ModelParams& p, const std::vector<std::pair<int, int>>& requested,
    Branch b = Branch::Minus, PotentialForm form = PotentialForm::Exact) {
  return BoltzmannSolution(p, b, form).moments(requested);
}

// ---------------------------------------------------------------------------
// Closed-form moments (single dominant Landau term)
// ---------------------------------------------------------------------------

enum class Regime { NearCritical, QuarticCritical, TricriticalPoint };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::NearCritical: return "near-critical";
    case Regime::QuarticCritical: return "quartic-critical";
    default: return "tricritical";
  }
}

// Relative weight of each Landau term of U evaluated at the predicted <x^2>
// scale, normalized so the regime's kept term equals 1.  Values approaching 1
// mean the single-term asymptote is unreliable.
struct RegimeDiagnostics {
  double quadratic = 0.0;
  double quartic = 0.0;
  double sextic = 0.0;
};

struct ClosedFormMoments {
  double x2 = 0.0;
  double p2 = 0.0;
  double n = 0.0;
  Regime regime = Regime::NearCritical;
  RegimeDiagnostics weights;
};

// Moments of the pure-power Boltzmann weights (verified against quadrature):
//   exp(-b1 x^4):  <x^2> = [Gamma(3/4)/Gamma(1/4)] b1^{-1/2}
//   exp(-b2 x^6):  <x^2> = [sqrt(pi)/Gamma(1/6)]   b2^{-1/3}
inline constexpr double kQuarticMomentRatio = 0.3379891200336423645;
inline constexpr double kSexticMomentRatio = 0.31842494215898715333;

// Dominant-term asymptotes of the reduced-density moments.
//   NearCritical    : Gaussian well,      <x2> = (mu-1)/(4(g^2-g_c^2))
//   QuarticCritical : C2 = 0, C4 > 0,     <x2> = kQuartic * beta1^{-1/2}
//   TricriticalPoint: C2 = C4 = 0, C6 > 0, <x2> = kSextic * beta2^{-1/3}
// with beta1 = omega0^2 C4/(4 T_eff), beta2 = omega0^2 C6/(6 T_eff).  The
// momentum variance keeps only the regime's leading contributions; the full
// expression is available through moments_quadrature.
inline ClosedFormMoments closed_form_moments(const ModelParams& p, Regime r) {
  const auto c = landau_C(p);
  const double w0sq = p.omega0 * p.omega0;
  const double T = c.T_eff;
  const double mu1sq = (p.mu - 1.0) * (p.mu - 1.0);
  const double g1sq = p.gamma1 * p.gamma1;

  ClosedFormMoments out;
  out.regime = r;

  auto term_weights = [&](double x2) {
    // |C_{2k}| x^{2k} / (2k) evaluated at x^2 = x2.
    const double t2 = std::abs(c.C2) * x2 / 2.0;
    const double t4 = std::abs(c.C4) * x2 * x2 / 4.0;
    const double t6 = std::abs(c.C6) * x2 * x2 * x2 / 6.0;
    return std::array<double, 3>{t2, t4, t6};
  };
  auto check = [&](double kept, const std::array<double, 3>& t, int kept_idx) {
    RegimeDiagnostics d;
    d.quadratic = t[0] / kept;
    d.quartic = t[1] / kept;
    d.sextic = t[2] / kept;
    const double worst =
        std::max({kept_idx == 0 ? 0.0 : d.quadratic,
                  kept_idx == 1 ? 0.0 : d.quartic,
                  kept_idx == 2 ? 0.0 : d.sextic});
    if (worst > 0.5)
      throw RegimeViolation(
          std::string("neglected Landau term carries ") +
          std::to_string(worst) +
          " of the kept term's weight at the predicted <x^2> scale (" +
          regime_name(r) + ")");
    return d;
  };

  switch (r) {
    case Regime::NearCritical: {
      if (c.C2 <= 0.0)
        throw RegimeViolation(
            "near-critical asymptote needs a confining quadratic term "
            "(C2 = " +
            std::to_string(c.C2) + ")");
      out.x2 = T / (w0sq * c.C2);  // == (mu-1)/(4(g^2 - g_c^2))
      out.p2 = 0.25;
      out.n = 0.5 * (out.x2 + out.p2) - 0.5;
      out.weights = check(term_weights(out.x2)[0], term_weights(out.x2), 0);
      break;
    }
    case Regime::QuarticCritical: {
      if (c.C4 <= 0.0)
        throw RegimeViolation(
            "quartic-critical asymptote needs C4 > 0 (C4 = " +
            std::to_string(c.C4) + ")");
      const double beta1 = w0sq * c.C4 / (4.0 * T);
      out.x2 = kQuarticMomentRatio / std::sqrt(beta1);
      out.p2 = g1sq / mu1sq * out.x2 + 0.5;
      out.n = 0.5 * (1.0 + g1sq / mu1sq) * out.x2 - 0.25;
      out.weights = check(term_weights(out.x2)[1], term_weights(out.x2), 1);
      break;
    }
    case Regime::TricriticalPoint: {
      if (c.C6 <= 0.0)
        throw RegimeViolation(
            "tricritical asymptote needs C6 > 0 (C6 = " +
            std::to_string(c.C6) + ")");
      const double beta2 = w0sq * c.C6 / (6.0 * T);
      out.x2 = kSexticMomentRatio * std::pow(beta2, -1.0 / 3.0);
      out.p2 = 0.5;
      out.n = 0.5 * out.x2 - 0.25;
      out.weights = check(term_weights(out.x2)[2], term_weights(out.x2), 2);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ensemble integration of the full two-variable SDE
// ---------------------------------------------------------------------------

struct TrajectoryState {
  double x = 0.0;
  double p = 0.0;
};

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct EnsembleStats {
  int n_traj = 0;
  double dt = 0.0;
  double t_burn = 0.0;
  double t_max = 0.0;
  std::uint64_t seed = 0;
  MomentEstimate x2;
  MomentEstimate p2;
  MomentEstimate x4;
};

inline void to_json(json& j, const MomentEstimate& m) {
  j = json{{"value", m.value}, {"std_error", m.std_error}};
}

inline void to_json(json& j, const EnsembleStats& s) {
  j = json{{"n_traj", s.n_traj}, {"dt", s.dt},     {"t_burn", s.t_burn},
           {"t_max", s.t_max},   {"seed", s.seed},
           {"moments", json{{"x2", s.x2}, {"p2", s.p2}, {"x4", s.x4}}}};
}

namespace lvdetail {

// SplitMix64 mixer; decorrelates per-trajectory engine seeds derived from
// (seed, trajectory index).
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

// Order-independent pairwise summation (stable reduction over trajectories).
inline double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(a, h) + pairwise_sum(a + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& a) {
  return a.empty() ? 0.0 : pairwise_sum(a.data(), a.size());
}

}  // namespace lvdetail

// Integrates one trajectory of the two-variable SDE
//   dx = [-w0(mu-1) p - k1 x - k2 (x^2+p^2) x] dt
//        + sqrt(k1) dW1p + sqrt(2 k2) (x dW2p - p dW2x)
//   dp = [-w0(mu+1) x + s w0 g^2 x / sqrt(2 g^2 x^2/eta + 1)
//         - k1 p - k2 (x^2+p^2) p] dt
//        - sqrt(k1) dW1x - sqrt(2 k2) (x dW2x + p dW2p)
// (s = +1 on the (-) branch) with Euler-Maruyama in the Ito convention: all
// coefficients are evaluated at the pre-step state.  noise_scale = 0 reduces
// the update to the deterministic drift.  Throws Unstable when |x| or |p|
// exceeds 1e6.
inline TrajectoryState integrate_trajectory(const ModelParams& p, Branch b,
                                            TrajectoryState init, double dt,
                                            std::int64_t n_steps,
                                            std::uint64_t rng_seed,
                                            double noise_scale = 1.0) {
  if (dt <= 0.0) throw InvalidParams("dt must be > 0");
  const auto rr = raw_rates(p);
  const double w0 = p.omega0, mu = p.mu, g = p.g;
  const double k1 = rr.kappa1, k2 = rr.kappa2;
  const double s = (b == Branch::Minus) ? +1.0 : -1.0;
  const double sq_k1 = std::sqrt(k1), sq_2k2 = std::sqrt(2.0 * k2);
  const double sq_dt = std::sqrt(dt);

  std::mt19937_64 eng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  double x = init.x, pp = init.p;
  for (std::int64_t step = 0; step < n_steps; ++step) {
    const double r2 = x * x + pp * pp;
    const double root = std::sqrt(2.0 * g * g * x * x / p.eta + 1.0);
    const double fx = -w0 * (mu - 1.0) * pp - k1 * x - k2 * r2 * x;
    const double fp = -w0 * (mu + 1.0) * x + s * w0 * g * g * x / root -
                      k1 * pp - k2 * r2 * pp;
    double gx = 0.0, gp = 0.0;
    if (noise_scale != 0.0) {
      const double n1x = normal(eng), n1p = normal(eng);
      const double n2x = normal(eng), n2p = normal(eng);
      gx = sq_k1 * n1p + sq_2k2 * (x * n2p - pp * n2x);
      gp = -sq_k1 * n1x - sq_2k2 * (x * n2x + pp * n2p);
    }
    x += fx * dt + noise_scale * sq_dt * gx;
    pp += fp * dt + noise_scale * sq_dt * gp;
    if (std::abs(x) > 1e6 || std::abs(pp) > 1e6)
      throw Unstable("trajectory escaped |x| or |p| > 1e6 at step " +
                     std::to_string(step));
  }
  return {x, pp};
}

// Default Euler-Maruyama step resolving both the fastest linear frequency
// and the nonlinear damping rate at the expected steady-state amplitude.
// The amplitude estimate combines the closed-form spread of the dominant
// Landau term -- the smallest among the defined single-term candidates,
// since the strongest term sets the confinement (the Gaussian candidate
// alone diverges spuriously when C2 crosses zero) -- with the position of
// the potential minimum, which carries the amplitude of a displaced well.
inline double default_timestep(const ModelParams& p,
                               Branch b = Branch::Minus) {
  double x2_est = 1.0;
  if (p.mu != 1.0) {
    const auto c = landau_C(p);
    const double w0sq = p.omega0 * p.omega0;
    double spread = std::numeric_limits<double>::infinity();
    if (c.C2 > 0.0) spread = std::min(spread, c.T_eff / (w0sq * c.C2));
    if (c.C4 > 0.0)
      spread = std::min(spread, kQuarticMomentRatio /
                                    std::sqrt(w0sq * c.C4 / (4.0 * c.T_eff)));
    if (c.C6 > 0.0)
      spread = std::min(
          spread, kSexticMomentRatio *
                      std::pow(w0sq * c.C6 / (6.0 * c.T_eff), -1.0 / 3.0));
    if (std::isfinite(spread)) x2_est = std::max(x2_est, spread);
    try {
      const double xm = potential_minimum(p, b, PotentialForm::Exact).x;
      x2_est = std::max(x2_est, xm * xm);
    } catch (const Error&) {
      // Unconfined potential: keep the spread-based estimate; integration
      // at such parameters ends in an Unstable throw anyway.
    }
  }
  const auto rr = raw_rates(p);
  const double linear = p.omega0 * (1.0 + std::abs(p.mu));
  const double damping = rr.kappa1 + rr.kappa2 * x2_est;
  return 0.005 / std::max(linear, damping);
}

// Ensemble steady-state moments of the full SDE.  Every trajectory starts at
// the potential minimum (momentum at its conditional mean), burns in for
// t_burn, then accumulates time averages until t_max; each trajectory is one
// batch for the standard errors.  Deterministic for fixed (seed, n_traj, dt).
inline EnsembleStats simulate_ensemble(const ModelParams& p, Branch b,
                                       int n_traj, double dt, double t_burn,
                                       double t_max, std::uint64_t seed,
                                       double noise_scale = 1.0) {
  if (n_traj < 16)
    throw InvalidParams("n_traj must be >= 16 (one batch per trajectory)");
  if (dt <= 0.0 || t_burn < 0.0 || t_max <= t_burn)
    throw InvalidParams("need dt > 0 and t_max > t_burn >= 0");

  const auto rr = raw_rates(p);
  const double w0 = p.omega0, mu = p.mu, g = p.g;
  const double k1 = rr.kappa1, k2 = rr.kappa2;
  const double s = (b == Branch::Minus) ? +1.0 : -1.0;
  const double sq_k1 = std::sqrt(k1), sq_2k2 = std::sqrt(2.0 * k2);
  const double sq_dt = std::sqrt(dt);

  const auto c = landau_C(p);
  const auto scan = lvdetail::support_scan(p, b, PotentialForm::Exact,
                                           c.T_eff);
  const double x0 = scan.minimum.x;
  const double p0 =
      -(p.gamma1 * x0 + p.gamma2 * x0 * x0 * x0 / p.eta) / (p.mu - 1.0);

  const std::int64_t burn_steps =
      static_cast<std::int64_t>(std::llround(t_burn / dt));
  const std::int64_t sample_steps =
      static_cast<std::int64_t>(std::llround((t_max - t_burn) / dt));
  if (sample_steps < 1)
    throw InvalidParams("t_max - t_burn must cover at least one step");

  std::vector<double> m_x2(n_traj), m_p2(n_traj), m_x4(n_traj);
  for (int traj = 0; traj < n_traj; ++traj) {
    std::mt19937_64 eng(lvdetail::trajectory_seed(seed, traj));
    std::normal_distribution<double> normal(0.0, 1.0);
    double x = x0, pp = p0;
    double acc_x2 = 0.0, acc_p2 = 0.0, acc_x4 = 0.0;
    for (std::int64_t step = 0; step < burn_steps + sample_steps; ++step) {
      const double r2 = x * x + pp * pp;
      const double root = std::sqrt(2.0 * g * g * x * x / p.eta + 1.0);
      const double fx = -w0 * (mu - 1.0) * pp - k1 * x - k2 * r2 * x;
      const double fp = -w0 * (mu + 1.0) * x + s * w0 * g * g * x / root -
                        k1 * pp - k2 * r2 * pp;
      double gx = 0.0, gp = 0.0;
      if (noise_scale != 0.0) {
        const double n1x = normal(eng), n1p = normal(eng);
        const double n2x = normal(eng), n2p = normal(eng);
        gx = sq_k1 * n1p + sq_2k2 * (x * n2p - pp * n2x);
        gp = -sq_k1 * n1x - sq_2k2 * (x * n2x + pp * n2p);
      }
      x += fx * dt + noise_scale * sq_dt * gx;
      pp += fp * dt + noise_scale * sq_dt * gp;
      if (std::abs(x) > 1e6 || std::abs(pp) > 1e6)
        throw Unstable("trajectory " + std::to_string(traj) +
                       " escaped |x| or |p| > 1e6 at step " +
                       std::to_string(step));
      if (step >= burn_steps) {
        acc_x2 += x * x;
        acc_p2 += pp * pp;
        acc_x4 += x * x * x * x;
      }
    }
    m_x2[traj] = acc_x2 / sample_steps;
    m_p2[traj] = acc_p2 / sample_steps;
    m_x4[traj] = acc_x4 / sample_steps;
  }

  auto reduce = [&](const std::vector<double>& m) {
    MomentEstimate e;
    const double n = static_cast<double>(n_traj);
    e.value = lvdetail::pairwise_sum(m) / n;
    std::vector<double> sq(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
      sq[i] = (m[i] - e.value) * (m[i] - e.value);
    e.std_error = std::sqrt(lvdetail::pairwise_sum(sq) / (n - 1.0) / n);
    return e;
  };

  EnsembleStats out;
  out.n_traj = n_traj;
  out.dt = dt;
  out.t_burn = t_burn;
  out.t_max = t_max;
  out.seed = seed;
  out.x2 = reduce(m_x2);
  out.p2 = reduce(m_p2);
  out.x4 = reduce(m_x4);
  return out;
}

}  // namespace openrabi
