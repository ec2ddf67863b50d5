#pragma once

// Mean-field analysis of the parametrically amplified open Rabi model:
// fixed points of the semiclassical flow, linear stability, Landau expansion
// of the effective potential, phase classification, second- and first-order
// critical lines, the tricritical point, and the tetracritical nonexistence
// scan.
//
// Conventions.  The normalized variables are xbar = <a+a'>/sqrt(2*eta),
// pbar the conjugate momentum, and (sx, sy, sz) the spin expectations.
// Time derivatives are reported in real units: the bosonic pair carries a
// factor omega0 and the spin precession a factor Omega = eta*omega0.
// The reduced fixed-point problem lives in u = xbar^2 with
//   G(u)   = (2 g^2 u + 1)^(-1/2)
//   u_p(u) = u * q(u),  q(u) = (-(1+mu) - s g^2 G(u)) / (1-mu)
//   h(u)   = u * (gamma1 + gamma2*(u_p+u))^2 - (1-mu)^2 * u_p
// with s = +1/-1 the spin branch sign; nontrivial fixed points are the
// positive roots of h, and the effective potential is
// F(x) = Integral_0^{x^2} h(u)/u du with h(u)/u evaluated analytically as
// (gamma1 + gamma2 u (1+q))^2 - (1-mu)^2 q  (no 0/0 at u=0).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "openrabi/core.hpp"
#include "openrabi/errors.hpp"
#include "openrabi/quadrature.hpp"

namespace openrabi {

struct MeanFieldState {
  double xbar = 0.0;
  double pbar = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  double sz = -1.0;
};

struct FixedPoint {
  MeanFieldState state;
  bool stable = false;
  // Growth rates of the 4-variable linearization, in units of omega0,
  // sorted by descending real part.  Empty until stability() annotates.
  std::vector<std::complex<double>> jacobian_eigenvalues;
  double n_mf = 0.0;  // |alpha|^2 = (xbar^2 + pbar^2)/2
  bool trivial = false;
};

struct LandauCoeffs {
  Branch branch = Branch::Minus;
  int order = 0;              // truncation order N of the G(u) series
  std::map<int, double> c;    // even power 2n -> coefficient c_{2n}
};

enum class Phase { NP, SRP };

inline const char* phase_name(Phase ph) { return ph == Phase::NP ? "NP" : "SRP"; }

struct PhaseClassification {
  Phase phase = Phase::NP;
  double n_mf = 0.0;            // at the selected fixed point (0 in NP)
  bool trivial_stable = false;
  bool has_stable_nontrivial = false;
  double F_at_minimum = 0.0;    // exact potential at the selected nontrivial min
};

enum class TransitionOrder { None, First, Second, Tricritical };

inline const char* transition_order_name(TransitionOrder t) {
  switch (t) {
    case TransitionOrder::First: return "first";
    case TransitionOrder::Second: return "second";
    case TransitionOrder::Tricritical: return "tricritical";
    default: return "none";
  }
}

struct PhasePoint {
  double mu = 0.0;
  double g = 0.0;
  Phase phase_minus = Phase::NP;
  Phase phase_plus = Phase::NP;
  TransitionOrder transition_order_nearby = TransitionOrder::None;
  double n_mf_minus = 0.0;
  double n_mf_plus = 0.0;
  bool failed = false;
  std::string status = "ok";
};

namespace mfdetail {

inline double G_of(double u, double g) {
  return 1.0 / std::sqrt(2.0 * g * g * u + 1.0);
}

// q(u) = u_p/u; requires mu != 1.
inline double q_of(double u, const ModelParams& p, double s) {
  const double G = G_of(u, p.g);
  return (-(1.0 + p.mu) - s * p.g * p.g * G) / (1.0 - p.mu);
}

inline double u_p_of(double u, const ModelParams& p, double s) {
  return u * q_of(u, p, s);
}

inline double h_of(double u, const ModelParams& p, double s) {
  const double up = u_p_of(u, p, s);
  const double R = p.gamma1 + p.gamma2 * (up + u);
  return u * R * R - (1.0 - p.mu) * (1.0 - p.mu) * up;
}

// Magnitude scale of h at u, for relative convergence tests.
inline double h_scale(double u, const ModelParams& p, double s) {
  const double up = u_p_of(u, p, s);
  const double R = p.gamma1 + p.gamma2 * (up + u);
  return std::abs(u * R * R) + (1.0 - p.mu) * (1.0 - p.mu) * std::abs(up) +
         1e-300;
}

// Analytic dh/du (used by the Newton polish).
inline double dh_du(double u, const ModelParams& p, double s) {
  const double g2 = p.g * p.g;
  const double G = G_of(u, p.g);
  const double dG = -g2 * G * G * G;
  const double q = (-(1.0 + p.mu) - s * g2 * G) / (1.0 - p.mu);
  const double dq = -s * g2 * dG / (1.0 - p.mu);
  const double up = u * q;
  const double dup = q + u * dq;
  const double R = p.gamma1 + p.gamma2 * (up + u);
  const double dR = p.gamma2 * (dup + 1.0);
  const double m2 = (1.0 - p.mu) * (1.0 - p.mu);
  return R * R + 2.0 * u * R * dR - m2 * dup;
}

// h(u)/u, analytic at u = 0 (limit is the quadratic Landau coefficient c2).
inline double h_over_u(double u, const ModelParams& p, double s) {
  const double q = q_of(u, p, s);
  const double R = p.gamma1 + p.gamma2 * u * (1.0 + q);
  return R * R - (1.0 - p.mu) * (1.0 - p.mu) * q;
}

// Lift a root u > 0 of h to the two Z2-paired mean-field states.
inline MeanFieldState lift_root(double u, const ModelParams& p, double s,
                                double x_sign) {
  MeanFieldState st;
  const double x = x_sign * std::sqrt(u);
  const double up = u_p_of(u, p, s);
  const double R = p.gamma1 + p.gamma2 * (up + u);
  st.xbar = x;
  st.pbar = x * R / (1.0 - p.mu);
  st.sz = s * G_of(u, p.g);
  st.sx = std::sqrt(2.0) * p.g * x * st.sz;
  st.sy = 0.0;
  return st;
}

// Right-hand side of the 4-variable flow with sz eliminated as
// sz = sigma*sqrt(1 - sx^2 - sy^2); returns derivatives in real time units.
inline std::array<double, 4> rhs4(const std::array<double, 4>& y,
                                  const ModelParams& p, double sigma) {
  const double x = y[0], pp = y[1], sx = y[2], sy = y[3];
  const double Omega = p.eta * p.omega0;
  const double r2 = x * x + pp * pp;
  const double sz =
      sigma * std::sqrt(std::max(0.0, 1.0 - sx * sx - sy * sy));
  std::array<double, 4> d;
  d[0] = p.omega0 *
         ((1.0 - p.mu) * pp - p.gamma1 * x - p.gamma2 * r2 * x);
  d[1] = p.omega0 *
         (-(1.0 + p.mu) * x - p.g / std::sqrt(2.0) * sx - p.gamma1 * pp -
          p.gamma2 * r2 * pp);
  d[2] = -Omega * sy;
  d[3] = Omega * (sx - std::sqrt(2.0) * p.g * x * sz);
  return d;
}

}  // namespace mfdetail

// Time derivative of the full 5-variable mean-field state, in real units.
inline MeanFieldState mf_rhs(const MeanFieldState& s, const ModelParams& p) {
  const double Omega = p.eta * p.omega0;
  const double r2 = s.xbar * s.xbar + s.pbar * s.pbar;
  MeanFieldState d;
  d.xbar = p.omega0 * ((1.0 - p.mu) * s.pbar - p.gamma1 * s.xbar -
                       p.gamma2 * r2 * s.xbar);
  d.pbar = p.omega0 * (-(1.0 + p.mu) * s.xbar -
                       p.g / std::sqrt(2.0) * s.sx - p.gamma1 * s.pbar -
                       p.gamma2 * r2 * s.pbar);
  d.sx = -Omega * s.sy;
  d.sy = Omega * (s.sx - std::sqrt(2.0) * p.g * s.xbar * s.sz);
  d.sz = Omega * std::sqrt(2.0) * p.g * s.xbar * s.sy;
  return d;
}

// Linear stability of a fixed point via the 4-variable Jacobian (sz
// eliminated per branch), central finite differences with step 1e-6.
//
// All four eigenvalues are reported (units of omega0, descending real part).
// The `stable` flag is decided on the slow sector: the spin-precession
// conjugate pair (|Im| > Omega/2) carries an O(omega0/eta^2) positive real
// part at every fixed point at finite eta — an artifact of the scale
// separation, not a slow instability — so it is excluded from the flag.
// Slow saddles and genuine mean-field instabilities all live in the
// remaining eigenvalues.
inline FixedPoint stability(FixedPoint fp, const ModelParams& p, Branch b) {
  const MeanFieldState& st = fp.state;
  if (std::abs(st.sz) < 1e-8)
    throw SingularElimination(
        "spin elimination ill-defined: |s_z| = " + std::to_string(st.sz));
  const double sigma = st.sz >= 0.0 ? +1.0 : -1.0;
  (void)b;  // branch is implied by the sign of s_z at the point

  const std::array<double, 4> y0{st.xbar, st.pbar, st.sx, st.sy};
  const double h = 1e-6;
  Eigen::Matrix4d J;
  for (int j = 0; j < 4; ++j) {
    std::array<double, 4> yp = y0, ym = y0;
    yp[j] += h;
    ym[j] -= h;
    const auto fp_ = mfdetail::rhs4(yp, p, sigma);
    const auto fm_ = mfdetail::rhs4(ym, p, sigma);
    for (int i = 0; i < 4; ++i) J(i, j) = (fp_[i] - fm_[i]) / (2.0 * h);
  }

  Eigen::EigenSolver<Eigen::Matrix4d> es(J);
  std::vector<std::complex<double>> eigs(4);
  for (int i = 0; i < 4; ++i) eigs[i] = es.eigenvalues()(i) / p.omega0;
  std::sort(eigs.begin(), eigs.end(),
            [](const auto& a, const auto& b_) { return a.real() > b_.real(); });
  fp.jacobian_eigenvalues = eigs;

  // Identify the fast spin-precession pair by |Im| and exclude it from the
  // stability decision when it is genuinely fast (|Im| > Omega/2, in units
  // of omega0: eta/2).
  std::array<int, 4> idx{0, 1, 2, 3};
  std::sort(idx.begin(), idx.end(), [&](int a, int b_) {
    return std::abs(eigs[a].imag()) > std::abs(eigs[b_].imag());
  });
  const double fast_threshold = 0.5 * p.eta;
  std::array<bool, 4> excluded{false, false, false, false};
  if (std::abs(eigs[idx[0]].imag()) > fast_threshold &&
      std::abs(eigs[idx[1]].imag()) > fast_threshold) {
    excluded[idx[0]] = excluded[idx[1]] = true;
  }
  const double tol_stab = 1e-9;
  bool stable = true;
  for (int i = 0; i < 4; ++i)
    if (!excluded[i] && eigs[i].real() >= -tol_stab) stable = false;
  fp.stable = stable;
  return fp;
}

// All fixed points of the flow for one spin branch: the trivial point plus
// every positive root of h(u), each lifted to both signs of xbar.  Roots are
// located by sign-change bracketing on a 400-point geometric grid over
// u in [1e-8, 1e3*max(1, 1/g^2)] and polished by safeguarded Newton/bisection
// to |h| < 1e-12 * scale.  Each returned point is stability-annotated.
inline std::vector<FixedPoint> fixed_points(const ModelParams& p, Branch b) {
  const double s = branch_sign(b);
  std::vector<FixedPoint> out;

  FixedPoint triv;
  triv.state = MeanFieldState{0.0, 0.0, 0.0, 0.0, s};
  triv.trivial = true;
  triv.n_mf = 0.0;
  out.push_back(stability(triv, p, b));

  // At mu = 1 the u-reduction degenerates (u_p undefined) and the flow admits
  // no nontrivial fixed point for gamma1 > 0: the x-equation forces x = 0.
  if (std::abs(1.0 - p.mu) < 1e-12 || p.g == 0.0) return out;

  const int n_grid = 400;
  const double u_lo = 1e-8;
  const double u_hi = 1e3 * std::max(1.0, 1.0 / (p.g * p.g));
  std::vector<double> roots;

  auto h = [&](double u) { return mfdetail::h_of(u, p, s); };

  double u_prev = u_lo;
  double h_prev = h(u_prev);
  const double ratio = std::pow(u_hi / u_lo, 1.0 / (n_grid - 1));
  for (int i = 1; i < n_grid; ++i) {
    const double u_cur = u_lo * std::pow(ratio, i);
    const double h_cur = h(u_cur);
    if (h_prev == 0.0) roots.push_back(u_prev);
    if ((h_prev < 0.0 && h_cur > 0.0) || (h_prev > 0.0 && h_cur < 0.0)) {
      // Safeguarded Newton with bisection fallback inside [a, b].
      double a = u_prev, bb = u_cur, ha = h_prev;
      double u = 0.5 * (a + bb);
      bool converged = false;
      for (int it = 0; it < 200; ++it) {
        const double hu = h(u);
        if (std::abs(hu) < 1e-12 * mfdetail::h_scale(u, p, s)) {
          converged = true;
          break;
        }
        if ((hu < 0.0) == (ha < 0.0)) {
          a = u;
          ha = hu;
        } else {
          bb = u;
        }
        const double dh = mfdetail::dh_du(u, p, s);
        double u_next = dh != 0.0 ? u - hu / dh : a;
        if (!(u_next > a && u_next < bb)) u_next = 0.5 * (a + bb);
        if (std::abs(u_next - u) < 1e-16 * std::abs(u) && bb - a < 1e-15 * u) {
          u = u_next;
          converged = true;
          break;
        }
        u = u_next;
      }
      if (!converged) {
        std::ostringstream os;
        os << "fixed-point polish failed after 200 iterations in bracket ["
           << a << ", " << bb << "] (mu=" << p.mu << ", g=" << p.g << ")";
        throw NoConvergence(os.str());
      }
      roots.push_back(u);
    }
    u_prev = u_cur;
    h_prev = h_cur;
  }

  for (double u : roots) {
    for (double x_sign : {+1.0, -1.0}) {
      FixedPoint fp;
      fp.state = mfdetail::lift_root(u, p, s, x_sign);
      fp.trivial = false;
      fp.n_mf = 0.5 * (fp.state.xbar * fp.state.xbar +
                       fp.state.pbar * fp.state.pbar);
      out.push_back(stability(fp, p, b));
    }
  }
  return out;
}

// Landau coefficients of F_b(x) = sum_n c_{2n} x^{2n} obtained by expanding
// G(u) as a binomial series to order N, assembling h(u)/u as a polynomial,
// and integrating term-wise.  Powers up to 2n = 2(2N+3) are returned; c0 = 0.
inline LandauCoeffs landau_coeffs(const ModelParams& p, Branch b, int N) {
  if (N < 1) throw InvalidParams("landau_coeffs requires N >= 1");
  const double s = branch_sign(b);
  const double g2 = p.g * p.g;
  const double one_minus_mu = 1.0 - p.mu;
  if (std::abs(one_minus_mu) < 1e-14)
    throw DegenerateMu("Landau expansion undefined at mu = 1");

  // G(u) = sum b_n u^n, b_n = (-1)^n C(2n, n) (g^2/2)^n.
  std::vector<double> G(N + 1);
  G[0] = 1.0;
  for (int n = 1; n <= N; ++n)
    G[n] = -G[n - 1] * (2.0 * n - 1.0) / n * g2;

  // q(u) = (-(1+mu) - s g^2 G(u)) / (1-mu), degree N.
  std::vector<double> q(N + 1);
  for (int n = 0; n <= N; ++n) q[n] = -s * g2 * G[n] / one_minus_mu;
  q[0] += -(1.0 + p.mu) / one_minus_mu;

  // R(u) = gamma1 + gamma2 * u * (1 + q(u)), degree N+1.
  std::vector<double> R(N + 2, 0.0);
  R[0] = p.gamma1;
  R[1] = p.gamma2 * (1.0 + q[0]);
  for (int n = 1; n <= N; ++n) R[n + 1] = p.gamma2 * q[n];

  // h(u)/u = R^2 - (1-mu)^2 q, degree 2N+2.
  std::vector<double> a(2 * N + 3, 0.0);
  for (int i = 0; i <= N + 1; ++i)
    for (int j = 0; j <= N + 1; ++j) a[i + j] += R[i] * R[j];
  for (int n = 0; n <= N; ++n) a[n] -= one_minus_mu * one_minus_mu * q[n];

  LandauCoeffs lc;
  lc.branch = b;
  lc.order = N;
  for (int k = 0; k < static_cast<int>(a.size()); ++k)
    lc.c[2 * (k + 1)] = a[k] / (k + 1);
  return lc;
}

// Closed forms of the two leading Landau coefficients (used as invariants).
inline double landau_c2_closed(const ModelParams& p, Branch b) {
  const double s = branch_sign(b);
  return (1.0 - p.mu) * (1.0 + p.mu + s * p.g * p.g) + p.gamma1 * p.gamma1;
}

inline double landau_c4_closed(const ModelParams& p, Branch b) {
  const double s = branch_sign(b);
  const double g2 = p.g * p.g;
  return p.gamma1 * p.gamma2 * (-2.0 * p.mu - s * g2) / (1.0 - p.mu) -
         (1.0 - p.mu) * s * g2 * g2 / 2.0;
}

// Critical coupling g_c = sqrt(|1 + gamma1^2 - mu^2| / |mu - 1|).
inline double critical_coupling_gc(const ModelParams& p) {
  if (std::abs(p.mu - 1.0) < 1e-14)
    throw DivergentCritical("g_c diverges at mu = 1");
  return std::sqrt(std::abs(1.0 + p.gamma1 * p.gamma1 - p.mu * p.mu) /
                   std::abs(p.mu - 1.0));
}

// Tricritical two-photon rate gamma2_c = (mu-1)^2 g_c^4 / (2 gamma1 (2 mu - g_c^2)),
// defined in the inverted regime mu > mu_c.
inline double tricritical_gamma2(const ModelParams& p) {
  if (p.mu <= critical_mu(p))
    throw OutsideInvertedRegime(
        "tricritical point requires mu > mu_c = sqrt(1+gamma1^2)");
  const double gc = critical_coupling_gc(p);
  const double gc2 = gc * gc;
  if (std::abs(2.0 * p.mu - gc2) < 1e-12)
    throw DegenerateDenominator("|2 mu - g_c^2| < 1e-12");
  const double denom = 2.0 * p.gamma1 * (2.0 * p.mu - gc2);
  if (denom == 0.0)
    throw DegenerateDenominator("2 gamma1 (2 mu - g_c^2) = 0");
  const double m1 = p.mu - 1.0;
  return m1 * m1 * gc2 * gc2 / denom;
}

// Effective potential F_b(x).  N = std::nullopt selects exact quadrature of
// h(u)/u over [0, x^2]; otherwise the order-N Landau polynomial is evaluated.
inline double F_potential(double x, const ModelParams& p, Branch b,
                          std::optional<int> N = std::nullopt) {
  const double s = branch_sign(b);
  const double u_top = x * x;
  if (N.has_value()) {
    const LandauCoeffs lc = landau_coeffs(p, b, *N);
    double val = 0.0;
    // Horner evaluation in u = x^2, highest power first.
    for (auto it = lc.c.rbegin(); it != lc.c.rend(); ++it)
      val = val * u_top + it->second;
    return val * u_top;  // every term carries at least x^2
  }
  if (u_top == 0.0) return 0.0;
  if (std::abs(1.0 - p.mu) < 1e-14)
    throw DegenerateMu("exact potential undefined at mu = 1");
  auto integrand = [&](double u) { return mfdetail::h_over_u(u, p, s); };
  return integrate(integrand, 0.0, u_top, 1e-13).value;
}

// Phase classification: SRP iff a stable nontrivial fixed point exists and
// the exact potential at that point is below F(0) = 0 (global-minimum rule).
inline PhaseClassification classify_phase(const ModelParams& p, Branch b) {
  PhaseClassification res;
  const auto fps = fixed_points(p, b);
  res.trivial_stable = fps.front().stable;

  const FixedPoint* best = nullptr;
  double best_F = 0.0;
  for (const auto& fp : fps) {
    if (fp.trivial || !fp.stable) continue;
    res.has_stable_nontrivial = true;
    const double F = F_potential(std::abs(fp.state.xbar), p, b);
    if (best == nullptr || F < best_F) {
      best = &fp;
      best_F = F;
    }
  }
  if (best != nullptr && best_F < 0.0) {
    res.phase = Phase::SRP;
    res.n_mf = best->n_mf;
    res.F_at_minimum = best_F;
  } else {
    res.phase = Phase::NP;
    res.n_mf = 0.0;
    res.F_at_minimum = best != nullptr ? best_F : 0.0;
  }
  return res;
}

// First-order boundary g*: the coupling where the global minimum of the
// exact potential switches between the trivial and the nontrivial solution.
// Implemented by bisection on Delta F(g) = F(x_s(g)) - F(0) inside the
// coexistence window; |Delta F| resolved to 1e-10, g to 1e-8.
inline double first_order_boundary(const ModelParams& p_base, Branch b,
                                   double g_lo, double g_hi) {
  if (!(g_hi > g_lo)) throw InvalidParams("empty g window");

  // Delta F at the deepest stable nontrivial minimum; nullopt if there is no
  // coexistence (either minimum missing) at this g.
  auto deltaF = [&](double g) -> std::optional<double> {
    const ModelParams p = p_base.with_g(g);
    const auto fps = fixed_points(p, b);
    if (!fps.front().stable) return std::nullopt;
    bool any = false;
    double best = 0.0;
    for (const auto& fp : fps) {
      if (fp.trivial || !fp.stable) continue;
      const double F = F_potential(std::abs(fp.state.xbar), p, b);
      if (!any || F < best) best = F;
      any = true;
    }
    if (!any) return std::nullopt;
    return best;
  };

  const int n_scan = 256;
  double a = 0.0, bb = 0.0, Fa = 0.0, Fb = 0.0;
  bool have_prev = false, found = false;
  double g_prev = 0.0, F_prev = 0.0;
  bool any_coexist = false;
  for (int i = 0; i <= n_scan; ++i) {
    const double g = g_lo + (g_hi - g_lo) * i / n_scan;
    const auto dF = deltaF(g);
    if (!dF.has_value()) {
      have_prev = false;
      continue;
    }
    any_coexist = true;
    if (have_prev && ((F_prev < 0.0) != (*dF < 0.0))) {
      a = g_prev;
      bb = g;
      Fa = F_prev;
      Fb = *dF;
      found = true;
      break;
    }
    have_prev = true;
    g_prev = g;
    F_prev = *dF;
  }

  if (!found) {
    // Window-collapse case: at gamma2 -> gamma2_c the coexistence window
    // shrinks to a point and the boundary merges with g_c.
    bool at_collapse = false;
    try {
      const double g2c = tricritical_gamma2(p_base);
      at_collapse = p_base.gamma2 <= g2c * (1.0 + 1e-9);
    } catch (const Error&) {
      at_collapse = false;
    }
    if (!any_coexist && at_collapse) {
      const double gc = critical_coupling_gc(p_base);
      if (gc >= g_lo && gc <= g_hi) return gc;
    }
    throw NoCoexistence(
        "no global-minimum crossing with coexisting minima in the g window");
  }

  while (bb - a > 1e-8) {
    const double mid = 0.5 * (a + bb);
    const auto dF = deltaF(mid);
    double Fm;
    if (dF.has_value()) {
      Fm = *dF;
    } else {
      // Lost coexistence inside the bracket (numerical edge): treat the
      // missing-minimum side by which endpoint it resembles.
      Fm = Fa < 0.0 ? +1.0 : -1.0;
    }
    if (std::abs(Fm) < 1e-10 && dF.has_value()) return mid;
    if ((Fm < 0.0) == (Fa < 0.0)) {
      a = mid;
      Fa = Fm;
    } else {
      bb = mid;
      Fb = Fm;
    }
  }
  (void)Fb;
  return 0.5 * (a + bb);
}

// Full (mu, g) phase diagram with per-node transition-order annotation.
// Solver failures mark the node Failed instead of aborting the sweep.
inline std::vector<PhasePoint> phase_diagram(const std::vector<double>& mu_list,
                                             const std::vector<double>& g_list,
                                             const ModelParams& p_base) {
  std::vector<PhasePoint> out;
  out.reserve(mu_list.size() * g_list.size());

  double g_spacing = 0.0;
  for (size_t i = 1; i < g_list.size(); ++i)
    g_spacing = std::max(g_spacing, std::abs(g_list[i] - g_list[i - 1]));

  // Lazy per-mu cache of the first-order boundary (minus branch).
  std::map<double, std::optional<double>> gstar_cache;

  for (double mu : mu_list) {
    for (double g : g_list) {
      PhasePoint node;
      node.mu = mu;
      node.g = g;
      try {
        const ModelParams p(p_base.omega0, p_base.eta, mu, g, p_base.gamma1,
                            p_base.gamma2);
        const auto cls_m = classify_phase(p, Branch::Minus);
        const auto cls_p = classify_phase(p, Branch::Plus);
        node.phase_minus = cls_m.phase;
        node.phase_plus = cls_p.phase;
        node.n_mf_minus = cls_m.n_mf;
        node.n_mf_plus = cls_p.n_mf;

        // Transition-order annotation for nodes within half a grid cell of
        // the minus-branch boundary.
        if (std::abs(mu - 1.0) > 1e-12 && g_spacing > 0.0) {
          const double gc = critical_coupling_gc(p);
          const double c4_at_gc = landau_c4_closed(p.with_g(gc), Branch::Minus);
          const double c4_scale =
              std::abs(p.mu - 1.0) * gc * gc * gc * gc / 2.0 + 1e-300;
          if (std::abs(c4_at_gc) <= 1e-9 * std::max(1.0, c4_scale) &&
              std::abs(g - gc) <= 0.5 * g_spacing) {
            node.transition_order_nearby = TransitionOrder::Tricritical;
          } else if (c4_at_gc > 0.0) {
            if (std::abs(g - gc) <= 0.5 * g_spacing)
              node.transition_order_nearby = TransitionOrder::Second;
          } else {
            auto it = gstar_cache.find(mu);
            if (it == gstar_cache.end()) {
              std::optional<double> gs;
              try {
                gs = first_order_boundary(p, Branch::Minus, gc - 1e-6,
                                          gc * 1.15);
              } catch (const Error&) {
                gs = std::nullopt;
              }
              it = gstar_cache.emplace(mu, gs).first;
            }
            if (it->second.has_value() &&
                std::abs(g - *it->second) <= 0.5 * g_spacing)
              node.transition_order_nearby = TransitionOrder::First;
          }
        }
      } catch (const Error& e) {
        node.failed = true;
        node.status = e.what();
      }
      out.push_back(std::move(node));
    }
  }
  return out;
}

// Tetracritical nonexistence scan: at each mu > 1 the simultaneous zero of
// c2, c4 and c6 on the minus branch would require
// gamma1^2 = (mu-1)(-5 mu + sqrt(24 mu^2 + 1)), which is negative for all
// mu > 1.  The scan reports that value together with the c6 residual left at
// the (c2=0, c4=0) point for the actual gamma1.
struct TetracriticalPoint {
  double mu = 0.0;
  double required_gamma1_sq = 0.0;
  double gamma2_at_c4_zero = 0.0;  // gamma2 that zeroes c4 at g = g_c
  double c6_residual = 0.0;        // c6 at (g_c, gamma2_at_c4_zero)
  bool feasible = false;
};

struct TetracriticalReport {
  std::vector<TetracriticalPoint> points;
  bool any_feasible = false;
};

inline TetracriticalReport tetracritical_scan(const std::vector<double>& mu_list,
                                              const ModelParams& p_base) {
  TetracriticalReport rep;
  for (double mu : mu_list) {
    if (!(mu > 1.0))
      throw InvalidParams("tetracritical_scan requires mu values > 1");
    TetracriticalPoint tp;
    tp.mu = mu;
    tp.required_gamma1_sq =
        (mu - 1.0) * (-5.0 * mu + std::sqrt(24.0 * mu * mu + 1.0));
    tp.feasible = tp.required_gamma1_sq > 0.0;
    ModelParams p = p_base.with_mu(mu);
    try {
      tp.gamma2_at_c4_zero = tricritical_gamma2(p);
      const double gc = critical_coupling_gc(p);
      const ModelParams pc(p.omega0, p.eta, mu, gc, p.gamma1,
                           tp.gamma2_at_c4_zero);
      const LandauCoeffs lc = landau_coeffs(pc, Branch::Minus, 4);
      tp.c6_residual = lc.c.at(6);
    } catch (const Error&) {
      tp.gamma2_at_c4_zero = std::numeric_limits<double>::quiet_NaN();
      tp.c6_residual = std::numeric_limits<double>::quiet_NaN();
    }
    if (tp.feasible) rep.any_feasible = true;
    rep.points.push_back(tp);
  }
  return rep;
}

// Minimal fixed-step RK4 on the full 5-variable flow; used by stability
// cross-checks (perturb a fixed point, integrate, compare drift).
inline MeanFieldState integrate_mf(MeanFieldState s, const ModelParams& p,
                                   double t_final, double dt) {
  auto add = [](const MeanFieldState& a, const MeanFieldState& b, double w) {
    MeanFieldState r;
    r.xbar = a.xbar + w * b.xbar;
    r.pbar = a.pbar + w * b.pbar;
    r.sx = a.sx + w * b.sx;
    r.sy = a.sy + w * b.sy;
    r.sz = a.sz + w * b.sz;
    return r;
  };
  double t = 0.0;
  while (t < t_final) {
    const double step = std::min(dt, t_final - t);
    const MeanFieldState k1 = mf_rhs(s, p);
    const MeanFieldState k2 = mf_rhs(add(s, k1, 0.5 * step), p);
    const MeanFieldState k3 = mf_rhs(add(s, k2, 0.5 * step), p);
    const MeanFieldState k4 = mf_rhs(add(s, k3, step), p);
    MeanFieldState incr = k1;
    incr = add(incr, k2, 2.0);
    incr = add(incr, k3, 2.0);
    incr.xbar = (incr.xbar + k4.xbar) / 6.0;
    incr.pbar = (incr.pbar + k4.pbar) / 6.0;
    incr.sx = (incr.sx + k4.sx) / 6.0;
    incr.sy = (incr.sy + k4.sy) / 6.0;
    incr.sz = (incr.sz + k4.sz) / 6.0;
    s = add(s, incr, step);
    t += step;
  }
  return s;
}

}  // namespace openrabi
