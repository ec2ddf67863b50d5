// Critical-exponent extraction and the finite-size scaling collapse of the
// reduced stationary density:
//   * ScalingSample / ScalingReport domain types whose collapse variables
//     (L, Theta, Lambda, Ftilde) are recomputed from the Landau coefficients
//     evaluated at the critical coupling;
//   * finite_size_scan:      Delta x^2(eta) at g = g_c  (zeta exponent);
//   * critical_exponent_scan: Delta x^2(g - g_c)         (nu exponent);
//   * solve_gamma2_for_Lambda: bracketed root solve of Lambda(gamma2);
//   * collapse_dataset:      (Lambda, eta, g) grid sampling;
//   * fit_exponent:          ordinary least squares in log-log space.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "openrabi/core.hpp"
#include "openrabi/errors.hpp"
#include "openrabi/langevin.hpp"
#include "openrabi/lindblad.hpp"
#include "openrabi/meanfield.hpp"

namespace openrabi {

enum class ScalingBackend { MasterEq, Quadrature, Ensemble };

inline const char* backend_name(ScalingBackend b) {
  switch (b) {
    case ScalingBackend::MasterEq: return "master";
    case ScalingBackend::Quadrature: return "quadrature";
    default: return "ensemble";
  }
}

inline ScalingBackend backend_from_string(const std::string& s) {
  if (s == "master") return ScalingBackend::MasterEq;
  if (s == "quadrature") return ScalingBackend::Quadrature;
  if (s == "ensemble") return ScalingBackend::Ensemble;
  throw InvalidParams("unknown backend '" + s +
                      "' (expected master|quadrature|ensemble)");
}

// One order-parameter sample with its collapse variables.  The derived
// fields are functions of (eta, gamma2) through the Landau coefficients at
// the critical coupling (g enters only through Theta):
//   L = C6^{-1/2},  Theta = |g - g_c| L^{2/3},
//   Lambda = C4 L^{4/3},  Ftilde = dx2 L^{-2/3}.
struct ScalingSample {
  double eta = 0.0;
  double g = 0.0;
  double gamma2 = 0.0;
  double dx2 = std::numeric_limits<double>::quiet_NaN();
  double L = 0.0;
  double Theta = 0.0;
  double Lambda = 0.0;
  double Ftilde = std::numeric_limits<double>::quiet_NaN();
  ScalingBackend backend = ScalingBackend::Quadrature;
  bool failed = false;
  std::string error;
};

// Documented reference exponents for this model family; stored constants,
// never fitted.  xi is the coherence-length exponent (2 on the second-order
// line, 3/2 at the tricritical point).
struct DocumentedExponents {
  double nu = 1.0;
  double zeta_second_order = 0.5;
  double zeta_tricritical = 2.0 / 3.0;
  double xi_second_order = 2.0;
  double xi_tricritical = 1.5;
};

struct ScalingReport {
  double exponent = 0.0;   // fitted power (sign convention per operation)
  double std_error = 0.0;  // OLS standard error of the exponent
  double intercept = 0.0;  // log-space intercept
  double r_squared = 0.0;
  std::vector<ScalingSample> samples;
  DocumentedExponents documented;
};

inline void to_json(json& j, const ScalingSample& s) {
  j = json{{"eta", s.eta},       {"g", s.g},
           {"gamma2", s.gamma2}, {"dx2", s.dx2},
           {"L", s.L},           {"Theta", s.Theta},
           {"Lambda", s.Lambda}, {"Ftilde", s.Ftilde},
           {"backend", backend_name(s.backend)},
           {"status", s.failed ? "failed" : "ok"}};
  if (s.failed) j["error"] = s.error;
}

inline void to_json(json& j, const DocumentedExponents& d) {
  j = json{{"nu", d.nu},
           {"zeta_second_order", d.zeta_second_order},
           {"zeta_tricritical", d.zeta_tricritical},
           {"xi_second_order", d.xi_second_order},
           {"xi_tricritical", d.xi_tricritical}};
}

inline void to_json(json& j, const ScalingReport& r) {
  j = json{{"exponent", r.exponent},   {"std_error", r.std_error},
           {"intercept", r.intercept}, {"r_squared", r.r_squared},
           {"documented_constants", r.documented},
           {"samples", r.samples}};
}

// CSV projection (one row per sample) with a fixed column contract.
inline std::string scaling_csv_header() {
  return "eta,g,gamma2,backend,dx2,L,Theta,Lambda,Ftilde,status";
}

inline std::string to_csv_row(const ScalingSample& s) {
  char buf[512];
  std::string status = "ok";
  if (s.failed) {
    status = "failed(" + s.error + ")";
    for (char& c : status)
      if (c == ',' || c == '\n') c = ';';
  }
  std::snprintf(buf, sizeof(buf),
                "%.17g,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%s",
                s.eta, s.g, s.gamma2, backend_name(s.backend), s.dx2, s.L,
                s.Theta, s.Lambda, s.Ftilde, status.c_str());
  return buf;
}

// Tuning knobs for the sampling backends and scan grids.
struct ScanOptions {
  // MasterEq backend: Fock-cutoff doubling search.
  int n_c_start = 24;
  double tail_tol = 1e-8;
  int n_c_max = 512;
  // Ensemble backend.
  int n_traj = 32;
  double t_burn = 200.0;
  double t_max = 1200.0;
  std::uint64_t seed = 1;
  // Collapse grid resolution.
  int collapse_n_eta = 3;
  int collapse_n_dg = 10;
  // Worker threads for per-sample tasks (1 = serial).
  int threads = 1;
};

namespace scdetail {

// Run fn(i) for i in [0, n); exceptions must be handled inside fn.
template <typename Fn>
inline void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int nw = std::min<std::size_t>(std::max(threads, 1), n);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        fn(i);
    });
  for (auto& t : pool) t.join();
}

inline std::vector<double> geomspace(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw InvalidParams("geometric grid needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

}  // namespace scdetail

// Order parameter <x^2> of the (-) branch at the given parameters through
// the chosen backend.  sample_index decorrelates ensemble seeds across a
// scan.
inline double order_parameter_dx2(const ModelParams& p, ScalingBackend backend,
                                  const ScanOptions& opts = {},
                                  std::size_t sample_index = 0) {
  switch (backend) {
    case ScalingBackend::Quadrature:
      return moments_quadrature(p, {{0, 2}}, Branch::Minus,
                                PotentialForm::Exact)[0];
    case ScalingBackend::MasterEq: {
      auto solve = [&](int n_c) {
        return steady_state_branch(p, Branch::Minus, n_c);
      };
      const int n_c =
          cutoff_select(solve, opts.n_c_start, opts.tail_tol, opts.n_c_max);
      return observables(solve(n_c)).x2;
    }
    default: {
      const double dt = default_timestep(p);
      return simulate_ensemble(p, Branch::Minus, opts.n_traj, dt, opts.t_burn,
                               opts.t_max, opts.seed + sample_index)
          .x2.value;
    }
  }
}

// Builds a sample at params p (p.g is the actual coupling) and fills the
// collapse variables from landau_C at the critical coupling.  dx2 may be
// NaN for failed samples; the derived geometry is still well defined.
inline ScalingSample make_scaling_sample(const ModelParams& p, double dx2,
                                         ScalingBackend backend) {
  ScalingSample s;
  s.eta = p.eta;
  s.g = p.g;
  s.gamma2 = p.gamma2;
  s.dx2 = dx2;
  s.backend = backend;
  const double gc = critical_coupling_gc(p);
  const auto c = landau_C(p.with_g(gc));
  if (!(c.C6 > 0.0))
    throw InvalidParams("collapse variables need C6 > 0 at g = g_c");
  s.L = 1.0 / std::sqrt(c.C6);
  const double l23 = std::pow(s.L, 2.0 / 3.0);
  s.Theta = std::abs(p.g - gc) * l23;
  s.Lambda = c.C4 * l23 * l23;  // C4 L^{4/3}
  s.Ftilde = dx2 / l23;
  return s;
}

// Delta x^2(eta) at the critical coupling; the log-log slope over eta is the
// finite-frequency exponent zeta (1/2 on the second-order line, 2/3 at the
// tricritical point).  The eta list must span at least a factor of 5; a full
// decade or more is recommended where the backend can afford it (narrow
// spans inflate the fit's sensitivity to finite-eta corrections).
inline std::vector<ScalingSample> finite_size_scan(
    const ModelParams& base, const std::vector<double>& eta_list,
    ScalingBackend backend, const ScanOptions& opts = {}) {
  if (eta_list.size() < 2)
    throw InvalidParams("finite-size scan needs at least two eta values");
  const auto [lo, hi] = std::minmax_element(eta_list.begin(), eta_list.end());
  if (!(*lo > 0.0) || *hi / *lo < 5.0 * (1.0 - 1e-12))
    throw InvalidParams(
        "eta list must be positive and span >= a factor of 5");

  const double gc = critical_coupling_gc(base);
  std::vector<ScalingSample> out(eta_list.size());
  scdetail::parallel_for(eta_list.size(), opts.threads, [&](std::size_t i) {
    const ModelParams p = base.with_eta(eta_list[i]).with_g(gc);
    try {
      out[i] = make_scaling_sample(
          p, order_parameter_dx2(p, backend, opts, i), backend);
    } catch (const std::exception& e) {
      out[i] = make_scaling_sample(
          p, std::numeric_limits<double>::quiet_NaN(), backend);
      out[i].failed = true;
      out[i].error = e.what();
    }
  });
  return out;
}

// Ordinary least squares of log(y) on log(x).  Failed samples are skipped;
// non-positive or non-finite coordinates are rejected.
enum class ScalingField { Eta, GMinusGc, Theta, Lambda, Dx2, Ftilde };

inline double scaling_field(const ScalingSample& s, ScalingField f) {
  switch (f) {
    case ScalingField::Eta: return s.eta;
    case ScalingField::GMinusGc:
      return s.Theta * std::pow(s.L, -2.0 / 3.0);
    case ScalingField::Theta: return s.Theta;
    case ScalingField::Lambda: return s.Lambda;
    case ScalingField::Dx2: return s.dx2;
    default: return s.Ftilde;
  }
}

inline ScalingReport fit_exponent(const std::vector<ScalingSample>& samples,
                                  ScalingField x_field,
                                  ScalingField y_field) {
  std::vector<double> lx, ly;
  ScalingReport rep;
  for (const auto& s : samples) {
    if (s.failed) continue;
    const double x = scaling_field(s, x_field);
    const double y = scaling_field(s, y_field);
    if (!std::isfinite(x) || !std::isfinite(y) || x <= 0.0 || y <= 0.0)
      throw NonPositiveData("log-log fit needs positive finite coordinates");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
    rep.samples.push_back(s);
  }
  const std::size_t n = lx.size();
  if (n < 5)
    throw InsufficientData("log-log fit needs >= 5 usable samples, got " +
                           std::to_string(n));

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += lx[i], my += ly[i];
  mx /= double(n), my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0))
    throw NonPositiveData("log-log fit needs at least two distinct x values");
  rep.exponent = sxy / sxx;
  rep.intercept = my - rep.exponent * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (rep.intercept + rep.exponent * lx[i]);
    ss_res += r * r;
  }
  rep.std_error = std::sqrt(ss_res / double(n - 2) / sxx);
  rep.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  return rep;
}

// Delta x^2 against (g - g_c) above the critical coupling; the report's
// exponent is nu (sign-flipped log-log slope, so nu ~ +1).  The g grid must
// lie above g_c and span at least one decade in g - g_c; two decades are
// recommended whenever the backend can afford them, since the fitted slope
// carries O(span^-1) bias from the ends of the window.
inline ScalingReport critical_exponent_scan(const ModelParams& base,
                                            const std::vector<double>& g_list,
                                            ScalingBackend backend,
                                            const ScanOptions& opts = {}) {
  if (g_list.size() < 5)
    throw InvalidParams("exponent scan needs at least five couplings");
  const double gc = critical_coupling_gc(base);
  std::vector<double> dg(g_list.size());
  for (std::size_t i = 0; i < g_list.size(); ++i) {
    dg[i] = g_list[i] - gc;
    if (!(dg[i] > 0.0))
      throw InvalidParams("exponent scan needs every g above g_c");
  }
  const auto [lo, hi] = std::minmax_element(dg.begin(), dg.end());
  if (*hi / *lo < 10.0 * (1.0 - 1e-12))
    throw InvalidParams("g - g_c must span >= one decade");

  std::vector<ScalingSample> samples(g_list.size());
  scdetail::parallel_for(g_list.size(), opts.threads, [&](std::size_t i) {
    const ModelParams p = base.with_g(g_list[i]);
    try {
      samples[i] = make_scaling_sample(
          p, order_parameter_dx2(p, backend, opts, i), backend);
    } catch (const std::exception& e) {
      samples[i] = make_scaling_sample(
          p, std::numeric_limits<double>::quiet_NaN(), backend);
      samples[i].failed = true;
      samples[i].error = e.what();
    }
  });

  ScalingReport rep =
      fit_exponent(samples, ScalingField::GMinusGc, ScalingField::Dx2);
  rep.exponent = -rep.exponent;  // dx2 ~ (g - g_c)^{-nu}
  return rep;
}

// Lambda as a function of gamma2 at the critical coupling of (base, eta).
inline double lambda_at_gamma2(const ModelParams& base, double eta,
                               double gamma2) {
  ModelParams p = base.with_eta(eta).with_gamma2(gamma2);
  p = p.with_g(critical_coupling_gc(p));
  const auto c = landau_C(p);
  if (!(c.C6 > 0.0))
    throw InvalidParams("Lambda(gamma2) needs C6 > 0");
  return c.C4 * std::pow(c.C6, -2.0 / 3.0);
}

// Solves Lambda(gamma2) = target by geometric bracket growth away from the
// tricritical coupling (the Lambda = 0 point) followed by TOMS 748 root
// refinement.  Lambda rises from 0 to a finite maximum as gamma2 grows and
// is monotone below the tricritical coupling, so the bracket walk takes the
// root nearest to the Lambda = 0 point; targets beyond the maximum raise
// NoBracket on gamma2 in (0, 1e6].
inline double solve_gamma2_for_Lambda(double lambda_target, double eta,
                                      const ModelParams& base) {
  ModelParams at_eta = base.with_eta(eta);
  at_eta = at_eta.with_g(critical_coupling_gc(at_eta));
  const double g2c = landau_tricritical_gamma2(at_eta);
  const double tol = 1e-10 * std::max(1.0, std::abs(lambda_target));

  auto f = [&](double gamma2) {
    return lambda_at_gamma2(base, eta, gamma2) - lambda_target;
  };
  if (std::abs(f(g2c)) <= tol) return g2c;

  const bool up = lambda_target > 0.0;
  const double ratio = 1.3, cap_hi = 1e6, cap_lo = 1e-9;
  double a = g2c, fa = f(a);
  double best_lambda = lambda_at_gamma2(base, eta, a);
  while (true) {
    double b = up ? a * ratio : a / ratio;
    if (up && b > cap_hi) b = cap_hi;
    if (!up && b < cap_lo) b = cap_lo;
    const double fb = f(b);
    if ((fa < 0.0) != (fb < 0.0)) {
      boost::math::tools::eps_tolerance<double> tt(60);
      std::uintmax_t iters = 200;
      auto r = boost::math::tools::toms748_solve(f, std::min(a, b),
                                                 std::max(a, b), tt, iters);
      const double root = 0.5 * (r.first + r.second);
      if (std::abs(f(root)) > tol)
        throw NoBracket("root refinement residual exceeds tolerance");
      return root;
    }
    const double lb = lambda_at_gamma2(base, eta, b);
    if (up && lb < best_lambda && lb < lambda_target)
      throw NoBracket("Lambda target above the reachable maximum");
    best_lambda = std::max(best_lambda, lb);
    if ((up && b >= cap_hi) || (!up && b <= cap_lo))
      throw NoBracket("Lambda target unreachable for gamma2 in (0, 1e6]");
    a = b;
    fa = fb;
  }
}

// Collapse sampling: for every (Lambda, eta) solve gamma2, then sweep
// g = g_c + dg and record (Theta, Lambda, Ftilde).  Within one Lambda the
// dg values are not a shared grid: they are derived from a common
// log-spaced Theta ladder (clipped per eta to keep dg inside dg_range), so
// samples from different eta land at identical Theta and equal-Theta
// comparisons are possible at all.  collapse_n_dg sets the ladder density:
// roughly that many points per eta curve.
inline std::vector<ScalingSample> collapse_dataset(
    const ModelParams& base, const std::vector<double>& lambda_list,
    std::pair<double, double> eta_range, std::pair<double, double> dg_range,
    ScalingBackend backend, const ScanOptions& opts = {}) {
  if (lambda_list.empty())
    throw InvalidParams("collapse needs at least one Lambda target");
  if (!(dg_range.first > 0.0) || !(dg_range.second > dg_range.first))
    throw InvalidParams("collapse needs 0 < dg_lo < dg_hi");
  const auto etas = scdetail::geomspace(eta_range.first, eta_range.second,
                                        opts.collapse_n_eta);
  const double gc = critical_coupling_gc(base);

  struct Task {
    double lambda, eta, dg, gamma2;
  };
  std::vector<Task> tasks;
  for (double lam : lambda_list) {
    std::vector<double> gamma2(etas.size()), l23(etas.size());
    for (std::size_t i = 0; i < etas.size(); ++i) {
      gamma2[i] = solve_gamma2_for_Lambda(lam, etas[i], base);
      ModelParams p = base.with_eta(etas[i]).with_gamma2(gamma2[i]);
      p = p.with_g(gc);
      l23[i] = std::pow(landau_C(p).C6, -1.0 / 3.0);  // L^{2/3}
    }
    const auto [l23_lo, l23_hi] = std::minmax_element(l23.begin(), l23.end());
    const double th_lo = dg_range.first * *l23_lo;
    const double th_hi = dg_range.second * *l23_hi;
    const int n_ladder = std::max(
        2, static_cast<int>(std::lround(opts.collapse_n_dg *
                                        std::log(th_hi / th_lo) /
                                        std::log(dg_range.second /
                                                 dg_range.first))));
    const auto thetas = scdetail::geomspace(th_lo, th_hi, n_ladder);
    for (std::size_t i = 0; i < etas.size(); ++i)
      for (double theta : thetas) {
        const double dg = theta / l23[i];
        if (dg < dg_range.first * (1.0 - 1e-9) ||
            dg > dg_range.second * (1.0 + 1e-9))
          continue;
        tasks.push_back({lam, etas[i], dg, gamma2[i]});
      }
  }

  std::vector<ScalingSample> out(tasks.size());
  scdetail::parallel_for(tasks.size(), opts.threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    const ModelParams p =
        base.with_eta(t.eta).with_gamma2(t.gamma2).with_g(gc + t.dg);
    try {
      out[i] = make_scaling_sample(
          p, order_parameter_dx2(p, backend, opts, i), backend);
    } catch (const std::exception& e) {
      out[i] = make_scaling_sample(
          p, std::numeric_limits<double>::quiet_NaN(), backend);
      out[i].failed = true;
      out[i].error = e.what();
    }
  });
  return out;
}

// Equal-Theta collapse diagnostic.  Samples (all from one Lambda family;
// filter before calling) are grouped into log-spaced Theta bins.  Within a
// bin, samples whose Theta agree to 1e-9 relative form a cluster --
// collapse_dataset aligns its Theta ladder across eta precisely so such
// clusters exist -- and the relative spread (max - min)/mean of Ftilde is
// taken per cluster, which compares different eta at equal Theta without
// picking up the slope of the scaling curve across the bin width.  Returns
// the worst spread and the number of clusters with >= 2 members (0 means
// the eta curves never overlap in Theta).
struct CollapseSpread {
  double max_spread = 0.0;
  int clusters_compared = 0;
};

inline CollapseSpread collapse_bin_spread(
    const std::vector<ScalingSample>& samples, int n_bins = 20) {
  if (n_bins < 1) throw InvalidParams("need at least one Theta bin");
  std::vector<std::pair<double, double>> pts;  // (Theta, Ftilde)
  double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
  for (const auto& s : samples) {
    if (s.failed || !(s.Theta > 0.0) || !std::isfinite(s.Ftilde)) continue;
    pts.emplace_back(s.Theta, s.Ftilde);
    t_min = std::min(t_min, s.Theta);
    t_max = std::max(t_max, s.Theta);
  }
  if (pts.size() < 2 || !(t_max > t_min)) return {};
  const double span = std::log(t_max / t_min);
  std::vector<std::vector<std::pair<double, double>>> bins(n_bins);
  for (const auto& pt : pts) {
    int b = int(std::log(pt.first / t_min) / span * n_bins);
    bins[std::clamp(b, 0, n_bins - 1)].push_back(pt);
  }
  CollapseSpread out;
  for (auto& bin : bins) {
    std::sort(bin.begin(), bin.end());
    for (std::size_t i = 0; i < bin.size();) {
      std::size_t j = i + 1;
      while (j < bin.size() &&
             bin[j].first <= bin[i].first * (1.0 + 1e-9))
        ++j;
      if (j - i >= 2) {
        double lo = bin[i].second, hi = bin[i].second, mean = 0.0;
        for (std::size_t k = i; k < j; ++k) {
          lo = std::min(lo, bin[k].second);
          hi = std::max(hi, bin[k].second);
          mean += bin[k].second;
        }
        mean /= double(j - i);
        out.max_spread = std::max(out.max_spread, (hi - lo) / mean);
        ++out.clusters_compared;
      }
      i = j;
    }
  }
  return out;
}

}  // namespace openrabi
