#pragma once

// Liouvillian assembly and steady-state solution for the damped model.
//
// The master equation is d(rho)/dt = -i[H, rho] + sum_k r_k D[c_k](rho) with
// D[c](rho) = c rho c^dag - (1/2){c^dag c, rho}.  The one- and two-photon
// channels enter with c = a at rate 2*kappa1 and c = a^2 at rate 2*kappa2.
// Steady states are null vectors of the vectorized generator (column
// stacking).  Small problems use a dense solve of the trace-constrained
// system; large ones first try shifted inverse iteration with an
// incomplete-LU-preconditioned Krylov solver (a full sparse factorization
// fills in badly on these wide-banded generators) and fall back to a direct
// sparse solve if that fails to converge.  Every result is verified against
// the master equation itself before it is returned.

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "openrabi/core.hpp"
#include "openrabi/errors.hpp"
#include "openrabi/operators.hpp"

namespace openrabi {

struct JumpOperator {
  Eigen::MatrixXcd op;
  double rate = 0.0;  // multiplies D[op]; must be >= 0
};

struct SteadySolveOptions {
  // Auto: dense for dimension <= 32, otherwise iterative with a direct
  // sparse fallback.  Sparse forces the direct sparse solve;
  // SparseIterative forces the iterative path (throws if it stalls).
  enum class Method { Auto, Dense, Sparse, SparseIterative };
  Method method = Method::Auto;
  // Hard failure threshold on the cleaned-up residual, relative to the
  // generator scale.  The achieved residual is typically far below this.
  double residual_error = 1e-6;
};

struct SteadyStateResult {
  Eigen::MatrixXcd rho;   // Hermitian, unit trace
  int n_c = 0;            // boson cutoff of the underlying space
  bool spin_boson = false;
  double residual = 0.0;  // max-abs of d(rho)/dt evaluated on rho
  double scale = 1.0;     // generator magnitude the residual is judged against
};

struct Moments {
  double n = 0.0;   // <a^dag a>
  double x2 = 0.0;  // <x^2>
  double p2 = 0.0;  // <p^2>
  double xp_sym = 0.0;  // <xp + px>/2
  std::complex<double> a_mean{0.0, 0.0};  // <a>
  std::optional<double> sz;  // <sigma_z>, present for spin-boson states
};

namespace lbdetail {

using SpMat = Eigen::SparseMatrix<std::complex<double>>;
using Triplet = Eigen::Triplet<std::complex<double>>;

inline SpMat to_sparse(const Eigen::MatrixXcd& m, double prune_rel = 1e-14) {
  const double cut = prune_rel * std::max(1e-300, m.cwiseAbs().maxCoeff());
  std::vector<Triplet> trips;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > cut) trips.emplace_back(i, j, m(i, j));
  SpMat s(m.rows(), m.cols());
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

inline SpMat kron(const SpMat& A, const SpMat& B) {
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(A.nonZeros()) * B.nonZeros());
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(A, ka); ia; ++ia)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(B, kb); ib; ++ib)
          trips.emplace_back(ia.row() * B.rows() + ib.row(),
                             ia.col() * B.cols() + ib.col(),
                             ia.value() * ib.value());
  SpMat out(A.rows() * B.rows(), A.cols() * B.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

inline SpMat identity(Eigen::Index d) {
  SpMat id(d, d);
  id.setIdentity();
  return id;
}

// Unit-norm kernel vector of L by inverse power iteration on L - shift*I,
// each inner solve done with BiCGSTAB preconditioned by an incomplete LU.
// Starts from the vectorized maximally mixed state, whose overlap with the
// steady state cannot vanish.  Returns nothing if the preconditioner cannot
// be built or the iterates stop improving before they settle (e.g. when a
// slow decay mode sits too close to the kernel for the shift to separate).
inline std::optional<Eigen::VectorXcd> kernel_vector_iterative(
    const SpMat& L, Eigen::Index dim, double shift) {
  SpMat A = (L - std::complex<double>(shift, 0.0) * identity(L.rows())).eval();
  A.makeCompressed();

  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<std::complex<double>>> krylov;
  krylov.preconditioner().setDroptol(1e-6);
  krylov.preconditioner().setFillfactor(20);
  krylov.setTolerance(1e-12);
  krylov.setMaxIterations(2000);
  krylov.compute(A);
  if (krylov.info() != Eigen::Success) return std::nullopt;

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(L.rows());
  for (Eigen::Index i = 0; i < dim; ++i) v(i * dim + i) = 1.0;
  v /= v.norm();

  double step = 1.0;
  for (int it = 0; it < 6 && step > 1e-13; ++it) {
    Eigen::VectorXcd w = krylov.solveWithGuess(v, v).eval();
    if (!w.allFinite()) return std::nullopt;
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) return std::nullopt;
    w /= norm;
    const std::complex<double> overlap = v.dot(w);
    if (std::abs(overlap) > 0.0) w *= std::conj(overlap) / std::abs(overlap);
    step = (w - v).norm();
    v.swap(w);
  }
  if (step > 1e-10) return std::nullopt;
  return v;
}

}  // namespace lbdetail

// Right-hand side of the master equation evaluated on a given density matrix.
inline Eigen::MatrixXcd master_rhs(const Eigen::MatrixXcd& H,
                                   const std::vector<JumpOperator>& jumps,
                                   const Eigen::MatrixXcd& rho) {
  const std::complex<double> im(0.0, 1.0);
  Eigen::MatrixXcd out = -im * (H * rho - rho * H);
  for (const auto& j : jumps) {
    if (j.rate == 0.0) continue;
    const Eigen::MatrixXcd cdc = j.op.adjoint() * j.op;
    out += j.rate * (j.op * rho * j.op.adjoint() -
                     0.5 * (cdc * rho + rho * cdc));
  }
  return out;
}

// Vectorized generator in column-stacking convention:
//   L = -i(I (x) H - H^T (x) I)
//     + sum_k r_k [conj(c) (x) c - (1/2) I (x) c^dag c
//                  - (1/2)(c^dag c)^T (x) I].
inline lbdetail::SpMat build_liouvillian(const Eigen::MatrixXcd& H,
                                         const std::vector<JumpOperator>& jumps) {
  using namespace lbdetail;
  if (H.rows() != H.cols()) throw ShapeMismatch("Hamiltonian must be square");
  const Eigen::Index d = H.rows();
  const std::complex<double> im(0.0, 1.0);

  const SpMat Hs = to_sparse(H);
  const SpMat id = identity(d);
  SpMat L = (-im * (kron(id, Hs) - kron(SpMat(Hs.transpose()), id))).eval();
  for (const auto& j : jumps) {
    if (j.rate < 0.0) throw InvalidParams("jump rate must be non-negative");
    if (j.rate == 0.0) continue;
    if (j.op.rows() != d || j.op.cols() != d)
      throw ShapeMismatch("jump operator shape does not match Hamiltonian");
    const SpMat c = to_sparse(j.op);
    const SpMat cdc = (SpMat(c.adjoint()) * c).pruned();
    L += j.rate * (kron(SpMat(c.conjugate()), c) - 0.5 * kron(id, cdc) -
                   0.5 * kron(SpMat(cdc.transpose()), id));
  }
  L.makeCompressed();
  return L;
}

// Solve L vec(rho) = 0 with tr(rho) = 1, then clean up (Hermitize,
// renormalize) and verify the master-equation residual.  See method notes
// in SteadySolveOptions for how the null vector is obtained.
inline SteadyStateResult steady_state(
    const Eigen::MatrixXcd& H, const std::vector<JumpOperator>& jumps,
    const SteadySolveOptions& opts = SteadySolveOptions{}) {
  using namespace lbdetail;
  const Eigen::Index d = H.rows();
  if (d == 0 || H.rows() != H.cols())
    throw ShapeMismatch("Hamiltonian must be square and non-empty");

  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  for (const auto& j : jumps) {
    if (j.rate == 0.0) continue;
    scale += j.rate * (j.op.adjoint() * j.op).cwiseAbs().maxCoeff();
  }

  SpMat L = build_liouvillian(H, jumps);

  const bool use_dense =
      opts.method == SteadySolveOptions::Method::Dense ||
      (opts.method == SteadySolveOptions::Method::Auto && d <= 32);
  const bool try_iterative =
      opts.method == SteadySolveOptions::Method::SparseIterative ||
      (opts.method == SteadySolveOptions::Method::Auto && !use_dense);

  if (try_iterative) {
    const auto vk = kernel_vector_iterative(L, d, 1e-8 * scale);
    if (vk) {
      SteadyStateResult res;
      res.rho = Eigen::Map<const Eigen::MatrixXcd>(vk->data(), d, d);
      res.rho = 0.5 * (res.rho + res.rho.adjoint()).eval();
      const double tr = res.rho.trace().real();
      // A unit-norm positive matrix has trace >= 1, so a small trace means
      // the iteration drifted into a traceless kernel direction.
      if (std::abs(tr) > 0.1) {
        res.rho /= tr;
        res.scale = scale;
        res.residual = master_rhs(H, jumps, res.rho).cwiseAbs().maxCoeff();
        if (res.residual <= opts.residual_error * scale) return res;
      }
    }
    if (opts.method == SteadySolveOptions::Method::SparseIterative)
      throw SingularSystem("iterative steady-state solve did not converge");
  }

  // Replace the first row with the trace functional.
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(L.nonZeros()) + d);
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMat::InnerIterator it(L, k); it; ++it)
      if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < d; ++i)
    trips.emplace_back(0, i * d + i, std::complex<double>(1.0, 0.0));
  SpMat A(d * d, d * d);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(d * d);
  b(0) = 1.0;

  Eigen::VectorXcd v;
  if (use_dense) {
    const Eigen::MatrixXcd Ad(A);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Ad);
    v = lu.solve(b);
  } else {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      throw SingularSystem("sparse factorization of the generator failed");
    v = lu.solve(b);
    if (lu.info() != Eigen::Success)
      throw SingularSystem("sparse solve of the generator failed");
  }
  if (!v.allFinite())
    throw SingularSystem("steady-state solve produced non-finite entries");

  SteadyStateResult res;
  res.rho = Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
  res.rho = 0.5 * (res.rho + res.rho.adjoint()).eval();
  const double tr = res.rho.trace().real();
  if (std::abs(tr) < 1e-12)
    throw SingularSystem("steady-state solve returned zero trace");
  res.rho /= tr;
  res.scale = scale;
  res.residual = master_rhs(H, jumps, res.rho).cwiseAbs().maxCoeff();
  if (res.residual > opts.residual_error * scale)
    throw ResidualTooLarge("steady-state residual " +
                           std::to_string(res.residual) + " exceeds " +
                           std::to_string(opts.residual_error * scale));
  return res;
}

// Spin-traced boson density matrix of a spin-boson state.
inline Eigen::MatrixXcd partial_trace_spin(const Eigen::MatrixXcd& rho_sb) {
  if (rho_sb.rows() != rho_sb.cols() || rho_sb.rows() % 2 != 0)
    throw ShapeMismatch("spin-boson density matrix must be square with even "
                        "dimension");
  const Eigen::Index n = rho_sb.rows() / 2;
  return rho_sb.topLeftCorner(n, n) + rho_sb.bottomRightCorner(n, n);
}

// Quadrature moments of a boson-only density matrix.
inline Moments boson_moments(const Eigen::MatrixXcd& rho_b) {
  const int n_c = static_cast<int>(rho_b.rows());
  const Eigen::MatrixXcd a = annihilation(n_c).matrix;
  const Eigen::MatrixXcd x = position(n_c).matrix;
  const Eigen::MatrixXcd p = momentum(n_c).matrix;

  Moments m;
  m.n = (rho_b * (a.adjoint() * a)).trace().real();
  m.a_mean = (rho_b * a).trace();
  m.x2 = (rho_b * (x * x)).trace().real();
  m.p2 = (rho_b * (p * p)).trace().real();
  m.xp_sym = 0.5 * (rho_b * (x * p + p * x)).trace().real();
  return m;
}

inline Moments observables(const SteadyStateResult& s) {
  Moments m =
      boson_moments(s.spin_boson ? partial_trace_spin(s.rho) : s.rho);
  if (s.spin_boson) {
    const Eigen::MatrixXcd sz = opdetail::kron_sb(
        opdetail::pauli_z(), Eigen::MatrixXcd::Identity(s.n_c, s.n_c));
    m.sz = (s.rho * sz).trace().real();
  }
  return m;
}

// Population in the guard band (highest Fock levels, all spin sectors).
inline double tail_occupation(const SteadyStateResult& s) {
  const int n_c = s.n_c;
  const int guard = guard_band(n_c);
  const int sectors = s.spin_boson ? 2 : 1;
  double tail = 0.0;
  for (int sec = 0; sec < sectors; ++sec)
    for (int m = n_c - guard; m < n_c; ++m)
      tail += s.rho(sec * n_c + m, sec * n_c + m).real();
  return tail;
}

// Double the cutoff until the guard-band population drops below tail_tol.
template <typename SolveFn>
inline int cutoff_select(SolveFn&& solve_at, int n_start = 32,
                         double tail_tol = 1e-10, int n_max = 4096) {
  if (n_start < 4) throw InvalidParams("cutoff search must start at >= 4");
  for (int n_c = n_start; n_c <= n_max; n_c *= 2) {
    const SteadyStateResult res = solve_at(n_c);
    if (tail_occupation(res) < tail_tol) return n_c;
  }
  throw CutoffLimit("no converged cutoff found up to n_c = " +
                    std::to_string(n_max));
}

// Steady state of a single adiabatic branch: branch Hamiltonian plus the
// bare one- and two-photon channels at rates 2*kappa1 and 2*kappa2.
inline SteadyStateResult steady_state_branch(
    const ModelParams& p, Branch branch, int n_c,
    const SteadySolveOptions& opts = SteadySolveOptions{}) {
  const RawRates r = raw_rates(p);
  const Eigen::MatrixXcd a = annihilation(n_c).matrix;
  std::vector<JumpOperator> jumps;
  if (r.kappa1 > 0.0) jumps.push_back({a, 2.0 * r.kappa1});
  if (r.kappa2 > 0.0) jumps.push_back({(a * a).eval(), 2.0 * r.kappa2});
  SteadyStateResult res =
      steady_state(hamiltonian_branch(p, branch, n_c).matrix, jumps, opts);
  res.n_c = n_c;
  res.spin_boson = false;
  return res;
}

// Steady state of the full spin-boson model with photon-only dissipation.
inline SteadyStateResult steady_state_full(
    const ModelParams& p, int n_c,
    const SteadySolveOptions& opts = SteadySolveOptions{}) {
  const RawRates r = raw_rates(p);
  const Eigen::MatrixXcd a = annihilation(n_c).matrix;
  const Eigen::Matrix2cd id2 = Eigen::Matrix2cd::Identity();
  std::vector<JumpOperator> jumps;
  if (r.kappa1 > 0.0)
    jumps.push_back({opdetail::kron_sb(id2, a), 2.0 * r.kappa1});
  if (r.kappa2 > 0.0)
    jumps.push_back({opdetail::kron_sb(id2, (a * a).eval()), 2.0 * r.kappa2});
  SteadyStateResult res =
      steady_state(hamiltonian_full(p, n_c).matrix, jumps, opts);
  res.n_c = n_c;
  res.spin_boson = true;
  return res;
}

// Wigner function of a boson density matrix on a rectangular grid, via the
// displaced-parity expansion.  W(i, j) corresponds to (xs[i], ps[j]).
//
// For each Fock-space diagonal d the coefficient sequence B_m(r) with
// r = 4|alpha|^2, alpha = (x + i p)/sqrt(2) starts from
//   B_0 = exp(-r/2) r^(d/2) / sqrt(d!)
// and follows the three-term recurrence
//   B_{m+1} = [(2m + d + 1 - r) B_m - sqrt(m(m+d)) B_{m-1}]
//             / sqrt((m+1)(m+1+d)).
inline Eigen::MatrixXd wigner_numeric(const Eigen::MatrixXcd& rho,
                                      const Eigen::VectorXd& xs,
                                      const Eigen::VectorXd& ps,
                                      double boundary_rel = 1e-6) {
  if (rho.rows() != rho.cols())
    throw ShapeMismatch("density matrix must be square");
  if (xs.size() < 2 || ps.size() < 2)
    throw InvalidParams("Wigner grid needs at least two points per axis");
  const int n_c = static_cast<int>(rho.rows());

  // Largest band magnitudes let us skip negligible diagonals.
  std::vector<double> band_max(n_c, 0.0);
  for (int dgl = 0; dgl < n_c; ++dgl)
    for (int m = 0; m + dgl < n_c; ++m)
      band_max[dgl] = std::max(band_max[dgl], std::abs(rho(m, m + dgl)));

  Eigen::MatrixXd W(xs.size(), ps.size());
  for (Eigen::Index ix = 0; ix < xs.size(); ++ix) {
    for (Eigen::Index ip = 0; ip < ps.size(); ++ip) {
      const double x = xs(ix), p = ps(ip);
      const double r = 2.0 * (x * x + p * p);  // 4|alpha|^2
      const double phi = std::atan2(p, x);
      double sum = 0.0;
      for (int dgl = 0; dgl < n_c; ++dgl) {
        if (band_max[dgl] < 1e-18) continue;
        // Extended precision: the upward recurrence amplifies the roundoff
        // of the exponentially small seed when r is large (far grid points).
        const long double rl = r;
        long double b_prev = 0.0L;
        long double b = (r == 0.0)
                            ? (dgl == 0 ? 1.0L : 0.0L)
                            : expl(-0.5L * rl + 0.5L * dgl * logl(rl) -
                                   0.5L * lgammal(dgl + 1.0L));
        const std::complex<double> phase =
            std::exp(std::complex<double>(0.0, dgl * phi));
        double sign = 1.0;
        for (int m = 0; m + dgl < n_c; ++m) {
          const double term =
              dgl == 0 ? rho(m, m).real()
                       : 2.0 * (rho(m, m + dgl) * phase).real();
          sum += sign * static_cast<double>(b) * term;
          const long double b_next =
              ((2.0L * m + dgl + 1.0L - rl) * b -
               sqrtl(static_cast<long double>(m) * (m + dgl)) * b_prev) /
              sqrtl(static_cast<long double>(m + 1) * (m + 1 + dgl));
          b_prev = b;
          b = b_next;
          sign = -sign;
        }
      }
      W(ix, ip) = sum / M_PI;
    }
  }

  // The grid must comfortably contain the state.
  const double w_max = W.cwiseAbs().maxCoeff();
  double edge = 0.0;
  for (Eigen::Index ip = 0; ip < ps.size(); ++ip) {
    edge = std::max(edge, std::abs(W(0, ip)));
    edge = std::max(edge, std::abs(W(xs.size() - 1, ip)));
  }
  for (Eigen::Index ix = 0; ix < xs.size(); ++ix) {
    edge = std::max(edge, std::abs(W(ix, 0)));
    edge = std::max(edge, std::abs(W(ix, ps.size() - 1)));
  }
  if (w_max > 0.0 && edge > boundary_rel * w_max)
    throw GridTooNarrow("Wigner grid boundary carries " +
                        std::to_string(edge / w_max) +
                        " of the peak magnitude");
  return W;
}

}  // namespace openrabi
