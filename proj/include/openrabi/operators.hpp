#pragma once

// Truncated-Fock-space operator builders: ladder/position/momentum matrices,
// the full spin-boson Hamiltonian, the adiabatically decoupled branch
// Hamiltonians with the nonlinear potential V_nl(x), the perturbative
// expansion, adiabatic unitaries, and the transformed jump operators.
//
// Conventions.  Spin-boson operators are stored as kron(spin, boson):
// a 2 n_c x 2 n_c matrix whose index is s*n_c + n with s = 0 (spin up,
// sigma_z = +1) or 1 (spin down).  Functions of the quadrature operator
// x = (a + a')/sqrt(2) are built by eigendecomposition of the truncated x,
// which corrupts only a band of edge states; interior-block comparisons use
// a guard band n_guard = max(10, n_c/10).

#include <cmath>
#include <complex>
#include <functional>

#include <Eigen/Dense>

#include "openrabi/core.hpp"
#include "openrabi/errors.hpp"

namespace openrabi {

struct FockOperator {
  int n_c = 0;
  bool spin_boson = false;  // matrix is 2 n_c x 2 n_c when true
  bool hermitian = false;   // builder hint, not re-verified on access
  Eigen::MatrixXcd matrix;
};

enum class UnitaryKind { Exact, Linearized };

struct AdiabaticUnitary {
  UnitaryKind kind = UnitaryKind::Exact;
  FockOperator op;  // spin-boson unitary
};

namespace opdetail {

inline void require_cutoff(int n_c) {
  if (n_c < 2) throw InvalidParams("Fock cutoff must be >= 2");
}

inline Eigen::MatrixXd ladder_real(int n_c) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_c, n_c);
  for (int m = 0; m + 1 < n_c; ++m) a(m, m + 1) = std::sqrt(double(m + 1));
  return a;
}

inline Eigen::MatrixXd position_real(int n_c) {
  const Eigen::MatrixXd a = ladder_real(n_c);
  return (a + a.transpose()) / std::sqrt(2.0);
}

// kron(spin, boson) for a 2x2 complex spin matrix.
inline Eigen::MatrixXcd kron_sb(const Eigen::Matrix2cd& s,
                                const Eigen::MatrixXcd& b) {
  const int n = static_cast<int>(b.rows());
  Eigen::MatrixXcd out(2 * n, 2 * n);
  out.block(0, 0, n, n) = s(0, 0) * b;
  out.block(0, n, n, n) = s(0, 1) * b;
  out.block(n, 0, n, n) = s(1, 0) * b;
  out.block(n, n, n, n) = s(1, 1) * b;
  return out;
}

inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd s;
  s << 1, 0, 0, -1;
  return s;
}
inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd s;
  s << 0, 1, 1, 0;
  return s;
}
inline Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd s;
  s << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
  return s;
}
inline Eigen::Matrix2cd spin_id() { return Eigen::Matrix2cd::Identity(); }

// Eigendecomposition of the truncated position operator, cached per call
// site by value (the eigensolve is cheap relative to everything downstream).
struct XEigen {
  Eigen::VectorXd xs;   // eigenvalues of truncated x
  Eigen::MatrixXd vecs; // orthonormal eigenvectors (columns)
};

inline XEigen x_eigen(int n_c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(position_real(n_c));
  return XEigen{es.eigenvalues(), es.eigenvectors()};
}

// f(x_op) for a scalar function f, exact on the truncated space.
inline Eigen::MatrixXd fn_of_x(const XEigen& xe,
                               const std::function<double(double)>& f) {
  Eigen::VectorXd fx(xe.xs.size());
  for (int i = 0; i < xe.xs.size(); ++i) fx(i) = f(xe.xs(i));
  return xe.vecs * fx.asDiagonal() * xe.vecs.transpose();
}

// Scalar forms used by the branch construction and jump transformation.
inline double v_nl_scalar(double x, const ModelParams& p) {
  return 0.5 * p.omega0 * p.eta *
         std::sqrt(2.0 * p.g * p.g * x * x / p.eta + 1.0);
}

inline double theta_scalar(double x, const ModelParams& p) {
  return std::atan(p.g * x * std::sqrt(2.0 / p.eta));
}

inline double epsilon_scalar(double x, const ModelParams& p) {
  return (1.0 / (2.0 * std::sqrt(2.0))) * p.g * std::sqrt(2.0 / p.eta) /
         (1.0 + 2.0 * p.g * p.g * x * x / p.eta);
}

}  // namespace opdetail

// Guard band for interior-block assertions under truncation.
inline int guard_band(int n_c) { return std::max(10, n_c / 10); }

// Interior block of an operator: Fock indices < n_c - n_guard in every spin
// sector (spin structure is preserved).
inline Eigen::MatrixXcd interior_block(const FockOperator& op, int n_guard) {
  const int k = op.n_c - n_guard;
  if (k <= 0) throw InvalidParams("guard band swallows the whole space");
  if (!op.spin_boson) return op.matrix.topLeftCorner(k, k);
  Eigen::MatrixXcd out(2 * k, 2 * k);
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t)
      out.block(s * k, t * k, k, k) =
          op.matrix.block(s * op.n_c, t * op.n_c, k, k);
  return out;
}

inline FockOperator annihilation(int n_c) {
  opdetail::require_cutoff(n_c);
  FockOperator op;
  op.n_c = n_c;
  op.matrix = opdetail::ladder_real(n_c).cast<std::complex<double>>();
  return op;
}

inline FockOperator position(int n_c) {
  opdetail::require_cutoff(n_c);
  FockOperator op;
  op.n_c = n_c;
  op.hermitian = true;
  op.matrix = opdetail::position_real(n_c).cast<std::complex<double>>();
  return op;
}

inline FockOperator momentum(int n_c) {
  opdetail::require_cutoff(n_c);
  const Eigen::MatrixXd a = opdetail::ladder_real(n_c);
  FockOperator op;
  op.n_c = n_c;
  op.hermitian = true;
  op.matrix = (std::complex<double>(0, 1) / std::sqrt(2.0)) *
              (a.transpose() - a).cast<std::complex<double>>();
  return op;
}

inline FockOperator number_operator(int n_c) {
  opdetail::require_cutoff(n_c);
  FockOperator op;
  op.n_c = n_c;
  op.hermitian = true;
  op.matrix = Eigen::MatrixXcd::Zero(n_c, n_c);
  for (int m = 0; m < n_c; ++m) op.matrix(m, m) = double(m);
  return op;
}

// Full spin-boson Hamiltonian:
// H = (Omega/2) sigma_z + omega0 a'a + (mu/2) omega0 (a^2 + a'^2)
//     + lambda sigma_x (a + a').
inline FockOperator hamiltonian_full(const ModelParams& p, int n_c) {
  opdetail::require_cutoff(n_c);
  const RawRates r = raw_rates(p);
  const Eigen::MatrixXd a = opdetail::ladder_real(n_c);
  const Eigen::MatrixXd n = (a.transpose() * a).eval();
  const Eigen::MatrixXd a2 = (a * a).eval();
  const Eigen::MatrixXd squeeze = a2 + a2.transpose();
  const Eigen::MatrixXd X = a + a.transpose();
  const Eigen::MatrixXcd hb =
      (p.omega0 * n + 0.5 * p.mu * p.omega0 * squeeze)
          .cast<std::complex<double>>();
  const Eigen::MatrixXcd id_b =
      Eigen::MatrixXcd::Identity(n_c, n_c);

  FockOperator op;
  op.n_c = n_c;
  op.spin_boson = true;
  op.hermitian = true;
  op.matrix = opdetail::kron_sb(opdetail::spin_id(), hb) +
              0.5 * r.Omega * opdetail::kron_sb(opdetail::pauli_z(), id_b) +
              r.lambda * opdetail::kron_sb(opdetail::pauli_x(),
                                           X.cast<std::complex<double>>());
  return op;
}

// Nonlinear potential V_nl(x) = (omega0 eta / 2) sqrt(2 g^2 x^2 / eta + 1)
// as an operator, exact on the truncated space.
inline FockOperator nonlinear_potential(const ModelParams& p, int n_c) {
  opdetail::require_cutoff(n_c);
  const auto xe = opdetail::x_eigen(n_c);
  FockOperator op;
  op.n_c = n_c;
  op.hermitian = true;
  op.matrix =
      opdetail::fn_of_x(xe, [&](double x) { return opdetail::v_nl_scalar(x, p); })
          .cast<std::complex<double>>();
  return op;
}

// Branch Hamiltonian H_pm = omega0 a'a + (mu/2) omega0 (a^2+a'^2) +- V_nl(x).
inline FockOperator hamiltonian_branch(const ModelParams& p, Branch b,
                                       int n_c) {
  opdetail::require_cutoff(n_c);
  const Eigen::MatrixXd a = opdetail::ladder_real(n_c);
  const Eigen::MatrixXd n = (a.transpose() * a).eval();
  const Eigen::MatrixXd a2 = (a * a).eval();
  FockOperator op;
  op.n_c = n_c;
  op.hermitian = true;
  op.matrix = (p.omega0 * n +
               0.5 * p.mu * p.omega0 * (a2 + a2.transpose()))
                  .cast<std::complex<double>>() +
              branch_sign(b) * nonlinear_potential(p, n_c).matrix;
  return op;
}

// Perturbative spin-diagonal Hamiltonian (V_nl Taylor-expanded to eta^-2):
// H' = (Omega/2) sigma_z + omega0 a'a + (omega0/2) mu (a^2+a'^2)
//      + (omega0 g^2/4) sigma_z X^2 - (omega0 g^4/16 eta) sigma_z X^4
//      + (omega0 g^6/32 eta^2) sigma_z X^6,   X = a + a'.
inline FockOperator hamiltonian_perturbative(const ModelParams& p, int n_c) {
  opdetail::require_cutoff(n_c);
  const RawRates r = raw_rates(p);
  const Eigen::MatrixXd a = opdetail::ladder_real(n_c);
  const Eigen::MatrixXd n = (a.transpose() * a).eval();
  const Eigen::MatrixXd a2 = (a * a).eval();
  const Eigen::MatrixXd X = a + a.transpose();
  const Eigen::MatrixXd X2 = (X * X).eval();
  const Eigen::MatrixXd X4 = (X2 * X2).eval();
  const Eigen::MatrixXd X6 = (X4 * X2).eval();
  const double g2 = p.g * p.g;
  const Eigen::MatrixXd sz_part = p.omega0 * (g2 / 4.0) * X2 -
                                  p.omega0 * (g2 * g2 / (16.0 * p.eta)) * X4 +
                                  p.omega0 *
                                      (g2 * g2 * g2 / (32.0 * p.eta * p.eta)) *
                                      X6;
  const Eigen::MatrixXd diag_part =
      p.omega0 * n + 0.5 * p.mu * p.omega0 * (a2 + a2.transpose());

  FockOperator op;
  op.n_c = n_c;
  op.spin_boson = true;
  op.hermitian = true;
  op.matrix =
      opdetail::kron_sb(opdetail::spin_id(),
                        diag_part.cast<std::complex<double>>()) +
      opdetail::kron_sb(opdetail::pauli_z(),
                        (sz_part + 0.5 * r.Omega *
                                       Eigen::MatrixXd::Identity(n_c, n_c))
                            .cast<std::complex<double>>());
  return op;
}

// Adiabatic unitary.  Exact kind: U_S = exp(-i sigma_y theta(x)/2) with
// theta(x) = arctan(g x sqrt(2/eta)).  Linearized kind: the exact matrix
// exponential of -i (g/2 sqrt(eta)) (a+a') sigma_y.  Both are assembled via
// the closed form exp(-i A sigma_y) = cos(A) - i sin(A) sigma_y for a
// Hermitian boson operator A (a function of x), which is unitary to
// roundoff by construction.
inline AdiabaticUnitary adiabatic_unitary(const ModelParams& p, int n_c,
                                          UnitaryKind kind) {
  opdetail::require_cutoff(n_c);
  const auto xe = opdetail::x_eigen(n_c);
  // A(x): half rotation angle as a scalar function of x.
  auto A = [&](double x) {
    if (kind == UnitaryKind::Exact) return 0.5 * opdetail::theta_scalar(x, p);
    // (g / 2 sqrt(eta)) * (a + a') = (g / 2 sqrt(eta)) * sqrt(2) * x
    return p.g / (2.0 * std::sqrt(p.eta)) * std::sqrt(2.0) * x;
  };
  const Eigen::MatrixXd cosA =
      opdetail::fn_of_x(xe, [&](double x) { return std::cos(A(x)); });
  const Eigen::MatrixXd sinA =
      opdetail::fn_of_x(xe, [&](double x) { return std::sin(A(x)); });

  AdiabaticUnitary u;
  u.kind = kind;
  u.op.n_c = n_c;
  u.op.spin_boson = true;
  u.op.hermitian = false;
  u.op.matrix =
      opdetail::kron_sb(opdetail::spin_id(),
                        cosA.cast<std::complex<double>>()) -
      std::complex<double>(0, 1) *
          opdetail::kron_sb(opdetail::pauli_y(),
                            sinA.cast<std::complex<double>>());
  return u;
}

// epsilon(x) = (1/2 sqrt(2)) d theta/dx
//            = (1/2 sqrt(2)) g sqrt(2/eta) / (1 + 2 g^2 x^2 / eta).
inline FockOperator epsilon_operator(const ModelParams& p, int n_c) {
  opdetail::require_cutoff(n_c);
  const auto xe = opdetail::x_eigen(n_c);
  FockOperator op;
  op.n_c = n_c;
  op.hermitian = true;
  op.matrix =
      opdetail::fn_of_x(xe,
                        [&](double x) { return opdetail::epsilon_scalar(x, p); })
          .cast<std::complex<double>>();
  return op;
}

// Transformed jump operators in the rotated frame:
//   c1 = a - i epsilon(x) sigma_y
//   c2 = a^2 - i (epsilon(x) a + a epsilon(x)) sigma_y - epsilon(x)^2
// with exactly this operator ordering in the c2 cross term.
inline std::pair<FockOperator, FockOperator> transformed_jumps(
    const ModelParams& p, int n_c) {
  opdetail::require_cutoff(n_c);
  const Eigen::MatrixXcd a =
      opdetail::ladder_real(n_c).cast<std::complex<double>>();
  const Eigen::MatrixXcd eps = epsilon_operator(p, n_c).matrix;
  const std::complex<double> I(0, 1);

  FockOperator c1;
  c1.n_c = n_c;
  c1.spin_boson = true;
  c1.matrix = opdetail::kron_sb(opdetail::spin_id(), a) -
              I * opdetail::kron_sb(opdetail::pauli_y(), eps);

  FockOperator c2;
  c2.n_c = n_c;
  c2.spin_boson = true;
  c2.matrix = opdetail::kron_sb(opdetail::spin_id(), (a * a).eval()) -
              I * opdetail::kron_sb(opdetail::pauli_y(),
                                    (eps * a + a * eps).eval()) -
              opdetail::kron_sb(opdetail::spin_id(), (eps * eps).eval());
  return {std::move(c1), std::move(c2)};
}

}  // namespace openrabi
