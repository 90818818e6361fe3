#ifndef GHLAB_SPECTRAL_HPP
#define GHLAB_SPECTRAL_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "numeric.hpp"

namespace ghlab::spectral {

/// Group backends for the compact factor G. Haar mass is normalized to 1 on
/// each. Tori carry the frequency picture T^m = [0,2pi)^m with measure
/// dt/(2pi)^m, so e^{i xi.x} has Laplace eigenvalue |xi|^2 with integer xi.
///
/// SU(2) convention: orthonormal basis X1, X2, X3 of su(2) with cyclic
/// brackets [X1,X2]=X3, [X2,X3]=X1, [X3,X1]=X2. On the spin-j representation
/// (J3 = diag(m), m = -j..j ascending, standard ladder matrices) this is
/// realized by X1 = -i*J1, X2 = +i*J2, X3 = +i*J3, so X3 = diag(i*m). The
/// shell at lambda = j(j+1) is spanned by the sqrt(2j+1)-scaled matrix
/// coefficients, indexed (row, col) in 1..2j+1; left-invariant fields act on
/// the column index, i.e. as I_{2j+1} (x) dpi(X).
struct GroupSpec {
  enum class Kind { Torus, SU2 };
  Kind kind = Kind::Torus;
  int dim = 1;  // m

  static GroupSpec torus(int m) {
    if (m < 1) throw std::invalid_argument("GroupSpec: torus dimension must be >= 1");
    return GroupSpec{Kind::Torus, m};
  }
  static GroupSpec su2() { return GroupSpec{Kind::SU2, 3}; }

  bool is_torus() const { return kind == Kind::Torus; }
  bool operator==(const GroupSpec& o) const { return kind == o.kind && dim == o.dim; }
  std::string str() const;
};

/// One Laplacian eigenfunction label.
struct Mode {
  enum class Kind { TorusFreq, Su2 };
  Kind kind = Kind::TorusFreq;
  std::vector<BigInt> freq;        // torus: xi in Z^m
  int twoj = 0, row = 0, col = 0;  // su2: 2j, row/col in 1..2j+1

  static Mode torus_freq(std::vector<BigInt> xi);
  static Mode torus_freq_i(const std::vector<long>& xi);
  static Mode su2(int twoj, int row, int col);

  Rational eigenvalue() const;
  bool operator<(const Mode& o) const;
  bool operator==(const Mode& o) const;
  std::string str() const;
};

/// Full eigenspace at one eigenvalue, with its deterministic mode order.
struct Shell {
  Rational lambda;
  std::vector<Mode> modes;
  int dim() const { return static_cast<int>(modes.size()); }
};

/// All shells with lambda <= lambda_max, ascending, no gaps.
std::vector<Shell> enumerate_shells(const GroupSpec& g, const Rational& lambda_max);

/// dpi(X) on the spin-j representation for X with coordinates c (X = sum c_a X_a),
/// a (2j+1) x (2j+1) anti-Hermitian matrix acting on the column index.
Eigen::MatrixXcd su2_generator_block(int twoj, const Eigen::Vector3d& coords);

/// Dense action of the left-invariant field with coordinates c on a shell
/// (d_lambda x d_lambda). Torus: diag(i c.xi). SU2: I (x) dpi(X).
Eigen::MatrixXcd field_action(const GroupSpec& g, const std::vector<double>& coords,
                              const Shell& shell);

/// Exact torus symbol c.xi for one mode (the field action multiplier is i times this).
ExactScalar torus_symbol(const std::vector<ExactScalar>& coords, const Mode& mode);

/// || sum_j field_action(X_j)^2 + lambda I || over the shell (Frobenius norm).
/// Exactly zero on tori; small floating residual on SU(2).
double casimir_residual(const GroupSpec& g, const Shell& shell);

/// Operator norm of field_action for a coordinate vector (largest singular value).
double field_action_norm(const GroupSpec& g, const std::vector<double>& coords,
                         const Shell& shell);

/// Partial sums of sum_{0 < lambda <= lambda_max} d_lambda * lambda^{-2m}.
std::vector<double> weyl_partial_sums(const GroupSpec& g, const Rational& lambda_max);

}  // namespace ghlab::spectral

#endif
