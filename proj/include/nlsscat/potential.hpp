#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace nlsscat {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

/// One-soliton initial profile
///   u0(x) = -2c e^{-2ax} / (1 + c^2/(4p^2) e^{-4px}).
/// With a == p the left Marchenko kernel is c e^{-a alpha}.
struct SolitonParams {
  double c = 2.0;
  double a = 1.0;
  double p = 1.0;

  void validate() const;
};

double eval_soliton(const SolitonParams& params, double x);

enum class LyapunovSide {
  Left,   ///< X A + A^* X = rhs
  Right,  ///< A X + X A^* = rhs
};

/// Dense Lyapunov solve by Bartels-Stewart on the complex Schur form of A.
/// Every eigenvalue of A must have a strictly positive real part; the
/// residual is verified against 1e-12 * ||rhs||.
CMatrix solve_lyapunov(const CMatrix& A, const CMatrix& rhs, LyapunovSide side);

/// Multisoliton data (A, b, c) together with the cached Lyapunov solutions
///   Q A + A^* Q = c^* c,   A N + N A^* = b b^*.
class MultisolitonParams {
 public:
  MultisolitonParams(CMatrix A, CVector b, CRowVector c);

  /// Four interacting solitons: A = diag(1,2,3,4), b = (1,2,-2,-1)^T,
  /// c = (2,1,1,2). Marchenko kernel sum_j b_j c_j e^{-j alpha}.
  static MultisolitonParams four_soliton();

  const CMatrix& A() const { return A_; }
  const CVector& b() const { return b_; }
  const CRowVector& c() const { return c_; }
  const CMatrix& Q() const { return Q_; }
  const CMatrix& N() const { return N_; }
  bool diagonal() const { return diagonal_; }

  /// e^{tA}, exact for diagonal A, Pade scaling-and-squaring otherwise.
  CMatrix exp(double t) const;

 private:
  CMatrix A_;
  CVector b_;
  CRowVector c_;
  CMatrix Q_;
  CMatrix N_;
  CMatrix Qinv_;
  bool diagonal_ = false;

  friend std::complex<double> eval_multisoliton_complex(const MultisolitonParams&, double);
};

/// Complex value of the multisoliton formula
///   -2 b^* [e^{2xA^*} + Q e^{-2xA} N]^{-1} c^*,
/// evaluated for x >= 0 as -2 b^* (I + G^* Q G N)^{-1} G^* c^*, G = e^{-2xA},
/// and for x < 0 as -2 b^* (N + F Q^{-1} F^*)^{-1} F Q^{-1} c^*, F = e^{2xA},
/// so no exponential ever grows.
std::complex<double> eval_multisoliton_complex(const MultisolitonParams& params, double x);

/// Real part of eval_multisoliton_complex.
double eval_multisoliton(const MultisolitonParams& params, double x);

/// Left Marchenko kernel c e^{-alpha A} b of a multisoliton.
double multisoliton_kernel(const MultisolitonParams& params, double alpha);

/// Tabulated potential, linearly interpolated between abscissas.
struct TablePotential {
  std::vector<double> x;
  std::vector<double> u;

  /// Two-column text (x u per line, '#' comments) or, for a .json
  /// extension, an array of [x, u] pairs.
  static TablePotential load(const std::filesystem::path& path);

  double eval(double at) const;
  double min_x() const { return x.front(); }
  double max_x() const { return x.back(); }
};

struct ZeroPotential {};

using PotentialModel = std::variant<ZeroPotential, SolitonParams, MultisolitonParams, TablePotential>;

double evaluate(const PotentialModel& model, double x);

/// Real samples u_i = u0(x_i), x_i = i L / nx, i = -nx..nx.
struct PotentialGrid {
  double L = 0.0;
  int nx = 0;
  std::vector<double> samples;
  /// max(|u0(-L)|, |u0(L)|)
  double truncation = 0.0;
  std::vector<std::string> warnings;

  double h() const { return L / nx; }
  double x(int i) const { return L * i / nx; }
  /// u at index i, zero outside [-nx, nx].
  double operator[](int i) const {
    return (i < -nx || i > nx) ? 0.0 : samples[static_cast<std::size_t>(i + nx)];
  }
  /// v(x) = u(-x) on the same grid.
  PotentialGrid mirrored() const;
  void validate() const;
};

/// Grid from raw samples (size 2 nx + 1).
PotentialGrid make_grid(double L, std::vector<double> samples, double truncation_tol = 1e-12);

/// Sample a model on [-L, L]. Tables must cover [-L, L].
PotentialGrid tabulate(const PotentialModel& model, double L, int nx, double truncation_tol = 1e-12);

/// Write a grid in the two-column text format read by TablePotential::load.
void write_table(const PotentialGrid& grid, std::ostream& os);

}  // namespace nlsscat
