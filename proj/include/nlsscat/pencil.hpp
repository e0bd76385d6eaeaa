#pragma once

#include <complex>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nlsscat {

using cplx = std::complex<double>;

/// Equispaced samples s_k = S(alpha0 + k delta), k = 0..2N-1.
struct SampleSeries {
  std::vector<cplx> values;
  double delta = 1.0;
  double alpha0 = 0.0;

  void validate() const;
};

/// Every stride-th value of real data, truncated to `count` samples.
SampleSeries decimate(const std::vector<double>& data, double spacing, std::size_t stride, std::size_t count);

struct ExponentialTerm {
  cplx z;
  int multiplicity = 1;
  std::vector<cplx> coeffs;  ///< c_{j0}..c_{j,m-1}
};

/// sum_j sum_s c_js k^s z_j^k
struct ExponentialSumModel {
  std::vector<ExponentialTerm> terms;
  double delta = 1.0;
  double alpha0 = 0.0;
  double residual = 0.0;  ///< max |model - sample| over the series
  std::vector<std::string> warnings;

  int order() const;
  cplx eval(double k) const;
};

/// S0_ij = s_{i+j}, S1_ij = s_{i+j+1}, both N x M.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> build_hankel(const SampleSeries& series, int N, int M);

/// Number of singular values of the N x N Hankel matrix above tol * sigma_1;
/// 0 when every sample is below 1e-14.
int estimate_order(const SampleSeries& series, int N, double tol = 1e-8);

/// Generalized eigenvalues of the pencil S1 - z S0 via S0 = U Sigma V^*.
std::vector<cplx> solve_pencil(const Eigen::MatrixXcd& S0, const Eigen::MatrixXcd& S1);

/// Greedy clustering by relative distance; returns (centroid, size).
std::vector<std::pair<cplx, int>> cluster_multiplicities(const std::vector<cplx>& eigs, double eps = 1e-6);

/// Least-squares Casorati fit of the coefficients on rows k = 0..rows-1
/// (rows = 0 uses every sample).
ExponentialSumModel recover_coefficients(const std::vector<std::pair<cplx, int>>& nodes,
                                         const SampleSeries& series, int rows = 0);

struct PencilOptions {
  int N = 25;
  double order_tol = 1e-8;
  double cluster_eps = 1e-6;
};

/// Order estimate, pencil, clustering and coefficient fit in one call.
/// Coefficients are fitted on the first N samples.
ExponentialSumModel fit_exponential_sum(const SampleSeries& series, const PencilOptions& opts);

struct SpectralData {
  std::vector<cplx> exponents;     ///< s_j = -log(z_j) / delta
  std::vector<cplx> bound_states;  ///< i s_j
  std::vector<int> multiplicities;
  std::vector<std::vector<cplx>> norming_left;
  std::vector<std::vector<cplx>> norming_right;  ///< empty without a right model
  std::vector<std::string> warnings;

  void write_json(std::ostream& os) const;
};

/// Gamma_jr = r! e^{s_j alpha0} sum_{s>=r} c_js delta^{-s} C(s,r) (-alpha0)^{s-r},
/// i.e. s! c_js for delta = 1, alpha0 = 0.
std::vector<cplx> norming_constants(const ExponentialTerm& term, cplx exponent, double delta, double alpha0);

/// Terms with Re s_j <= 0, or whose largest |coefficient| is below
/// min_weight times the largest over all terms, are dropped with a warning.
/// Right nodes must match left nodes within 1e-6 relative.
SpectralData to_spectral_data(const ExponentialSumModel& left, const std::optional<ExponentialSumModel>& right,
                              double min_weight = 0.0);

}  // namespace nlsscat
