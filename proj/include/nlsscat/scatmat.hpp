#pragma once

#include <array>
#include <complex>
#include <ostream>
#include <vector>

#include "nlsscat/potential.hpp"
#include "nlsscat/volterra.hpp"

namespace nlsscat {

using Coefficients = std::array<std::complex<double>, 4>;

/// Inner y-integrals of the scattering coefficients, independent of lambda.
/// In oriented coordinates of the triangle (v the oriented potential):
///   diag[t]   = int v(y) Q(y, y + 2t h) dy              t = 0..2nx
///   anti[m+n] = int_{-L}^{x_m} v(y) P(y, 2 x_m - y) dy   m = -nx..nx
struct ScatteringProfiles {
  KernelKind kind = KernelKind::KBar;
  double L = 0.0;
  int nx = 0;
  std::vector<double> u;  ///< physical potential samples
  std::vector<double> diag;
  std::vector<double> anti;
};

ScatteringProfiles make_profiles(const PotentialGrid& pot, const KernelTriangle& tri);

/// (a_l1, a_l2, a_l3, a_l4) from K-bar profiles.
Coefficients coefficients_left(const ScatteringProfiles& kbar, double lambda);
/// (a_r1, a_r2, a_r3, a_r4) from M profiles.
Coefficients coefficients_right(const ScatteringProfiles& m, double lambda);

Coefficients coefficients_left(const PotentialGrid& pot, const KernelTriangle& kbar, double lambda);
Coefficients coefficients_right(const PotentialGrid& pot, const KernelTriangle& m, double lambda);

struct ScatteringSample {
  double lambda = 0.0;
  Coefficients a_l{};
  Coefficients a_r{};
  std::complex<double> T, L, R;
  /// |left form - right form| / |T| for T, L and R
  double disc_T = 0.0, disc_L = 0.0, disc_R = 0.0;
};

/// T = 1/a_l4, L = a_l2/a_l4, R = -a_l3/a_l4, with the right forms
/// 1/a_r1, -a_r2/a_r1, a_r3/a_r1 as the consistency check.
/// Throws NumericalError when a_l4 or a_r1 vanishes.
ScatteringSample scattering_entries(double lambda, const Coefficients& a_l, const Coefficients& a_r);

struct LambdaGrid {
  double min = -5.0;
  double max = 5.0;
  int count = 201;

  std::vector<double> points() const;
};

std::vector<ScatteringSample> scan(const ScatteringProfiles& left, const ScatteringProfiles& right,
                                   const LambdaGrid& grid);

void write_scattering_csv(const std::vector<ScatteringSample>& samples, std::ostream& os);
void write_scattering_json(const std::vector<ScatteringSample>& samples, std::ostream& os);

}  // namespace nlsscat
