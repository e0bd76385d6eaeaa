#include "nlsscat/scatmat.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <functional>

#include "json.hpp"
#include "nlsscat/error.hpp"

namespace nlsscat {

using cplx = std::complex<double>;

namespace {

double trap_weight(int k, int first, int last) { return (k == first || k == last) ? 0.5 : 1.0; }

// Composite trapezoid weights on a single point give a zero-length interval.
double trapezoid(int first, int last, double h, const std::function<double(int)>& f) {
  if (last <= first) return 0.0;
  double s = 0.0;
  for (int k = first; k <= last; ++k) s += trap_weight(k, first, last) * f(k);
  return h * s;
}

cplx boundary_transform(const ScatteringProfiles& p, double lambda) {
  // U = int e^{2 i lambda x} u(x) dx
  const int n = p.nx;
  const double h = p.L / n;
  cplx s = 0.0;
  for (int r = -n; r <= n; ++r) {
    s += trap_weight(r, -n, n) * std::exp(cplx(0.0, 2.0 * lambda * r * h)) * p.u[static_cast<std::size_t>(r + n)];
  }
  return h * s;
}

// H sum_t w_t e^{i sign lambda t H} diag[t]
cplx diag_transform(const ScatteringProfiles& p, double lambda, double sign) {
  const int n = p.nx;
  const double H = 2.0 * p.L / n;
  cplx s = 0.0;
  for (int t = 0; t <= 2 * n; ++t) {
    s += trap_weight(t, 0, 2 * n) * std::exp(cplx(0.0, sign * lambda * t * H)) * p.diag[static_cast<std::size_t>(t)];
  }
  return H * s;
}

// H sum_m w_m e^{i sign lambda m H} anti[mirror ? -m : m]
cplx anti_transform(const ScatteringProfiles& p, double lambda, double sign, bool mirror) {
  const int n = p.nx;
  const double H = 2.0 * p.L / n;
  cplx s = 0.0;
  for (int m = -n; m <= n; ++m) {
    const int idx = mirror ? -m : m;
    s += trap_weight(m, -n, n) * std::exp(cplx(0.0, sign * lambda * m * H)) * p.anti[static_cast<std::size_t>(idx + n)];
  }
  return H * s;
}

}  // namespace

ScatteringProfiles make_profiles(const PotentialGrid& pot, const KernelTriangle& tri) {
  if (tri.nx != pot.nx || tri.L != pot.L) throw ConfigError("triangle and grid do not match");
  if (tri.kind != KernelKind::KBar && tri.kind != KernelKind::M) {
    throw ConfigError("scattering profiles need a KBAR or M triangle");
  }
  const int n = pot.nx;
  const double h = pot.h();
  ScatteringProfiles p;
  p.kind = tri.kind;
  p.L = pot.L;
  p.nx = n;
  p.u = pot.samples;
  std::vector<double> v = pot.samples;
  if (is_right_kind(tri.kind)) std::reverse(v.begin(), v.end());
  auto vr = [&](int r) { return v[static_cast<std::size_t>(r + n)]; };

  p.diag.resize(static_cast<std::size_t>(2 * n + 1));
  for (int t = 0; t <= 2 * n; ++t) {
    p.diag[static_cast<std::size_t>(t)] = trapezoid(-n, n - t, h, [&](int r) { return vr(r) * tri.q(r, t); });
  }
  p.anti.resize(static_cast<std::size_t>(2 * n + 1));
  for (int m = -n; m <= n; ++m) {
    p.anti[static_cast<std::size_t>(m + n)] = trapezoid(-n, m, h, [&](int r) { return vr(r) * tri.p(r, m - r); });
  }
  return p;
}

Coefficients coefficients_left(const ScatteringProfiles& kbar, double lambda) {
  if (kbar.kind != KernelKind::KBar) throw ConfigError("left coefficients need KBAR profiles");
  const cplx U = boundary_transform(kbar, lambda);
  return {1.0 - diag_transform(kbar, lambda, -1.0), -U - anti_transform(kbar, lambda, 1.0, false),
          std::conj(U) + anti_transform(kbar, lambda, -1.0, false), 1.0 - diag_transform(kbar, lambda, 1.0)};
}

Coefficients coefficients_right(const ScatteringProfiles& m, double lambda) {
  if (m.kind != KernelKind::M) throw ConfigError("right coefficients need M profiles");
  const cplx U = boundary_transform(m, lambda);
  return {1.0 + diag_transform(m, lambda, 1.0), U + anti_transform(m, lambda, 1.0, true),
          -std::conj(U) - anti_transform(m, lambda, -1.0, true), 1.0 + diag_transform(m, lambda, -1.0)};
}

Coefficients coefficients_left(const PotentialGrid& pot, const KernelTriangle& kbar, double lambda) {
  return coefficients_left(make_profiles(pot, kbar), lambda);
}

Coefficients coefficients_right(const PotentialGrid& pot, const KernelTriangle& m, double lambda) {
  return coefficients_right(make_profiles(pot, m), lambda);
}

ScatteringSample scattering_entries(double lambda, const Coefficients& a_l, const Coefficients& a_r) {
  constexpr double tiny = 1e-13;
  if (std::abs(a_l[3]) < tiny || std::abs(a_r[0]) < tiny) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "transmission denominator vanishes at lambda = %.6g (possible real spectral singularity)", lambda);
    throw NumericalError(buf);
  }
  ScatteringSample s;
  s.lambda = lambda;
  s.a_l = a_l;
  s.a_r = a_r;
  s.T = 1.0 / a_l[3];
  s.L = a_l[1] / a_l[3];
  s.R = -a_l[2] / a_l[3];
  const cplx T_r = 1.0 / a_r[0];
  const cplx L_r = -a_r[1] / a_r[0];
  const cplx R_r = a_r[2] / a_r[0];
  const double scale = std::abs(s.T);
  s.disc_T = std::abs(s.T - T_r) / scale;
  s.disc_L = std::abs(s.L - L_r) / scale;
  s.disc_R = std::abs(s.R - R_r) / scale;
  return s;
}

std::vector<double> LambdaGrid::points() const {
  if (count < 1) throw ConfigError("lambda grid needs at least one point");
  if (!std::isfinite(min) || !std::isfinite(max) || max < min) throw ConfigError("lambda grid needs min <= max");
  std::vector<double> pts(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    pts[static_cast<std::size_t>(k)] = count == 1 ? min : min + (max - min) * k / (count - 1);
  }
  return pts;
}

std::vector<ScatteringSample> scan(const ScatteringProfiles& left, const ScatteringProfiles& right,
                                   const LambdaGrid& grid) {
  std::vector<ScatteringSample> out;
  for (double lam : grid.points()) {
    out.push_back(scattering_entries(lam, coefficients_left(left, lam), coefficients_right(right, lam)));
  }
  return out;
}

void write_scattering_csv(const std::vector<ScatteringSample>& samples, std::ostream& os) {
  os << "lambda";
  for (const char* side : {"al", "ar"})
    for (int k = 1; k <= 4; ++k) os << ",re_" << side << k << ",im_" << side << k;
  os << ",re_T,im_T,re_L,im_L,re_R,im_R,disc_T,disc_L,disc_R\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    os << buf;
  };
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.lambda);
    os << buf;
    for (const auto& a : s.a_l) put(a.real()), put(a.imag());
    for (const auto& a : s.a_r) put(a.real()), put(a.imag());
    for (const auto& z : {s.T, s.L, s.R}) put(z.real()), put(z.imag());
    put(s.disc_T);
    put(s.disc_L);
    put(s.disc_R);
    os << '\n';
  }
}

void write_scattering_json(const std::vector<ScatteringSample>& samples, std::ostream& os) {
  auto c = [](cplx z) { return nlohmann::json{{"re", z.real()}, {"im", z.imag()}}; };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json al = nlohmann::json::array(), ar = nlohmann::json::array();
    for (const auto& a : s.a_l) al.push_back(c(a));
    for (const auto& a : s.a_r) ar.push_back(c(a));
    arr.push_back({{"lambda", s.lambda},
                   {"a_l", al},
                   {"a_r", ar},
                   {"T", c(s.T)},
                   {"L", c(s.L)},
                   {"R", c(s.R)},
                   {"disc_T", s.disc_T},
                   {"disc_L", s.disc_L},
                   {"disc_R", s.disc_R}});
  }
  os << arr.dump(1) << '\n';
}

}  // namespace nlsscat
