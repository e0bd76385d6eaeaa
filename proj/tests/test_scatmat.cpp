#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "nlsscat/error.hpp"
#include "nlsscat/scatmat.hpp"

using namespace nlsscat;
using cplx = std::complex<double>;

namespace {

struct Both {
  ScatteringProfiles left, right;
};

Both profiles_of(const PotentialGrid& g) {
  return {make_profiles(g, solve_auxiliary(g, KernelKind::KBar)), make_profiles(g, solve_auxiliary(g, KernelKind::M))};
}

ScatteringSample sample_at(const Both& b, double lam) {
  return scattering_entries(lam, coefficients_left(b.left, lam), coefficients_right(b.right, lam));
}

double smooth_bump(double x) {
  // compactly supported on [-3, 3], asymmetric
  const double s = x / 3.0;
  if (std::abs(s) >= 1.0) return 0.0;
  return 1.2 * std::pow(1.0 - s * s, 4) * (1.0 + 0.5 * s);
}

PotentialGrid bump_grid(double L, int n) {
  std::vector<double> v(static_cast<std::size_t>(2 * n + 1));
  for (int i = -n; i <= n; ++i) v[static_cast<std::size_t>(i + n)] = smooth_bump(L * i / n);
  return make_grid(L, v);
}

// Jost solution of phi' = [[-i lam, u], [-u, i lam]] phi from the left edge,
// integrated with fine RK4. Returns |a| and |b| where phi(L) = (a e^{-i lam L}, b e^{i lam L}).
std::pair<double, double> jost_magnitudes(const std::function<double(double)>& u, double L, double lam, int steps) {
  using V = std::array<cplx, 2>;
  const cplx I(0.0, 1.0);
  auto f = [&](double x, const V& p) -> V {
    const double q = u(x);
    return {-I * lam * p[0] + q * p[1], -q * p[0] + I * lam * p[1]};
  };
  V p = {std::exp(I * lam * L), 0.0};
  const double dx = 2.0 * L / steps;
  for (int k = 0; k < steps; ++k) {
    const double x = -L + k * dx;
    const V k1 = f(x, p);
    const V k2 = f(x + dx / 2, {p[0] + dx / 2 * k1[0], p[1] + dx / 2 * k1[1]});
    const V k3 = f(x + dx / 2, {p[0] + dx / 2 * k2[0], p[1] + dx / 2 * k2[1]});
    const V k4 = f(x + dx, {p[0] + dx * k3[0], p[1] + dx * k3[1]});
    for (int c = 0; c < 2; ++c) p[c] += dx / 6 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }
  return {std::abs(p[0]), std::abs(p[1])};
}

}  // namespace

TEST_CASE("zero potential is transparent") {
  const Both b = profiles_of(tabulate(ZeroPotential{}, 4.0, 20));
  for (double lam : {-3.0, 0.0, 0.7}) {
    const auto al = coefficients_left(b.left, lam);
    const auto ar = coefficients_right(b.right, lam);
    CHECK(al[0] == cplx(1.0));
    CHECK(al[1] == cplx(0.0));
    CHECK(al[2] == cplx(0.0));
    CHECK(al[3] == cplx(1.0));
    CHECK(ar[0] == cplx(1.0));
    CHECK(ar[3] == cplx(1.0));
    const auto s = scattering_entries(lam, al, ar);
    CHECK(s.T == cplx(1.0));
    CHECK(s.L == cplx(0.0));
    CHECK(s.R == cplx(0.0));
    CHECK(s.disc_T == 0.0);
  }
}

TEST_CASE("entries from given coefficients") {
  const Coefficients one = {1.0, 0.0, 0.0, 1.0};
  const auto s = scattering_entries(0.0, one, one);
  CHECK(s.T == cplx(1.0));
  const Coefficients al = {1.0, cplx(0.2, 0.1), cplx(-0.3, 0.0), 2.0};
  const auto t = scattering_entries(1.0, al, one);
  CHECK(t.T == cplx(0.5));
  CHECK(t.L == cplx(0.1, 0.05));
  CHECK(t.R == cplx(0.15, 0.0));
  CHECK(t.disc_T == doctest::Approx(1.0));
  const Coefficients dead = {1.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(scattering_entries(0.3, dead, one), NumericalError);
  CHECK_THROWS_AS(scattering_entries(0.3, one, Coefficients{0.0, 0.0, 0.0, 1.0}), NumericalError);
}

TEST_CASE("conjugate symmetry for real potentials") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const Both b = profiles_of(testing_support::random_bumps(rng, 5.0, 120));
    for (double lam : {0.3, 1.1, 2.5}) {
      const auto p = coefficients_left(b.left, lam);
      const auto m = coefficients_left(b.left, -lam);
      for (int k = 0; k < 4; ++k) CHECK(std::abs(m[k] - std::conj(p[k])) <= 1e-12);
      const auto pr = coefficients_right(b.right, lam);
      const auto mr = coefficients_right(b.right, -lam);
      for (int k = 0; k < 4; ++k) CHECK(std::abs(mr[k] - std::conj(pr[k])) <= 1e-12);
    }
  }
}

TEST_CASE("transmission and reflection match an independent ODE integration") {
  const double L = 4.0;
  double prev = 0.0;
  for (int n : {200, 400, 800}) {
    const Both b = profiles_of(bump_grid(L, n));
    double worst = 0.0;
    for (double lam : {-1.5, -0.4, 0.0, 0.6, 2.0}) {
      const auto [a, bb] = jost_magnitudes(smooth_bump, L, lam, 20000);
      const auto s = sample_at(b, lam);
      worst = std::max({worst, std::abs(std::abs(s.T) - 1.0 / a), std::abs(std::abs(s.R) - bb / a),
                        std::abs(std::abs(s.L) - bb / a)});
    }
    MESSAGE("n = " << n << " worst deviation from the ODE oracle " << worst);
    CHECK(worst <= 50.0 * (L / n) * (L / n));
    if (prev > 0.0) CHECK(prev / worst >= 3.0);
    prev = worst;
  }
}

TEST_CASE("focusing unitarity |T|^2 - |R|^2 = 1 on the real line") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 400;
    const double L = 5.0;
    const Both b = profiles_of(testing_support::random_bumps(rng, L, n));
    for (double lam : {-2.0, -0.5, 0.25, 1.0, 3.0}) {
      const auto s = sample_at(b, lam);
      const double t2 = std::norm(s.T);
      CHECK(std::abs(t2 - std::norm(s.R) - 1.0) <= 100.0 * (L / n) * (L / n) * t2);
      CHECK(std::abs(t2 - std::norm(s.L) - 1.0) <= 100.0 * (L / n) * (L / n) * t2);
    }
  }
}

TEST_CASE("one-soliton transmission is the Blaschke factor") {
  const Both b = profiles_of(tabulate(SolitonParams{}, 15.0, 1200));
  for (double lam : {-2.0, -0.5, 0.0, 0.5, 1.0, 3.0}) {
    const auto s = sample_at(b, lam);
    const cplx blaschke = (lam + cplx(0.0, 1.0)) / (lam - cplx(0.0, 1.0));
    CHECK(std::abs(s.T - blaschke) <= 5e-3);
    CHECK(std::abs(s.R) <= 5e-3);
  }
}

TEST_CASE("left and right forms converge together") {
  const double L = 4.0;
  double prev = 0.0;
  for (int n : {200, 400, 800}) {
    const Both b = profiles_of(bump_grid(L, n));
    double d = 0.0;
    for (double lam : {-1.0, 0.0, 0.5, 1.5}) {
      const auto s = sample_at(b, lam);
      d = std::max({d, s.disc_T, s.disc_L, s.disc_R});
    }
    MESSAGE("n = " << n << " left/right discrepancy " << d);
    if (prev > 0.0) CHECK(prev / d >= 3.0);
    prev = d;
  }
}

TEST_CASE("profiles reject wrong triangles") {
  const PotentialGrid g = tabulate(SolitonParams{}, 5.0, 20);
  const auto kbar = solve_auxiliary(g, KernelKind::KBar);
  CHECK_THROWS_AS(make_profiles(g, solve_auxiliary(g, KernelKind::K)), ConfigError);
  CHECK_THROWS_AS(make_profiles(tabulate(SolitonParams{}, 5.0, 40), kbar), ConfigError);
  const auto p = make_profiles(g, kbar);
  CHECK_THROWS_AS(coefficients_right(p, 0.0), ConfigError);
  CHECK(p.diag.size() == 41);
  CHECK(p.diag.back() == 0.0);  // single-point integral
}

TEST_CASE("grid and output formats") {
  CHECK(LambdaGrid{}.points().size() == 201);
  CHECK(LambdaGrid{}.points()[100] == 0.0);
  CHECK(LambdaGrid{2.0, 2.0, 1}.points() == std::vector<double>{2.0});
  CHECK_THROWS_AS((LambdaGrid{1.0, 0.0, 3}.points()), ConfigError);
  CHECK_THROWS_AS((LambdaGrid{0.0, 1.0, 0}.points()), ConfigError);

  const Both b = profiles_of(tabulate(SolitonParams{}, 5.0, 40));
  const auto samples = scan(b.left, b.right, LambdaGrid{-1.0, 1.0, 5});
  std::ostringstream csv;
  write_scattering_csv(samples, csv);
  std::string header;
  std::istringstream(csv.str()) >> header;
  CHECK(header.rfind("lambda,re_al1,im_al1", 0) == 0);
  CHECK(header.find("disc_R") != std::string::npos);
  std::ostringstream js;
  write_scattering_json(samples, js);
  const auto j = nlohmann::json::parse(js.str());
  CHECK(j.size() == 5);
  CHECK(j[2]["lambda"].get<double>() == 0.0);
  CHECK(j[2]["T"]["re"].get<double>() == samples[2].T.real());
}
