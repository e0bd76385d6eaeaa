#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "nlsscat/error.hpp"
#include "nlsscat/volterra.hpp"

using namespace nlsscat;

namespace {

using Node = std::pair<int, int>;
using Field = std::map<Node, std::pair<double, double>>;  // (i, j) -> (up, dn)

// Physical-coordinate collocation with every quadrature sum recomputed from
// scratch (cubic cost). KBAR:
//   up(x,y) = -int_x^inf u(z) dn(z, z+y-x) dz,  dn(x,y) = u(m)/2 + int_x^m u(z) up(z, 2m-z) dz
// M:
//   up(x,y) = int_-inf^x u(z) dn(z, z+y-x) dz,  dn(x,y) = -u(m)/2 - int_m^x u(z) up(z, 2m-z) dz
Field naive(const PotentialGrid& g, KernelKind kind) {
  const int n = g.nx;
  const double h = g.h();
  const bool right = kind == KernelKind::M;
  Field f;
  auto get = [&](int i, int j) {
    auto it = f.find({i, j});
    return it == f.end() ? std::pair{0.0, 0.0} : it->second;
  };
  const auto [up_diag, dn_diag] = diagonal_values(g, kind);
  for (int i = -n; i <= n; ++i) f[{i, i}] = {up_diag[static_cast<std::size_t>(i + n)], dn_diag[static_cast<std::size_t>(i + n)]};
  for (int t = 1; t <= 2 * n; ++t) {
    for (int k = 0; k <= 2 * n - t; ++k) {
      const int i = right ? -n + t + k : n - t - k;
      const int j = right ? i - 2 * t : i + 2 * t;
      const int m = (i + j) / 2;
      // row sum over z beyond x, excluding the unknown endpoint
      double row = 0.0;
      if (!right) {
        for (int q = i + 1; q <= n; ++q) row += g[q] * get(q, q + 2 * t).second;
      } else {
        for (int q = i - 1; q >= -n; --q) row += g[q] * get(q, q - 2 * t).second;
      }
      double anti = 0.5 * g[m] * get(m, m).first;
      if (!right) {
        for (int q = i + 1; q < m; ++q) anti += g[q] * get(q, 2 * m - q).first;
      } else {
        for (int q = m + 1; q < i; ++q) anti += g[q] * get(q, 2 * m - q).first;
      }
      const double s1 = right ? 1.0 : -1.0;
      const double s2 = right ? -1.0 : 1.0;
      // up = s1 h (u_i dn / 2 + row), dn = s2 (u_m / 2 + h (anti + u_i up / 2))
      const double a = s1 * 0.5 * h * g[i];
      const double b = s2 * 0.5 * h * g[i];
      const double r1 = s1 * h * row;
      const double r2 = s2 * (0.5 * g[m] + h * anti);
      const double dn = (r2 + b * r1) / (1.0 - a * b);
      const double up = r1 + a * dn;
      f[{i, j}] = {up, dn};
    }
  }
  return f;
}

double max_abs_field(const Field& f) {
  double m = 0.0;
  for (const auto& [k, v] : f) m = std::max({m, std::abs(v.first), std::abs(v.second)});
  return m;
}

}  // namespace

TEST_CASE("zero potential gives zero kernels") {
  const PotentialGrid g = tabulate(ZeroPotential{}, 2.0, 10);
  for (auto kind : {KernelKind::KBar, KernelKind::K, KernelKind::M, KernelKind::MBar}) {
    const auto [up, dn] = diagonal_values(g, kind);
    for (double v : up) CHECK(v == 0.0);
    for (double v : dn) CHECK(v == 0.0);
    CHECK(solve_auxiliary(g, kind).max_abs() == 0.0);
  }
}

TEST_CASE("diagonal values") {
  std::mt19937 rng(11);
  const PotentialGrid g = testing_support::random_bumps(rng, 4.0, 60);
  const auto [up, dn] = diagonal_values(g, KernelKind::KBar);
  for (int i = -60; i <= 60; ++i) CHECK(dn[static_cast<std::size_t>(i + 60)] == g[i] / 2);
  CHECK(up[120] == 0.0);
  const auto [mup, mdn] = diagonal_values(g, KernelKind::M);
  CHECK(mup[0] == 0.0);
  for (int i = -60; i <= 60; ++i) CHECK(mdn[static_cast<std::size_t>(i + 60)] == -g[i] / 2);

  // energy integral against a fine independent quadrature
  const SolitonParams sp{};
  const PotentialGrid s = tabulate(sp, 10.0, 400);
  const auto [sup, sdn] = diagonal_values(s, KernelKind::KBar);
  double fine = 0.0;
  const int K = 200000;
  for (int k = 0; k < K; ++k) {
    const double x = 10.0 * (k + 0.5) / K;
    fine += std::pow(eval_soliton(sp, x), 2) * 10.0 / K;
  }
  CHECK(sup[400] == doctest::Approx(-0.5 * fine).epsilon(1e-7));
}

TEST_CASE("Simpson tail energy is exact for cubics") {
  // f^2 = x^2 on [0, 1] has a quadratic integrand; every tail is exact
  std::vector<double> f(11);
  for (int k = 0; k <= 10; ++k) f[k] = k / 10.0;
  const auto I = tail_energy(f, 0.1);
  for (int k = 0; k <= 10; ++k) CHECK(I[k] == doctest::Approx((1.0 - std::pow(k / 10.0, 3)) / 3.0).epsilon(1e-13));
}

TEST_CASE("prefix-sum solver agrees with the cubic-cost oracle") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const int nx = 20 + 25 * trial;
    const PotentialGrid g = testing_support::random_bumps(rng, 3.0 + trial, nx);
    for (auto kind : {KernelKind::KBar, KernelKind::M}) {
      const KernelTriangle tri = solve_auxiliary(g, kind);
      const Field ref = naive(g, kind);
      const double scale = max_abs_field(ref);
      double worst = 0.0;
      for (const auto& [node, val] : ref) {
        const auto [up, dn] = tri.query(node.first, node.second);
        worst = std::max({worst, std::abs(up - val.first), std::abs(dn - val.second)});
      }
      CHECK(worst <= 1e-12 * scale);
    }
  }
}

TEST_CASE("support clauses, constancy and diagonal identities on random potentials") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> nxd(50, 200);
  std::uniform_real_distribution<double> Ld(1.0, 8.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = nxd(rng);
    const PotentialGrid g = testing_support::random_bumps(rng, Ld(rng), n);
    for (auto kind : {KernelKind::KBar, KernelKind::K, KernelKind::M, KernelKind::MBar}) {
      const KernelTriangle tri = solve_auxiliary(g, kind);
      const auto [up_d, dn_d] = diagonal_values(g, kind);
      for (int i = -n; i <= n; ++i) {
        const auto [up, dn] = tri.query(i, i);
        CHECK(up == up_d[static_cast<std::size_t>(i + n)]);
        CHECK(dn == dn_d[static_cast<std::size_t>(i + n)]);
      }
      const bool right = is_right_kind(kind);
      // mirror physical indices for the right kinds so one set of clauses covers both sides
      // K and MBAR store the down component in the offset-driven slot, so
      // their clauses hold with the components exchanged
      const bool swapped = kind == KernelKind::K || kind == KernelKind::MBar;
      auto q = [&](int i, int j) {
        const auto v = right ? tri.query(-i, -j) : tri.query(i, j);
        return swapped ? std::pair{v.second, v.first} : v;
      };
      bool ok1 = true, ok2 = true, ok3 = true, ok4 = true, ok5 = true, ok6 = true;
      for (int i = -3 * n; i <= 3 * n; i += 3) {
        for (int d = 0; d <= 8 * n; d += 2) {
          const int j = i + d;
          const auto [up, dn] = q(i, j);
          if (i > n) ok1 = ok1 && up == 0.0 && dn == 0.0;
          if (i <= n && i + j > 2 * n) ok2 = ok2 && up == 0.0 && dn == 0.0;
          if (i < -n && d > 4 * n) ok3 = ok3 && up == 0.0;
          if (i < -n && i + j < -2 * n) ok4 = ok4 && dn == 0.0;
          if (i < -n) {
            // up depends on the offset only, dn on the anti-diagonal only
            const auto [up2, dn2] = q(i - 2, j - 2);
            ok5 = ok5 && up2 == up;
            const auto [up3, dn3] = q(i - 1, j + 1);
            ok6 = ok6 && dn3 == dn;
          }
        }
      }
      CHECK(ok1);
      CHECK(ok2);
      CHECK(ok3);
      CHECK(ok4);
      CHECK(ok5);
      CHECK(ok6);
    }
  }
}

TEST_CASE("real-potential symmetry between the direct and the barred kernels") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> nxd(50, 200);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = nxd(rng);
    const PotentialGrid g = testing_support::random_bumps(rng, 5.0, n);
    const KernelTriangle kbar = solve_auxiliary(g, KernelKind::KBar);
    const KernelTriangle k = solve_auxiliary(g, KernelKind::K);
    const KernelTriangle m = solve_auxiliary(g, KernelKind::M);
    const KernelTriangle mbar = solve_auxiliary(g, KernelKind::MBar);
    const double tol_k = 1e-10 * std::max(kbar.max_abs(), 1e-300);
    const double tol_m = 1e-10 * std::max(m.max_abs(), 1e-300);
    double dk = 0.0, dm = 0.0;
    for (int i = -n; i <= n; ++i) {
      for (int j = i; i + j <= 2 * n; j += 2) {
        const auto [kbu, kbd] = kbar.query(i, j);
        const auto [ku, kd] = k.query(i, j);
        dk = std::max({dk, std::abs(ku + kbd), std::abs(kd - kbu)});
        const auto [mu, md] = m.query(-i, -j);
        const auto [mbu, mbd] = mbar.query(-i, -j);
        dm = std::max({dm, std::abs(mbu + md), std::abs(mbd - mu)});
      }
    }
    CHECK(dk <= tol_k);
    CHECK(dm <= tol_m);
  }
}

TEST_CASE("even potentials: right kernels mirror the left ones") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> nxd(50, 200);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = nxd(rng);
    const PotentialGrid g = testing_support::random_bumps(rng, 4.0, n, true);
    for (int i = 0; i <= n; ++i) REQUIRE(g[i] == g[-i]);
    const KernelTriangle kbar = solve_auxiliary(g, KernelKind::KBar);
    const KernelTriangle m = solve_auxiliary(g, KernelKind::M);
    const double tol = 1e-10 * kbar.max_abs();
    double worst = 0.0;
    for (int i = -n; i <= n; ++i) {
      for (int j = i; i + j <= 2 * n; j += 2) {
        const auto [mu, md] = m.query(-i, -j);
        const auto [ku, kd] = kbar.query(i, j);
        worst = std::max({worst, std::abs(mu - ku), std::abs(md + kd)});
      }
    }
    CHECK(worst <= tol);
  }
}

TEST_CASE("second-order refinement on the soliton") {
  const SolitonParams sp{};
  std::vector<KernelTriangle> tris;
  for (int n : {100, 200, 400}) tris.push_back(solve_auxiliary(tabulate(sp, 15.0, n), KernelKind::KBar));
  auto diff = [](const KernelTriangle& a, const KernelTriangle& b) {
    double d = 0.0;
    for (int i = -a.nx; i <= a.nx; ++i) {
      for (int j = i; i + j <= 2 * a.nx; j += 2) {
        const auto [au, ad] = a.query(i, j);
        const auto [bu, bd] = b.query(2 * i, 2 * j);
        d = std::max({d, std::abs(au - bu), std::abs(ad - bd)});
      }
    }
    return d;
  };
  const double ratio = diff(tris[0], tris[1]) / diff(tris[1], tris[2]);
  MESSAGE("refinement ratio " << ratio);
  CHECK(ratio >= 3.4);
  CHECK(ratio <= 4.6);
}

TEST_CASE("query rejects odd offsets and names kinds") {
  const KernelTriangle tri = solve_auxiliary(tabulate(SolitonParams{}, 5.0, 20), KernelKind::KBar);
  CHECK_THROWS_AS(tri.query(0, 1), ConfigError);
  CHECK(tri.query(3, 1) == std::pair{0.0, 0.0});  // below the bisector
  CHECK(to_string(KernelKind::MBar) == "MBAR");
  CHECK(kernel_kind_from_string("M") == KernelKind::M);
  CHECK_THROWS_AS(kernel_kind_from_string("X"), ConfigError);
}

TEST_CASE("JSON dump") {
  const KernelTriangle tri = solve_auxiliary(tabulate(SolitonParams{}, 5.0, 10), KernelKind::M);
  std::ostringstream os;
  tri.write_json(os);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j["kind"] == "M");
  CHECK(j["rows"].size() == 21);
  CHECK(j["rows"][0]["p"].size() == 21);
  CHECK(j["rows"][20]["q"].size() == 1);
  CHECK(j["ext_dn"].size() == 21);
}
