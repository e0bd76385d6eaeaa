#include "nlsscat/marchenko.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "nlsscat/error.hpp"

namespace nlsscat {

std::string to_string(Side side) { return side == Side::Left ? "left" : "right"; }

double MarchenkoKernel::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void MarchenkoKernel::write_csv(std::ostream& os) const {
  os << "alpha,omega\n";
  char buf[80];
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", alpha(k), values[k]);
    os << buf;
  }
}

void MarchenkoKernel::write_json(std::ostream& os) const {
  nlohmann::json j;
  j["side"] = to_string(side);
  j["spacing"] = spacing;
  std::vector<double> a(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) a[k] = alpha(k);
  j["alpha"] = a;
  j["omega"] = values;
  os << j.dump(1) << '\n';
}

namespace {

// Omega_r (1 + (H/2) P(r,0)) = sign Q(r,0) - H sum_t w_t P(r,t) Omega_{r+t}
MarchenkoKernel recover(const KernelTriangle& tri, double sign, Side side) {
  const int n = tri.nx;
  const double H = 2.0 * tri.h();
  MarchenkoKernel out;
  out.side = side;
  out.spacing = H;
  out.values.assign(static_cast<std::size_t>(n + 1), 0.0);
  auto& om = out.values;
  for (int r = n; r >= 0; --r) {
    double s = 0.0;
    for (int t = 1; t <= n - r; ++t) {
      const double w = t == n - r ? 0.5 : 1.0;
      s += w * tri.p(r, t) * om[static_cast<std::size_t>(r + t)];
    }
    const double den = 1.0 + 0.5 * H * tri.p(r, 0);
    if (!(den > 0.0)) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "Marchenko recursion unstable: 1 + (H/2) K(x,x) = %.3e at x = %.4g; use a smaller h "
                    "(larger nx)",
                    den, (side == Side::Left ? 1.0 : -1.0) * r * tri.h());
      throw NumericalError(buf);
    }
    om[static_cast<std::size_t>(r)] = (sign * tri.q(r, 0) - H * s) / den;
  }
  return out;
}

}  // namespace

MarchenkoKernel recover_left(const KernelTriangle& kbar, const PotentialGrid& pot) {
  if (kbar.kind != KernelKind::KBar) throw ConfigError("recover_left needs a KBAR triangle");
  if (kbar.nx != pot.nx || kbar.L != pot.L) throw ConfigError("triangle and grid do not match");
  return recover(kbar, -1.0, Side::Left);
}

MarchenkoKernel recover_right(const KernelTriangle& m, const PotentialGrid& pot) {
  if (m.kind != KernelKind::M) throw ConfigError("recover_right needs an M triangle");
  if (m.nx != pot.nx || m.L != pot.L) throw ConfigError("triangle and grid do not match");
  return recover(m, 1.0, Side::Right);
}

double relative_error(const MarchenkoKernel& computed, const std::function<double(double)>& reference) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < computed.values.size(); ++k) {
    const double ref = reference(computed.alpha(k));
    num = std::max(num, std::abs(computed.values[k] - ref));
    den = std::max(den, std::abs(ref));
  }
  if (den == 0.0) throw ConfigError("reference kernel vanishes on the samples");
  return num / den;
}

double reconstruction_residual(const KernelTriangle& tri, const MarchenkoKernel& omega) {
  const int n = tri.nx;
  const double H = 2.0 * tri.h();
  const double sign = omega.side == Side::Left ? 1.0 : -1.0;
  auto om = [&](int k) { return omega.at(static_cast<std::size_t>(k)); };
  double worst = 0.0;
  for (int r = 0; r <= n; ++r) {
    for (int t = 1; r + t <= n; ++t) {
      // trapezoid over z = x_{r+2s}, s = 0..n-r-t
      const int last = n - r - t;
      double s = 0.5 * tri.p(r, 0) * om(r + t);
      for (int k = 1; k <= last; ++k) {
        const double w = k == last ? 0.5 : 1.0;
        s += w * tri.p(r, k) * om(r + k + t);
      }
      const double res = sign * tri.q(r, t) + om(r + t) + H * s;
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

}  // namespace nlsscat
