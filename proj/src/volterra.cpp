#include "nlsscat/volterra.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "nlsscat/error.hpp"

namespace nlsscat {

namespace {

struct Orientation {
  double s1;
  double s2;
  bool mirrored;
  bool p_is_up;
};

Orientation orientation(KernelKind kind) {
  switch (kind) {
    case KernelKind::KBar: return {-1.0, 1.0, false, true};
    case KernelKind::K: return {1.0, -1.0, false, false};
    case KernelKind::M: return {1.0, -1.0, true, true};
    case KernelKind::MBar: return {-1.0, 1.0, true, false};
  }
  throw ConfigError("unknown kernel kind");
}

// Oriented samples v_r, r = -nx..nx, stored at r + nx.
std::vector<double> oriented_samples(const PotentialGrid& pot, bool mirrored) {
  std::vector<double> v = pot.samples;
  if (mirrored) std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::KBar: return "KBAR";
    case KernelKind::K: return "K";
    case KernelKind::M: return "M";
    case KernelKind::MBar: return "MBAR";
  }
  return "?";
}

KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "KBAR") return KernelKind::KBar;
  if (s == "K") return KernelKind::K;
  if (s == "M") return KernelKind::M;
  if (s == "MBAR") return KernelKind::MBar;
  throw ConfigError("unknown kernel kind '" + s + "' (expected KBAR, K, M or MBAR)");
}

bool is_right_kind(KernelKind kind) { return orientation(kind).mirrored; }

std::vector<double> tail_energy(const std::vector<double>& f, double h) {
  const std::size_t n = f.size() - 1;
  std::vector<double> I(n + 1, 0.0);
  if (n == 0) return I;
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = f[k] * f[k];
  if (n == 1) {
    I[0] = 0.5 * h * (g[0] + g[1]);
    return I;
  }
  // last panel by the three-point end rule, then Simpson pairs
  I[n - 1] = h / 12.0 * (-g[n - 2] + 8.0 * g[n - 1] + 5.0 * g[n]);
  for (std::size_t k = n - 1; k-- > 0;) {
    I[k] = I[k + 2] + h / 3.0 * (g[k] + 4.0 * g[k + 1] + g[k + 2]);
  }
  return I;
}

std::pair<std::vector<double>, std::vector<double>> diagonal_values(const PotentialGrid& pot,
                                                                    KernelKind kind) {
  pot.validate();
  const Orientation o = orientation(kind);
  const std::vector<double> v = oriented_samples(pot, o.mirrored);
  const std::vector<double> I = tail_energy(v, pot.h());
  const std::size_t N = v.size();
  std::vector<double> up(N), dn(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double p = o.s1 * o.s2 * 0.5 * I[k];
    const double q = o.s2 * 0.5 * v[k];
    // oriented index k is physical index N-1-k when mirrored
    const std::size_t phys = o.mirrored ? N - 1 - k : k;
    up[phys] = o.p_is_up ? p : q;
    dn[phys] = o.p_is_up ? q : p;
  }
  return {up, dn};
}

KernelTriangle solve_auxiliary(const PotentialGrid& pot, KernelKind kind) {
  pot.validate();
  const Orientation o = orientation(kind);
  const int n = pot.nx;
  const double h = pot.h();
  const std::vector<double> v = oriented_samples(pot, o.mirrored);
  auto u = [&](int r) { return v[static_cast<std::size_t>(r + n)]; };

  KernelTriangle tri;
  tri.kind = kind;
  tri.L = pot.L;
  tri.nx = n;
  tri.row_start_.resize(static_cast<std::size_t>(2 * n + 2));
  tri.row_start_[0] = 0;
  for (int t = 0; t <= 2 * n; ++t) {
    tri.row_start_[static_cast<std::size_t>(t + 1)] =
        tri.row_start_[static_cast<std::size_t>(t)] + static_cast<std::size_t>(2 * n - t + 1);
  }
  const std::size_t total = tri.row_start_.back();
  tri.p_.assign(total, 0.0);
  tri.q_.assign(total, 0.0);

  const std::vector<double> I = tail_energy(v, h);
  for (int r = -n; r <= n; ++r) {
    tri.p_[tri.index(r, 0)] = o.s1 * o.s2 * 0.5 * I[static_cast<std::size_t>(r + n)];
    tri.q_[tri.index(r, 0)] = o.s2 * 0.5 * u(r);
  }

  // acc[m] = sum_{q=r+1}^{m-1} v_q P(q, 2m-q), built up as t grows
  std::vector<double> acc(static_cast<std::size_t>(2 * n + 1), 0.0);
  for (int t = 1; t <= 2 * n; ++t) {
    double rowsum = 0.0;  // sum_{q=r+1}^{n-t} v_q Q(q, t)
    for (int r = n - t; r >= -n; --r) {
      const int m = r + t;
      const double um = u(m);
      double& am = acc[static_cast<std::size_t>(m + n)];
      const double rhs1 = o.s1 * h * rowsum;
      const double rhs2 = o.s2 * (0.5 * um + 0.5 * h * um * tri.p_[tri.index(m, 0)] + h * am);
      const double a = o.s1 * 0.5 * h * u(r);
      const double b = o.s2 * 0.5 * h * u(r);
      const double det = 1.0 - a * b;
      if (!(det >= 1.0)) throw NumericalError("collocation system lost nonsingularity");
      const double qv = (rhs2 + b * rhs1) / det;
      const double pv = rhs1 + a * qv;
      tri.p_[tri.index(r, t)] = pv;
      tri.q_[tri.index(r, t)] = qv;
      rowsum += u(r) * qv;
      am += u(r) * pv;
    }
  }

  for (std::size_t k = 0; k < total; ++k) {
    if (!std::isfinite(tri.p_[k]) || !std::isfinite(tri.q_[k])) {
      throw NumericalError("auxiliary kernels overflowed; refine the grid (smaller h)");
    }
  }

  tri.ext_up_.resize(static_cast<std::size_t>(2 * n + 1));
  tri.ext_dn_.resize(static_cast<std::size_t>(2 * n + 1));
  for (int t = 0; t <= 2 * n; ++t) tri.ext_up_[static_cast<std::size_t>(t)] = tri.p(-n, t);
  for (int m = -n; m <= n; ++m) tri.ext_dn_[static_cast<std::size_t>(m + n)] = tri.q(-n, m + n);
  return tri;
}

std::pair<double, double> KernelTriangle::oriented(int r, int t) const {
  if (t < 0) return {0.0, 0.0};
  const int m = r + t;
  if (r > nx || m > nx) return {0.0, 0.0};
  if (r >= -nx) return {p(r, t), q(r, t)};
  const double up = t <= 2 * nx ? ext_up_[static_cast<std::size_t>(t)] : 0.0;
  const double dn = m >= -nx ? ext_dn_[static_cast<std::size_t>(m + nx)] : 0.0;
  return {up, dn};
}

std::pair<double, double> KernelTriangle::query(int i, int j) const {
  const bool right = is_right_kind(kind);
  const int offset = right ? i - j : j - i;
  if (offset % 2 != 0) {
    throw ConfigError("(" + std::to_string(i) + ", " + std::to_string(j) +
                      ") is not a collocation node: offset must be even");
  }
  const int r = right ? -i : i;
  const auto [pv, qv] = oriented(r, offset / 2);
  return orientation(kind).p_is_up ? std::pair{pv, qv} : std::pair{qv, pv};
}

double KernelTriangle::max_abs() const {
  double m = 0.0;
  for (double v : p_) m = std::max(m, std::abs(v));
  for (double v : q_) m = std::max(m, std::abs(v));
  return m;
}

void KernelTriangle::write_json(std::ostream& os) const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["L"] = L;
  j["nx"] = nx;
  j["orientation"] = is_right_kind(kind) ? "mirrored" : "direct";
  j["p_is_up"] = orientation(kind).p_is_up;
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t <= 2 * nx; ++t) {
    const auto b = row_start_[static_cast<std::size_t>(t)];
    const auto e = row_start_[static_cast<std::size_t>(t + 1)];
    rows.push_back({{"t", t},
                    {"r_min", -nx},
                    {"r_max", nx - t},
                    {"p", std::vector<double>(p_.begin() + static_cast<std::ptrdiff_t>(b),
                                              p_.begin() + static_cast<std::ptrdiff_t>(e))},
                    {"q", std::vector<double>(q_.begin() + static_cast<std::ptrdiff_t>(b),
                                              q_.begin() + static_cast<std::ptrdiff_t>(e))}});
  }
  j["rows"] = std::move(rows);
  j["ext_up"] = ext_up_;
  j["ext_dn"] = ext_dn_;
  os << j.dump() << '\n';
}

}  // namespace nlsscat
