#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nlsscat/potential.hpp"

namespace nlsscat {

/// Auxiliary kernel pairs. KBar and K live on the left triangle
/// (x <= y, x + y <= 2L), M and MBar on its mirror image.
enum class KernelKind { KBar, K, M, MBar };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);
bool is_right_kind(KernelKind kind);

/// Solved auxiliary pair on the even-offset collocation lattice.
///
/// Values are stored in "oriented" coordinates: for left kinds a node is
/// (x_r, x_{r+2t}); for right kinds the potential is mirrored first, so
/// oriented node (r, t) is the physical node (x_{-r}, x_{-r-2t}). Oriented
/// rows t = 0..2 nx hold r = -nx..nx-t. The oriented pair (P, Q) solves
///   P(x,y) = s1 int_x^inf v(z) Q(z, z+y-x) dz
///   Q(x,y) = s2 (v(m)/2 + int_x^m v(z) P(z, x+y-z) dz),  m = (x+y)/2.
class KernelTriangle {
 public:
  KernelKind kind = KernelKind::KBar;
  double L = 0.0;
  int nx = 0;

  double h() const { return L / nx; }

  /// Physical (up, dn) at (x_i, y_j). Returns extension constants left of
  /// the triangle and (0, 0) outside the support. Throws ConfigError when
  /// j - i is odd (not a lattice node).
  std::pair<double, double> query(int i, int j) const;

  /// Oriented values inside the stored triangle, 0 <= t <= 2nx, -nx <= r <= nx-t.
  double p(int r, int t) const { return p_[index(r, t)]; }
  double q(int r, int t) const { return q_[index(r, t)]; }

  /// Oriented lookup with the support and extension rules applied.
  std::pair<double, double> oriented(int r, int t) const;

  /// Extension constants: ext_up[t] = P(-nx, t) for t = 0..2nx;
  /// ext_dn[m + nx] = Q(-nx, m + nx) for m = -nx..nx.
  const std::vector<double>& ext_up() const { return ext_up_; }
  const std::vector<double>& ext_dn() const { return ext_dn_; }

  double max_abs() const;

  /// Debug dump: kind, L, nx and the oriented rows.
  void write_json(std::ostream& os) const;

 private:
  friend KernelTriangle solve_auxiliary(const PotentialGrid& pot, KernelKind kind);

  std::size_t index(int r, int t) const {
    return row_start_[static_cast<std::size_t>(t)] + static_cast<std::size_t>(r + nx);
  }

  std::vector<std::size_t> row_start_;
  std::vector<double> p_;
  std::vector<double> q_;
  std::vector<double> ext_up_;
  std::vector<double> ext_dn_;
};

/// Physical diagonal values (up(x_i, x_i), dn(x_i, x_i)), i = -nx..nx.
/// The energy integrals use composite Simpson accumulated from the endpoint
/// where they vanish.
std::pair<std::vector<double>, std::vector<double>> diagonal_values(const PotentialGrid& pot,
                                                                    KernelKind kind);

/// Anti-diagonal trapezoidal collocation, O(nx^2).
KernelTriangle solve_auxiliary(const PotentialGrid& pot, KernelKind kind);

/// int_{x_r}^{L} f^2 for r = 0..N on samples f_0..f_N.
std::vector<double> tail_energy(const std::vector<double>& f, double h);

}  // namespace nlsscat
