#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "nlsscat/potential.hpp"
#include "nlsscat/volterra.hpp"

namespace nlsscat {

enum class Side { Left, Right };

std::string to_string(Side side);

/// Marchenko kernel samples. Sample k sits at alpha_k = k * spacing (left)
/// or -k * spacing (right), k = 0..nx, so the support [0, 2L] or [-2L, 0]
/// is covered with spacing 2h.
struct MarchenkoKernel {
  Side side = Side::Left;
  double spacing = 0.0;
  std::vector<double> values;

  double alpha(std::size_t k) const {
    const double a = spacing * static_cast<double>(k);
    return side == Side::Left ? a : -a;
  }
  /// Sample value, zero past the support.
  double at(std::size_t k) const { return k < values.size() ? values[k] : 0.0; }
  double max_abs() const;

  void write_csv(std::ostream& os) const;
  void write_json(std::ostream& os) const;
};

/// Left kernel from the K-bar triangle by the descending diagonal recursion.
/// Throws NumericalError if 1 + (H/2) up(x_r, x_r) <= 0 at some node.
MarchenkoKernel recover_left(const KernelTriangle& kbar, const PotentialGrid& pot);

/// Right kernel from the M triangle (mirrored recursion).
MarchenkoKernel recover_right(const KernelTriangle& m, const PotentialGrid& pot);

/// max |computed - reference| / max |reference| over the samples.
double relative_error(const MarchenkoKernel& computed, const std::function<double(double)>& reference);

/// Largest residual of the discrete Marchenko equation at the off-diagonal
/// collocation nodes (x_r, x_{r+2t}), r >= 0, t >= 1.
double reconstruction_residual(const KernelTriangle& tri, const MarchenkoKernel& omega);

}  // namespace nlsscat
