#include "nlsscat/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include "json.hpp"
#include <unsupported/Eigen/MatrixFunctions>

#include "nlsscat/error.hpp"

namespace nlsscat {

void SolitonParams::validate() const {
  if (!std::isfinite(c) || !std::isfinite(a) || !std::isfinite(p)) {
    throw ConfigError("soliton parameters must be finite");
  }
  if (p == 0.0) throw ConfigError("soliton parameter p must be nonzero");
  if (!(a > 0.0)) throw ConfigError("soliton parameter a must be positive");
}

double eval_soliton(const SolitonParams& params, double x) {
  if (params.c == 0.0) return 0.0;
  const double k = params.c * params.c / (4.0 * params.p * params.p);
  const double e1 = -2.0 * params.a * x;
  const double e2 = -4.0 * params.p * x;
  // log(1 + k e^{e2}) without overflow
  double log_den;
  if (e2 < 0.0) {
    log_den = std::log1p(k * std::exp(e2));
  } else {
    log_den = e2 + std::log(k) + std::log1p(std::exp(-e2) / k);
  }
  return -2.0 * params.c * std::exp(e1 - log_den);
}

// ---------------------------------------------------------------------------
// Lyapunov

namespace {

// Y T + T^* Y = C with T upper triangular.
CMatrix solve_triangular_lyapunov(const CMatrix& T, const CMatrix& C) {
  const Eigen::Index n = T.rows();
  CMatrix Y = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      std::complex<double> acc = C(i, j);
      for (Eigen::Index k = 0; k < j; ++k) acc -= Y(i, k) * T(k, j);
      for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(T(k, i)) * Y(k, j);
      const std::complex<double> den = T(j, j) + std::conj(T(i, i));
      if (std::abs(den) == 0.0) {
        throw NumericalError("singular Lyapunov operator: eigenvalue sum vanishes");
      }
      Y(i, j) = acc / den;
    }
  }
  return Y;
}

void require_right_half_plane(const CMatrix& A) {
  Eigen::ComplexEigenSolver<CMatrix> es(A, false);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (!(es.eigenvalues()(k).real() > 0.0)) {
      throw NumericalError("Lyapunov solve requires eigenvalues of A with positive real part");
    }
  }
}

}  // namespace

CMatrix solve_lyapunov(const CMatrix& A, const CMatrix& rhs, LyapunovSide side) {
  if (A.rows() != A.cols() || rhs.rows() != A.rows() || rhs.cols() != A.cols() || A.rows() == 0) {
    throw ConfigError("Lyapunov solve: A and rhs must be square of equal size");
  }
  require_right_half_plane(A);
  // A X + X A^* = C is the left form for A^*.
  const CMatrix Aeff = side == LyapunovSide::Left ? A : CMatrix(A.adjoint());
  Eigen::ComplexSchur<CMatrix> schur(Aeff);
  const CMatrix& U = schur.matrixU();
  const CMatrix& T = schur.matrixT();
  const CMatrix Y = solve_triangular_lyapunov(T, U.adjoint() * rhs * U);
  CMatrix X = U * Y * U.adjoint();

  const CMatrix residual = X * Aeff + Aeff.adjoint() * X - rhs;
  const double scale = std::max(rhs.norm(), std::numeric_limits<double>::min());
  if (!(residual.norm() <= 1e-12 * scale) && residual.norm() > 1e-300) {
    throw NumericalError("Lyapunov residual " + std::to_string(residual.norm() / scale) +
                         " exceeds 1e-12 relative (ill-conditioned Sylvester operator)");
  }
  return X;
}

// ---------------------------------------------------------------------------
// Multisoliton

MultisolitonParams::MultisolitonParams(CMatrix A, CVector b, CRowVector c)
    : A_(std::move(A)), b_(std::move(b)), c_(std::move(c)) {
  const Eigen::Index n = A_.rows();
  if (n == 0 || A_.cols() != n || b_.size() != n || c_.size() != n) {
    throw ConfigError("multisoliton: A must be n x n with b, c of length n");
  }
  if (!A_.allFinite() || !b_.allFinite() || !c_.allFinite()) {
    throw ConfigError("multisoliton parameters must be finite");
  }
  diagonal_ = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && A_(i, j) != 0.0) diagonal_ = false;
    }
  }
  Q_ = solve_lyapunov(A_, c_.adjoint() * c_, LyapunovSide::Left);
  N_ = solve_lyapunov(A_, b_ * b_.adjoint(), LyapunovSide::Right);
  Eigen::FullPivLU<CMatrix> lu(Q_);
  if (!lu.isInvertible()) {
    throw NumericalError("multisoliton: Q is singular (c does not excite every mode)");
  }
  Qinv_ = lu.inverse();
}

MultisolitonParams MultisolitonParams::four_soliton() {
  CMatrix A = CMatrix::Zero(4, 4);
  for (int j = 0; j < 4; ++j) A(j, j) = j + 1.0;
  CVector b(4);
  b << 1.0, 2.0, -2.0, -1.0;
  CRowVector c(4);
  c << 2.0, 1.0, 1.0, 2.0;
  return MultisolitonParams(std::move(A), std::move(b), std::move(c));
}

CMatrix MultisolitonParams::exp(double t) const {
  if (diagonal_) {
    CMatrix E = CMatrix::Zero(A_.rows(), A_.cols());
    for (Eigen::Index j = 0; j < A_.rows(); ++j) E(j, j) = std::exp(t * A_(j, j));
    return E;
  }
  return CMatrix(t * A_).exp();
}

std::complex<double> eval_multisoliton_complex(const MultisolitonParams& params, double x) {
  // Both branches only exponentiate with decaying sign.
  const Eigen::Index n = params.A_.rows();
  CMatrix bracket;
  CVector rhs;
  if (x >= 0.0) {
    const CMatrix G = params.exp(-2.0 * x);
    bracket = CMatrix::Identity(n, n) + G.adjoint() * params.Q_ * G * params.N_;
    rhs = G.adjoint() * params.c_.adjoint();
  } else {
    const CMatrix F = params.exp(2.0 * x);
    bracket = params.N_ + F * params.Qinv_ * F.adjoint();
    rhs = F * params.Qinv_ * params.c_.adjoint();
  }
  Eigen::FullPivLU<CMatrix> lu(bracket);
  const CVector y = lu.solve(rhs);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14) || !y.allFinite()) {
    throw NumericalError("multisoliton bracket matrix is singular at x = " + std::to_string(x));
  }
  return -2.0 * params.b_.dot(y);  // dot conjugates the first argument
}

double eval_multisoliton(const MultisolitonParams& params, double x) {
  return eval_multisoliton_complex(params, x).real();
}

double multisoliton_kernel(const MultisolitonParams& params, double alpha) {
  const CVector eb = params.exp(-alpha) * params.b();
  return (params.c() * eb)(0).real();
}

// ---------------------------------------------------------------------------
// Tables

TablePotential TablePotential::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential table " + path.string());
  TablePotential table;
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed JSON table " + path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError("JSON table must be an array of [x, u] pairs");
    for (const auto& pair : j) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ConfigError("JSON table must be an array of [x, u] pairs");
      }
      table.x.push_back(pair[0].get<double>());
      table.u.push_back(pair[1].get<double>());
    }
  } else {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream ls(line);
      double xv, uv;
      if (!(ls >> xv >> uv)) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
      }
      table.x.push_back(xv);
      table.u.push_back(uv);
    }
  }
  if (table.x.size() < 2) throw ConfigError("potential table needs at least two rows");
  for (std::size_t k = 1; k < table.x.size(); ++k) {
    if (!(table.x[k] > table.x[k - 1])) {
      throw ConfigError("potential table abscissas must be strictly increasing");
    }
  }
  return table;
}

double TablePotential::eval(double at) const {
  if (at < x.front() || at > x.back()) {
    throw ConfigError("potential table does not cover x = " + std::to_string(at));
  }
  auto it = std::upper_bound(x.begin(), x.end(), at);
  if (it == x.end()) return u.back();
  const auto k = static_cast<std::size_t>(std::distance(x.begin(), it)) - 1;
  if (at == x[k]) return u[k];
  const double t = (at - x[k]) / (x[k + 1] - x[k]);
  return u[k] + t * (u[k + 1] - u[k]);
}

double evaluate(const PotentialModel& model, double x) {
  struct Visitor {
    double x;
    double operator()(const ZeroPotential&) const { return 0.0; }
    double operator()(const SolitonParams& p) const { return eval_soliton(p, x); }
    double operator()(const MultisolitonParams& p) const { return eval_multisoliton(p, x); }
    double operator()(const TablePotential& t) const { return t.eval(x); }
  };
  return std::visit(Visitor{x}, model);
}

// ---------------------------------------------------------------------------
// Grids

void PotentialGrid::validate() const {
  if (nx < 2) throw ConfigError("grid needs nx >= 2");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("grid half-width L must be positive");
  if (samples.size() != static_cast<std::size_t>(2 * nx + 1)) {
    throw ConfigError("grid must hold 2 nx + 1 samples");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw ConfigError("potential samples must be finite");
  }
}

PotentialGrid PotentialGrid::mirrored() const {
  PotentialGrid m = *this;
  std::reverse(m.samples.begin(), m.samples.end());
  return m;
}

PotentialGrid make_grid(double L, std::vector<double> samples, double truncation_tol) {
  PotentialGrid g;
  g.L = L;
  g.nx = static_cast<int>((samples.size() - 1) / 2);
  g.samples = std::move(samples);
  if (g.samples.size() % 2 == 0) throw ConfigError("grid must hold an odd number of samples");
  g.validate();
  g.truncation = std::max(std::abs(g.samples.front()), std::abs(g.samples.back()));
  if (g.truncation > truncation_tol) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "endpoint magnitude %.3e exceeds truncation tolerance %.1e; consider a larger L",
                  g.truncation, truncation_tol);
    g.warnings.emplace_back(buf);
  }
  return g;
}

PotentialGrid tabulate(const PotentialModel& model, double L, int nx, double truncation_tol) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L must be positive");
  if (nx < 2) throw ConfigError("nx must be at least 2");
  if (const auto* s = std::get_if<SolitonParams>(&model)) s->validate();
  if (const auto* t = std::get_if<TablePotential>(&model)) {
    if (t->min_x() > -L || t->max_x() < L) {
      throw ConfigError("potential table does not cover [-L, L]");
    }
  }
  PotentialGrid proto;
  proto.L = L;
  proto.nx = nx;
  std::vector<double> samples(static_cast<std::size_t>(2 * nx + 1));
  const auto* multi = std::get_if<MultisolitonParams>(&model);
  for (int i = -nx; i <= nx; ++i) {
    const double xi = proto.x(i);
    double v;
    if (multi != nullptr) {
      const auto z = eval_multisoliton_complex(*multi, xi);
      if (std::abs(z.imag()) > 1e-10 * (1.0 + std::abs(z.real()))) {
        throw ConfigError("multisoliton parameters give a complex potential");
      }
      v = z.real();
    } else {
      v = evaluate(model, xi);
    }
    if (!std::isfinite(v)) {
      throw ConfigError("potential is not finite at x = " + std::to_string(xi));
    }
    samples[static_cast<std::size_t>(i + nx)] = v;
  }
  return make_grid(L, std::move(samples), truncation_tol);
}

void write_table(const PotentialGrid& grid, std::ostream& os) {
  char buf[64];
  for (int i = -grid.nx; i <= grid.nx; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", grid.x(i), grid[i]);
    os << buf;
  }
}

}  // namespace nlsscat
