#include "nlsscat/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "json.hpp"
#include "nlsscat/error.hpp"

namespace nlsscat {

namespace {

cplx ipow(cplx z, long k) {
  cplx result = 1.0;
  while (k > 0) {
    if (k & 1) result *= z;
    z *= z;
    k >>= 1;
  }
  return result;
}

cplx power(cplx z, double k) {
  if (k >= 0.0 && k == std::floor(k) && k < 1e15) return ipow(z, static_cast<long>(k));
  return std::pow(z, k);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

nlohmann::json to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace

void SampleSeries::validate() const {
  if (values.size() < 4 || values.size() % 2 != 0) {
    throw ConfigError("sample series needs an even number (>= 4) of samples");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("sample spacing must be positive");
  for (const auto& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw ConfigError("samples must be finite");
  }
}

SampleSeries decimate(const std::vector<double>& data, double spacing, std::size_t stride, std::size_t count) {
  if (stride == 0) throw ConfigError("decimation stride must be positive");
  if ((count - 1) * stride >= data.size()) {
    throw ConfigError("decimation needs " + std::to_string((count - 1) * stride + 1) + " samples, have " +
                      std::to_string(data.size()));
  }
  SampleSeries s;
  s.delta = spacing * static_cast<double>(stride);
  s.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) s.values[k] = data[k * stride];
  return s;
}

int ExponentialSumModel::order() const {
  int m = 0;
  for (const auto& t : terms) m += t.multiplicity;
  return m;
}

cplx ExponentialSumModel::eval(double k) const {
  cplx sum = 0.0;
  for (const auto& t : terms) {
    const cplx zk = power(t.z, k);
    for (std::size_t s = 0; s < t.coeffs.size(); ++s) sum += t.coeffs[s] * std::pow(k, static_cast<double>(s)) * zk;
  }
  return sum;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> build_hankel(const SampleSeries& series, int N, int M) {
  if (N < 1 || M < 1 || M > N) throw ConfigError("Hankel sizes need 1 <= M <= N");
  if (static_cast<std::size_t>(N + M) > series.values.size()) {
    throw ConfigError("not enough samples for an " + std::to_string(N) + " x " + std::to_string(M) +
                      " Hankel pencil (need N + M <= " + std::to_string(series.values.size()) + ")");
  }
  Eigen::MatrixXcd S0(N, M), S1(N, M);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) {
      S0(i, j) = series.values[static_cast<std::size_t>(i + j)];
      S1(i, j) = series.values[static_cast<std::size_t>(i + j + 1)];
    }
  }
  return {S0, S1};
}

int estimate_order(const SampleSeries& series, int N, double tol) {
  if (N < 1 || static_cast<std::size_t>(2 * N) > series.values.size()) {
    throw ConfigError("order estimate needs 1 <= N <= len/2");
  }
  double peak = 0.0;
  for (const auto& v : series.values) peak = std::max(peak, std::abs(v));
  if (peak < 1e-14) return 0;
  Eigen::MatrixXcd S0(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) S0(i, j) = series.values[static_cast<std::size_t>(i + j)];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S0);
  const auto& sv = svd.singularValues();
  int m = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > tol * sv(0)) ++m;
  return m;
}

std::vector<cplx> solve_pencil(const Eigen::MatrixXcd& S0, const Eigen::MatrixXcd& S1) {
  if (S0.rows() != S1.rows() || S0.cols() != S1.cols() || S0.cols() == 0) {
    throw ConfigError("pencil matrices must be nonempty and of equal shape");
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const Eigen::Index M = S0.cols();
  if (!(sv(M - 1) >= 1e-12 * sv(0))) {
    throw NumericalError("Hankel matrix is rank deficient (sigma_M / sigma_1 < 1e-12); re-estimate the order M");
  }
  const Eigen::MatrixXcd G =
      sv.cwiseInverse().asDiagonal() * (svd.matrixU().adjoint() * S1 * svd.matrixV());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(G, false);
  if (es.info() != Eigen::Success) throw NumericalError("pencil eigenvalue iteration did not converge");
  const auto& ev = es.eigenvalues();
  return std::vector<cplx>(ev.data(), ev.data() + ev.size());
}

std::vector<std::pair<cplx, int>> cluster_multiplicities(const std::vector<cplx>& eigs, double eps) {
  if (!(eps > 0.0)) throw ConfigError("cluster tolerance must be positive");
  std::vector<cplx> sums;
  std::vector<int> counts;
  for (const auto& z : eigs) {
    bool placed = false;
    for (std::size_t c = 0; c < sums.size(); ++c) {
      const cplx centroid = sums[c] / static_cast<double>(counts[c]);
      if (std::abs(z - centroid) <= eps * std::max(std::abs(centroid), std::abs(z))) {
        sums[c] += z;
        ++counts[c];
        placed = true;
        break;
      }
    }
    if (!placed) {
      sums.push_back(z);
      counts.push_back(1);
    }
  }
  std::vector<std::pair<cplx, int>> out;
  for (std::size_t c = 0; c < sums.size(); ++c) out.emplace_back(sums[c] / static_cast<double>(counts[c]), counts[c]);
  return out;
}

ExponentialSumModel recover_coefficients(const std::vector<std::pair<cplx, int>>& nodes, const SampleSeries& series,
                                         int rows) {
  if (nodes.empty()) throw ConfigError("coefficient fit needs at least one node");
  int M = 0;
  for (const auto& [z, m] : nodes) {
    if (m < 1) throw ConfigError("multiplicities must be positive");
    M += m;
  }
  const int total = static_cast<int>(series.values.size());
  if (rows <= 0) rows = total;
  if (rows > total) throw ConfigError("coefficient fit asks for more rows than samples");
  if (rows < M) throw ConfigError("coefficient fit needs at least as many rows as unknowns");

  // Casorati matrix, columns k^s z_j^k with 0^0 = 1
  Eigen::MatrixXcd C(rows, M);
  Eigen::VectorXcd rhs(rows);
  for (int k = 0; k < rows; ++k) {
    int col = 0;
    for (const auto& [z, m] : nodes) {
      const cplx zk = ipow(z, k);
      for (int s = 0; s < m; ++s) C(k, col++) = std::pow(static_cast<double>(k), s) * zk;
    }
    rhs(k) = series.values[static_cast<std::size_t>(k)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXcd coef = svd.solve(rhs);

  ExponentialSumModel model;
  model.delta = series.delta;
  model.alpha0 = series.alpha0;
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
  if (cond > 1e12) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "Casorati matrix is ill-conditioned (condition %.2e)", cond);
    model.warnings.emplace_back(buf);
  }
  int col = 0;
  for (const auto& [z, m] : nodes) {
    ExponentialTerm t;
    t.z = z;
    t.multiplicity = m;
    for (int s = 0; s < m; ++s) t.coeffs.push_back(coef(col++));
    model.terms.push_back(std::move(t));
  }
  for (int k = 0; k < total; ++k) {
    model.residual = std::max(model.residual, std::abs(model.eval(k) - series.values[static_cast<std::size_t>(k)]));
  }
  return model;
}

ExponentialSumModel fit_exponential_sum(const SampleSeries& series, const PencilOptions& opts) {
  series.validate();
  const int M = estimate_order(series, opts.N, opts.order_tol);
  if (M == 0) {
    ExponentialSumModel empty;
    empty.delta = series.delta;
    empty.alpha0 = series.alpha0;
    for (const auto& v : series.values) empty.residual = std::max(empty.residual, std::abs(v));
    return empty;
  }
  const auto [S0, S1] = build_hankel(series, opts.N, M);
  const auto eigs = solve_pencil(S0, S1);
  const auto nodes = cluster_multiplicities(eigs, opts.cluster_eps);
  return recover_coefficients(nodes, series, opts.N);
}

std::vector<cplx> norming_constants(const ExponentialTerm& term, cplx exponent, double delta, double alpha0) {
  const int m = term.multiplicity;
  std::vector<cplx> gamma(static_cast<std::size_t>(m));
  const cplx shift = std::exp(exponent * alpha0);
  for (int r = 0; r < m; ++r) {
    cplx sum = 0.0;
    for (int s = r; s < m; ++s) {
      sum += term.coeffs[static_cast<std::size_t>(s)] * std::pow(delta, -s) * binomial(s, r) *
             std::pow(-alpha0, s - r);
    }
    gamma[static_cast<std::size_t>(r)] = factorial(r) * shift * sum;
  }
  return gamma;
}

SpectralData to_spectral_data(const ExponentialSumModel& left, const std::optional<ExponentialSumModel>& right,
                              double min_weight) {
  if (left.terms.empty()) throw ConfigError("spectral conversion needs a nonempty left model");
  double biggest = 0.0;
  for (const auto& t : left.terms)
    for (const auto& c : t.coeffs) biggest = std::max(biggest, std::abs(c));

  struct Kept {
    cplx s;
    const ExponentialTerm* term;
  };
  std::vector<Kept> kept;
  SpectralData out;
  char buf[200];
  for (const auto& t : left.terms) {
    const cplx s = -std::log(t.z) / left.delta;
    double weight = 0.0;
    for (const auto& c : t.coeffs) weight = std::max(weight, std::abs(c));
    if (!(s.real() > 0.0)) {
      std::snprintf(buf, sizeof buf, "dropped non-decaying term z = %.6g%+.6gi (Re s = %.3e)", t.z.real(),
                    t.z.imag(), s.real());
      out.warnings.emplace_back(buf);
      continue;
    }
    if (weight < min_weight * biggest) {
      std::snprintf(buf, sizeof buf, "dropped negligible term s = %.6g%+.6gi (|c| = %.3e)", s.real(), s.imag(),
                    weight);
      out.warnings.emplace_back(buf);
      continue;
    }
    kept.push_back({s, &t});
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) {
    return a.s.real() != b.s.real() ? a.s.real() < b.s.real() : a.s.imag() < b.s.imag();
  });

  for (const auto& k : kept) {
    out.exponents.push_back(k.s);
    out.bound_states.push_back(cplx(0.0, 1.0) * k.s);
    out.multiplicities.push_back(k.term->multiplicity);
    out.norming_left.push_back(norming_constants(*k.term, k.s, left.delta, left.alpha0));
    if (right) {
      const ExponentialTerm* match = nullptr;
      for (const auto& rt : right->terms) {
        if (std::abs(rt.z - k.term->z) <= 1e-6 * std::abs(k.term->z)) {
          match = &rt;
          break;
        }
      }
      if (match == nullptr || match->multiplicity != k.term->multiplicity) {
        throw NumericalError("right model nodes do not match the left nodes within 1e-6");
      }
      const cplx sr = -std::log(match->z) / right->delta;
      out.norming_right.push_back(norming_constants(*match, sr, right->delta, right->alpha0));
    }
  }
  for (const auto& w : left.warnings) out.warnings.push_back("left fit: " + w);
  if (right)
    for (const auto& w : right->warnings) out.warnings.push_back("right fit: " + w);
  return out;
}

void SpectralData::write_json(std::ostream& os) const {
  nlohmann::json j;
  auto list = [](const std::vector<cplx>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& z : v) a.push_back(to_json(z));
    return a;
  };
  auto nested = [&](const std::vector<std::vector<cplx>>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& g : v) a.push_back(list(g));
    return a;
  };
  j["exponents"] = list(exponents);
  j["bound_states"] = list(bound_states);
  j["multiplicities"] = multiplicities;
  j["norming_left"] = nested(norming_left);
  j["norming_right"] = nested(norming_right);
  j["warnings"] = warnings;
  os << j.dump(1) << '\n';
}

}  // namespace nlsscat
