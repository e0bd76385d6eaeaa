#include "nlsscat/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "nlsscat/error.hpp"

namespace nlsscat {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class F>
auto in_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::complex<double> complex_entry(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError("complex entries must be a number or [re, im]");
}

json complex_json(std::complex<double> z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

MultisolitonParams multisoliton_from_json(const json& j) {
  reject_unknown(j, {"A", "b", "c"}, "potential.multisoliton");
  if (!j.contains("A") || !j.contains("b") || !j.contains("c")) {
    throw ConfigError("potential.multisoliton needs A, b and c");
  }
  const json& jb = j.at("b");
  const json& jc = j.at("c");
  if (!jb.is_array() || !jc.is_array()) throw ConfigError("multisoliton b and c must be arrays");
  const auto n = static_cast<Eigen::Index>(jb.size());
  CMatrix A = CMatrix::Zero(n, n);
  const json& jA = j.at("A");
  if (!jA.is_array() || static_cast<Eigen::Index>(jA.size()) != n) {
    throw ConfigError("multisoliton A must have as many rows as b has entries");
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = jA[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw ConfigError("multisoliton A must be square");
    }
    for (Eigen::Index c = 0; c < n; ++c) A(r, c) = complex_entry(row[static_cast<std::size_t>(c)]);
  }
  CVector b(n);
  CRowVector c(jc.size());
  for (Eigen::Index k = 0; k < n; ++k) b(k) = complex_entry(jb[static_cast<std::size_t>(k)]);
  for (std::size_t k = 0; k < jc.size(); ++k) c(static_cast<Eigen::Index>(k)) = complex_entry(jc[k]);
  return in_stage("multisoliton parameters", [&] { return MultisolitonParams(A, b, c); });
}

json multisoliton_to_json(const MultisolitonParams& p) {
  json A = json::array();
  for (Eigen::Index r = 0; r < p.A().rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < p.A().cols(); ++c) row.push_back(complex_json(p.A()(r, c)));
    A.push_back(row);
  }
  json b = json::array(), c = json::array();
  for (Eigen::Index k = 0; k < p.b().size(); ++k) b.push_back(complex_json(p.b()(k)));
  for (Eigen::Index k = 0; k < p.c().size(); ++k) c.push_back(complex_json(p.c()(k)));
  return {{"A", A}, {"b", b}, {"c", c}};
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  body(os);
  if (!os) throw ConfigError("write failed for " + path.string());
}

}  // namespace

PotentialModel PotentialSpec::build() const {
  if (model == "zero") return ZeroPotential{};
  if (model == "soliton") {
    soliton.validate();
    return soliton;
  }
  if (model == "multisoliton") return multisoliton ? *multisoliton : MultisolitonParams::four_soliton();
  if (model == "table") {
    if (table.empty()) throw ConfigError("table model needs a table path");
    return TablePotential::load(table);
  }
  throw ConfigError("unknown potential model '" + model + "' (expected zero, soliton, multisoliton or table)");
}

void RunConfig::validate() const {
  if (nx < 2) throw ConfigError("nx must be at least 2 (got " + std::to_string(nx) + ")");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L must be positive");
  if (!(truncation_tol > 0.0)) throw ConfigError("truncation_tol must be positive");
  if (pencil.N < 1) throw ConfigError("pencil.N must be positive");
  if (pencil.stride < 0) throw ConfigError("pencil.stride must be >= 0 (0 selects it automatically)");
  if (!(pencil.order_tol > 0.0)) throw ConfigError("pencil.order_tol must be positive");
  if (!(pencil.cluster_eps > 0.0)) throw ConfigError("pencil.cluster_eps must be positive");
  if (!(pencil.min_weight >= 0.0)) throw ConfigError("pencil.min_weight must be >= 0");
  lambda.points();
  if (potential.model == "table" && !fs::exists(potential.table)) {
    throw ConfigError("potential table '" + potential.table + "' does not exist");
  }
  if (potential.model == "soliton") potential.soliton.validate();
}

int RunConfig::resolved_stride() const {
  return pencil.stride > 0 ? pencil.stride : nx / (2 * pencil.N);
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j, {"potential", "L", "nx", "truncation_tol", "pencil", "lambda_grid", "out", "emit_kernels"},
                 "config");
  RunConfig cfg;
  if (j.contains("potential")) {
    const json& p = j.at("potential");
    reject_unknown(p, {"model", "soliton", "multisoliton", "table"}, "potential");
    read(p, "model", cfg.potential.model);
    read(p, "table", cfg.potential.table);
    if (p.contains("soliton")) {
      const json& s = p.at("soliton");
      reject_unknown(s, {"c", "a", "p"}, "potential.soliton");
      read(s, "c", cfg.potential.soliton.c);
      read(s, "a", cfg.potential.soliton.a);
      read(s, "p", cfg.potential.soliton.p);
    }
    if (p.contains("multisoliton")) cfg.potential.multisoliton = multisoliton_from_json(p.at("multisoliton"));
  }
  read(j, "L", cfg.L);
  read(j, "nx", cfg.nx);
  read(j, "truncation_tol", cfg.truncation_tol);
  if (j.contains("pencil")) {
    const json& p = j.at("pencil");
    reject_unknown(p, {"N", "stride", "order_tol", "cluster_eps", "min_weight"}, "pencil");
    read(p, "N", cfg.pencil.N);
    read(p, "stride", cfg.pencil.stride);
    read(p, "order_tol", cfg.pencil.order_tol);
    read(p, "cluster_eps", cfg.pencil.cluster_eps);
    read(p, "min_weight", cfg.pencil.min_weight);
  }
  if (j.contains("lambda_grid")) {
    const json& g = j.at("lambda_grid");
    reject_unknown(g, {"min", "max", "count"}, "lambda_grid");
    read(g, "min", cfg.lambda.min);
    read(g, "max", cfg.lambda.max);
    read(g, "count", cfg.lambda.count);
  }
  read(j, "out", cfg.out);
  read(j, "emit_kernels", cfg.emit_kernels);
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json pot = {{"model", potential.model},
              {"soliton", {{"c", potential.soliton.c}, {"a", potential.soliton.a}, {"p", potential.soliton.p}}},
              {"multisoliton", multisoliton_to_json(potential.multisoliton ? *potential.multisoliton
                                                                           : MultisolitonParams::four_soliton())},
              {"table", potential.table}};
  return {{"potential", pot},
          {"L", L},
          {"nx", nx},
          {"truncation_tol", truncation_tol},
          {"pencil",
           {{"N", pencil.N},
            {"stride", resolved_stride()},
            {"order_tol", pencil.order_tol},
            {"cluster_eps", pencil.cluster_eps},
            {"min_weight", pencil.min_weight}}},
          {"lambda_grid", {{"min", lambda.min}, {"max", lambda.max}, {"count", lambda.count}}},
          {"out", out},
          {"emit_kernels", emit_kernels}};
}

PipelineResult run_pipeline(const RunConfig& config, Stage upto) {
  in_stage("config", [&] { config.validate(); });
  PipelineResult res;
  res.grid = in_stage("potential", [&] {
    return tabulate(config.potential.build(), config.L, config.nx, config.truncation_tol);
  });
  for (const auto& w : res.grid.warnings) res.warnings.push_back("potential: " + w);

  in_stage("volterra", [&] {
    res.kbar = solve_auxiliary(res.grid, KernelKind::KBar);
    res.m = solve_auxiliary(res.grid, KernelKind::M);
  });
  in_stage("marchenko", [&] {
    res.omega_left = recover_left(*res.kbar, res.grid);
    res.omega_right = recover_right(*res.m, res.grid);
  });
  if (upto == Stage::Kernels) return res;

  if (upto != Stage::Scattering) {
    in_stage("pencil", [&] {
      const int N = config.pencil.N;
      const int stride = config.resolved_stride();
      if (stride < 1 || (2 * N - 1) * stride > config.nx) {
        throw ConfigError("nx = " + std::to_string(config.nx) + " gives too few kernel samples for pencil N = " +
                          std::to_string(N) + " (need (2N - 1) * stride <= nx)");
      }
      const auto count = static_cast<std::size_t>(2 * N);
      const auto step = static_cast<std::size_t>(stride);
      const SampleSeries left = decimate(res.omega_left.values, res.omega_left.spacing, step, count);
      const SampleSeries right = decimate(res.omega_right.values, res.omega_right.spacing, step, count);
      PencilOptions opts{N, config.pencil.order_tol, config.pencil.cluster_eps};
      res.has_spectral = true;
      res.left_model = fit_exponential_sum(left, opts);
      res.right_pencil = fit_exponential_sum(right, opts);
      if (res.left_model.terms.empty()) {
        res.right_model = res.right_pencil;
        res.right_model.terms.clear();
        res.warnings.push_back("pencil: left kernel is numerically zero; no bound states");
        return;
      }
      std::vector<std::pair<cplx, int>> nodes;
      for (const auto& t : res.left_model.terms) nodes.emplace_back(t.z, t.multiplicity);
      res.right_model = recover_coefficients(nodes, right, N);
      res.spectral = to_spectral_data(res.left_model, res.right_model, config.pencil.min_weight);
      for (const auto& w : res.spectral.warnings) res.warnings.push_back("pencil: " + w);
    });
  }
  if (upto == Stage::Spectral) return res;

  in_stage("scattering", [&] {
    const ScatteringProfiles left = make_profiles(res.grid, *res.kbar);
    const ScatteringProfiles right = make_profiles(res.grid, *res.m);
    res.scattering = scan(left, right, config.lambda);
  });
  return res;
}

void write_outputs(const RunConfig& config, const PipelineResult& result) {
  const fs::path dir = config.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());

  write_file(dir / "config.json", [&](std::ostream& os) { os << config.to_json().dump(2) << '\n'; });
  write_file(dir / "potential.txt", [&](std::ostream& os) { write_table(result.grid, os); });
  if (!result.omega_left.values.empty()) {
    write_file(dir / "omega_left.csv", [&](std::ostream& os) { result.omega_left.write_csv(os); });
    write_file(dir / "omega_left.json", [&](std::ostream& os) { result.omega_left.write_json(os); });
    write_file(dir / "omega_right.csv", [&](std::ostream& os) { result.omega_right.write_csv(os); });
    write_file(dir / "omega_right.json", [&](std::ostream& os) { result.omega_right.write_json(os); });
  }
  if (result.has_spectral) {
    write_file(dir / "spectral.json", [&](std::ostream& os) { result.spectral.write_json(os); });
    write_file(dir / "right_pencil.json", [&](std::ostream& os) {
      json j = json::array();
      for (const auto& t : result.right_pencil.terms) {
        const cplx s = -std::log(t.z) / result.right_pencil.delta;
        j.push_back({{"exponent", {{"re", s.real()}, {"im", s.imag()}}}, {"multiplicity", t.multiplicity}});
      }
      os << json{{"terms", j}, {"residual", result.right_pencil.residual}}.dump(1) << '\n';
    });
  }
  if (!result.scattering.empty()) {
    write_file(dir / "scattering.csv", [&](std::ostream& os) { write_scattering_csv(result.scattering, os); });
    write_file(dir / "scattering.json", [&](std::ostream& os) { write_scattering_json(result.scattering, os); });
  }
  if (config.emit_kernels && result.kbar && result.m) {
    write_file(dir / "kernel_kbar.json", [&](std::ostream& os) { result.kbar->write_json(os); });
    write_file(dir / "kernel_m.json", [&](std::ostream& os) { result.m->write_json(os); });
  }
  write_file(dir / "warnings.txt", [&](std::ostream& os) {
    for (const auto& w : result.warnings) os << w << '\n';
  });
}

MarchenkoKernel left_kernel(const PotentialModel& model, double L, int nx) {
  const PotentialGrid grid = tabulate(model, L, nx);
  return recover_left(solve_auxiliary(grid, KernelKind::KBar), grid);
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& config, const std::vector<int>& ns,
                                              const std::string& reference, int reference_nx) {
  if (ns.empty()) throw ConfigError("convergence study needs at least one n");
  const PotentialModel model = in_stage("potential", [&] { return config.potential.build(); });
  std::function<double(double)> ref;
  if (reference == "multisoliton") {
    const auto* p = std::get_if<MultisolitonParams>(&model);
    if (p == nullptr) throw ConfigError("reference 'multisoliton' needs a multisoliton potential");
    const MultisolitonParams params = *p;
    ref = [params](double a) { return multisoliton_kernel(params, a); };
  } else if (reference == "soliton" || reference == "soliton-fit") {
    const auto* p = std::get_if<SolitonParams>(&model);
    if (p == nullptr) throw ConfigError("reference '" + reference + "' needs a soliton potential");
    if (reference == "soliton") {
      if (p->a != p->p) throw ConfigError("closed-form soliton kernel needs a == p");
      const double c = p->c, a = p->a;
      ref = [c, a](double x) { return c * std::exp(-a * x); };
    } else {
      const MarchenkoKernel hi =
          in_stage("reference run", [&] { return left_kernel(model, config.L, reference_nx); });
      const int N = 25;
      const auto stride = static_cast<std::size_t>(reference_nx / (2 * N));
      const SampleSeries s = decimate(hi.values, hi.spacing, stride, 2 * N);
      const auto [S0, S1] = build_hankel(s, N, 1);
      const cplx z = solve_pencil(S0, S1).front();
      const ExponentialSumModel fit = recover_coefficients({{z, 1}}, s, N);
      const double rate = (-std::log(z) / s.delta).real();
      const double amp = fit.terms.front().coeffs.front().real();
      ref = [amp, rate](double x) { return amp * std::exp(-rate * x); };
    }
  } else {
    throw ConfigError("unknown reference '" + reference + "' (expected multisoliton, soliton or soliton-fit)");
  }

  std::vector<ConvergenceRow> rows;
  for (int n : ns) {
    if (n < 2) throw ConfigError("convergence n must be at least 2");
    ConvergenceRow row;
    row.nx = n;
    row.error = in_stage("convergence", [&] { return relative_error(left_kernel(model, config.L, n), ref); });
    if (!rows.empty()) row.ratio = rows.back().error / row.error;
    rows.push_back(row);
  }
  return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
  os << "n,error,ratio\n";
  char buf[96];
  for (const auto& r : rows) {
    if (r.ratio) {
      std::snprintf(buf, sizeof buf, "%d,%.6e,%.4f\n", r.nx, r.error, *r.ratio);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.6e,\n", r.nx, r.error);
    }
    os << buf;
  }
}

}  // namespace nlsscat
