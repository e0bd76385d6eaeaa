// Command-line driver: potential -> kernels -> Marchenko -> spectral data -> scattering.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nlsscat/error.hpp"
#include "nlsscat/pipeline.hpp"

using namespace nlsscat;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  int nx = 0;
  double L = 0.0;
  std::string model;
  std::string table;
  int pencil_N = 0;
  int pencil_stride = -1;
  std::string lambda_grid;
  bool emit_kernels = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON run configuration");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--n", o.nx, "grid half-size nx (h = L / nx)");
  sub->add_option("--L", o.L, "support half-width L");
  sub->add_option("--model", o.model, "potential model: zero, soliton, multisoliton, table");
  sub->add_option("--table", o.table, "potential table (two columns or JSON pairs); implies --model table");
  sub->add_option("--pencil-N", o.pencil_N, "Hankel order N");
  sub->add_option("--pencil-stride", o.pencil_stride, "kernel sample stride (0 = automatic)");
  sub->add_option("--lambda-grid", o.lambda_grid, "spectral grid MIN:MAX:COUNT");
  sub->add_flag("--emit-kernels", o.emit_kernels, "also write the solved kernel triangles");
}

LambdaGrid parse_lambda_grid(const std::string& s) {
  LambdaGrid g;
  std::istringstream is(s);
  std::string a, b, c;
  if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, c) || a.empty() ||
      b.empty() || c.empty()) {
    throw ConfigError("--lambda-grid expects MIN:MAX:COUNT, got '" + s + "'");
  }
  try {
    std::size_t pos = 0;
    g.min = std::stod(a, &pos);
    if (pos != a.size()) throw std::invalid_argument(a);
    g.max = std::stod(b, &pos);
    if (pos != b.size()) throw std::invalid_argument(b);
    g.count = std::stoi(c, &pos);
    if (pos != c.size()) throw std::invalid_argument(c);
  } catch (const std::logic_error&) {
    throw ConfigError("--lambda-grid expects MIN:MAX:COUNT, got '" + s + "'");
  }
  return g;
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (!o.out.empty()) cfg.out = o.out;
  if (o.nx != 0) cfg.nx = o.nx;
  if (o.L != 0.0) cfg.L = o.L;
  if (!o.model.empty()) cfg.potential.model = o.model;
  if (!o.table.empty()) {
    cfg.potential.model = "table";
    cfg.potential.table = o.table;
  }
  if (o.pencil_N != 0) cfg.pencil.N = o.pencil_N;
  if (o.pencil_stride >= 0) cfg.pencil.stride = o.pencil_stride;
  if (!o.lambda_grid.empty()) cfg.lambda = parse_lambda_grid(o.lambda_grid);
  if (o.emit_kernels) cfg.emit_kernels = true;
  cfg.validate();
  return cfg;
}

void report(const PipelineResult& res) {
  for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (res.has_spectral) {
    std::printf("bound states: %zu\n", res.spectral.bound_states.size());
    for (std::size_t j = 0; j < res.spectral.bound_states.size(); ++j) {
      const auto lam = res.spectral.bound_states[j];
      const auto g = res.spectral.norming_left[j].front();
      std::printf("  lambda = %+.6f %+.6fi  m = %d  gamma_left = %+.6f %+.6fi\n", lam.real(), lam.imag(),
                  res.spectral.multiplicities[j], g.real(), g.imag());
    }
  }
  if (!res.scattering.empty()) {
    double r = 0.0, l = 0.0, dt = 0.0;
    for (const auto& s : res.scattering) {
      r = std::max(r, std::abs(s.R));
      l = std::max(l, std::abs(s.L));
      dt = std::max(dt, s.disc_T);
    }
    std::printf("max |R| = %.3e  max |L| = %.3e  max T discrepancy = %.3e\n", r, l, dt);
  }
}

std::vector<int> parse_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("--ns expects comma-separated integers, got '" + s + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Initial scattering data of the focusing NLS equation"};
  app.require_subcommand(1);

  Overrides o;
  std::string ns = "300,600,900,1200";
  std::string reference;
  int reference_n = 4800;
  std::string synth_path;

  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write all outputs");
  auto* kernels = app.add_subcommand("kernels", "solve the auxiliary kernels and Marchenko kernels");
  auto* spectral = app.add_subcommand("spectral", "kernels plus bound states and norming constants");
  auto* scattering = app.add_subcommand("scattering", "kernels plus T, L, R on the lambda grid");
  auto* convergence = app.add_subcommand("convergence", "relative error of the left kernel over a list of n");
  auto* synth = app.add_subcommand("synth", "tabulate a potential model");
  for (auto* sub : {pipeline, kernels, spectral, scattering, convergence, synth}) add_common(sub, o);
  convergence->add_option("--ns", ns, "comma-separated grid sizes");
  convergence->add_option("--reference", reference, "multisoliton, soliton or soliton-fit");
  convergence->add_option("--reference-n", reference_n, "grid size of the soliton-fit reference run");
  synth->add_option("--output,-o", synth_path, "table file to write ('-' for stdout)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = resolve(o);
    if (synth->parsed()) {
      const PotentialGrid grid = tabulate(cfg.potential.build(), cfg.L, cfg.nx, cfg.truncation_tol);
      for (const auto& w : grid.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      if (synth_path == "-") {
        write_table(grid, std::cout);
      } else {
        std::ofstream os(synth_path);
        if (!os) throw ConfigError("cannot write " + synth_path);
        write_table(grid, os);
      }
      return 0;
    }
    if (convergence->parsed()) {
      if (reference.empty()) reference = cfg.potential.model == "soliton" ? "soliton-fit" : cfg.potential.model;
      const auto rows = convergence_study(cfg, parse_list(ns), reference, reference_n);
      write_convergence_csv(rows, std::cout);
      std::filesystem::create_directories(cfg.out);
      std::ofstream os(std::filesystem::path(cfg.out) / "convergence.csv");
      if (!os) throw ConfigError("cannot write convergence.csv in " + cfg.out);
      write_convergence_csv(rows, os);
      return 0;
    }
    Stage stage = Stage::All;
    if (kernels->parsed()) stage = Stage::Kernels;
    if (spectral->parsed()) stage = Stage::Spectral;
    if (scattering->parsed()) stage = Stage::Scattering;
    if (kernels->parsed()) cfg.emit_kernels = true;
    const PipelineResult res = run_pipeline(cfg, stage);
    write_outputs(cfg, res);
    report(res);
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
