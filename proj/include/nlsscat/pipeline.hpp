#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlsscat/marchenko.hpp"
#include "nlsscat/pencil.hpp"
#include "nlsscat/potential.hpp"
#include "nlsscat/scatmat.hpp"
#include "nlsscat/volterra.hpp"

namespace nlsscat {

struct PotentialSpec {
  std::string model = "multisoliton";  ///< zero | soliton | multisoliton | table
  SolitonParams soliton;
  std::optional<MultisolitonParams> multisoliton;  ///< unset: the four-soliton example
  std::string table;

  PotentialModel build() const;
};

struct PencilSettings {
  int N = 25;
  int stride = 0;  ///< 0: floor(nx / (2N))
  double order_tol = 1e-10;
  double cluster_eps = 1e-6;
  double min_weight = 1e-2;
};

/// Everything a run needs. JSON keys mirror the field names; see README.
struct RunConfig {
  PotentialSpec potential;
  double L = 15.0;
  int nx = 300;
  double truncation_tol = 1e-12;
  PencilSettings pencil;
  LambdaGrid lambda;
  std::string out = "out";
  bool emit_kernels = false;

  void validate() const;
  int resolved_stride() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct PipelineResult {
  PotentialGrid grid;
  std::optional<KernelTriangle> kbar;
  std::optional<KernelTriangle> m;
  MarchenkoKernel omega_left;
  MarchenkoKernel omega_right;
  ExponentialSumModel left_model;
  ExponentialSumModel right_model;       ///< right samples fitted on the left nodes
  ExponentialSumModel right_pencil;      ///< independent right-side pencil
  SpectralData spectral;
  bool has_spectral = false;
  std::vector<ScatteringSample> scattering;
  std::vector<std::string> warnings;
};

enum class Stage { Kernels, Spectral, Scattering, All };

/// Runs the stages in order. Errors are rethrown with the stage name
/// prepended, keeping the ConfigError / NumericalError type.
PipelineResult run_pipeline(const RunConfig& config, Stage upto = Stage::All);

/// Writes config.json and whatever the result holds into config.out.
void write_outputs(const RunConfig& config, const PipelineResult& result);

struct ConvergenceRow {
  int nx = 0;
  double error = 0.0;
  std::optional<double> ratio;  ///< previous error / this error
};

/// Reference ids: "multisoliton" (c e^{-alpha A} b), "soliton" (c e^{-a alpha},
/// needs a == p), "soliton-fit" (single exponential fitted to a run at
/// reference_nx).
std::vector<ConvergenceRow> convergence_study(const RunConfig& config, const std::vector<int>& ns,
                                              const std::string& reference, int reference_nx = 4800);

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os);

/// Left Marchenko kernel only (grid, KBAR triangle, recursion).
MarchenkoKernel left_kernel(const PotentialModel& model, double L, int nx);

}  // namespace nlsscat
