#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "singulib/classify.hpp"
#include "singulib/construct.hpp"
#include "singulib/nonlinearity.hpp"
#include "singulib/shoot.hpp"
#include "singulib/verify.hpp"

namespace singulib {

/// Bump test function whose radius is a fraction of the Dirichlet radius.
struct BumpSpec {
  double radius_fraction = 0.5;
  int power = 3;
};

/// Everything a run needs. Parsed from JSON with path-to-field diagnostics;
/// to_json gives back the fully resolved form embedded in every report.
struct RunConfig {
  FamilySpec nonlinearity;
  std::optional<double> B_override;
  EstimateOptions estimate;
  HypothesisOptions hypothesis;
  ConstructOptions construct;
  /// Matching radius; when set it fixes rho0 = 1 - 2 log r0.
  std::optional<double> r0;
  ShootOptions shoot;
  std::vector<double> sigma_list = {0.1};
  std::vector<double> eps_list;  ///< cut-off parameters; L = -log eps
  std::vector<BumpSpec> bumps = {{0.3, 3}, {0.6, 4}, {0.9, 5}};
  double fit_rho_lo = 50.0;
  double fit_rho_hi = 2000.0;
  unsigned threads = 0;

  RunConfig();
};

/// Accepts either a full run config or a bare nonlinearity object.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

/// Pre-canned configurations for the worked examples ("example3.1" .. "example3.4").
RunConfig demo_config(const std::string& name, std::optional<double> q, std::optional<double> r);

/// Results of the pipeline stages that ran. Later stages are absent when an
/// earlier one stopped the run.
struct PipelineResult {
  RunConfig config;
  ClassificationReport classification;
  std::optional<CorrectionField> correction;
  std::optional<RadialProfile> profile;  ///< inner, or full after shooting
  std::optional<DirichletResult> dirichlet;
  std::optional<ShootDiagnostics> shoot_diag;
  std::optional<VerificationReport> verification;
  std::optional<ResidualResult> residual;
  bool hypothesis_failed = false;
  std::string failure;  ///< message of the error that stopped the run
};

enum class Stage { Classify, Construct, Extend, Verify };

/// Runs the stages up to `last`. A failed hypothesis verdict stops the run
/// before construction and sets hypothesis_failed; other errors propagate.
PipelineResult run_pipeline(const RunConfig& config, Stage last);

/// The report a subcommand writes: resolved config plus stage outputs.
nlohmann::json report_json(const PipelineResult& r, Stage last);

/// Profile table with columns r, rho, u, u_prime, phi, eta, residual,
/// segment (RFC 4180, CRLF line ends, NaN as an empty field).
void write_profile_csv(std::ostream& os, const RadialProfile& p, const std::vector<double>* residual = nullptr);

}  // namespace singulib
