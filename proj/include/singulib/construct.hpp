#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "singulib/classify.hpp"
#include "singulib/model.hpp"
#include "singulib/nonlinearity.hpp"
#include "singulib/profile.hpp"

namespace singulib {

/// Emden-Fowler variable rho = 1 - 2 log r and its inverse.
double ef_map(double r);
double ef_unmap(double rho);

/// Nodes in t = sqrt(rho), uniform away from rho0 so the kernel
/// sin((2/sqrt(B))(t_rho - t)) is resolved with a fixed number of nodes per
/// period; graded finer close to rho0.
struct EFGrid {
  double rho0 = 0.0;
  double rho_max = 0.0;
  double h = 0.0;  ///< spacing in t on the uniform part
  int nodes_per_period = 0;
  std::vector<double> t;
  std::vector<double> rho;
};

inline constexpr int kMinNodesPerPeriod = 8;
/// Largest rho step near rho0 as a fraction of rho - 1.
inline constexpr double kGradeFraction = 0.05;

EFGrid make_ef_grid(double rho0, double rho_max, double B, int nodes_per_period = 32);

/// Pointwise operators of the correction equation
///   eta'' + (1/(B rho) + 3/(16 rho^2)) eta + I + L eta + N[eta] = 0.
double op_I(const TransformF& t, const ModelProblem& m, double rho);
double op_L(const TransformF& t, const ModelProblem& m, double rho);
double op_N(const TransformF& t, const ModelProblem& m, double eta, double rho);

/// e^{a(phi + eta) - a(phi)} - 1 - a'(phi) eta without cancellation.
/// `a_phi` is a(phi) in extended precision and `jet` the order-5 jet at phi.
double exp_remainder(const Nonlinearity& nl, const Jet& jet, long double a_phi, double phi, double eta);

/// Quantities along phi(rho) that the operator T needs at one point.
struct BackgroundPoint {
  double rho = 0.0;
  double phi = 0.0;
  double phi_rho = 0.0;  ///< dphi/drho = H (1 - 1/rho)
  double H = 0.0;
  double I = 0.0;
  double L = 0.0;
  double Nfac = 0.0;     ///< H / (B rho)
  double eps = 0.0;      ///< eps1 + eps2
  long double a_phi = 0.0L;
  Jet jet;
};

struct CorrectionField {
  EFGrid grid;
  std::vector<double> eta;
  std::vector<double> eta_prime;  ///< d eta / d rho
  std::vector<double> weight;     ///< H(phi) sup_{tau >= rho}(eps1 + eps2)
  std::vector<double> phi;
  std::vector<double> phi_prime;
  double weighted_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> ratios;      ///< step-norm ratios of successive iterates
  std::vector<double> step_norms;
  double tail_leading = 0.0;       ///< size of the beyond-rho_max correction
  double tail_bound = 0.0;         ///< bound on what the correction misses
  double rho0_requested = 0.0;
  int escalations = 0;
  std::vector<std::string> notes;
};

/// Integral operator T on a fixed grid. Background data along phi is
/// computed once; each application is a quadrature sweep.
class CorrectionOperator {
 public:
  CorrectionOperator(const TransformF& t, const ModelProblem& m, EFGrid grid, bool include_N = true);

  const EFGrid& grid() const { return grid_; }
  const std::vector<BackgroundPoint>& nodes() const { return nodes_; }
  const std::vector<double>& weight() const { return weight_; }
  double B() const { return B_; }

  /// T[eta] together with its rho-derivative from the cosine kernel.
  void apply(const std::vector<double>& eta, const std::vector<double>& eta_prime, std::vector<double>& out,
             std::vector<double>& out_prime, double* tail_leading = nullptr, double* tail_bound = nullptr) const;

  /// max |v| / weight over nodes (0/0 counts as 0).
  double norm(const std::vector<double>& v) const;

  /// Empty field on this grid with the background columns filled in.
  CorrectionField zero_field() const;

 private:
  double source(const BackgroundPoint& p, double eta) const;

  const TransformF* t_;
  double B_;
  double c_;  // 2 / sqrt(B)
  EFGrid grid_;
  bool include_N_;
  std::vector<BackgroundPoint> nodes_;
  std::vector<BackgroundPoint> gauss_;  // 8 per panel
  std::vector<double> weight_;
};

CorrectionField apply_T(const CorrectionOperator& op, const CorrectionField& field);

struct ConstructOptions {
  double rho0 = 7.0;
  double rho_max = 1e4;
  double tol = 1e-8;
  int max_iterations = 50;
  int nodes_per_period = 32;
  int max_escalations = 5;
  double escalation_factor = 1.5;
  /// A failed hypothesis verdict aborts with Error(HypothesisViolated).
  std::optional<Verdict> verdict;
};

CorrectionField solve_correction(const TransformF& t, const ModelProblem& m, const ConstructOptions& opts = {});

/// Inner segment u = phi + eta with u_rho = phi' + eta'.
RadialProfile assemble_inner(const CorrectionField& c);

nlohmann::json to_json(const CorrectionField& c);

}  // namespace singulib
