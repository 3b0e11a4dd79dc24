#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "singulib/model.hpp"
#include "singulib/nonlinearity.hpp"

namespace singulib {

/// 1/B1[f](s) = (-log F)(1 - f'F) and its de l'Hospital form
/// 1/B2[f](s) = f'F (log F)^2 (f f'' F / f' - 1).
struct BFunctionals {
  double s = 0.0;
  double B1_inv = 0.0;
  double B2_inv = 0.0;
  double err1 = 0.0;
  double err2 = 0.0;
  /// True when 1 - f'F < 1e-13 and the series route supplied it.
  bool cancellation_guarded = false;
};

/// Throws Error(Domain) if F(s) >= 1 and Error(Classification) when
/// 1 - f'F vanishes (the borderline f = e^s).
BFunctionals b_functionals(const TransformF& t, double s);

struct BEstimate {
  std::optional<double> B;       ///< absent when the samples do not settle
  double limit_inv = 0.0;        ///< extrapolated lim 1/B2
  double last_inv = 0.0;         ///< 1/B2 at the largest sample
  double fit_rms = 0.0;
  double A_estimate = 1.0;       ///< f'F at the largest sample
  double b1_b2_gap_first = 0.0;  ///< |1/B1 - 1/B2| at the start of the grid
  double b1_b2_gap_last = 0.0;   ///< ... and at the end
  std::vector<BFunctionals> samples;
  std::string note;
};

struct EstimateOptions {
  std::size_t points = 48;
  double a_max = 1e100;  ///< grid ends where a(s) reaches this
};

/// Samples 1/B2 on a geometric s-grid and extrapolates in 1/log s.
BEstimate estimate_B(const TransformF& t, const EstimateOptions& opts = {});

/// Remainders at one rho. The signed difference D_g - D_f feeds the
/// correction operator; values below the evaluation noise are reported
/// as exact zeros.
struct EpsilonSample {
  double rho = 0.0;
  double phi = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double S = 0.0;         ///< rho^{1/2} (eps1 + eps2)
  double dD = 0.0;        ///< D_g(psi) - D_f(phi), noise-filtered
  double H = 0.0;         ///< f(phi) F(phi)
  double Df = 0.0;        ///< 1 - f'(phi) F(phi)
  double minus_log_F = 0.0;
};

EpsilonSample epsilons_at(const TransformF& t, const ModelProblem& m, double rho, double phi_value,
                          const Functionals& fn);
EpsilonSample epsilons(const TransformF& t, const ModelProblem& m, double rho);

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct HypothesisResult {
  Verdict verdict = Verdict::Inconclusive;
  double first_decade_mean = 0.0;
  double last_decade_mean = 0.0;
  double last_decade_slope = 0.0;  ///< d log S / d log10 rho over the last decade
  double trend = 0.0;              ///< log10(last mean / first mean) per decade
  bool identically_zero = false;
  std::vector<EpsilonSample> samples;
};

struct HypothesisOptions {
  double rho_min = 10.0;
  double rho_max = 1e12;
  std::size_t per_decade = 12;
};

std::vector<double> rho_grid(const HypothesisOptions& opts);
HypothesisResult hypothesis_check(const TransformF& t, const ModelProblem& m, const std::vector<double>& grid);
HypothesisResult hypothesis_check(const TransformF& t, const ModelProblem& m, const HypothesisOptions& opts = {});

/// B for the comparison model: closed form for built-in families, then an
/// explicit override, then the numerical estimate.
double choose_model_B(const Nonlinearity& nl, std::optional<double> override_B, const BEstimate* estimate);

struct ClassificationReport {
  std::string description;
  BEstimate estimate;
  double model_B = 0.0;
  std::string model_B_source;
  HypothesisResult hypothesis;
  std::vector<std::string> warnings;
};

struct ClassifyOptions {
  EstimateOptions estimate;
  HypothesisOptions hypothesis;
  std::optional<double> B_override;
};

ClassificationReport classify(const TransformF& t, const ClassifyOptions& opts = {});

nlohmann::json to_json(const ClassificationReport& report);

}  // namespace singulib
