#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "singulib/model.hpp"
#include "singulib/nonlinearity.hpp"
#include "singulib/profile.hpp"

namespace singulib {

/// Explicit model profile u = psi(rho) on the given rho values (any order).
RadialProfile model_profile(const ModelProblem& m, std::vector<double> rho);

/// u between nodes. Quintic Hermite using u, its first derivative and the
/// second derivative supplied by the ODE itself; in rho on the inner
/// segment and in r on the outer one.
class ProfileInterpolant {
 public:
  ProfileInterpolant(const RadialProfile& p, const Nonlinearity& nl);

  double rho_min() const { return rho_lo_; }
  double rho_max() const { return rho_hi_; }

  /// u and du/drho at rho in [rho_min, rho_max].
  void eval(double rho, double& u, double& u_rho) const;

 private:
  struct Knot {
    double x, y, d1, d2;
  };
  static void hermite(const std::vector<Knot>& k, double x, double& y, double& d1);

  std::vector<Knot> inner_;  // x = rho, increasing
  std::vector<Knot> outer_;  // x = r, increasing
  double rho_split_ = 0.0;
  double rho_lo_ = 0.0;
  double rho_hi_ = 0.0;
};

struct ResidualResult {
  double max_rel = 0.0;
  double inner_max = 0.0;
  double outer_max = 0.0;
  std::vector<double> per_node;  ///< aligned with profile nodes; NaN where no stencil applies
};

/// Relative residual of u'' + u'/r + f(u) = 0 at interior nodes. On the
/// inner segment the equation u_rho_rho + (e^{1-rho}/4) f(u) = 0 is checked
/// with a 13-point stencil on u_rho, relative to the source term. On the
/// outer segment u'' comes from a 7-point stencil on u' and the residual is
/// relative to the largest of the three terms.
ResidualResult ode_residual(const RadialProfile& p, const Nonlinearity& nl);

/// Main term of the singular expansion as a function of rho.
struct MainTerm {
  std::string name;
  double expected_order = 0.0;
  bool log_factor = false;  ///< remainder carries a log(-log r) factor
  bool exact = false;       ///< main term is the solution itself
  std::function<double(double)> u;
};

/// Known expansions: power_exp, sum_exp with 0 < r < q/2, iter_exp(1), model.
std::optional<MainTerm> main_term(const FamilySpec& spec);

struct ExpansionFit {
  std::string name;
  double alpha = 0.0;
  double expected = 0.0;
  bool log_factor = false;
  double alpha_half_window = 0.0;  ///< same fit on the upper half (log scale) of the window
  double rms = 0.0;
  double rho_lo = 0.0;
  double rho_hi = 0.0;
  std::size_t points = 0;
  double max_abs_dev = 0.0;
  bool reliable = true;
  bool skipped = false;
  bool pass = false;
  std::string note;
};

/// Fits |u - main| = c z^{-alpha} (log z)^beta with z = -log r over the
/// inner nodes with rho in [rho_lo, rho_hi].
ExpansionFit expansion_compare(const RadialProfile& p, const MainTerm& main, double rho_lo = 50.0,
                               double rho_hi = 2000.0);

/// Radial bump amplitude (1 - (r/radius)^2)^power on r < radius.
struct BumpTest {
  double radius = 0.5;
  int power = 3;
  double amplitude = 1.0;
};

struct DistributionalSample {
  double L = 0.0;          ///< -log eps
  double J = 0.0;          ///< integral of Phi_eps (u Lap phi + f(u) phi)
  double T_grad = 0.0;     ///< cut-off term with grad u
  double T_test = 0.0;     ///< cut-off term with grad phi
};

struct DistributionalRecord {
  BumpTest bump;
  std::vector<DistributionalSample> samples;
  double alpha = 0.0;       ///< decay exponent of |T_grad + T_test| in L
  double expected = 0.0;
  double J0 = 0.0;          ///< extrapolation of J to eps -> 0
  double scale = 0.0;       ///< integral of f(u) |phi|
  double max_identity_gap = 0.0;  ///< max |J - (T_grad + T_test)| / scale
  bool monotone = true;
  bool pass = false;
};

struct DistributionalOptions {
  std::vector<double> L_list = {16, 32, 64, 128, 256, 512};
  double alpha_tolerance = 0.15;
  double J0_tolerance = 1e-6;
};

/// Cut-off test of the distributional equation: requires the profile to
/// reach rho = 4 max(L) + 1 and the bump to sit inside the profile's range.
DistributionalRecord distributional_test(const RadialProfile& p, const Nonlinearity& nl, double B,
                                         const BumpTest& bump, const DistributionalOptions& opts = {});

enum class BoundVerdict { Holds, NotReached };
const char* to_string(BoundVerdict v);

struct BoundCheck {
  std::string name;
  double sigma = 0.0;
  BoundVerdict verdict = BoundVerdict::NotReached;
  double rho_onset = 0.0;   ///< inequality holds at every inner node with rho above this
  double worst = 0.0;       ///< extreme value of the checked quantity past the onset
  std::string detail;
};

/// Growth bounds on the inner segment for each sigma:
///   u <= (rho-1)^{1-1/B+sigma},  2|u_rho| (rho-1)^{1/B-sigma} <= 1,
///   f(u) r^2 rho^{1+1/B+sigma} bounded below (non-negative log-slope on the
///   top decade). Holds means the inequality is in force over at least the
///   innermost decade of rho.
std::vector<BoundCheck> bound_checks(const RadialProfile& p, const Nonlinearity& nl, double B,
                                     const std::vector<double>& sigmas);

struct FFBand {
  double rho_lo = 50.0;
  double rho_hi = 5000.0;
  double min = 0.0;
  double max = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

/// rho^{1/B} f(phi) F(phi) over [rho_lo, rho_hi]; passes inside a factor 10.
FFBand ff_band(const TransformF& t, const ModelProblem& m, double rho_lo = 50.0, double rho_hi = 5000.0,
               int points = 60);

/// Energy 2 int u_rho^2 drho of the inner segment from rho0 up to each decade.
std::vector<std::pair<double, double>> energy_trend(const RadialProfile& p);

struct VerificationReport {
  ResidualResult residual;
  std::optional<ExpansionFit> expansion;
  std::vector<DistributionalRecord> distributional;
  std::vector<BoundCheck> bounds;
  std::optional<FFBand> ff;
  std::vector<std::pair<double, double>> energy;
  std::vector<std::string> notes;
};

nlohmann::json to_json(const ExpansionFit& f);
nlohmann::json to_json(const DistributionalRecord& d);
nlohmann::json to_json(const BoundCheck& b);
nlohmann::json to_json(const FFBand& b);
nlohmann::json to_json(const VerificationReport& r);

}  // namespace singulib
