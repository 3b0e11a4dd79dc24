#pragma once

#include <array>

#include "singulib/expr.hpp"
#include "singulib/jet.hpp"

namespace singulib {

/// a_1 = 1/a', a_{n+1} = a_n' / a' for n = 1..4, evaluated at one point.
using ASequence = std::array<double, 5>;

/// Requires a jet of order >= 5 with a'(s) > 0.
ASequence a_sequence_from_jet(const Jet& a);

/// Throws if a'(s) <= 0 or the jet cannot be evaluated.
ASequence a_sequence(const Expression& a, double s);

/// Largest |a_2/a_1| for which the truncated tail series is used.
inline constexpr double kTailGuard = 0.25;

struct TailEstimate {
  double value = 0.0;         ///< (a1+a2+a3+a4) e^{-a(s)}; may underflow
  double err_estimate = 0.0;  ///< 2|a5| e^{-a(s)}
  double scaled = 0.0;        ///< value * e^{a(s)} = f(s)F(s)
  double scaled_err = 0.0;
  double log_value = 0.0;     ///< log of value, never underflows
};

/// Four-term asymptotic value of F(s) = int_s^inf e^{-a}. Throws
/// Error(Domain) when |a_2/a_1| > kTailGuard.
TailEstimate F_tail(const Expression& a, double s);
TailEstimate F_tail_from_jet(const Jet& a);

struct ExpansionRatios {
  double logF = 0.0;
  double fF = 0.0;
  double fpF = 0.0;
  double ffppF_over_fp = 0.0;
};

/// Leading terms of log F, fF, f'F and f f'' F / f' for f = e^{a}.
ExpansionRatios expansion_ratios(const Expression& a, double s);
ExpansionRatios expansion_ratios_from_jet(const Jet& a);

/// Series forms of H = fF, D = 1 - f'F and E = f f'' F / f' - 1 built from
/// all five a_n. The O(1) cancellations inside D and E are carried out
/// symbolically, so the results keep full relative precision even when
/// D and E are far below machine epsilon.
struct SeriesFunctionals {
  double H = 0.0;
  double D = 0.0;
  double E = 0.0;
  double errH = 0.0;
  double errD = 0.0;
  double errE = 0.0;
};

SeriesFunctionals series_functionals(const Jet& a);

}  // namespace singulib
