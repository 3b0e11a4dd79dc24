#include "singulib/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "singulib/error.hpp"

namespace singulib {

ASequence a_sequence_from_jet(const Jet& a) {
  if (a.order() < 5) throw Error(ErrorKind::InvalidArgument, "a_sequence needs a jet of order 5");
  if (!(a[1] > 0.0)) {
    throw Error(ErrorKind::Domain, "a'(s) must be positive, got " + std::to_string(a[1]));
  }
  const Jet ap = a.derivative();  // a', a'', ..., a^(5)
  ASequence out{};
  Jet an = Jet::constant(1.0, ap.order()) / ap;
  out[0] = an.value();
  for (int n = 1; n < 5; ++n) {
    Jet next = an.derivative();
    an = next / ap.truncated(next.order());
    out[static_cast<std::size_t>(n)] = an.value();
  }
  return out;
}

ASequence a_sequence(const Expression& a, double s) { return a_sequence_from_jet(eval_jet(a, s, 5)); }

TailEstimate F_tail_from_jet(const Jet& a) {
  const ASequence an = a_sequence_from_jet(a);
  if (std::abs(an[1] / an[0]) > kTailGuard) {
    throw Error(ErrorKind::Domain, "tail series not valid: |a2/a1| = " +
                                       std::to_string(std::abs(an[1] / an[0])) + " > 0.25");
  }
  TailEstimate t;
  t.scaled = an[0] + an[1] + an[2] + an[3];
  t.scaled_err = 2.0 * std::abs(an[4]);
  const double decay = std::exp(-a.value());
  t.value = t.scaled * decay;
  t.err_estimate = t.scaled_err * decay;
  t.log_value = std::log(t.scaled) - a.value();
  return t;
}

TailEstimate F_tail(const Expression& a, double s) { return F_tail_from_jet(eval_jet(a, s, 5)); }

ExpansionRatios expansion_ratios_from_jet(const Jet& a) {
  const ASequence an = a_sequence_from_jet(a);
  if (std::abs(an[1] / an[0]) > kTailGuard) {
    throw Error(ErrorKind::Domain, "expansion not valid: |a2/a1| > 0.25");
  }
  const double a1 = a[1], a2 = a[2], a3 = a[3];
  const double a1sq = a1 * a1;
  ExpansionRatios r;
  r.logF = -a.value() - std::log(a1);
  r.fF = 1.0 / a1;
  r.fpF = 1.0 - a2 / a1sq + (3.0 * a2 * a2 - a1 * a3) / (a1sq * a1sq);
  r.ffppF_over_fp = 1.0 + (2.0 * a2 * a2 - a1 * a3) / (a1sq * a1sq);
  return r;
}

ExpansionRatios expansion_ratios(const Expression& a, double s) {
  return expansion_ratios_from_jet(eval_jet(a, s, 5));
}

SeriesFunctionals series_functionals(const Jet& a) {
  const ASequence an = a_sequence_from_jet(a);
  const double ap = a[1];
  const double curv = a[2] / ap;
  const double tail2 = an[1] + an[2] + an[3] + an[4];
  const double tail3 = an[2] + an[3] + an[4];

  // First omitted term a6 extrapolated from the ratio a5/a4.
  double next = 0.0;
  if (an[3] != 0.0) next = an[4] * (an[4] / an[3]);
  const double trunc = 2.0 * std::abs(next);
  const double eps4 = 4.0 * std::numeric_limits<double>::epsilon();

  SeriesFunctionals out;
  out.H = an[0] + tail2;
  out.D = -ap * tail2;
  // E = a' H - 1 + (a''/a') H; the a' a2 + (a''/a') a1 pair cancels exactly.
  out.E = ap * tail3 + curv * tail2;
  // D and E never form 1 - (...) numerically, so rounding stays relative.
  out.errH = trunc + eps4 * std::abs(out.H);
  out.errD = ap * trunc + eps4 * std::abs(out.D);
  out.errE = (ap + std::abs(curv)) * trunc + eps4 * std::abs(out.E);
  return out;
}

}  // namespace singulib
