#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace singulib {

enum class Segment { InnerConstructed, OuterShot };
const char* to_string(Segment s);

/// One sample of a radial profile. rho = 1 - 2 log r is the primary
/// coordinate: r itself underflows double range once rho exceeds ~1490.
struct ProfileNode {
  double rho = 0.0;
  double u = 0.0;
  double u_rho = 0.0;  ///< du/drho; u'(r) = -2 u_rho / r
  double phi = std::nan("");
  double eta = std::nan("");
  Segment segment = Segment::InnerConstructed;

  long double r() const { return std::exp(0.5L * (1.0L - static_cast<long double>(rho))); }
  long double u_prime() const { return -2.0L * static_cast<long double>(u_rho) / r(); }
};

/// Nodes ordered by increasing r (decreasing rho).
struct RadialProfile {
  std::vector<ProfileNode> nodes;
  double r0 = 0.0;    ///< matching radius between the segments
  double rho0 = 0.0;
  std::optional<double> R;  ///< Dirichlet radius once shot
  std::vector<std::string> notes;

  std::size_t count(Segment s) const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.segment == s ? 1 : 0;
    return n;
  }
  std::vector<ProfileNode> segment(Segment s) const {
    std::vector<ProfileNode> out;
    for (const auto& node : nodes)
      if (node.segment == s) out.push_back(node);
    return out;
  }
};

}  // namespace singulib
