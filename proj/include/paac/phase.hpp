#pragma once

#include <cstddef>

#include "paac/common.hpp"

namespace paac {

enum class PhaseKind { linear, quadratic, hard_switch };

// Transition function M(k): monotone nonincreasing from M(0)=1 to
// M(k_total)=0 over the whole training run.
struct PhaseSchedule {
  PhaseKind kind = PhaseKind::linear;
  std::size_t k_total = 0;
};

inline double phase_value(const PhaseSchedule& s, std::size_t k) {
  if (k >= s.k_total) return 0.0;  // clamp above (and the k_total = 0 edge)
  const double frac = static_cast<double>(k) / static_cast<double>(s.k_total);
  switch (s.kind) {
    case PhaseKind::linear:
      return 1.0 - frac;
    case PhaseKind::quadratic:
      return (1.0 - frac) * (1.0 - frac);
    case PhaseKind::hard_switch:
      return (static_cast<double>(k) < static_cast<double>(s.k_total) / 2.0) ? 1.0 : 0.0;
  }
  return 0.0;
}

enum class Branch { q_value, td_error };

// Q-value branch with probability m, TD-error branch otherwise.
inline Branch select_branch(double m, double omega) {
  return omega <= m ? Branch::q_value : Branch::td_error;
}

}  // namespace paac
