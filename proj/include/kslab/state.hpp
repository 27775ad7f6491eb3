#pragma once

#include "kslab/grid.hpp"

namespace kslab {

/// One instant of the coupled system: cell density u and signal density v
/// as cell averages at time t. Both fields are componentwise nonnegative.
struct StateSnapshot {
  double t = 0.0;
  RadialField u;
  RadialField v;

  StateSnapshot() = default;
  StateSnapshot(double t, RadialField u, RadialField v)
      : t(t), u(std::move(u)), v(std::move(v)) {}

  const RadialGrid& grid() const { return *u.grid; }
};

}  // namespace kslab
