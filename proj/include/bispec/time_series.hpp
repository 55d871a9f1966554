#pragma once

#include <cstddef>
#include <vector>

#include "bispec/error.hpp"

namespace bispec {

/// Uniform samples t_j = t0 + j dt, j = 0..n_t-1, of a spectral trajectory.
template <class Field>
struct TimeSampledField {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<Field> fields;
  bool windowed = false;  // a time cutoff has already been applied

  std::size_t size() const { return fields.size(); }
  double time(std::size_t j) const { return t0 + dt * static_cast<double>(j); }
  /// Length of the periodic sampling window, n_t dt.
  double span() const { return dt * static_cast<double>(fields.size()); }

  void validate() const {
    if (fields.size() < 2) throw InvalidParams("a time-sampled field needs n_t >= 2");
    if (!(dt > 0.0)) throw InvalidParams("time step must be positive");
    for (const auto& f : fields)
      if (f.size() != fields.front().size()) throw DimensionMismatch("samples have different layouts");
  }
};

}  // namespace bispec
