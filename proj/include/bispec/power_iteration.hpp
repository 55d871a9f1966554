#pragma once

// Power iteration on positive semidefinite normal operators A^*A, and the
// alternating maximization of a bilinear quotient sup ||B(f, g)|| / (||f|| ||g||)
// built on it.
//
// Vector types only need dot(a, b) (complex, conjugate-linear in a), norm() and
// operator*=(complex).

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace bispec {

template <class Vec>
struct PowerResult {
  double eigenvalue = 0.0;  // Rayleigh quotient <x, A x> at the returned unit x
  Vec vector;
  int iterations = 0;
  bool converged = false;
};

/// Top eigenpair of a PSD operator. Starts from x0 (normalized internally); stops when
/// the Rayleigh quotient changes by at most tol relative. For PSD operators the
/// Rayleigh quotients of the iterates are nondecreasing, so warm starts never lose
/// ground.
template <class Vec, class Op>
PowerResult<Vec> power_iteration(Op&& op, Vec x, double tol = 1e-8, int max_iters = 500) {
  PowerResult<Vec> res;
  const double n0 = x.norm();
  if (n0 == 0.0) {
    res.vector = std::move(x);
    res.converged = true;
    return res;
  }
  x *= 1.0 / n0;
  double prev = -1.0;
  for (int it = 1; it <= max_iters; ++it) {
    Vec y = op(x);
    const double lam = std::real(dot(x, y));
    res.iterations = it;
    const double ny = y.norm();
    if (ny == 0.0) {
      res.eigenvalue = 0.0;
      res.vector = std::move(x);
      res.converged = true;
      return res;
    }
    if (prev >= 0.0 && std::abs(lam - prev) <= tol * std::abs(lam)) {
      res.eigenvalue = lam;
      res.vector = std::move(x);
      res.converged = true;
      return res;
    }
    prev = lam;
    res.eigenvalue = lam;
    y *= 1.0 / ny;
    x = std::move(y);
  }
  // x was replaced by the last normalized image; report the quotient it was reached from
  res.vector = std::move(x);
  return res;
}

struct AlternatingOptions {
  double tol = 1e-6;        // relative change of the quotient between rounds
  int max_iters = 50;       // alternation rounds
  double power_tol = 1e-8;  // relative, on the squared singular value
  int power_max_iters = 500;
};

template <class VecF, class VecG>
struct AlternatingResult {
  double value = 0.0;  // quotient ||B(f,g)|| at unit f, g
  VecF f;
  VecG g;
  int rounds = 0;
  double residual = 0.0;  // last relative change
  bool converged = false;
  std::vector<double> history;  // quotient after every half-step
};

/// Alternating top-singular-vector ascent.
///   normal_f(g) -> callable f |-> A_g^* A_g f   with A_g f = B(f, g)
///   normal_g(f) -> callable g |-> B_f^* B_f g   with B_f g = B(f, g)
template <class VecF, class VecG, class NormalF, class NormalG>
AlternatingResult<VecF, VecG> alternating_maximize(VecF f, VecG g, NormalF&& normal_f, NormalG&& normal_g,
                                                   const AlternatingOptions& opt = {}) {
  AlternatingResult<VecF, VecG> res;
  f *= 1.0 / f.norm();
  g *= 1.0 / g.norm();
  double prev = -1.0;
  for (int round = 1; round <= opt.max_iters; ++round) {
    auto pf = power_iteration(normal_f(g), std::move(f), opt.power_tol, opt.power_max_iters);
    f = std::move(pf.vector);
    res.history.push_back(std::sqrt(std::max(0.0, pf.eigenvalue)));
    auto pg = power_iteration(normal_g(f), std::move(g), opt.power_tol, opt.power_max_iters);
    g = std::move(pg.vector);
    const double value = std::sqrt(std::max(0.0, pg.eigenvalue));
    res.history.push_back(value);
    res.rounds = round;
    res.value = value;
    if (prev >= 0.0) {
      res.residual = value > 0.0 ? std::abs(value - prev) / value : 0.0;
      if (res.residual < opt.tol) {
        res.converged = true;
        break;
      }
    } else if (value == 0.0) {
      res.converged = true;
      break;
    }
    prev = value;
  }
  res.f = std::move(f);
  res.g = std::move(g);
  return res;
}

}  // namespace bispec
