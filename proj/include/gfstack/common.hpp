#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace gfstack {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input (wrong sizes, bad config values, too few samples).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string format_residual(double r) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << r;
  return os.str();
}

// An iterative solver gave up. Carries what it had when it stopped.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, Vec last_iterate, double residual)
      : std::runtime_error(what + " (residual " + format_residual(residual) + ")"),
        last_iterate_(std::move(last_iterate)),
        residual_(residual) {}

  const Vec& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }

 private:
  Vec last_iterate_;
  double residual_;
};

// Upper end of the interval (0, 1/w) for w > 0, +inf otherwise.
inline double interval_upper(double omega) { return omega > 0.0 ? 1.0 / omega : kInf; }

inline bool in_interval(double omega, double lam) {
  return lam > 0.0 && lam < interval_upper(omega);
}

inline void require_in_interval(double omega, double lam, const char* who) {
  if (!(lam > 0.0)) {
    std::ostringstream os;
    os << who << ": step " << lam << " violates lower bound 0 of the interval (0, "
       << interval_upper(omega) << ")";
    throw DomainError(os.str());
  }
  if (!(lam < interval_upper(omega))) {
    std::ostringstream os;
    os << who << ": step " << lam << " violates upper bound 1/omega = " << interval_upper(omega);
    throw DomainError(os.str());
  }
}

inline Vec unit_weights(Eigen::Index n) { return Vec::Ones(n); }

inline double wdot(const Vec& a, const Vec& b, const Vec& w) {
  return (a.array() * b.array() * w.array()).sum();
}

inline double wnorm2(const Vec& a, const Vec& w) { return wdot(a, a, w); }

inline double wnorm(const Vec& a, const Vec& w) { return std::sqrt(wnorm2(a, w)); }

// Weighted L^r norm, r = inf gives the max over entries with positive weight.
inline double lr_norm(const Vec& a, const Vec& w, double r) {
  if (std::isinf(r)) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (w[i] > 0.0) m = std::max(m, std::abs(a[i]));
    return m;
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += w[i] * std::pow(std::abs(a[i]), r);
  return std::pow(s, 1.0 / r);
}

// a + inf = inf, and -inf never enters (callers reject it up front).
inline double ext_add(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return kInf;
  return a + b;
}

inline double finite_or_throw(double v, const char* who) {
  if (std::isnan(v) || v == -kInf) throw DomainError(std::string(who) + ": value is NaN or -inf");
  return v;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec uniform_vec(Rng& rng, Eigen::Index n, double lo, double hi) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

}  // namespace gfstack
