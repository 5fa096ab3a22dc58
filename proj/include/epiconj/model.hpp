#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace epiconj {

/// Vectors of the primal space E (and of the conjugate space, identified with E).
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: dimension mismatch, non-finite input, malformed flags.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A problem lacks an analytic capability (conjugate, prox, ...).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Broken precondition of an internal operation; signals a bug upstream.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An algorithm invariant failed at run time.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A projection engine could not produce an acceptable result.
/// Carries the best candidate seen so far and its residual.
class EngineError : public Error {
 public:
  EngineError(const std::string& what, double best_mu, Vector best_g,
              double residual)
      : Error(what),
        best_mu_(best_mu),
        best_g_(std::move(best_g)),
        residual_(residual) {}

  double best_mu() const { return best_mu_; }
  const Vector& best_g() const { return best_g_; }
  double residual() const { return residual_; }

 private:
  double best_mu_;
  Vector best_g_;
  double residual_;
};

/// The polyhedral projection kernel ran out of sweeps.
class InnerSolverError : public EngineError {
 public:
  using EngineError::EngineError;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// A point (mu, g) of R x E, the ambient space of epi f*.
struct EpiPoint {
  double mu = 0.0;
  Vector g;

  EpiPoint() = default;
  EpiPoint(double mu_, Vector g_) : mu(mu_), g(std::move(g_)) {}

  int dim() const { return static_cast<int>(g.size()); }

  /// Stacked representation (mu, g_1, ..., g_n).
  Vector stacked() const {
    Vector v(g.size() + 1);
    v(0) = mu;
    v.tail(g.size()) = g;
    return v;
  }

  static EpiPoint from_stacked(const Vector& v) {
    return {v(0), v.tail(v.size() - 1)};
  }

  double norm() const { return std::sqrt(mu * mu + g.squaredNorm()); }
};

inline EpiPoint operator-(const EpiPoint& a, const EpiPoint& b) {
  return {a.mu - b.mu, a.g - b.g};
}

inline double distance(const EpiPoint& a, const EpiPoint& b) {
  return (a - b).norm();
}

/// One oracle answer turned into a half-space {(mu, g) : g.x - mu <= f(x)}
/// containing epi f*. The subgradient is kept as well: (g.x - f(x), g) is a
/// point of the graph of f* whenever g is in the subdifferential at x.
struct Cut {
  Vector x;
  double fx = 0.0;
  Vector g;

  int dim() const { return static_cast<int>(x.size()); }

  /// Point of epi f* generated by the same oracle call (Fenchel-Young equality).
  EpiPoint graph_point() const { return {g.dot(x) - fx, g}; }
};

/// Positive when p lies outside the cut half-space, hence outside epi f*.
inline double cut_violation(const Cut& c, const EpiPoint& p) {
  if (c.x.size() != p.g.size())
    throw UsageError("cut_violation: dimension mismatch (cut " +
                     std::to_string(c.x.size()) + ", point " +
                     std::to_string(p.g.size()) + ")");
  return p.g.dot(c.x) - p.mu - c.fx;
}

/// Outward normal of epi f* at the projection (xi_p, g_p) of (xi_k, 0).
inline EpiPoint support_direction(double xi_k, double xi_p, const Vector& g_p) {
  if (!(xi_p > xi_k))
    throw ContractViolation("support_direction: requires xi_p > xi_k");
  return {-(xi_p - xi_k), -g_p};
}

/// Ordered list of cuts forming an outer polyhedral model of epi f*.
/// When full, the oldest cut that is not flagged active is evicted.
class Bundle {
 public:
  static constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

  explicit Bundle(std::size_t capacity = 200) : capacity_(capacity) {
    if (capacity_ == 0) throw UsageError("Bundle: capacity must be positive");
  }

  std::size_t size() const { return cuts_.size(); }
  bool empty() const { return cuts_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::vector<Cut>& cuts() const { return cuts_; }
  const Cut& operator[](std::size_t i) const { return cuts_[i]; }
  int dim() const { return cuts_.empty() ? -1 : cuts_.front().dim(); }

  /// Appends a cut. `active` (may be empty) flags cuts that must survive
  /// eviction; its indices refer to the bundle before the insertion.
  /// Returns the number of evicted cuts.
  std::size_t add(Cut c, const std::vector<bool>& active = {}) {
    if (!cuts_.empty() && c.dim() != dim())
      throw UsageError("Bundle::add: dimension mismatch");
    if (!std::isfinite(c.fx) || !all_finite(c.x))
      throw UsageError("Bundle::add: non-finite cut");
    std::size_t evicted = 0;
    std::vector<bool> keep = active;
    keep.resize(cuts_.size(), false);
    while (cuts_.size() + 1 > capacity_) {
      std::size_t victim = cuts_.size();
      for (std::size_t i = 0; i < cuts_.size(); ++i) {
        if (!keep[i]) {
          victim = i;
          break;
        }
      }
      // every cut is active: drop the oldest anyway
      if (victim == cuts_.size()) victim = 0;
      cuts_.erase(cuts_.begin() + static_cast<std::ptrdiff_t>(victim));
      keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(victim));
      ++evicted;
    }
    cuts_.push_back(std::move(c));
    return evicted;
  }

  void clear() { cuts_.clear(); }

 private:
  std::size_t capacity_;
  std::vector<Cut> cuts_;
};

enum class Backend { exact, cutting };

inline std::string to_string(Backend b) {
  return b == Backend::exact ? "exact" : "cutting";
}

inline Backend backend_from_string(const std::string& s) {
  if (s == "exact") return Backend::exact;
  if (s == "cutting") return Backend::cutting;
  throw UsageError("unknown backend '" + s + "' (expected exact|cutting)");
}

struct SolverConfig {
  double eps_g = 1e-10;      // outer stop on ||g_p||
  double eps_xi = 1e-12;     // stall guard on the xi increment
  double eps_inner = 1e-13;  // projection certificate tolerance
  int max_outer = 100;
  int max_inner = 10000;
  std::size_t bundle_capacity = 200;
  Backend backend = Backend::exact;

  void validate() const {
    if (!(eps_g > 0) || !(eps_xi > 0) || !(eps_inner > 0))
      throw UsageError("SolverConfig: tolerances must be strictly positive");
    if (max_outer <= 0 || max_inner <= 0)
      throw UsageError("SolverConfig: iteration limits must be positive");
    if (bundle_capacity == 0)
      throw UsageError("SolverConfig: bundle capacity must be positive");
  }
};

}  // namespace epiconj
