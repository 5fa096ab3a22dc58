#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "epiconj/detail/lp.hpp"
#include "epiconj/detail/nnls.hpp"
#include "epiconj/model.hpp"

namespace epiconj {

enum class ProblemClass { general, sup_quadratic, sharp, polyhedral };

inline std::string to_string(ProblemClass c) {
  switch (c) {
    case ProblemClass::general: return "general";
    case ProblemClass::sup_quadratic: return "sup_quadratic";
    case ProblemClass::sharp: return "sharp";
    case ProblemClass::polyhedral: return "polyhedral";
  }
  return "general";
}

struct OracleValue {
  double f = 0.0;
  Vector g;
};

/// A finite convex objective given by its subgradient oracle, plus whatever
/// analytic knowledge is available. Immutable once built; every callable is
/// safe to invoke concurrently.
struct ProblemSpec {
  std::string name;
  int dim = 0;
  ProblemClass problem_class = ProblemClass::general;

  std::function<OracleValue(const Vector&)> oracle;

  // optional capabilities
  std::function<double(const Vector&)> conjugate;                // f*(g), +inf off dom f*
  std::function<Vector(const Vector&)> conjugate_subgrad;        // some x in df*(g)
  std::function<Vector(const Vector&, double)> conjugate_prox;   // argmin l f*(.) + |.-y|^2/2
  std::function<EpiPoint(const EpiPoint&)> epi_projection;       // exact projection onto epi f*

  // ground truth, for diagnostics only
  std::optional<double> f_star;
  std::optional<Vector> x_star;
  std::function<double(const Vector&)> x_star_support;  // d -> sup_{x in X*} d.x
  std::optional<double> tau;
  std::optional<double> rho;

  bool has_conjugate() const { return static_cast<bool>(conjugate); }
  bool has_prox() const { return static_cast<bool>(conjugate_prox); }
  bool has_exact_projection() const {
    return (has_conjugate() && has_prox()) || static_cast<bool>(epi_projection);
  }
};

inline void check_dim(const ProblemSpec& p, const Vector& v, const char* what) {
  if (v.size() != p.dim)
    throw UsageError(std::string(what) + ": dimension " + std::to_string(v.size()) +
                     " does not match problem '" + p.name + "' (n=" +
                     std::to_string(p.dim) + ")");
}

inline OracleValue oracle_eval(const ProblemSpec& p, const Vector& x) {
  check_dim(p, x, "oracle_eval");
  if (!all_finite(x)) throw UsageError("oracle_eval: non-finite point");
  return p.oracle(x);
}

inline double conjugate_eval(const ProblemSpec& p, const Vector& g) {
  if (!p.conjugate)
    throw CapabilityError("problem '" + p.name + "' has no conjugate capability");
  check_dim(p, g, "conjugate_eval");
  return p.conjugate(g);
}

inline Vector conjugate_prox(const ProblemSpec& p, const Vector& y, double lambda) {
  if (!p.conjugate_prox)
    throw CapabilityError("problem '" + p.name + "' has no conjugate prox capability");
  check_dim(p, y, "conjugate_prox");
  if (!(lambda >= 0.0)) throw UsageError("conjugate_prox: lambda must be >= 0");
  return p.conjugate_prox(y, lambda);
}

namespace detail {

inline double sign_pos(double t) { return t >= 0.0 ? 1.0 : -1.0; }

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void set_singleton_solution(ProblemSpec& p, Vector x_star, double f_star) {
  p.f_star = f_star;
  p.x_star = x_star;
  p.x_star_support = [x = std::move(x_star)](const Vector& d) { return d.dot(x); };
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Problem families
// ---------------------------------------------------------------------------

/// f(x) = (x-c)' diag(Q) (x-c) / 2, Q > 0.
inline ProblemSpec make_quadratic(std::string name, Vector Q, Vector c) {
  if (Q.size() != c.size() || c.size() == 0)
    throw UsageError("quadratic: Q and c must have the same positive length");
  if (!all_finite(Q) || !all_finite(c)) throw UsageError("quadratic: non-finite data");
  if ((Q.array() <= 0.0).any()) throw UsageError("quadratic: Q must be positive");

  ProblemSpec p;
  p.name = std::move(name);
  p.dim = static_cast<int>(c.size());
  p.problem_class = ProblemClass::sup_quadratic;
  p.oracle = [Q, c](const Vector& x) {
    Vector d = x - c;
    return OracleValue{0.5 * d.dot(Q.cwiseProduct(d)), Q.cwiseProduct(d)};
  };
  p.conjugate = [Q, c](const Vector& g) {
    return g.dot(c) + 0.5 * g.dot(g.cwiseQuotient(Q));
  };
  p.conjugate_subgrad = [Q, c](const Vector& g) -> Vector { return c + g.cwiseQuotient(Q); };
  p.conjugate_prox = [Q, c](const Vector& y, double l) -> Vector {
    return (y - l * c).array() / (1.0 + l / Q.array());
  };
  detail::set_singleton_solution(p, c, 0.0);
  p.tau = Q.minCoeff();
  return p;
}

/// f(x) = ||x - c||_1.
inline ProblemSpec make_sharp_l1(std::string name, Vector c) {
  if (c.size() == 0 || !all_finite(c)) throw UsageError("sharp_l1: bad center");
  ProblemSpec p;
  p.name = std::move(name);
  p.dim = static_cast<int>(c.size());
  p.problem_class = ProblemClass::sharp;
  p.oracle = [c](const Vector& x) {
    Vector d = x - c;
    return OracleValue{d.lpNorm<1>(), d.unaryExpr(&detail::sign_pos)};
  };
  p.conjugate = [c](const Vector& g) {
    return g.lpNorm<Eigen::Infinity>() <= 1.0 ? g.dot(c) : kInf;
  };
  p.conjugate_subgrad = [c](const Vector&) -> Vector { return c; };
  p.conjugate_prox = [c](const Vector& y, double l) -> Vector {
    return (y - l * c).cwiseMax(-1.0).cwiseMin(1.0);
  };
  detail::set_singleton_solution(p, c, 0.0);
  p.rho = 1.0;
  return p;
}

/// f(x) = ||x - c||^4: smooth, flat at the minimizer, not sup-quadratic there.
inline ProblemSpec make_quartic(std::string name, Vector c) {
  if (c.size() == 0 || !all_finite(c)) throw UsageError("quartic: bad center");
  static const double kappa = 3.0 * std::pow(4.0, -4.0 / 3.0);

  ProblemSpec p;
  p.name = std::move(name);
  p.dim = static_cast<int>(c.size());
  p.problem_class = ProblemClass::general;
  p.oracle = [c](const Vector& x) {
    Vector d = x - c;
    const double r2 = d.squaredNorm();
    return OracleValue{r2 * r2, 4.0 * r2 * d};
  };
  p.conjugate = [c](const Vector& g) {
    return g.dot(c) + kappa * std::pow(g.norm(), 4.0 / 3.0);
  };
  p.conjugate_subgrad = [c](const Vector& g) -> Vector {
    const double s = g.norm();
    if (s == 0.0) return c;
    // gradient of kappa s^{4/3} is (4/3) kappa s^{1/3} g/s
    return c + (4.0 / 3.0) * kappa * std::cbrt(s) / s * g;
  };
  p.conjugate_prox = [c](const Vector& y, double l) -> Vector {
    Vector w = y - l * c;
    const double r = w.norm();
    if (r == 0.0 || l == 0.0) return w;
    // radius s solves s + a s^{1/3} = r; in u = s^{1/3}: u^3 + a u - r = 0.
    // Newton from cbrt(r) (right of the root) decreases monotonically.
    const double a = (4.0 / 3.0) * l * kappa;
    double u = std::cbrt(r);
    for (int it = 0; it < 200; ++it) {
      const double next = u - (u * u * u + a * u - r) / (3.0 * u * u + a);
      if (!(next < u)) break;
      u = next;
    }
    return (u * u * u / r) * w;
  };
  detail::set_singleton_solution(p, c, 0.0);
  return p;
}

/// f(x) = ||x - c||^2 + ||x - c||_1: sup-quadratic (tau = 2) and nonsmooth at c.
inline ProblemSpec make_quad_plus_l1(std::string name, Vector c) {
  if (c.size() == 0 || !all_finite(c)) throw UsageError("quad_plus_l1: bad center");
  ProblemSpec p;
  p.name = std::move(name);
  p.dim = static_cast<int>(c.size());
  p.problem_class = ProblemClass::sup_quadratic;
  p.oracle = [c](const Vector& x) {
    Vector d = x - c;
    return OracleValue{d.squaredNorm() + d.lpNorm<1>(),
                       2.0 * d + d.unaryExpr(&detail::sign_pos)};
  };
  // conjugate of t^2 + |t| is (|s| - 1)_+^2 / 4
  p.conjugate = [c](const Vector& g) {
    const double excess = (g.array().abs() - 1.0).max(0.0).square().sum();
    return g.dot(c) + 0.25 * excess;
  };
  p.conjugate_subgrad = [c](const Vector& g) -> Vector {
    Vector e = 0.5 * (g.array().abs() - 1.0).max(0.0) * g.array().sign();
    return c + e;
  };
  p.conjugate_prox = [c](const Vector& y, double l) -> Vector {
    Vector w = y - l * c;
    Vector out(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double a = std::abs(w(i));
      out(i) = a <= 1.0 ? w(i) : std::copysign(1.0 + (a - 1.0) / (1.0 + 0.5 * l), w(i));
    }
    return out;
  };
  detail::set_singleton_solution(p, c, 0.0);
  p.tau = 2.0;
  p.rho = 1.0;
  return p;
}

namespace detail {

// f*(g) = min { -b'w : sum w_i a_i = g, sum w = 1, w >= 0 }.
struct ConjugateLp {
  Matrix A;  // (n+1) x m: pieces as columns, plus a row of ones
  Vector cost;

  ConjugateLp(const std::vector<Vector>& a, const std::vector<double>& b) {
    const auto m = static_cast<Eigen::Index>(a.size());
    const auto n = a.front().size();
    A.resize(n + 1, m);
    cost.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      A.col(i).head(n) = a[static_cast<std::size_t>(i)];
      A(n, i) = 1.0;
      cost(i) = -b[static_cast<std::size_t>(i)];
    }
  }

  LpResult solve(const Vector& g) const {
    Vector rhs(g.size() + 1);
    rhs.head(g.size()) = g;
    rhs(g.size()) = 1.0;
    return solve_lp(A, rhs, cost);
  }
};

// Longest t with t*d in conv{a_i}.
inline double ray_length(const std::vector<Vector>& a, const Vector& d) {
  const auto m = static_cast<Eigen::Index>(a.size());
  const auto n = d.size();
  Matrix A = Matrix::Zero(n + 1, m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    A.col(i).head(n) = a[static_cast<std::size_t>(i)];
    A(n, i) = 1.0;
  }
  A.col(m).head(n) = -d;
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  Vector cost = Vector::Zero(m + 1);
  cost(m) = -1.0;
  LpResult r = solve_lp(A, rhs, cost);
  if (r.status != LpStatus::optimal) return 0.0;
  return r.x(m);
}

/// Radius of the largest origin-centered ball inside conv{a_i}, estimated as
/// the shortest ray length over a deterministic set of directions (an upper
/// estimate that is exact along the sampled directions).
inline double inner_radius(const std::vector<Vector>& a, std::uint64_t seed = 0) {
  const auto n = a.front().size();
  std::vector<Vector> dirs;
  if (n == 1) {
    dirs.push_back(Vector::Constant(1, 1.0));
    dirs.push_back(Vector::Constant(1, -1.0));
  } else if (n == 2) {
    const int k = 1440;
    for (int i = 0; i < k; ++i) {
      const double t = 2.0 * M_PI * i / k;
      Vector d(2);
      d << std::cos(t), std::sin(t);
      dirs.push_back(d);
    }
    // exact facet normals of the hull are not known; add edge normals between pairs
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        Vector e = a[j] - a[i];
        if (e.norm() == 0.0) continue;
        Vector nrm(2);
        nrm << e(1), -e(0);
        nrm.normalize();
        dirs.push_back(nrm);
        dirs.push_back(-nrm);
      }
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      dirs.push_back(Vector::Unit(n, i));
      dirs.push_back(-Vector::Unit(n, i));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int s = 0; s < 4000; ++s) {
      Vector d(n);
      for (Eigen::Index i = 0; i < n; ++i) d(i) = gauss(rng);
      dirs.push_back(d.normalized());
    }
  }
  double r = kInf;
  for (const auto& d : dirs) r = std::min(r, ray_length(a, d));
  return r;
}

}  // namespace detail

/// f(x) = max_i (a_i.x + b_i). Requires 0 in the interior of conv{a_i}
/// (bounded below with a bounded solution set). Conjugate values come from a
/// small LP; the exact epi-projection uses the generator representation
/// epi f* = conv{(-b_i, a_i)} + cone{(1, 0)}.
inline ProblemSpec make_max_affine(std::string name, std::vector<Vector> a,
                                   std::vector<double> b) {
  if (a.empty() || a.size() != b.size())
    throw UsageError("max_affine: need matching nonempty A rows and b");
  const auto n = a.front().size();
  if (n == 0) throw UsageError("max_affine: zero dimension");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != n) throw UsageError("max_affine: ragged A");
    if (!all_finite(a[i]) || !std::isfinite(b[i]))
      throw UsageError("max_affine: non-finite data");
  }

  auto lp = std::make_shared<detail::ConjugateLp>(a, b);
  detail::LpResult at0 = lp->solve(Vector::Zero(n));
  if (at0.status != detail::LpStatus::optimal)
    throw UsageError("max_affine: 0 is not in conv{a_i}, f is unbounded below");
  if (detail::inner_radius(a) <= 1e-9)
    throw UsageError(
        "max_affine: 0 must lie in the interior of conv{a_i} (bounded solution set)");

  ProblemSpec p;
  p.name = std::move(name);
  p.dim = static_cast<int>(n);
  p.problem_class = ProblemClass::polyhedral;
  p.oracle = [a, b](const Vector& x) {
    std::size_t best = 0;
    double val = a[0].dot(x) + b[0];
    for (std::size_t i = 1; i < a.size(); ++i) {
      const double v = a[i].dot(x) + b[i];
      if (v > val) {  // strict: lowest index wins ties
        val = v;
        best = i;
      }
    }
    return OracleValue{val, a[best]};
  };
  p.conjugate = [lp](const Vector& g) {
    detail::LpResult r = lp->solve(g);
    return r.status == detail::LpStatus::optimal ? r.objective : kInf;
  };
  p.conjugate_subgrad = [lp, n](const Vector& g) -> Vector {
    detail::LpResult r = lp->solve(g);
    if (r.status != detail::LpStatus::optimal)
      throw UsageError("conjugate_subgrad: g outside dom f*");
    return r.y.head(n);
  };
  Matrix gens(n + 1, static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    gens(0, static_cast<Eigen::Index>(i)) = -b[i];
    gens.col(static_cast<Eigen::Index>(i)).tail(n) = a[i];
  }
  p.epi_projection = [gens](const EpiPoint& q) {
    Vector base = q.stacked();
    Matrix P = gens.colwise() - base;
    Matrix R = Matrix::Zero(base.size(), 1);
    R(0, 0) = 1.0;
    detail::MinNormResult mn = detail::min_norm_point(P, R);
    return EpiPoint::from_stacked(base + mn.point);
  };

  const double f_star = -at0.objective;
  Vector x_star = at0.y.head(n);
  p.f_star = f_star;
  p.x_star = x_star;

  std::vector<Vector> active;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].dot(x_star) + b[i] >= f_star - 1e-9 * (1.0 + std::abs(f_star)))
      active.push_back(a[i]);
  }
  const double rho = detail::inner_radius(active);
  if (rho > 1e-9) {
    // sharp minimum: the solution set is the single point x_star
    p.rho = rho;
    detail::set_singleton_solution(p, x_star, f_star);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

inline Vector vec(std::initializer_list<double> v) {
  return detail::to_vector(std::vector<double>(v));
}

/// Center used by the sharpL1_n family.
inline Vector sharp_l1_center(int n) {
  static const double base[] = {0.5, -0.25, 0.75, -1.0, 0.2};
  Vector c(n);
  for (int i = 0; i < n; ++i) c(i) = base[i % 5];
  return c;
}

/// Polyhedral test problem: three pieces active at x* = (0.3, -0.2) with
/// subgradient triangle around the origin, two inactive pieces, f* = 0.5.
inline ProblemSpec make_catalog_max_affine() {
  const Vector xs = vec({0.3, -0.2});
  const double fs = 0.5;
  std::vector<Vector> a = {vec({1.0, 0.0}), vec({0.0, 1.0}), vec({-1.0, -1.0}),
                           vec({1.0, 1.0}), vec({-1.0, 1.0})};
  std::vector<double> offset = {0.0, 0.0, 0.0, -0.5, -0.3};
  std::vector<double> b;
  for (std::size_t i = 0; i < a.size(); ++i) b.push_back(fs + offset[i] - a[i].dot(xs));
  return make_max_affine("maxAffine_2", std::move(a), std::move(b));
}

/// All built-in problems, sorted by name.
inline std::vector<ProblemSpec> catalog() {
  std::vector<ProblemSpec> out;
  out.push_back(make_quadratic("quad1d", vec({1.0}), vec({1.0})));
  out.push_back(make_quadratic("quadN_2", vec({1.0, 2.0}), vec({1.0, -0.5})));
  out.push_back(make_quadratic("quadN_5", Vector::Ones(5), Vector::Ones(5)));
  for (int n = 1; n <= 5; ++n)
    out.push_back(make_sharp_l1("sharpL1_" + std::to_string(n), sharp_l1_center(n)));
  out.push_back(make_quartic("quartic_2", vec({0.5, -0.5})));
  out.push_back(make_catalog_max_affine());
  out.push_back(make_quad_plus_l1("quadPlusL1_2", vec({1.0, -0.5})));
  std::sort(out.begin(), out.end(),
            [](const ProblemSpec& l, const ProblemSpec& r) { return l.name < r.name; });
  return out;
}

inline std::optional<ProblemSpec> find_problem(const std::string& name) {
  for (auto& p : catalog())
    if (p.name == name) return p;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
  std::string problem;
  int samples = 0;
  int checks = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Samples the oracle and every available capability and reports each broken
/// identity with a witness.
inline ValidationReport validate_problem(const ProblemSpec& p, int sample_count,
                                         std::uint64_t seed = 0) {
  ValidationReport rep;
  rep.problem = p.name;
  rep.samples = sample_count;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = p.dim;
  const Vector center = p.x_star.value_or(Vector::Zero(n));
  auto sample = [&](double radius, const Vector& around) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = around(i) + radius * unit(rng);
    return v;
  };
  auto fmt = [](const Vector& v) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
    os << ")";
    return os.str();
  };
  auto report = [&](const std::string& what) {
    if (rep.violations.size() < 50) rep.violations.push_back(what);
  };

  for (int s = 0; s < sample_count; ++s) {
    const Vector x = sample(2.0, center);
    const Vector y = sample(2.0, center);
    const OracleValue ox = p.oracle(x);
    const OracleValue oy = p.oracle(y);
    const double scale = 1.0 + std::abs(ox.f) + std::abs(oy.f);

    ++rep.checks;
    const double lin = oy.f - ox.f - ox.g.dot(y - x);
    if (lin < -1e-9 * scale)
      report("subgradient inequality fails: x=" + fmt(x) + " y=" + fmt(y) +
             " gap=" + std::to_string(lin));

    if (p.f_star) {
      ++rep.checks;
      if (ox.f < *p.f_star - 1e-12 * scale)
        report("f(x) below f_star at x=" + fmt(x));
    }

    if (p.conjugate) {
      const Vector g = sample(1.5, Vector::Zero(n));
      const double fsg = p.conjugate(g);
      if (std::isfinite(fsg)) {
        ++rep.checks;
        if (ox.f + fsg - g.dot(x) < -1e-9 * (scale + std::abs(fsg)))
          report("Fenchel-Young inequality fails: x=" + fmt(x) + " g=" + fmt(g));
      }
      ++rep.checks;
      const double fsx = p.conjugate(ox.g);
      const double fy = ox.f + fsx - ox.g.dot(x);
      if (!(std::abs(fy) <= 1e-9 * (scale + std::abs(fsx))))
        report("Fenchel-Young equality fails at the oracle subgradient: x=" + fmt(x) +
               " residual=" + std::to_string(fy));
    }

    if (p.tau && p.x_star) {
      ++rep.checks;
      const OracleValue os = p.oracle(*p.x_star);
      const Vector d = y - *p.x_star;
      const double lhs = oy.f - os.f;
      const double rhs = os.g.dot(d) + 0.5 * *p.tau * d.squaredNorm();
      if (lhs < rhs - 1e-9 * scale)
        report("sup-quadratic growth fails at y=" + fmt(y));
    }
  }

  if (p.conjugate && p.f_star) {
    ++rep.checks;
    const double f0 = p.conjugate(Vector::Zero(n));
    if (!(std::abs(f0 + *p.f_star) <= 1e-9 * (1.0 + std::abs(f0))))
      report("f*(0) = " + std::to_string(f0) + " differs from -f_star");
  }
  if (p.f_star && p.x_star) {
    ++rep.checks;
    const double fx = p.oracle(*p.x_star).f;
    if (!(std::abs(fx - *p.f_star) <= 1e-9 * (1.0 + std::abs(fx))))
      report("f(x_star) differs from f_star");
  }
  return rep;
}

}  // namespace epiconj
