#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"

namespace mkm {

enum class TransformMode { fourier, laplace };
enum class ModelKind { A, B, C, atomic };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::A: return "A";
    case ModelKind::B: return "B";
    case ModelKind::C: return "C";
    default: return "atoms";
  }
}

struct ModelParams {
  std::optional<double> restitution;
  std::optional<double> coupling;
  std::optional<double> mass_ratio;
  std::optional<double> beta;
};

// Gamma(u)(x) = int G(s) u(a(s)x) u(b(s)x) ds + int H(s) u(c(s)x) ds.
struct InteractionModel {
  ModelKind kind = ModelKind::atomic;
  int dimension = 1;
  TransformMode mode = TransformMode::fourier;
  SKernel G;
  SKernel H;
  AffineMap a, b, c;
  ModelParams params;
  double support_radius = 1.0;
};

constexpr double kMassTolerance = 1e-12;

namespace detail {

inline double map_max_on(const SKernel& k, const AffineMap& m) {
  double r = 0.0;
  if (k.smooth() && k.smooth()->scale > 0.0) r = std::max(r, m.max_on_unit());
  for (const auto& at : k.atoms())
    if (at.weight > 0.0) r = std::max(r, m(at.location));
  return r;
}

inline double map_min_on(const SKernel& k, const AffineMap& m) {
  double r = std::numeric_limits<double>::infinity();
  if (k.smooth() && k.smooth()->scale > 0.0) r = std::min(r, m.min_on_unit());
  for (const auto& at : k.atoms())
    if (at.weight > 0.0) r = std::min(r, m(at.location));
  return r;
}

inline double support_radius_of(const SKernel& G, const SKernel& H, const AffineMap& a, const AffineMap& b,
                                const AffineMap& c) {
  return std::max({map_max_on(G, a), map_max_on(G, b), map_max_on(H, c)});
}

}  // namespace detail

inline void validate(const InteractionModel& m) {
  require(m.dimension >= 1, "dimension must be >= 1");
  double total = m.G.mass() + m.H.mass();
  require(std::abs(total - 1.0) <= kMassTolerance, "kernel masses must sum to 1");
  const double tol = 1e-14;
  if (!m.G.empty()) {
    require(detail::map_min_on(m.G, m.a) >= -tol && detail::map_min_on(m.G, m.b) >= -tol,
            "maps a, b must be nonnegative on the support of G");
  }
  if (!m.H.empty()) require(detail::map_min_on(m.H, m.c) >= -tol, "map c must be nonnegative on the support of H");
  require(m.support_radius > 0.0, "support radius must be positive");
  if (m.kind != ModelKind::atomic) require(m.support_radius <= 1.0 + tol, "named models need maps in [0,1]");
}

inline SmoothPart angular_part(int d, SmoothFactor g) {
  SmoothPart sp;
  sp.alpha_left = sp.alpha_right = 0.5 * (d - 3);
  sp.factor = std::move(g);
  return sp;
}

inline InteractionModel make_model_A(int d, SmoothFactor g = SmoothFactor::constant()) {
  require(d >= 2, "model A needs dimension d >= 2");
  InteractionModel m;
  m.kind = ModelKind::A;
  m.dimension = d;
  SKernel raw({}, angular_part(d, std::move(g)));
  require(raw.mass() > 0.0, "smooth factor g has zero mass");
  m.G = raw.normalized(1.0);
  m.a = {0.0, 1.0};
  m.b = {1.0, -1.0};
  m.c = {1.0, 0.0};
  m.support_radius = 1.0;
  validate(m);
  return m;
}

inline double thermostat_beta(double mass_ratio) { return 4.0 * mass_ratio / ((1.0 + mass_ratio) * (1.0 + mass_ratio)); }

inline InteractionModel make_model_B(int d, SmoothFactor g, double theta, double mass_ratio) {
  require(d >= 2, "model B needs dimension d >= 2");
  require(std::isfinite(theta) && theta > 0.0, "model B needs coupling theta > 0");
  require(std::isfinite(mass_ratio) && mass_ratio > 0.0, "model B needs mass ratio m > 0");
  InteractionModel m;
  m.kind = ModelKind::B;
  m.dimension = d;
  SKernel raw({}, angular_part(d, std::move(g)));
  require(raw.mass() > 0.0, "smooth factor g has zero mass");
  m.G = raw.normalized(1.0 / (1.0 + theta));
  m.H = raw.normalized(theta / (1.0 + theta));
  double beta = thermostat_beta(mass_ratio);
  m.a = {0.0, 1.0};
  m.b = {1.0, -1.0};
  m.c = {1.0, -beta};
  m.params.coupling = theta;
  m.params.mass_ratio = mass_ratio;
  m.params.beta = beta;
  m.support_radius = detail::support_radius_of(m.G, m.H, m.a, m.b, m.c);
  validate(m);
  return m;
}

inline InteractionModel make_model_C(int d, double e) {
  require(d >= 2, "model C needs dimension d >= 2");
  require(std::isfinite(e) && e > 0.0 && e <= 1.0, "restitution e must lie in (0,1]");
  InteractionModel m;
  m.kind = ModelKind::C;
  m.dimension = d;
  SmoothPart sp;
  sp.alpha_left = 0.0;
  sp.alpha_right = 0.5 * (d - 3);
  m.G = SKernel({}, sp).normalized(1.0);
  m.a = {0.0, (1.0 + e) * (1.0 + e) / 4.0};
  m.b = {1.0, -(1.0 + e) * (3.0 - e) / 4.0};
  m.c = {1.0, 0.0};
  m.params.restitution = e;
  m.support_radius = 1.0;
  validate(m);
  return m;
}

// Atomic G (weights normalized jointly with the optional H atoms to total mass 1).
inline InteractionModel make_atomic_model(std::vector<Atom> atoms, AffineMap a, AffineMap b, AffineMap c,
                                          TransformMode mode = TransformMode::laplace,
                                          std::vector<Atom> h_atoms = {}) {
  require(!atoms.empty() || !h_atoms.empty(), "atomic model needs at least one atom");
  double total = 0.0;
  for (const auto& at : atoms) {
    require(std::isfinite(at.weight) && at.weight >= 0.0, "atom weight must be nonnegative");
    total += at.weight;
  }
  for (const auto& at : h_atoms) {
    require(std::isfinite(at.weight) && at.weight >= 0.0, "atom weight must be nonnegative");
    total += at.weight;
  }
  require(total > 0.0, "atomic model needs positive total weight");
  for (auto& at : atoms) at.weight /= total;
  for (auto& at : h_atoms) at.weight /= total;
  InteractionModel m;
  m.kind = ModelKind::atomic;
  m.dimension = 1;
  m.mode = mode;
  m.G = SKernel(std::move(atoms), std::nullopt);
  m.H = SKernel(std::move(h_atoms), std::nullopt);
  m.a = a;
  m.b = b;
  m.c = c;
  m.support_radius = detail::support_radius_of(m.G, m.H, a, b, c);
  validate(m);
  return m;
}

// ---- general multilinear operators ----

// Pushforward of an SKernel by n affine maps (unit mass after normalization).
struct PushforwardKernel {
  SKernel kernel;
  std::vector<AffineMap> maps;
};

struct ProductAtom {
  std::vector<double> coords;
  double weight;
};

struct ProductAtomKernel {
  std::vector<ProductAtom> atoms;
};

struct MultilinearTerm {
  int arity = 2;
  double weight = 0.0;
  std::variant<PushforwardKernel, ProductAtomKernel> kernel;
};

struct MultilinearOperator {
  std::vector<MultilinearTerm> terms;
  double support_radius = 1.0;

  double alpha(int n) const {
    double s = 0.0;
    for (const auto& t : terms)
      if (t.arity == n) s += t.weight;
    return s;
  }
  bool is_linear() const {
    for (const auto& t : terms)
      if (t.arity >= 2 && t.weight > 0.0) return false;
    return true;
  }
  int max_arity() const {
    int n = 0;
    for (const auto& t : terms) n = std::max(n, t.arity);
    return n;
  }
};

// Discretized term: weight[i] * prod_k u(coords[i*arity + k] x).
struct DiscreteTerm {
  int arity = 0;
  std::vector<double> weights;
  std::vector<double> coords;
  std::size_t size() const { return weights.size(); }
};

inline DiscreteTerm discretize(const MultilinearTerm& t, int nodes) {
  DiscreteTerm out;
  out.arity = t.arity;
  if (t.weight == 0.0) return out;
  if (const auto* pk = std::get_if<PushforwardKernel>(&t.kernel)) {
    QuadratureRule r = pk->kernel.discretize(nodes);
    double mass = pk->kernel.mass();
    for (std::size_t i = 0; i < r.size(); ++i) {
      out.weights.push_back(t.weight * r.weights[i] / mass);
      for (const auto& map : pk->maps) out.coords.push_back(std::max(0.0, map.at(r.nodes[i], r.complements[i])));
    }
  } else {
    const auto& pa = std::get<ProductAtomKernel>(t.kernel);
    double mass = 0.0;
    for (const auto& a : pa.atoms) mass += a.weight;
    for (const auto& a : pa.atoms) {
      if (a.weight == 0.0) continue;
      out.weights.push_back(t.weight * a.weight / mass);
      for (double c : a.coords) out.coords.push_back(c);
    }
  }
  return out;
}

inline std::vector<DiscreteTerm> discretize(const MultilinearOperator& op, int nodes) {
  std::vector<DiscreteTerm> out;
  for (const auto& t : op.terms) {
    DiscreteTerm d = discretize(t, nodes);
    if (d.size() > 0) out.push_back(std::move(d));
  }
  return out;
}

inline MultilinearOperator make_multilinear(std::vector<MultilinearTerm> terms) {
  require(!terms.empty(), "multilinear operator needs at least one term");
  double total = 0.0, radius = 0.0;
  for (auto& t : terms) {
    require(t.arity >= 1, "term arity must be >= 1");
    require(std::isfinite(t.weight) && t.weight >= 0.0, "term weight must be nonnegative");
    total += t.weight;
    if (auto* pk = std::get_if<PushforwardKernel>(&t.kernel)) {
      require(static_cast<int>(pk->maps.size()) == t.arity, "pushforward term needs one map per argument");
      require(pk->kernel.mass() > 0.0, "pushforward kernel has zero mass");
      for (const auto& m : pk->maps) {
        require(detail::map_min_on(pk->kernel, m) >= -1e-14, "maps must be nonnegative on the kernel support");
        radius = std::max(radius, detail::map_max_on(pk->kernel, m));
      }
    } else {
      auto& pa = std::get<ProductAtomKernel>(t.kernel);
      require(!pa.atoms.empty(), "product-atom term needs atoms");
      double mass = 0.0;
      for (const auto& a : pa.atoms) {
        require(static_cast<int>(a.coords.size()) == t.arity, "product atom has wrong number of coordinates");
        require(std::isfinite(a.weight) && a.weight >= 0.0, "product atom weight must be nonnegative");
        mass += a.weight;
        for (double c : a.coords) {
          require(std::isfinite(c) && c >= 0.0, "product atom coordinates must be nonnegative");
          radius = std::max(radius, c);
        }
      }
      require(mass > 0.0, "product-atom term has zero mass");
    }
  }
  require(std::abs(total - 1.0) <= kMassTolerance, "term weights must sum to 1");
  MultilinearOperator op;
  op.terms = std::move(terms);
  op.support_radius = radius > 0.0 ? radius : 1.0;
  return op;
}

inline MultilinearOperator to_multilinear(const InteractionModel& m) {
  validate(m);
  std::vector<MultilinearTerm> terms;
  if (!m.H.empty()) terms.push_back({1, m.H.mass(), PushforwardKernel{m.H, {m.c}}});
  if (!m.G.empty()) terms.push_back({2, m.G.mass(), PushforwardKernel{m.G, {m.a, m.b}}});
  MultilinearOperator op;
  op.terms = std::move(terms);
  op.support_radius = m.support_radius;
  return op;
}

// Discretization of the model form directly (used for the round-trip check).
inline std::vector<DiscreteTerm> discretize(const InteractionModel& m, int nodes) {
  std::vector<DiscreteTerm> out;
  auto push = [&](const SKernel& k, std::vector<AffineMap> maps) {
    QuadratureRule r = k.discretize(nodes);
    DiscreteTerm t;
    t.arity = static_cast<int>(maps.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      t.weights.push_back(r.weights[i]);
      for (const auto& map : maps) t.coords.push_back(std::max(0.0, map.at(r.nodes[i], r.complements[i])));
    }
    if (t.size() > 0) out.push_back(std::move(t));
  };
  if (!m.H.empty()) push(m.H, {m.c});
  if (!m.G.empty()) push(m.G, {m.a, m.b});
  return out;
}

}  // namespace mkm
