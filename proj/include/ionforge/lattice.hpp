#pragma once

// Target interaction graphs for regular lattices embedded on chain indices.
// Sites are numbered lexicographically (row-major; plane-major for cubic), and
// when N is smaller than the extent product only the last row/plane is partial.

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "forward_model.hpp"

namespace ionforge {

enum class LatticeKind { linear, square, triangular, kagome, cubic, two_chains, custom_edges };

inline std::string to_string(LatticeKind k) {
  switch (k) {
    case LatticeKind::linear: return "linear";
    case LatticeKind::square: return "square";
    case LatticeKind::triangular: return "triangular";
    case LatticeKind::kagome: return "kagome";
    case LatticeKind::cubic: return "cubic";
    case LatticeKind::two_chains: return "two_chains";
    case LatticeKind::custom_edges: return "custom_edges";
  }
  return "?";
}

inline LatticeKind lattice_kind_from_string(std::string s) {
  std::replace(s.begin(), s.end(), '-', '_');
  for (auto k : {LatticeKind::linear, LatticeKind::square, LatticeKind::triangular, LatticeKind::kagome,
                 LatticeKind::cubic, LatticeKind::two_chains, LatticeKind::custom_edges})
    if (to_string(k) == s) return k;
  if (s == "custom") return LatticeKind::custom_edges;
  throw ShapeError("unknown lattice kind '" + s + "'");
}

struct LatticeEdge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

struct LatticeSpec {
  LatticeKind kind = LatticeKind::linear;
  std::vector<int> dims;
  int n_ions = 0;
  std::vector<LatticeEdge> edges;  // custom_edges only

  /// "kind:AxB" or "kind:AxB@N"; dims are omitted from the label when implied by N.
  std::string label() const {
    std::string s = to_string(kind);
    if (kind == LatticeKind::custom_edges) return s + ":" + std::to_string(n_ions);
    s += ":";
    long prod = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (k) s += "x";
      s += std::to_string(dims[k]);
      prod *= dims[k];
    }
    if (prod != n_ions) s += "@" + std::to_string(n_ions);
    return s;
  }
};

namespace detail {

inline long extent_product(const std::vector<int>& d) {
  long p = 1;
  for (int x : d) p *= x;
  return p;
}

inline void require_dims(const LatticeSpec& s, std::size_t rank) {
  const std::string name = to_string(s.kind);
  if (s.dims.size() != rank)
    throw ShapeError(name + ": expected " + std::to_string(rank) + " dims, got " + std::to_string(s.dims.size()));
  for (int d : s.dims)
    if (d < 1) throw ShapeError(name + ": dims must be positive");
  // Only the last row (or plane) may be partially filled.
  const long full = extent_product(s.dims);
  const long slab = full / s.dims.front();
  if (!(s.n_ions <= full && s.n_ions > full - slab))
    throw ShapeError(name + ": n=" + std::to_string(s.n_ions) + " inconsistent with dims");
}

inline void require_chain_dims(const LatticeSpec& s) {
  if (!s.dims.empty() && !(s.dims.size() == 1 && s.dims[0] == s.n_ions))
    throw ShapeError(to_string(s.kind) + ": dims must be [n]");
}

}  // namespace detail

/// Validated edge list (i < j, sorted) for the layout's geometry.
inline std::vector<LatticeEdge> lattice_edges(const LatticeSpec& spec) {
  const int n = spec.n_ions;
  if (n < 2) throw ShapeError("lattice: need at least 2 sites");
  std::vector<LatticeEdge> e;
  auto add = [&](int a, int b) {
    if (a >= 0 && b >= 0 && a < n && b < n) e.push_back({std::min(a, b), std::max(a, b), 1.0});
  };

  switch (spec.kind) {
    case LatticeKind::linear:
      detail::require_chain_dims(spec);
      for (int i = 0; i + 1 < n; ++i) add(i, i + 1);
      break;
    case LatticeKind::kagome:
      // Corner-sharing triangles {2k, 2k+1, 2k+2}, alternately pointing up and down.
      detail::require_chain_dims(spec);
      for (int k = 0; 2 * k + 1 < n; ++k) {
        add(2 * k, 2 * k + 1);
        add(2 * k + 1, 2 * k + 2);
        add(2 * k, 2 * k + 2);
      }
      break;
    case LatticeKind::square:
    case LatticeKind::triangular:
    case LatticeKind::two_chains: {
      detail::require_dims(spec, 2);
      if (spec.kind == LatticeKind::two_chains && spec.dims[0] != 2)
        throw ShapeError("two_chains: first dim must be 2");
      const int rows = spec.dims[0], cols = spec.dims[1];
      auto id = [cols](int r, int c) { return r * cols + c; };
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
          if (c + 1 < cols) add(id(r, c), id(r, c + 1));
          if (spec.kind == LatticeKind::two_chains || r + 1 >= rows) continue;
          add(id(r, c), id(r + 1, c));
          if (spec.kind == LatticeKind::triangular) {
            // Odd rows sit half a spacing to the right of even rows.
            const int c2 = (r % 2 == 0) ? c - 1 : c + 1;
            if (c2 >= 0 && c2 < cols) add(id(r, c), id(r + 1, c2));
          }
        }
      break;
    }
    case LatticeKind::cubic: {
      detail::require_dims(spec, 3);
      const int planes = spec.dims[0], rows = spec.dims[1], cols = spec.dims[2];
      auto id = [&](int p, int r, int c) { return (p * rows + r) * cols + c; };
      for (int p = 0; p < planes; ++p)
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) add(id(p, r, c), id(p, r, c + 1));
            if (r + 1 < rows) add(id(p, r, c), id(p, r + 1, c));
            if (p + 1 < planes) add(id(p, r, c), id(p + 1, r, c));
          }
      break;
    }
    case LatticeKind::custom_edges:
      for (const auto& edge : spec.edges) {
        if (edge.i < 0 || edge.j >= n || !(edge.i < edge.j))
          throw ShapeError("custom_edges: edge (" + std::to_string(edge.i) + "," + std::to_string(edge.j) +
                           ") must satisfy 0 <= i < j < n");
        if (!std::isfinite(edge.weight)) throw ShapeError("custom_edges: non-finite weight");
        e.push_back(edge);
      }
      break;
  }

  std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  for (std::size_t k = 1; k < e.size(); ++k)
    if (e[k].i == e[k - 1].i && e[k].j == e[k - 1].j)
      throw ShapeError(to_string(spec.kind) + ": duplicate edge (" + std::to_string(e[k].i) + "," +
                       std::to_string(e[k].j) + ")");
  return e;
}

/// Unit-norm target graph: J_ij = edge weight on lattice bonds, 0 elsewhere.
inline InteractionGraph build_target(const LatticeSpec& spec) {
  const auto edges = lattice_edges(spec);
  InteractionGraph g{spec.n_ions, Eigen::VectorXd::Zero(pair_count(spec.n_ions)), false};
  for (const auto& e : edges) g.couplings[pair_index(e.i, e.j, spec.n_ions)] = e.weight;
  return normalize(g).graph;
}

/// Canonical layout of a kind at N (used by "kind:N" shorthand).
inline LatticeSpec default_spec(LatticeKind kind, int n) {
  LatticeSpec s{kind, {}, n, {}};
  switch (kind) {
    case LatticeKind::linear:
    case LatticeKind::kagome:
    case LatticeKind::custom_edges:
      s.dims = {n};
      break;
    case LatticeKind::square:
    case LatticeKind::triangular: {
      int best = 0;
      for (int r = 2; r * r <= n; ++r)
        if (n % r == 0) best = r;
      if (best) {
        s.dims = {best, n / best};
      } else {
        const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        s.dims = {(n + cols - 1) / cols, cols};
      }
      break;
    }
    case LatticeKind::two_chains:
      s.dims = {2, (n + 1) / 2};
      break;
    case LatticeKind::cubic: {
      const int k = std::max(2, static_cast<int>(std::floor(std::cbrt(static_cast<double>(n)) + 1e-9)));
      s.dims = {(n + k * k - 1) / (k * k), k, k};
      break;
    }
  }
  return s;
}

/// Lattice layouts available at N: every exact 2D factorization, otherwise a
/// partially filled fragment, plus the kagome and cubic fragments when large enough.
inline std::vector<LatticeSpec> list_supported(int n) {
  if (n < 2) throw ShapeError("list_supported: n must be >= 2");
  std::vector<LatticeSpec> out{default_spec(LatticeKind::linear, n)};
  if (n >= 4) {
    for (auto kind : {LatticeKind::square, LatticeKind::triangular}) {
      bool exact = false;
      for (int r = 2; r * r <= n; ++r)
        if (n % r == 0) {
          out.push_back({kind, {r, n / r}, n, {}});
          exact = true;
        }
      if (!exact) out.push_back(default_spec(kind, n));
    }
    out.push_back(default_spec(LatticeKind::two_chains, n));
  }
  if (n >= 5) out.push_back(default_spec(LatticeKind::kagome, n));
  if (n >= 8) out.push_back(default_spec(LatticeKind::cubic, n));
  return out;
}

/// Parses "kagome:10", "square:2x5", "cubic:3x2x2@10".
inline LatticeSpec parse_lattice(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ShapeError("lattice shorthand '" + text + "' must look like kind:dims");
  const LatticeKind kind = lattice_kind_from_string(text.substr(0, colon));
  if (kind == LatticeKind::custom_edges) throw ShapeError("custom_edges targets must be given as JSON");
  std::string rest = text.substr(colon + 1);
  int n = -1;
  if (const auto at = rest.find('@'); at != std::string::npos) {
    n = std::stoi(rest.substr(at + 1));
    rest = rest.substr(0, at);
  }
  std::vector<int> dims;
  std::size_t pos = 0;
  try {
    while (pos <= rest.size()) {
      const auto x = rest.find('x', pos);
      dims.push_back(std::stoi(rest.substr(pos, x - pos)));
      if (x == std::string::npos) break;
      pos = x + 1;
    }
  } catch (const std::exception&) {
    throw ShapeError("lattice shorthand '" + text + "': bad dims");
  }
  if (dims.size() == 1 && n < 0) {
    auto s = default_spec(kind, dims[0]);
    lattice_edges(s);
    return s;
  }
  LatticeSpec s{kind, dims, n < 0 ? static_cast<int>(detail::extent_product(dims)) : n, {}};
  lattice_edges(s);  // validate
  return s;
}

}  // namespace ionforge
