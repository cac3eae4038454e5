#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "assocdb/assoc.hpp"
#include "assocdb/errors.hpp"
#include "assocdb/tsv.hpp"

namespace assocdb::graph {

/// Quadrant probabilities for recursive edge placement: `a` top-left (both
/// endpoint bits 0), `b` top-right, `c` bottom-left, `d` bottom-right.
struct QuadrantProbs {
  double a = 0.57;
  double b = 0.19;
  double c = 0.19;
  double d = 0.05;
  bool operator==(const QuadrantProbs&) const = default;
};

struct GenParams {
  int scale = 1;
  int edge_factor = 16;
  std::uint64_t seed = 0;
  QuadrantProbs probs;

  std::uint64_t vertex_count() const { return std::uint64_t{1} << scale; }
  std::uint64_t edge_count() const { return static_cast<std::uint64_t>(edge_factor) << scale; }

  void validate() const {
    if (scale < 1 || scale > 40) throw Error("scale must be in [1, 40]");
    if (edge_factor < 1) throw Error("edge factor must be at least 1");
    const double p[] = {probs.a, probs.b, probs.c, probs.d};
    for (double x : p) {
      if (!(x >= 0.0)) throw Error("quadrant probabilities must be non-negative");
    }
    if (std::fabs(probs.a + probs.b + probs.c + probs.d - 1.0) > 1e-12) {
      throw Error("quadrant probabilities must sum to 1");
    }
  }
  bool operator==(const GenParams&) const = default;
};

struct Edge {
  std::uint64_t from;
  std::uint64_t to;
  bool operator==(const Edge&) const = default;
};

struct EdgeList {
  GenParams params;
  std::vector<Edge> edges;
  bool operator==(const EdgeList&) const = default;
};

namespace detail {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: the draws for edge `i` depend only on (seed, i).
class EdgeRng {
 public:
  EdgeRng(std::uint64_t seed, std::uint64_t edge) : state_(mix64(seed ^ mix64(edge + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline Edge sample_edge(const GenParams& p, std::uint64_t index) {
  EdgeRng rng(p.seed, index);
  const double ab = p.probs.a + p.probs.b;
  const double abc = ab + p.probs.c;
  Edge e{0, 0};
  for (int level = 0; level < p.scale; ++level) {
    const double u = rng.uniform();
    const std::uint64_t bit = std::uint64_t{1} << (p.scale - 1 - level);
    if (u < p.probs.a) {
      // top-left
    } else if (u < ab) {
      e.to |= bit;
    } else if (u < abc) {
      e.from |= bit;
    } else {
      e.from |= bit;
      e.to |= bit;
    }
  }
  return e;
}

}  // namespace detail

/// Unpermuted Kronecker edge sampling: each of the d*2^s edges descends
/// `scale` levels of the quadrant recursion. Vertex ids are not relabeled,
/// so low ids carry the heavy degrees. Self-loops and repeats are kept.
/// Output is identical for any `threads` value.
inline EdgeList generate(const GenParams& p, unsigned threads = 1) {
  p.validate();
  EdgeList out{p, {}};
  const std::uint64_t n = p.edge_count();
  out.edges.resize(n);
  threads = std::max(1u, threads);
  if (threads == 1 || n < 1u << 16) {
    for (std::uint64_t i = 0; i < n; ++i) out.edges[i] = detail::sample_edge(p, i);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::uint64_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::uint64_t i = lo; i < hi; ++i) out.edges[i] = detail::sample_edge(p, i);
    });
  }
  return out;
}

/// Zero-padded decimal id, padded to the width of 2^scale - 1 so that byte
/// order matches numeric order.
inline std::string vertex_key(std::uint64_t id, int scale) {
  const std::string widest = std::to_string((std::uint64_t{1} << scale) - 1);
  std::string digits = std::to_string(id);
  if (digits.size() < widest.size()) digits.insert(0, widest.size() - digits.size(), '0');
  return digits;
}

/// Numeric adjacency array; an entry's value is its edge multiplicity.
inline AssocArray to_adjacency(const EdgeList& e) {
  std::vector<Edge> sorted = e.edges;
  std::sort(sorted.begin(), sorted.end(),
            [](const Edge& x, const Edge& y) { return x.from != y.from ? x.from < y.from : x.to < y.to; });
  std::vector<std::string> rows, cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    rows.push_back(vertex_key(sorted[i].from, e.params.scale));
    cols.push_back(vertex_key(sorted[i].to, e.params.scale));
    vals.push_back(static_cast<double>(j - i));
    i = j;
  }
  return from_numeric_triples(rows, cols, vals, Collision::Sum);
}

inline constexpr const char* kOutDegree = "OutDeg";
inline constexpr const char* kInDegree = "InDeg";

struct DegreeTriples {
  StringTriples out;  // (vertex, "OutDeg", count)
  StringTriples in;   // (vertex, "InDeg", count)
};

/// Per-vertex edge counts over the raw list (repeats counted), ascending by
/// vertex. Vertices with no edges in a direction are omitted.
inline DegreeTriples degrees(const EdgeList& e) {
  const std::uint64_t nv = e.params.vertex_count();
  std::vector<std::uint64_t> out_deg(nv, 0), in_deg(nv, 0);
  for (const auto& edge : e.edges) {
    ++out_deg[edge.from];
    ++in_deg[edge.to];
  }
  DegreeTriples d;
  for (std::uint64_t v = 0; v < nv; ++v) {
    if (out_deg[v]) d.out.push_back(vertex_key(v, e.params.scale), kOutDegree, std::to_string(out_deg[v]));
    if (in_deg[v]) d.in.push_back(vertex_key(v, e.params.scale), kInDegree, std::to_string(in_deg[v]));
  }
  return d;
}

/// Debug dump: `start<TAB>end<LF>` per edge.
inline void write_edges_tsv(std::ostream& out, const EdgeList& e) {
  for (const auto& edge : e.edges) out << edge.from << '\t' << edge.to << '\n';
}

}  // namespace assocdb::graph
