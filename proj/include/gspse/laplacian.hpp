#pragma once

#include <vector>

#include "gspse/linalg.hpp"
#include "gspse/network.hpp"

namespace gspse {

// How a branch's series impedance r + jx becomes a graph edge weight.
enum class WeightConvention {
  Susceptance,       // W = -Im{1 / (r + jx)} = x / (r^2 + x^2)
  InverseReactance,  // W = 1 / x
};

double edge_weight(const Branch& br, WeightConvention convention);

// One graph edge; parallel in-service branches between the same pair are merged.
struct Edge {
  int from = 0;  // zero-based, from < to
  int to = 0;
  double weight = 0.0;
  std::vector<int> branches;  // indices into Network::branches
};

struct LaplacianMatrix {
  Matrix matrix;
  std::vector<Edge> edges;  // sorted by (from, to)
  int reference = 0;        // zero-based reference bus

  int size() const { return static_cast<int>(matrix.rows()); }

  // L with the reference row and column removed.
  Matrix reduced() const;
  IndexList non_reference() const { return indices_without(size(), reference); }
};

// Throws DisconnectedNetwork when the in-service graph has more than one component.
LaplacianMatrix build_laplacian(const Network& net,
                                WeightConvention convention = WeightConvention::Susceptance);

// For hand-built graphs. Edges may be given in any order and orientation; duplicates add.
LaplacianMatrix laplacian_from_edges(int n, const std::vector<Edge>& edges, int reference = 0);

// Connected components by breadth-first traversal over the off-diagonal pattern.
int validate_connectivity(const LaplacianMatrix& laplacian);

}  // namespace gspse
