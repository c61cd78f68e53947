#include "gspse/laplacian.hpp"

#include <algorithm>
#include <complex>
#include <map>
#include <queue>

#include "gspse/errors.hpp"

namespace gspse {

double edge_weight(const Branch& br, WeightConvention convention) {
  switch (convention) {
    case WeightConvention::InverseReactance:
      return 1.0 / br.reactance;
    case WeightConvention::Susceptance:
      break;
  }
  const std::complex<double> y = 1.0 / std::complex<double>(br.resistance, br.reactance);
  return -y.imag();
}

Matrix LaplacianMatrix::reduced() const {
  const IndexList keep = non_reference();
  return select(matrix, keep, keep);
}

LaplacianMatrix laplacian_from_edges(int n, const std::vector<Edge>& edges, int reference) {
  if (reference < 0 || reference >= n) throw DimensionMismatch("reference bus out of range");
  std::map<std::pair<int, int>, Edge> merged;
  for (const Edge& e : edges) {
    if (e.from == e.to || e.from < 0 || e.to < 0 || e.from >= n || e.to >= n) {
      throw DimensionMismatch("edge endpoint out of range");
    }
    const auto key = std::minmax(e.from, e.to);
    auto [it, fresh] = merged.try_emplace({key.first, key.second});
    Edge& m = it->second;
    if (fresh) {
      m.from = key.first;
      m.to = key.second;
    }
    m.weight += e.weight;
    m.branches.insert(m.branches.end(), e.branches.begin(), e.branches.end());
  }

  LaplacianMatrix lap;
  lap.reference = reference;
  lap.matrix = Matrix::Zero(n, n);
  for (auto& [key, e] : merged) {
    lap.matrix(e.from, e.to) -= e.weight;
    lap.matrix(e.to, e.from) -= e.weight;
    lap.matrix(e.from, e.from) += e.weight;
    lap.matrix(e.to, e.to) += e.weight;
    lap.edges.push_back(std::move(e));
  }
  return lap;
}

LaplacianMatrix build_laplacian(const Network& net, WeightConvention convention) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < net.branches.size(); ++i) {
    const Branch& br = net.branches[i];
    if (!br.in_service) continue;
    edges.push_back(Edge{br.from_bus - 1, br.to_bus - 1, edge_weight(br, convention), {static_cast<int>(i)}});
  }
  LaplacianMatrix lap = laplacian_from_edges(net.size(), edges, net.reference_index());
  const int components = validate_connectivity(lap);
  if (components != 1) {
    throw DisconnectedNetwork("network has " + std::to_string(components) + " connected components");
  }
  return lap;
}

int validate_connectivity(const LaplacianMatrix& laplacian) {
  const int n = laplacian.size();
  std::vector<int> component(static_cast<std::size_t>(n), -1);
  int count = 0;
  for (int start = 0; start < n; ++start) {
    if (component[static_cast<std::size_t>(start)] >= 0) continue;
    std::queue<int> frontier;
    frontier.push(start);
    component[static_cast<std::size_t>(start)] = count;
    while (!frontier.empty()) {
      const int k = frontier.front();
      frontier.pop();
      for (int j = 0; j < n; ++j) {
        if (j == k || laplacian.matrix(k, j) == 0.0 || component[static_cast<std::size_t>(j)] >= 0) continue;
        component[static_cast<std::size_t>(j)] = count;
        frontier.push(j);
      }
    }
    ++count;
  }
  return count;
}

}  // namespace gspse
