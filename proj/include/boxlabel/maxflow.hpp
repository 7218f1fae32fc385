#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace boxlabel::maxflow {

enum class Side : std::uint8_t { Source = 0, Sink = 1 };

struct TerminalCaps {
  double source = 0.0;
  double sink = 0.0;
};

struct Edge {
  int u = 0;
  int v = 0;
  double cap_uv = 0.0;
  double cap_vu = 0.0;
};

/// s-t network: one terminal link pair per node plus undirected-pair edges
/// carrying independent capacities in each direction.
struct FlowNetwork {
  int n_nodes = 0;
  std::vector<TerminalCaps> terminal;
  std::vector<Edge> edges;

  explicit FlowNetwork(int n = 0) : n_nodes(n), terminal(static_cast<std::size_t>(n)) {}

  void add_terminal(int node, double cap_source, double cap_sink) {
    terminal[static_cast<std::size_t>(node)].source += cap_source;
    terminal[static_cast<std::size_t>(node)].sink += cap_sink;
  }
  void add_edge(int u, int v, double cap_uv, double cap_vu) { edges.push_back({u, v, cap_uv, cap_vu}); }

  /// Throws InvalidArgument on negative/non-finite caps, self loops or bad ids.
  void validate() const;
};

struct MinCutResult {
  double flow_value = 0.0;
  std::vector<Side> side;
  // Flow bookkeeping for duality checks.
  std::vector<double> source_flow;  // flow on s->i, per node
  std::vector<double> sink_flow;    // flow on i->t, per node
  std::vector<double> edge_flow;    // net flow u->v, per input edge
};

/// Capacity of the cut induced by `side` (source-side nodes pay their sink
/// link, sink-side nodes their source link, plus u->v edges crossing S->T).
double cut_value(const FlowNetwork& net, const std::vector<Side>& side);

/// Exact minimum cut by augmenting paths over reused search trees
/// (Boykov-Kolmogorov). Nodes left unreachable from the source in the final
/// residual graph are reported on the sink side.
MinCutResult min_cut(const FlowNetwork& net);

/// Exhaustive reference over all 2^n labelings; n <= 20 (TooLarge otherwise).
/// Returns the lexicographically smallest minimizer (Source < Sink).
MinCutResult brute_force_min_cut(const FlowNetwork& net);

}  // namespace boxlabel::maxflow
