#include "boxlabel/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "boxlabel/error.hpp"

namespace boxlabel::maxflow {

void FlowNetwork::validate() const {
  auto bad = [](double c) { return !std::isfinite(c) || c < 0.0; };
  if (n_nodes < 0 || terminal.size() != static_cast<std::size_t>(n_nodes)) {
    throw Error(ErrorCode::InvalidArgument, "terminal capacity table does not match node count");
  }
  for (const auto& t : terminal) {
    if (bad(t.source) || bad(t.sink)) throw Error(ErrorCode::InvalidArgument, "terminal capacity must be finite and >= 0");
  }
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n_nodes || e.v >= n_nodes) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    }
    if (e.u == e.v) throw Error(ErrorCode::InvalidArgument, "self loops are not allowed");
    if (bad(e.cap_uv) || bad(e.cap_vu)) throw Error(ErrorCode::InvalidArgument, "edge capacity must be finite and >= 0");
  }
}

double cut_value(const FlowNetwork& net, const std::vector<Side>& side) {
  double total = 0.0;
  for (int i = 0; i < net.n_nodes; ++i) {
    const auto& t = net.terminal[static_cast<std::size_t>(i)];
    total += side[static_cast<std::size_t>(i)] == Side::Source ? t.sink : t.source;
  }
  for (const auto& e : net.edges) {
    const Side su = side[static_cast<std::size_t>(e.u)];
    const Side sv = side[static_cast<std::size_t>(e.v)];
    if (su == Side::Source && sv == Side::Sink) total += e.cap_uv;
    if (su == Side::Sink && sv == Side::Source) total += e.cap_vu;
  }
  return total;
}

namespace {

constexpr int kNone = -1;
constexpr int kTerminal = -2;
constexpr int kOrphan = -3;
constexpr int kInfiniteDist = std::numeric_limits<int>::max();

class BkSolver {
 public:
  explicit BkSolver(const FlowNetwork& net) : nodes_(static_cast<std::size_t>(net.n_nodes)) {
    double max_cap = 0.0;
    for (const auto& t : net.terminal) max_cap = std::max({max_cap, t.source, t.sink});
    for (const auto& e : net.edges) max_cap = std::max({max_cap, e.cap_uv, e.cap_vu});
    eps_ = max_cap * 1e-12;

    arcs_.reserve(net.edges.size() * 2);
    for (const auto& e : net.edges) {
      const int a = static_cast<int>(arcs_.size());
      arcs_.push_back({e.v, nodes_[static_cast<std::size_t>(e.u)].first, a + 1, e.cap_uv});
      nodes_[static_cast<std::size_t>(e.u)].first = a;
      arcs_.push_back({e.u, nodes_[static_cast<std::size_t>(e.v)].first, a, e.cap_vu});
      nodes_[static_cast<std::size_t>(e.v)].first = a + 1;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& t = net.terminal[i];
      flow_ += std::min(t.source, t.sink);
      nodes_[i].tr_cap = t.source - t.sink;
    }
  }

  double solve() {
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      Node& n = node(i);
      if (n.tr_cap > eps_) {
        n.parent = kTerminal;
        n.is_sink = false;
        n.ts = 0;
        n.dist = 1;
        activate(i);
      } else if (n.tr_cap < -eps_) {
        n.parent = kTerminal;
        n.is_sink = true;
        n.ts = 0;
        n.dist = 1;
        activate(i);
      }
    }

    int current = kNone;
    while (true) {
      int i = current;
      if (i != kNone && node(i).parent == kNone) i = kNone;
      if (i == kNone) {
        i = next_active();
        if (i == kNone) break;
      }
      const int middle = grow(i);
      ++time_;
      if (middle != kNone) {
        augment(middle);
        adopt_orphans();
        current = i;
      } else {
        current = kNone;
      }
    }
    return flow_;
  }

  /// Source side = nodes reachable from the source in the residual graph.
  std::vector<Side> residual_partition() const {
    std::vector<Side> side(nodes_.size(), Side::Sink);
    std::vector<int> stack;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      if (nodes_[static_cast<std::size_t>(i)].tr_cap > eps_) {
        side[static_cast<std::size_t>(i)] = Side::Source;
        stack.push_back(i);
      }
    }
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int a = nodes_[static_cast<std::size_t>(i)].first; a != kNone; a = arcs_[static_cast<std::size_t>(a)].next) {
        const Arc& arc = arcs_[static_cast<std::size_t>(a)];
        if (arc.rcap > eps_ && side[static_cast<std::size_t>(arc.head)] == Side::Sink) {
          side[static_cast<std::size_t>(arc.head)] = Side::Source;
          stack.push_back(arc.head);
        }
      }
    }
    return side;
  }

  double residual_terminal(int i) const { return nodes_[static_cast<std::size_t>(i)].tr_cap; }
  double residual_arc(std::size_t a) const { return arcs_[a].rcap; }

 private:
  struct Arc {
    int head;
    int next;
    int sister;
    double rcap;
  };
  struct Node {
    int first = kNone;
    int parent = kNone;
    int ts = 0;
    int dist = 0;
    bool is_sink = false;
    bool queued = false;
    double tr_cap = 0.0;
  };

  Node& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  Arc& arc(int a) { return arcs_[static_cast<std::size_t>(a)]; }

  void activate(int i) {
    Node& n = node(i);
    if (n.queued) return;
    n.queued = true;
    active_.push_back(i);
  }

  int next_active() {
    while (!active_.empty()) {
      const int i = active_.front();
      active_.pop_front();
      node(i).queued = false;
      if (node(i).parent != kNone) return i;
    }
    return kNone;
  }

  // Grows the tree containing `i`; returns an arc from the source tree into
  // the sink tree when the trees touch.
  int grow(int i) {
    Node& ni = node(i);
    for (int a = ni.first; a != kNone; a = arc(a).next) {
      const int j = arc(a).head;
      Node& nj = node(j);
      const double cap = ni.is_sink ? arc(arc(a).sister).rcap : arc(a).rcap;
      if (cap <= eps_) continue;
      if (nj.parent == kNone) {
        nj.is_sink = ni.is_sink;
        nj.parent = arc(a).sister;
        nj.ts = ni.ts;
        nj.dist = ni.dist + 1;
        activate(j);
      } else if (nj.is_sink != ni.is_sink) {
        return ni.is_sink ? arc(a).sister : a;
      } else if (nj.ts <= ni.ts && nj.dist > ni.dist) {
        nj.parent = arc(a).sister;
        nj.ts = ni.ts;
        nj.dist = ni.dist + 1;
      }
    }
    return kNone;
  }

  void augment(int middle) {
    double bottleneck = arc(middle).rcap;
    int i = arc(arc(middle).sister).head;
    while (node(i).parent != kTerminal) {
      const int a = node(i).parent;
      bottleneck = std::min(bottleneck, arc(arc(a).sister).rcap);
      i = arc(a).head;
    }
    bottleneck = std::min(bottleneck, node(i).tr_cap);
    i = arc(middle).head;
    while (node(i).parent != kTerminal) {
      const int a = node(i).parent;
      bottleneck = std::min(bottleneck, arc(a).rcap);
      i = arc(a).head;
    }
    bottleneck = std::min(bottleneck, -node(i).tr_cap);

    arc(arc(middle).sister).rcap += bottleneck;
    arc(middle).rcap -= bottleneck;

    i = arc(arc(middle).sister).head;
    while (node(i).parent != kTerminal) {
      const int a = node(i).parent;
      arc(a).rcap += bottleneck;
      arc(arc(a).sister).rcap -= bottleneck;
      if (arc(arc(a).sister).rcap <= eps_) make_orphan(i);
      i = arc(a).head;
    }
    node(i).tr_cap -= bottleneck;
    if (node(i).tr_cap <= eps_) make_orphan(i);

    i = arc(middle).head;
    while (node(i).parent != kTerminal) {
      const int a = node(i).parent;
      arc(arc(a).sister).rcap += bottleneck;
      arc(a).rcap -= bottleneck;
      if (arc(a).rcap <= eps_) make_orphan(i);
      i = arc(a).head;
    }
    node(i).tr_cap += bottleneck;
    if (node(i).tr_cap >= -eps_) make_orphan(i);

    flow_ += bottleneck;
  }

  void make_orphan(int i) {
    node(i).parent = kOrphan;
    orphans_.push_back(i);
  }

  void adopt_orphans() {
    while (!orphans_.empty()) {
      const int i = orphans_.front();
      orphans_.pop_front();
      adopt(i);
    }
  }

  void adopt(int i) {
    Node& ni = node(i);
    int best_arc = kNone;
    int best_dist = kInfiniteDist;

    for (int a0 = ni.first; a0 != kNone; a0 = arc(a0).next) {
      const double cap = ni.is_sink ? arc(a0).rcap : arc(arc(a0).sister).rcap;
      if (cap <= eps_) continue;
      int j = arc(a0).head;
      if (node(j).is_sink != ni.is_sink || node(j).parent == kNone) continue;

      int d = 0;
      while (true) {
        Node& nj = node(j);
        if (nj.ts == time_) {
          d += nj.dist;
          break;
        }
        const int a = nj.parent;
        ++d;
        if (a == kTerminal) {
          nj.ts = time_;
          nj.dist = 1;
          break;
        }
        if (a == kOrphan) {
          d = kInfiniteDist;
          break;
        }
        j = arc(a).head;
      }
      if (d == kInfiniteDist) continue;
      if (d < best_dist) {
        best_arc = a0;
        best_dist = d;
      }
      for (j = arc(a0).head; node(j).ts != time_; j = arc(node(j).parent).head) {
        node(j).ts = time_;
        node(j).dist = d--;
      }
    }

    if (best_arc != kNone) {
      ni.parent = best_arc;
      ni.ts = time_;
      ni.dist = best_dist + 1;
      return;
    }

    ni.parent = kNone;
    for (int a0 = ni.first; a0 != kNone; a0 = arc(a0).next) {
      const int j = arc(a0).head;
      Node& nj = node(j);
      if (nj.is_sink != ni.is_sink || nj.parent == kNone) continue;
      const double cap = ni.is_sink ? arc(a0).rcap : arc(arc(a0).sister).rcap;
      if (cap > eps_) activate(j);
      if (nj.parent != kTerminal && nj.parent != kOrphan && arc(nj.parent).head == i) make_orphan(j);
    }
  }

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::deque<int> orphans_;
  double flow_ = 0.0;
  double eps_ = 0.0;
  int time_ = 0;
};

}  // namespace

MinCutResult min_cut(const FlowNetwork& net) {
  net.validate();
  BkSolver solver(net);
  MinCutResult result;
  result.flow_value = solver.solve();
  result.side = solver.residual_partition();

  const auto n = static_cast<std::size_t>(net.n_nodes);
  result.source_flow.resize(n);
  result.sink_flow.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tr = solver.residual_terminal(static_cast<int>(i));
    result.source_flow[i] = net.terminal[i].source - std::max(tr, 0.0);
    result.sink_flow[i] = net.terminal[i].sink - std::max(-tr, 0.0);
  }
  result.edge_flow.resize(net.edges.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const double f_uv = net.edges[e].cap_uv - solver.residual_arc(2 * e);
    const double f_vu = net.edges[e].cap_vu - solver.residual_arc(2 * e + 1);
    result.edge_flow[e] = 0.5 * (f_uv - f_vu);
  }
  return result;
}

MinCutResult brute_force_min_cut(const FlowNetwork& net) {
  net.validate();
  if (net.n_nodes > 20) {
    throw Error(ErrorCode::TooLarge, "brute force min cut supports at most 20 nodes, got " + std::to_string(net.n_nodes));
  }
  const int n = net.n_nodes;
  MinCutResult best;
  best.flow_value = std::numeric_limits<double>::infinity();
  std::vector<Side> side(static_cast<std::size_t>(n));
  // Node 0 is the most significant bit so increasing masks enumerate
  // assignments in lexicographic order.
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (int i = 0; i < n; ++i) {
      side[static_cast<std::size_t>(i)] = ((mask >> (n - 1 - i)) & 1u) ? Side::Sink : Side::Source;
    }
    const double value = cut_value(net, side);
    if (value < best.flow_value) {
      best.flow_value = value;
      best.side = side;
    }
  }
  if (n == 0) best.flow_value = 0.0;
  return best;
}

}  // namespace boxlabel::maxflow
