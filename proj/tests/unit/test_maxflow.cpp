#include <doctest.h>

#include <cmath>

#include "boxlabel/error.hpp"
#include "boxlabel/maxflow.hpp"
#include "boxlabel/rng.hpp"

using namespace boxlabel;
using namespace boxlabel::maxflow;

namespace {

FlowNetwork random_network(Rng& rng, int n) {
  FlowNetwork net(n);
  for (int i = 0; i < n; ++i) net.add_terminal(i, rng.uniform() < 0.7 ? rng.uniform(0, 10) : 0.0, rng.uniform() < 0.7 ? rng.uniform(0, 10) : 0.0);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < 0.4) net.add_edge(u, v, rng.uniform(0, 5), rng.uniform(0, 5));
  return net;
}

}  // namespace

TEST_CASE("two-node network by hand") {
  FlowNetwork net(2);
  net.add_terminal(0, 5.0, 1.0);
  net.add_terminal(1, 2.0, 6.0);
  net.add_edge(0, 1, 3.0, 0.0);
  const auto cut = min_cut(net);
  // s->0->t 1, s->1->t 2, s->0->1->t 3
  CHECK(cut.flow_value == doctest::Approx(6.0));
  CHECK(cut.side[0] == Side::Source);
  CHECK(cut.side[1] == Side::Sink);
  CHECK(cut_value(net, cut.side) == doctest::Approx(6.0));
}

TEST_CASE("min_cut agrees with exhaustive search") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const FlowNetwork net = random_network(rng, n);
    const auto fast = min_cut(net);
    const auto slow = brute_force_min_cut(net);
    CHECK(std::abs(fast.flow_value - slow.flow_value) <= 1e-9 * std::max(1.0, slow.flow_value));
    CHECK(cut_value(net, fast.side) == doctest::Approx(fast.flow_value).epsilon(1e-9));
  }
}

TEST_CASE("flow is feasible and conserved") {
  Rng rng(77);
  const FlowNetwork net = random_network(rng, 9);
  const auto res = min_cut(net);
  std::vector<double> balance(9, 0.0);
  for (int i = 0; i < 9; ++i) {
    CHECK(res.source_flow[i] <= net.terminal[i].source + 1e-9);
    CHECK(res.sink_flow[i] <= net.terminal[i].sink + 1e-9);
    balance[i] += res.source_flow[i] - res.sink_flow[i];
  }
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& ed = net.edges[e];
    CHECK(res.edge_flow[e] <= ed.cap_uv + 1e-9);
    CHECK(-res.edge_flow[e] <= ed.cap_vu + 1e-9);
    balance[ed.u] -= res.edge_flow[e];
    balance[ed.v] += res.edge_flow[e];
  }
  for (double b : balance) CHECK(std::abs(b) < 1e-9);
}

TEST_CASE("invalid networks are rejected") {
  FlowNetwork neg(2);
  neg.add_terminal(0, -1.0, 0.0);
  CHECK_THROWS_AS(min_cut(neg), Error);
  FlowNetwork loop(2);
  loop.add_edge(1, 1, 1.0, 1.0);
  CHECK_THROWS_AS(min_cut(loop), Error);
  FlowNetwork bad(2);
  bad.add_edge(0, 2, 1.0, 1.0);
  CHECK_THROWS_AS(min_cut(bad), Error);
  CHECK_THROWS_AS(brute_force_min_cut(FlowNetwork(21)), Error);
}

TEST_CASE("empty and isolated networks") {
  CHECK(min_cut(FlowNetwork(0)).flow_value == 0.0);
  FlowNetwork net(3);
  CHECK(min_cut(net).flow_value == 0.0);
}
