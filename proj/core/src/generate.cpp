#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

#include "ranumopt/errors.hpp"
#include "ranumopt/net_model.hpp"
#include "ranumopt/rng.hpp"

namespace ranumopt {

namespace {

std::vector<int> nodes_within(const std::vector<Position>& pos, int i, double radius) {
  std::vector<int> out;
  const double r2 = radius * radius;
  for (int j = 0; j < static_cast<int>(pos.size()); ++j) {
    if (j == i) continue;
    const double dx = pos[i].x - pos[j].x, dy = pos[i].y - pos[j].y;
    if (dx * dx + dy * dy <= r2) out.push_back(j);
  }
  return out;
}

}  // namespace

Topology generate_topology(const GenConfig& cfg) {
  if (cfg.node_count < 2) throw std::invalid_argument("generate: need at least 2 nodes");
  if (!(cfg.cf_low > 0.0) || !(cfg.cf_low <= cfg.cf_high) || !(cfg.cf_high < 1.0))
    throw std::invalid_argument("generate: need 0 < cf_low <= cf_high < 1");
  if (!(cfg.interference_scale >= 1.0))
    throw std::invalid_argument("generate: interference_scale must be >= 1");
  if (cfg.max_attempts < 1) throw std::invalid_argument("generate: max_attempts must be >= 1");

  const int n = cfg.node_count;
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(attempt));

    std::vector<Position> pos(n);
    for (int i = 0; i < n; ++i) {
      pos[i].x = rng.uniform01();
      pos[i].y = rng.uniform01();
    }
    std::vector<double> radius(n);
    for (int i = 0; i < n; ++i) radius[i] = rng.uniform(cfg.cf_low, cfg.cf_high);

    bool isolated = false;
    std::vector<LinkSpec> links;
    std::vector<std::vector<int>> hearing(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> reach = nodes_within(pos, i, radius[i]);
      if (reach.empty()) {
        isolated = true;
        break;
      }
      for (int j : reach) links.push_back({i, j, 1.0});
      hearing[i] = cfg.interference_equals_communication
                       ? std::move(reach)
                       : nodes_within(pos, i, radius[i] * cfg.interference_scale);
    }
    if (isolated) continue;

    std::vector<double> energy(n, 1.0);
    return Topology(std::move(energy), std::move(links), std::move(hearing),
                    std::move(pos));
  }
  throw GenerationError("generate: no instance without isolated nodes after " +
                        std::to_string(cfg.max_attempts) + " attempts (seed " +
                        std::to_string(cfg.seed) + ")");
}

// Hop-count-shortest route from s to t, ties broken so the node id sequence
// is lexicographically smallest: BFS distances toward the sink, then greedy
// descent always taking the smallest-id next hop that stays on a shortest
// path. Empty result means t is unreachable.
static std::vector<int> shortest_route(const Topology& topo, int s, int t) {
  const int n = topo.node_count();
  std::vector<int> dist(n, -1);
  std::deque<int> queue;
  dist[t] = 0;
  queue.push_back(t);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int e : topo.in_links(v)) {
      int u = topo.link(e).from;
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  if (dist[s] < 0) return {};

  std::vector<int> route;
  int cur = s;
  while (cur != t) {
    for (int e : topo.out_links(cur)) {  // ascending target id
      int v = topo.link(e).to;
      if (dist[v] == dist[cur] - 1) {
        route.push_back(e);
        cur = v;
        break;
      }
    }
  }
  return route;
}

SessionSet generate_sessions(const Topology& topo, int count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("generate_sessions: negative count");
  const int n = topo.node_count();
  if (count > 0 && n < 2)
    throw std::invalid_argument("generate_sessions: need at least 2 nodes");

  Rng rng(seed);
  std::set<std::pair<int, int>> used;
  std::vector<Session> sessions;
  const int budget = 200 * std::max(1, count);
  for (int tries = 0; tries < budget && static_cast<int>(sessions.size()) < count;
       ++tries) {
    int s = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
    int t = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
    if (s == t || used.count({s, t})) continue;
    std::vector<int> route = shortest_route(topo, s, t);
    if (route.empty()) continue;
    used.insert({s, t});
    sessions.push_back({s, t, std::move(route)});
  }
  if (static_cast<int>(sessions.size()) < count)
    throw GenerationError("generate_sessions: could not route " + std::to_string(count) +
                          " distinct pairs (seed " + std::to_string(seed) + ")");
  return SessionSet(topo, std::move(sessions));
}

}  // namespace ranumopt
