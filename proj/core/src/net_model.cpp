#include "ranumopt/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ranumopt {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Topology::Topology(std::vector<double> energy_per_packet,
                   std::vector<LinkSpec> links,
                   std::vector<std::vector<int>> hearing_out,
                   std::vector<Position> positions)
    : energy_(std::move(energy_per_packet)),
      links_(std::move(links)),
      hear_out_(std::move(hearing_out)),
      positions_(std::move(positions)) {
  const int n = node_count();
  require(n >= 1, "topology: at least one node required");
  for (int i = 0; i < n; ++i)
    require(std::isfinite(energy_[i]) && energy_[i] > 0.0,
            "topology: node energy must be positive and finite (node " +
                std::to_string(i) + ")");

  require(static_cast<int>(hear_out_.size()) == n,
          "topology: hearing set list must cover every node");
  for (int i = 0; i < n; ++i) {
    auto& out = hear_out_[i];
    std::sort(out.begin(), out.end());
    require(std::adjacent_find(out.begin(), out.end()) == out.end(),
            "topology: duplicate entry in hearing set of node " + std::to_string(i));
    for (int j : out) {
      require(j >= 0 && j < n, "topology: hearing set entry out of range");
      require(j != i, "topology: node cannot appear in its own hearing set");
    }
  }

  std::sort(links_.begin(), links_.end(), [](const LinkSpec& a, const LinkSpec& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  for (size_t e = 0; e < links_.size(); ++e) {
    const LinkSpec& l = links_[e];
    require(l.from >= 0 && l.from < n && l.to >= 0 && l.to < n,
            "topology: link endpoint out of range");
    require(l.from != l.to, "topology: self-loop link");
    require(std::isfinite(l.capacity) && l.capacity > 0.0,
            "topology: link capacity must be positive and finite");
    if (e > 0)
      require(!(links_[e - 1].from == l.from && links_[e - 1].to == l.to),
              "topology: duplicate link (" + std::to_string(l.from) + "," +
                  std::to_string(l.to) + ")");
    require(std::binary_search(hear_out_[l.from].begin(), hear_out_[l.from].end(), l.to),
            "topology: link (" + std::to_string(l.from) + "," + std::to_string(l.to) +
                ") target not in the transmitter's hearing set");
  }

  if (!positions_.empty()) {
    require(static_cast<int>(positions_.size()) == n,
            "topology: positions must cover every node");
    for (const Position& p : positions_)
      require(std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.x <= 1.0 &&
                  p.y >= 0.0 && p.y <= 1.0,
              "topology: positions must lie in the unit square");
  }

  out_links_.assign(n, {});
  in_links_.assign(n, {});
  for (int e = 0; e < link_count(); ++e) {
    out_links_[links_[e].from].push_back(e);
    in_links_[links_[e].to].push_back(e);
  }
  hear_in_.assign(n, {});
  for (int i = 0; i < n; ++i)
    for (int j : hear_out_[i]) hear_in_[j].push_back(i);
}

int Topology::link_between(int from, int to) const {
  for (int e : out_links_[from])
    if (links_[e].to == to) return e;
  return -1;
}

ProbAssignment::ProbAssignment(const Topology& topo, std::vector<double> link_prob)
    : link_prob_(std::move(link_prob)) {
  require(static_cast<int>(link_prob_.size()) == topo.link_count(),
          "assignment: one probability per link required");
  for (size_t e = 0; e < link_prob_.size(); ++e) {
    double p = link_prob_[e];
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
            "assignment: link probability out of [0,1] at link " + std::to_string(e));
  }
  node_prob_.assign(topo.node_count(), 0.0);
  for (int i = 0; i < topo.node_count(); ++i) {
    double s = 0.0;
    for (int e : topo.out_links(i)) s += link_prob_[e];
    node_prob_[i] = s;
  }
}

ProbAssignment ProbAssignment::equal_split(const Topology& topo,
                                           const std::vector<double>& node_prob) {
  require(static_cast<int>(node_prob.size()) == topo.node_count(),
          "assignment: one node probability per node required");
  std::vector<double> p(topo.link_count(), 0.0);
  for (int i = 0; i < topo.node_count(); ++i) {
    require(std::isfinite(node_prob[i]) && node_prob[i] >= 0.0 && node_prob[i] <= 1.0,
            "assignment: node probability out of [0,1]");
    const int deg = topo.out_degree(i);
    if (node_prob[i] == 0.0) continue;
    require(deg >= 1, "assignment: positive probability on a node with no links");
    for (int e : topo.out_links(i)) p[e] = node_prob[i] / deg;
  }
  return ProbAssignment(topo, std::move(p));
}

double ProbAssignment::max_node_prob_excess() const {
  double m = 0.0;
  for (double s : node_prob_) m = std::max(m, s - 1.0);
  return m;
}

SessionSet::SessionSet(const Topology& topo, std::vector<Session> sessions)
    : sessions_(std::move(sessions)) {
  on_link_.assign(topo.link_count(), {});
  for (size_t s = 0; s < sessions_.size(); ++s) {
    const Session& sess = sessions_[s];
    require(!sess.route.empty(), "session " + std::to_string(s) + ": empty route");
    for (size_t k = 0; k < sess.route.size(); ++k) {
      int e = sess.route[k];
      require(e >= 0 && e < topo.link_count(),
              "session " + std::to_string(s) + ": route link id out of range");
      if (k > 0)
        require(topo.link(sess.route[k - 1]).to == topo.link(e).from,
                "session " + std::to_string(s) + ": route links do not chain");
    }
    require(sess.source == topo.link(sess.route.front()).from,
            "session " + std::to_string(s) + ": source does not match route head");
    require(sess.sink == topo.link(sess.route.back()).to,
            "session " + std::to_string(s) + ": sink does not match route tail");
    require(sess.source != sess.sink, "session " + std::to_string(s) + ": cyclic route");
    for (int e : sess.route) on_link_[e].push_back(static_cast<int>(s));
  }
}

std::vector<double> link_throughput(const Topology& topo, const ProbAssignment& pa) {
  std::vector<double> x(topo.link_count(), 0.0);
  const std::vector<double>& P = pa.node_probs();
  for (int e = 0; e < topo.link_count(); ++e) {
    const LinkSpec& l = topo.link(e);
    double idle = 1.0 - P[l.to];
    for (int k : topo.hear_in(l.to))
      if (k != l.from) idle *= 1.0 - P[k];
    x[e] = l.capacity * pa.link_prob(e) * idle;
  }
  return x;
}

double total_energy(const Topology& topo, const ProbAssignment& pa) {
  double e = 0.0;
  for (int i = 0; i < topo.node_count(); ++i) e += topo.energy(i) * pa.node_prob(i);
  return e;
}

double mac_utility(const std::vector<double>& throughput) {
  double u = 0.0;
  for (size_t e = 0; e < throughput.size(); ++e) {
    if (!(throughput[e] > 0.0) || !std::isfinite(throughput[e]))
      throw std::domain_error("mac_utility: nonpositive throughput on link " +
                              std::to_string(e));
    u += std::log(throughput[e]);
  }
  return u;
}

double transport_utility(const RateVector& rates) {
  double u = 0.0;
  for (size_t s = 0; s < rates.y.size(); ++s) {
    if (!(rates.y[s] > 0.0) || !std::isfinite(rates.y[s]))
      throw std::domain_error("transport_utility: nonpositive rate for session " +
                              std::to_string(s));
    u += std::log(rates.y[s]);
  }
  return u;
}

}  // namespace ranumopt
