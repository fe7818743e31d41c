#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ranumopt/crosslayer.hpp"

namespace ranumopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Barrier formulation over the active links (those carrying at least one
// session; all other link probabilities are fixed at zero, which can only
// help the objective) and the log-rates z_s = log y_s. In these variables
// log x_ij is concave and the per-link load log-sum-exp is convex, so every
// barrier stage is a smooth convex problem.
struct Model {
  const Topology* topo = nullptr;
  const SessionSet* sess = nullptr;
  double lambda1 = 0.0, lambda2 = 0.0;
  std::vector<int> act;                        // active link ids in order
  std::vector<int> aidx;                       // link id -> variable index or -1
  std::vector<std::vector<int>> avars;         // node -> its active-out variable indices
  std::vector<int> barrier_nodes;              // nodes with at least one variable
  std::vector<std::vector<int>> factor_nodes;  // per active link: nodes whose idle
                                               // factor enters x (variable nodes only)
  std::vector<double> logc;                    // per active link
  int A = 0, S = 0;
  int dim() const { return A + S; }
  int constraint_count() const { return 2 * A + static_cast<int>(barrier_nodes.size()); }
};

Model build_model(const Topology& topo, const SessionSet& sess,
                  const TradeoffWeights& w) {
  Model m;
  m.topo = &topo;
  m.sess = &sess;
  m.lambda1 = w.lambda1;
  m.lambda2 = w.lambda2;
  m.aidx.assign(topo.link_count(), -1);
  for (int e = 0; e < topo.link_count(); ++e)
    if (!sess.sessions_on_link(e).empty()) {
      m.aidx[e] = static_cast<int>(m.act.size());
      m.act.push_back(e);
    }
  m.A = static_cast<int>(m.act.size());
  m.S = sess.session_count();
  m.avars.assign(topo.node_count(), {});
  for (int a = 0; a < m.A; ++a) m.avars[topo.link(m.act[a]).from].push_back(a);
  for (int i = 0; i < topo.node_count(); ++i)
    if (!m.avars[i].empty()) m.barrier_nodes.push_back(i);
  m.factor_nodes.resize(m.A);
  m.logc.resize(m.A);
  for (int a = 0; a < m.A; ++a) {
    const LinkSpec& l = topo.link(m.act[a]);
    m.logc[a] = std::log(l.capacity);
    if (!m.avars[l.to].empty() && l.to != l.from) m.factor_nodes[a].push_back(l.to);
    for (int k : topo.hear_in(l.to))
      if (k != l.from && k != l.to && !m.avars[k].empty())
        m.factor_nodes[a].push_back(k);
  }
  return m;
}

struct Eval {
  double phi = kInf;
  bool feasible = false;
  std::vector<double> P;      // per node
  std::vector<double> slack;  // per active link: log x - log load
  std::vector<double> load;   // per active link
};

Eval evaluate(const Model& m, double t, const Eigen::VectorXd& v) {
  Eval ev;
  const Topology& topo = *m.topo;
  ev.P.assign(topo.node_count(), 0.0);
  for (int i : m.barrier_nodes) {
    double s = 0.0;
    for (int a : m.avars[i]) {
      if (!(v[a] > 0.0)) return ev;
      s += v[a];
    }
    if (!(s < 1.0)) return ev;
    ev.P[i] = s;
  }
  ev.slack.resize(m.A);
  ev.load.resize(m.A);
  double barrier = 0.0;
  for (int a = 0; a < m.A; ++a) {
    double logx = m.logc[a] + std::log(v[a]);
    for (int i : m.factor_nodes[a]) logx += std::log(1.0 - ev.P[i]);
    double load = 0.0;
    for (int s : m.sess->sessions_on_link(m.act[a])) load += std::exp(v[m.A + s]);
    ev.load[a] = load;
    ev.slack[a] = logx - std::log(load);
    if (!(ev.slack[a] > 0.0)) return ev;
    barrier -= std::log(ev.slack[a]) + std::log(v[a]);
  }
  for (int i : m.barrier_nodes) barrier -= std::log(1.0 - ev.P[i]);
  double obj = 0.0;
  for (int i : m.barrier_nodes) obj += m.lambda1 * topo.energy(i) * ev.P[i];
  for (int s = 0; s < m.S; ++s) obj -= m.lambda2 * v[m.A + s];
  ev.phi = t * obj + barrier;
  ev.feasible = std::isfinite(ev.phi);
  return ev;
}

void derivatives(const Model& m, double t, const Eigen::VectorXd& v, const Eval& ev,
                 Eigen::VectorXd& g, Eigen::MatrixXd& H) {
  const Topology& topo = *m.topo;
  const int d = m.dim();
  g.setZero(d);
  H.setZero(d, d);

  for (int a = 0; a < m.A; ++a) g[a] += t * m.lambda1 * topo.energy(topo.link(m.act[a]).from);
  for (int s = 0; s < m.S; ++s) g[m.A + s] -= t * m.lambda2;

  std::vector<double> grad_s(d);  // gradient of one slack, dense scratch
  std::vector<int> touched;
  for (int a = 0; a < m.A; ++a) {
    const double is = 1.0 / ev.slack[a];
    const double is2 = is * is;
    touched.clear();
    auto set = [&](int idx, double val) {
      if (grad_s[idx] == 0.0 && val != 0.0) touched.push_back(idx);
      grad_s[idx] += val;
    };
    set(a, 1.0 / v[a]);
    for (int i : m.factor_nodes[a]) {
      const double r = -1.0 / (1.0 - ev.P[i]);
      for (int b : m.avars[i]) set(b, r);
    }
    const auto& on = m.sess->sessions_on_link(m.act[a]);
    for (int s : on) set(m.A + s, -std::exp(v[m.A + s]) / ev.load[a]);

    for (int bi : touched) g[bi] -= is * grad_s[bi];
    for (int bi : touched)
      for (int ci : touched) H(bi, ci) += is2 * grad_s[bi] * grad_s[ci];

    // -(1/s) * second derivatives of the slack
    H(a, a) += is / (v[a] * v[a]);
    for (int i : m.factor_nodes[a]) {
      const double r2 = is / ((1.0 - ev.P[i]) * (1.0 - ev.P[i]));
      for (int b : m.avars[i])
        for (int c : m.avars[i]) H(b, c) += r2;
    }
    for (int s : on) {
      const double w = std::exp(v[m.A + s]) / ev.load[a];
      H(m.A + s, m.A + s) += is * w;
      for (int s2 : on) H(m.A + s, m.A + s2) -= is * w * std::exp(v[m.A + s2]) / ev.load[a];
    }
    for (int bi : touched) grad_s[bi] = 0.0;
  }

  for (int a = 0; a < m.A; ++a) {
    g[a] -= 1.0 / v[a];
    H(a, a) += 1.0 / (v[a] * v[a]);
  }
  for (int i : m.barrier_nodes) {
    const double r = 1.0 / (1.0 - ev.P[i]);
    for (int b : m.avars[i]) {
      g[b] += r;
      for (int c : m.avars[i]) H(b, c) += r * r;
    }
  }
}

Eigen::VectorXd feasible_start(const Model& m) {
  const Topology& topo = *m.topo;
  Eigen::VectorXd v(m.dim());
  for (int i : m.barrier_nodes) {
    const double p = 0.5 / static_cast<double>(m.avars[i].size());
    for (int a : m.avars[i]) v[a] = p;
  }
  std::vector<double> x(m.A);
  for (int a = 0; a < m.A; ++a) {
    const LinkSpec& l = topo.link(m.act[a]);
    double val = l.capacity * v[a];
    const double Pt = m.avars[l.to].empty() ? 0.0 : 0.5;
    if (l.to != l.from) val *= 1.0 - Pt;
    for (int k : topo.hear_in(l.to))
      if (k != l.from && k != l.to) val *= m.avars[k].empty() ? 1.0 : 0.5;
    x[a] = val;
  }
  for (int s = 0; s < m.S; ++s) {
    double y = kInf;
    for (int e : m.sess->session(s).route) {
      const int a = m.aidx[e];
      y = std::min(y, x[a] / (2.0 * static_cast<double>(
                                        m.sess->sessions_on_link(e).size())));
    }
    v[m.A + s] = std::log(y);
  }
  return v;
}

}  // namespace

CentralizedResult centralized_solve(const Topology& topo, const SessionSet& sessions,
                                    const TradeoffWeights& w,
                                    const CentralizedConfig& cfg) {
  w.validate();
  if (!(w.lambda2 > 0.0))
    throw std::invalid_argument("centralized_solve: lambda2 must be positive");
  if (sessions.session_count() == 0)
    throw std::invalid_argument("centralized_solve: no sessions");
  if (!(cfg.gradient_tol > 0.0) || !(cfg.gap_tol > 0.0) || cfg.max_newton_iters < 1)
    throw std::invalid_argument("centralized_solve: bad configuration");

  const Model m = build_model(topo, sessions, w);
  Eigen::VectorXd v = feasible_start(m);
  Eval ev = evaluate(m, 1.0, v);
  if (!ev.feasible)
    throw std::logic_error("centralized_solve: constructed start not interior");

  const double mcnt = static_cast<double>(m.constraint_count());
  Eigen::VectorXd g, d;
  Eigen::MatrixXd H;
  int total_newton = 0;
  bool all_stages_ok = true;
  double t = 1.0;
  double grad_inf = kInf;
  for (;;) {
    ev = evaluate(m, t, v);
    bool stage_ok = false;
    int floor_steps = 0;
    for (int it = 0; it < cfg.max_newton_iters; ++it) {
      derivatives(m, t, v, ev, g, H);
      grad_inf = g.lpNorm<Eigen::Infinity>();
      if (grad_inf <= cfg.gradient_tol * std::max(1.0, t)) {
        stage_ok = true;
        break;
      }
      ++total_newton;
      double ridge = 0.0;
      double descent = 0.0;
      for (int tries = 0; tries < 8; ++tries) {
        Eigen::MatrixXd Hr = H;
        if (ridge > 0.0)
          for (int k = 0; k < m.dim(); ++k) Hr(k, k) += ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Hr);
        d = ldlt.solve(-g);
        descent = g.dot(d);
        if (ldlt.info() == Eigen::Success && descent < 0.0 && d.allFinite()) break;
        ridge = ridge == 0.0 ? 1e-10 * std::max(1.0, H.diagonal().maxCoeff()) : ridge * 100.0;
        d.setZero();
      }
      if (descent >= 0.0) break;  // no usable direction: rounding floor

      // Near the stage optimum the predicted decrease drops under phi's
      // rounding granularity; a value-based line search can no longer see
      // progress even though gradient and Hessian are still accurate. Take
      // a bounded number of plain Newton steps there instead.
      const double floor_scale = 1e-16 * std::max(1.0, std::abs(ev.phi));
      const bool below_floor = -descent <= 64.0 * floor_scale;
      if (below_floor) {
        if (++floor_steps > 25) break;
      } else {
        floor_steps = 0;
      }

      double step = 1.0;
      Eval cand;
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        cand = evaluate(m, t, v + step * d);
        if (cand.feasible &&
            (below_floor ? cand.phi <= ev.phi + 8.0 * floor_scale
                         : cand.phi <= ev.phi + 1e-4 * step * descent)) {
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;  // line search dead: rounding floor
      v += step * d;
      ev = std::move(cand);
    }
    // ending at the rounding floor near the stage target is still usable
    if (!stage_ok && grad_inf <= 1000.0 * cfg.gradient_tol * std::max(1.0, t))
      stage_ok = true;
    if (!stage_ok) all_stages_ok = false;
    if (mcnt / t <= cfg.gap_tol || !stage_ok) break;
    t *= 10.0;
  }

  CentralizedResult res{ProbAssignment(topo, std::vector<double>(topo.link_count(), 0.0)),
                        RateVector{},
                        0.0,
                        grad_inf / t,
                        0.0,
                        std::vector<double>(topo.link_count(), 0.0),
                        total_newton,
                        all_stages_ok && mcnt / t <= cfg.gap_tol};

  std::vector<double> p(topo.link_count(), 0.0);
  for (int a = 0; a < m.A; ++a) p[m.act[a]] = v[a];
  res.assignment = ProbAssignment(topo, std::move(p));
  res.rates.y.resize(m.S);
  for (int s = 0; s < m.S; ++s) res.rates.y[s] = std::exp(v[m.A + s]);
  res.objective = w.lambda1 * total_energy(topo, res.assignment) -
                  w.lambda2 * transport_utility(res.rates);
  for (int a = 0; a < m.A; ++a) res.link_prices[m.act[a]] = 1.0 / (t * ev.slack[a]);

  const std::vector<double> x = link_throughput(topo, res.assignment);
  double viol = 0.0;
  for (int e = 0; e < topo.link_count(); ++e) {
    double load = 0.0;
    for (int s : sessions.sessions_on_link(e)) load += res.rates.y[s];
    viol = std::max(viol, load - x[e]);
  }
  res.feasibility_violation = std::max(viol, 0.0);
  return res;
}

}  // namespace ranumopt
