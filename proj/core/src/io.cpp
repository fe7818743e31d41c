#include "ranumopt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "ranumopt/errors.hpp"

namespace ranumopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }))
      fail(std::string(where) + ": unknown key \"" + it.key() + "\"");
  }
}

const json& require(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end()) fail(std::string(where) + ": missing \"" + key + "\"");
  return *it;
}

double as_finite(const json& j, const char* what) {
  if (!j.is_number()) fail(std::string(what) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(std::string(what) + ": not finite");
  return v;
}

int as_int(const json& j, const char* what) {
  if (!j.is_number_integer()) fail(std::string(what) + ": expected an integer");
  return j.get<int>();
}

json parse_json(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(std::string(what) + ": malformed JSON");
  if (!j.is_object()) fail(std::string(what) + ": expected a JSON object");
  return j;
}

std::string csv_row(std::initializer_list<std::string> fields) {
  std::string row;
  bool first = true;
  for (const std::string& f : fields) {
    if (!first) row += ',';
    row += f;
    first = false;
  }
  row += '\n';
  return row;
}

double parse_double_field(const std::string& s, const char* what) {
  const char* b = s.data();
  const char* e = b + s.size();
  bool neg = false;
  if (b != e && *b == '-') {
    neg = true;
    ++b;
  }
  double v;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{} || r.ptr != e) fail(std::string(what) + ": bad number \"" + s + "\"");
  return neg ? -v : v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in && !in.eof()) fail("cannot read file: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot replace " + path + ": " + ec.message());
  }
}

NetworkDoc parse_network(const std::string& text) {
  const json j = parse_json(text, "network");
  require_keys(j, {"version", "nodes", "links", "interference", "sessions", "solution"},
               "network");
  if (as_int(require(j, "version", "network"), "version") != 1)
    fail("network: unsupported version (expected 1)");

  const json& jn = require(j, "nodes", "network");
  if (!jn.is_array() || jn.empty()) fail("network: \"nodes\" must be a non-empty array");
  const int n = static_cast<int>(jn.size());
  std::vector<double> energy(n);
  std::vector<Position> positions;
  int with_pos = 0;
  for (int i = 0; i < n; ++i) {
    const json& node = jn[i];
    if (!node.is_object()) fail("network: node entries must be objects");
    require_keys(node, {"id", "e", "pos"}, "node");
    if (as_int(require(node, "id", "node"), "node id") != i)
      fail("network: node ids must be 0..n-1 in order");
    energy[i] = as_finite(require(node, "e", "node"), "node e");
    if (auto it = node.find("pos"); it != node.end()) {
      if (!it->is_array() || it->size() != 2) fail("network: \"pos\" must be [x, y]");
      if (positions.size() != static_cast<size_t>(i))
        fail("network: \"pos\" must be given for all nodes or none");
      positions.push_back({as_finite((*it)[0], "pos x"), as_finite((*it)[1], "pos y")});
      ++with_pos;
    }
  }
  if (with_pos != 0 && with_pos != n)
    fail("network: \"pos\" must be given for all nodes or none");

  const json& jl = require(j, "links", "network");
  if (!jl.is_array()) fail("network: \"links\" must be an array");
  std::vector<LinkSpec> links;
  links.reserve(jl.size());
  for (const json& l : jl) {
    if (!l.is_object()) fail("network: link entries must be objects");
    require_keys(l, {"from", "to", "c"}, "link");
    links.push_back({as_int(require(l, "from", "link"), "link from"),
                     as_int(require(l, "to", "link"), "link to"),
                     as_finite(require(l, "c", "link"), "link c")});
  }

  const json& ji = require(j, "interference", "network");
  if (!ji.is_array() || static_cast<int>(ji.size()) != n)
    fail("network: \"interference\" must list every node once");
  std::vector<std::vector<int>> hearing(n);
  for (int i = 0; i < n; ++i) {
    const json& entry = ji[i];
    if (!entry.is_object()) fail("network: interference entries must be objects");
    require_keys(entry, {"node", "out"}, "interference");
    if (as_int(require(entry, "node", "interference"), "interference node") != i)
      fail("network: interference entries must be ordered by node id");
    const json& out = require(entry, "out", "interference");
    if (!out.is_array()) fail("network: interference \"out\" must be an array");
    for (const json& v : out) hearing[i].push_back(as_int(v, "interference out"));
    std::sort(hearing[i].begin(), hearing[i].end());
  }

  std::optional<Topology> topo;
  try {
    topo.emplace(std::move(energy), std::move(links), std::move(hearing),
                 std::move(positions));
  } catch (const std::exception& e) {
    fail(std::string("network: ") + e.what());
  }

  std::vector<Session> sessions;
  if (auto it = j.find("sessions"); it != j.end()) {
    if (!it->is_array()) fail("network: \"sessions\" must be an array");
    int sid = 0;
    for (const json& s : *it) {
      if (!s.is_object()) fail("network: session entries must be objects");
      require_keys(s, {"id", "route"}, "session");
      if (as_int(require(s, "id", "session"), "session id") != sid)
        fail("network: session ids must be 0..k-1 in order");
      const json& route = require(s, "route", "session");
      if (!route.is_array() || route.empty())
        fail("network: session route must be a non-empty array of [from, to]");
      Session sess;
      for (const json& hop : route) {
        if (!hop.is_array() || hop.size() != 2)
          fail("network: route hops must be [from, to] pairs");
        const int from = as_int(hop[0], "route from");
        const int to = as_int(hop[1], "route to");
        if (from < 0 || from >= topo->node_count() || to < 0 || to >= topo->node_count())
          fail("network: route node id out of range");
        const int e = topo->link_between(from, to);
        if (e < 0)
          fail("network: route uses missing link (" + std::to_string(from) + ", " +
               std::to_string(to) + ")");
        sess.route.push_back(e);
      }
      sess.source = topo->link(sess.route.front()).from;
      sess.sink = topo->link(sess.route.back()).to;
      sessions.push_back(std::move(sess));
      ++sid;
    }
    if (!sessions.empty()) {
      try {
        static_cast<void>(SessionSet(*topo, sessions));
      } catch (const std::exception& e) {
        fail(std::string("network: ") + e.what());
      }
    }
  }

  NetworkDoc doc{std::move(*topo), std::move(sessions), std::nullopt, std::nullopt};

  if (auto it = j.find("solution"); it != j.end()) {
    if (!it->is_object()) fail("network: \"solution\" must be an object");
    require_keys(*it, {"p", "y"}, "solution");
    const json& jp = require(*it, "p", "solution");
    if (!jp.is_array() || static_cast<int>(jp.size()) != doc.topo.link_count())
      fail("network: solution \"p\" must list every link");
    std::vector<double> p;
    for (const json& v : jp) {
      const double q = as_finite(v, "solution p");
      if (q < 0.0 || q > 1.0) fail("network: solution p out of [0, 1]");
      p.push_back(q);
    }
    doc.solution_p = std::move(p);
    if (auto iy = it->find("y"); iy != it->end()) {
      if (!iy->is_array() || iy->size() != doc.sessions.size())
        fail("network: solution \"y\" must list every session");
      std::vector<double> y;
      for (const json& v : *iy) {
        const double q = as_finite(v, "solution y");
        if (!(q > 0.0)) fail("network: solution y must be positive");
        y.push_back(q);
      }
      doc.solution_y = std::move(y);
    }
  }
  return doc;
}

NetworkDoc read_network(const std::string& path) {
  return parse_network(read_text_file(path));
}

std::string serialize_network(const NetworkDoc& doc) {
  const Topology& t = doc.topo;
  std::ostringstream out;
  out << "{\n  \"version\": 1,\n  \"nodes\": [\n";
  for (int i = 0; i < t.node_count(); ++i) {
    out << "    {\"id\": " << i << ", \"e\": " << format_double(t.energy(i));
    if (t.has_positions())
      out << ", \"pos\": [" << format_double(t.positions()[i].x) << ", "
          << format_double(t.positions()[i].y) << "]";
    out << (i + 1 < t.node_count() ? "},\n" : "}\n");
  }
  out << "  ],\n  \"links\": [";
  if (t.link_count() == 0) {
    out << "],\n";
  } else {
    out << "\n";
    for (int e = 0; e < t.link_count(); ++e) {
      const LinkSpec& l = t.link(e);
      out << "    {\"from\": " << l.from << ", \"to\": " << l.to
          << ", \"c\": " << format_double(l.capacity)
          << (e + 1 < t.link_count() ? "},\n" : "}\n");
    }
    out << "  ],\n";
  }
  out << "  \"interference\": [\n";
  for (int i = 0; i < t.node_count(); ++i) {
    out << "    {\"node\": " << i << ", \"out\": [";
    const auto& h = t.hear_out(i);
    for (size_t k = 0; k < h.size(); ++k) out << (k ? ", " : "") << h[k];
    out << (i + 1 < t.node_count() ? "]},\n" : "]}\n");
  }
  out << "  ]";
  if (!doc.sessions.empty()) {
    out << ",\n  \"sessions\": [\n";
    for (size_t s = 0; s < doc.sessions.size(); ++s) {
      out << "    {\"id\": " << s << ", \"route\": [";
      const auto& route = doc.sessions[s].route;
      for (size_t k = 0; k < route.size(); ++k) {
        const LinkSpec& l = t.link(route[k]);
        out << (k ? ", " : "") << "[" << l.from << ", " << l.to << "]";
      }
      out << (s + 1 < doc.sessions.size() ? "]},\n" : "]}\n");
    }
    out << "  ]";
  }
  if (doc.solution_p) {
    out << ",\n  \"solution\": {\n    \"p\": [";
    for (size_t k = 0; k < doc.solution_p->size(); ++k)
      out << (k ? ", " : "") << format_double((*doc.solution_p)[k]);
    out << "]";
    if (doc.solution_y) {
      out << ",\n    \"y\": [";
      for (size_t k = 0; k < doc.solution_y->size(); ++k)
        out << (k ? ", " : "") << format_double((*doc.solution_y)[k]);
      out << "]";
    }
    out << "\n  }";
  }
  out << "\n}\n";
  return out.str();
}

void write_network(const std::string& path, const NetworkDoc& doc) {
  write_text_file(path, serialize_network(doc));
}

std::string frontier_csv(const std::vector<ParetoPoint>& points) {
  std::string out = "lambda1,lambda2,energy,utility\n";
  for (const ParetoPoint& p : points)
    out += csv_row({format_double(p.lambda1), format_double(p.lambda2),
                    format_double(p.energy), format_double(p.utility)});
  return out;
}

std::string crosslayer_frontier_csv(const std::vector<CrosslayerPoint>& points) {
  std::string out = "lambda1,lambda2,energy,utility\n";
  for (const CrosslayerPoint& p : points)
    out += csv_row({format_double(p.lambda1), format_double(p.lambda2),
                    format_double(p.energy), format_double(p.utility)});
  return out;
}

std::string staged_comparison_csv(const std::vector<CrosslayerPoint>& points) {
  std::string out = "lambda1,lambda2,joint_objective,staged_objective\n";
  for (const CrosslayerPoint& p : points)
    out += csv_row({format_double(p.lambda1), format_double(p.lambda2),
                    format_double(p.joint_objective),
                    format_double(p.staged_objective)});
  return out;
}

std::string baseline_csv(const std::vector<ComparisonRow>& rows) {
  std::string out =
      "seed,target_utility,energy_optimal,energy_uniform_node,energy_uniform_link,"
      "node_matched,link_matched\n";
  for (const ComparisonRow& r : rows)
    out += csv_row({std::to_string(r.seed), format_double(r.target_utility),
                    format_double(r.energy_optimal), format_double(r.energy_node),
                    format_double(r.energy_link), r.node_matched ? "1" : "0",
                    r.link_matched ? "1" : "0"});
  return out;
}

std::string mac_solution_csv(const Topology& topo, const ProbAssignment& pa) {
  std::string out = "kind,id,value\n";
  for (int i = 0; i < topo.node_count(); ++i)
    out += csv_row({"node", std::to_string(i), format_double(pa.node_prob(i))});
  for (int e = 0; e < topo.link_count(); ++e)
    out += csv_row({"link", std::to_string(e), format_double(pa.link_prob(e))});
  return out;
}

std::string trace_csv(const IterationTrace& trace) {
  std::string out = "iter,quantity,id,value\n";
  for (const IterationRecord& r : trace.records) {
    const std::string it = std::to_string(r.iter);
    for (size_t e = 0; e < r.p.size(); ++e)
      out += csv_row({it, "p", std::to_string(e), format_double(r.p[e])});
    for (size_t s = 0; s < r.y.size(); ++s)
      out += csv_row({it, "y", std::to_string(s), format_double(r.y[s])});
    for (size_t e = 0; e < r.mu.size(); ++e)
      out += csv_row({it, "mu", std::to_string(e), format_double(r.mu[e])});
    if (!std::isnan(r.dual_value))
      out += csv_row({it, "dual", "0", format_double(r.dual_value)});
    if (!std::isnan(r.primal_objective))
      out += csv_row({it, "primal_objective", "0", format_double(r.primal_objective)});
    if (std::isfinite(r.best_feasible_objective))
      out += csv_row(
          {it, "best_feasible_objective", "0", format_double(r.best_feasible_objective)});
    out += csv_row({it, "max_violation", "0", format_double(r.max_violation)});
    out += csv_row({it, "max_change", "0", format_double(r.max_change)});
  }
  return out;
}

TraceSummary summarize_trace(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) || line != "iter,quantity,id,value")
    fail("trace: missing or unexpected header");
  TraceSummary sum;
  double max_dual = -std::numeric_limits<double>::infinity();
  bool any_dual = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t c1 = line.find(',');
    const size_t c2 = line.find(',', c1 + 1);
    const size_t c3 = line.find(',', c2 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos)
      fail("trace: malformed row \"" + line + "\"");
    const int iter =
        static_cast<int>(parse_double_field(line.substr(0, c1), "trace iter"));
    const std::string quantity = line.substr(c1 + 1, c2 - c1 - 1);
    const double value = parse_double_field(line.substr(c3 + 1), "trace value");
    sum.rounds = std::max(sum.rounds, iter);
    if (quantity == "dual") {
      sum.final_dual = value;
      max_dual = std::max(max_dual, value);
      any_dual = true;
    } else if (quantity == "primal_objective") {
      ++sum.feasible_rounds;
    } else if (quantity == "best_feasible_objective") {
      sum.best_feasible = std::min(sum.best_feasible, value);
    } else if (quantity == "max_violation") {
      sum.final_violation = value;
    } else if (quantity == "max_change") {
      sum.final_max_change = value;
    }
  }
  if (any_dual && std::isfinite(sum.best_feasible))
    sum.weak_duality_ok =
        max_dual <= sum.best_feasible + 1e-9 * std::max(1.0, std::abs(sum.best_feasible));
  return sum;
}

namespace {

std::vector<double> parse_lambda_grid(const json& j) {
  std::vector<double> values;
  if (j.is_array()) {
    for (const json& v : j) values.push_back(as_finite(v, "lambda1"));
  } else if (j.is_object()) {
    require_keys(j, {"from", "to", "count"}, "lambda1");
    const double from = as_finite(require(j, "from", "lambda1"), "lambda1 from");
    const double to = as_finite(require(j, "to", "lambda1"), "lambda1 to");
    const int count = as_int(require(j, "count", "lambda1"), "lambda1 count");
    if (count < 1) fail("lambda1: count must be >= 1");
    for (int k = 0; k < count; ++k)
      values.push_back(count == 1 ? from : from + (to - from) * k / (count - 1));
  } else {
    values.push_back(as_finite(j, "lambda1"));
  }
  if (values.empty()) fail("lambda1: empty grid");
  return values;
}

GenConfig parse_generator(const json& j) {
  require_keys(j,
               {"nodes", "seed", "sessions", "cf_low", "cf_high", "scale", "shared_band",
                "max_attempts"},
               "generate");
  GenConfig g;
  g.node_count = as_int(require(j, "nodes", "generate"), "generate nodes");
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0)
      fail("generate seed: expected a non-negative integer");
    g.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("sessions"); it != j.end())
    g.session_count = as_int(*it, "generate sessions");
  if (auto it = j.find("cf_low"); it != j.end()) g.cf_low = as_finite(*it, "cf_low");
  if (auto it = j.find("cf_high"); it != j.end()) g.cf_high = as_finite(*it, "cf_high");
  if (auto it = j.find("scale"); it != j.end())
    g.interference_scale = as_finite(*it, "scale");
  if (auto it = j.find("shared_band"); it != j.end()) {
    if (!it->is_boolean()) fail("generate shared_band: expected a boolean");
    g.interference_equals_communication = it->get<bool>();
  }
  if (auto it = j.find("max_attempts"); it != j.end())
    g.max_attempts = as_int(*it, "max_attempts");
  return g;
}

void parse_solver(const json& j, SolverConfig& cfg) {
  require_keys(j,
               {"alpha", "gamma", "max_iters", "tol_change", "tol_change_window",
                "tol_feasibility", "mu_floor", "initial_node_prob", "initial_mu",
                "record_dual", "inner_tol", "inner_max_iters"},
               "solver");
  if (auto it = j.find("alpha"); it != j.end()) cfg.alpha = as_finite(*it, "alpha");
  if (auto it = j.find("gamma"); it != j.end()) cfg.gamma = as_finite(*it, "gamma");
  if (auto it = j.find("max_iters"); it != j.end())
    cfg.max_iters = as_int(*it, "max_iters");
  if (auto it = j.find("tol_change"); it != j.end())
    cfg.tol_change = as_finite(*it, "tol_change");
  if (auto it = j.find("tol_change_window"); it != j.end())
    cfg.tol_change_window = as_int(*it, "tol_change_window");
  if (auto it = j.find("tol_feasibility"); it != j.end())
    cfg.tol_feasibility = as_finite(*it, "tol_feasibility");
  if (auto it = j.find("mu_floor"); it != j.end())
    cfg.mu_floor = as_finite(*it, "mu_floor");
  if (auto it = j.find("initial_node_prob"); it != j.end())
    cfg.initial_node_prob = as_finite(*it, "initial_node_prob");
  if (auto it = j.find("initial_mu"); it != j.end())
    cfg.initial_mu = as_finite(*it, "initial_mu");
  if (auto it = j.find("record_dual"); it != j.end()) {
    if (!it->is_boolean()) fail("solver record_dual: expected a boolean");
    cfg.record_dual = it->get<bool>();
  }
  if (auto it = j.find("inner_tol"); it != j.end())
    cfg.inner_tol = as_finite(*it, "inner_tol");
  if (auto it = j.find("inner_max_iters"); it != j.end())
    cfg.inner_max_iters = as_int(*it, "inner_max_iters");
}

void parse_centralized(const json& j, CentralizedConfig& cfg) {
  require_keys(j, {"gradient_tol", "gap_tol", "max_newton_iters"}, "centralized");
  if (auto it = j.find("gradient_tol"); it != j.end())
    cfg.gradient_tol = as_finite(*it, "gradient_tol");
  if (auto it = j.find("gap_tol"); it != j.end()) cfg.gap_tol = as_finite(*it, "gap_tol");
  if (auto it = j.find("max_newton_iters"); it != j.end())
    cfg.max_newton_iters = as_int(*it, "max_newton_iters");
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& text) {
  const json j = parse_json(text, "experiment spec");
  require_keys(j,
               {"experiment", "topology", "lambda1", "lambda2", "solver", "centralized",
                "seeds", "output"},
               "experiment spec");
  ExperimentSpec spec;
  const json& je = require(j, "experiment", "experiment spec");
  if (!je.is_string()) fail("experiment spec: \"experiment\" must be a string");
  spec.experiment = je.get<std::string>();

  if (auto it = j.find("topology"); it != j.end()) {
    if (!it->is_object()) fail("experiment spec: \"topology\" must be an object");
    require_keys(*it, {"file", "generate"}, "topology");
    const bool has_file = it->contains("file");
    const bool has_gen = it->contains("generate");
    if (has_file == has_gen)
      fail("experiment spec: topology needs exactly one of \"file\" or \"generate\"");
    if (has_file) {
      const json& f = (*it)["file"];
      if (!f.is_string()) fail("experiment spec: topology file must be a string");
      spec.topology_file = f.get<std::string>();
    } else {
      spec.generator = parse_generator((*it)["generate"]);
    }
  }

  if (auto it = j.find("lambda1"); it != j.end()) spec.lambda1_values = parse_lambda_grid(*it);
  if (auto it = j.find("lambda2"); it != j.end()) spec.lambda2 = as_finite(*it, "lambda2");
  if (auto it = j.find("solver"); it != j.end()) {
    if (!it->is_object()) fail("experiment spec: \"solver\" must be an object");
    parse_solver(*it, spec.solver);
  }
  if (auto it = j.find("centralized"); it != j.end()) {
    if (!it->is_object()) fail("experiment spec: \"centralized\" must be an object");
    parse_centralized(*it, spec.centralized);
  }
  if (auto it = j.find("seeds"); it != j.end()) {
    if (!it->is_array()) fail("experiment spec: \"seeds\" must be an array");
    for (const json& v : *it) {
      if (!v.is_number_integer() || v.get<long long>() < 0)
        fail("experiment spec: seeds must be non-negative integers");
      spec.seeds.push_back(v.get<unsigned long long>());
    }
  }
  if (auto it = j.find("output"); it != j.end()) {
    if (!it->is_string()) fail("experiment spec: \"output\" must be a string");
    spec.output_dir = it->get<std::string>();
  }
  return spec;
}

ExperimentSpec read_experiment_spec(const std::string& path) {
  ExperimentSpec spec = parse_experiment_spec(read_text_file(path));
  if (spec.topology_file) {
    const std::filesystem::path f(*spec.topology_file);
    if (f.is_relative())
      spec.topology_file = (std::filesystem::path(path).parent_path() / f).string();
  }
  return spec;
}

}  // namespace ranumopt
