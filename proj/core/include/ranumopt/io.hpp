#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ranumopt/crosslayer.hpp"
#include "ranumopt/experiments.hpp"
#include "ranumopt/net_model.hpp"
#include "ranumopt/pareto.hpp"

namespace ranumopt {

// Shortest decimal that parses back to exactly the same double ("inf",
// "-inf" and "nan" for the non-finite values). Locale-independent.
std::string format_double(double v);

// Network document, version 1. Serialization is canonical: fixed key
// order, LF line endings, numbers via format_double, no timestamps; writing
// what was read reproduces the bytes. Readers reject unknown keys.
struct NetworkDoc {
  Topology topo;
  std::vector<Session> sessions;
  std::optional<std::vector<double>> solution_p;
  std::optional<std::vector<double>> solution_y;
};

NetworkDoc parse_network(const std::string& text);
NetworkDoc read_network(const std::string& path);
std::string serialize_network(const NetworkDoc& doc);
void write_network(const std::string& path, const NetworkDoc& doc);

// Whole-file write via a temp file and rename, so readers never observe a
// partial file.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string frontier_csv(const std::vector<ParetoPoint>& points);
std::string crosslayer_frontier_csv(const std::vector<CrosslayerPoint>& points);
std::string staged_comparison_csv(const std::vector<CrosslayerPoint>& points);
std::string baseline_csv(const std::vector<ComparisonRow>& rows);
std::string mac_solution_csv(const Topology& topo, const ProbAssignment& pa);

// Long-format iteration trace: header "iter,quantity,id,value" with one row
// per link/session quantity and per scalar (scalars use id 0). Rows whose
// value does not exist that round (infeasible primal, no feasible incumbent
// yet, dual recording off) are omitted.
std::string trace_csv(const IterationTrace& trace);

struct TraceSummary {
  int rounds = 0;
  double final_max_change = std::numeric_limits<double>::quiet_NaN();
  double final_violation = std::numeric_limits<double>::quiet_NaN();
  double final_dual = std::numeric_limits<double>::quiet_NaN();
  double best_feasible = std::numeric_limits<double>::infinity();
  int feasible_rounds = 0;
  bool weak_duality_ok = true;  // every recorded dual <= every later incumbent
};

TraceSummary summarize_trace(const std::string& csv_text);

ExperimentSpec parse_experiment_spec(const std::string& text);
// Relative topology paths resolve against the spec file's directory.
ExperimentSpec read_experiment_spec(const std::string& path);

}  // namespace ranumopt
