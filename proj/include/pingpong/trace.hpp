#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pingpong/dvr.hpp"
#include "pingpong/errors.hpp"
#include "pingpong/units.hpp"

namespace pingpong {

/// Populations of the chain states over time, from any dynamics tier.
struct PopulationTrace {
  std::vector<StateLabel> states;
  std::vector<double> times;        // atomic units
  Eigen::MatrixXd populations;      // rows: times, columns: states
  std::vector<double> leakage;      // 1 - sum(chain) - absorbed
  std::vector<double> absorbed;     // norm removed by the absorber; empty outside the grid tier

  int samples() const { return static_cast<int>(times.size()); }

  void append(double t, const Eigen::VectorXd& p, double leak, std::optional<double> absorbed_norm = {}) {
    const auto row = populations.rows();
    populations.conservativeResize(row + 1, static_cast<Eigen::Index>(states.size()));
    populations.row(row) = p.transpose();
    times.push_back(t);
    leakage.push_back(leak);
    if (absorbed_norm) absorbed.push_back(*absorbed_norm);
  }

  Eigen::VectorXd final_populations() const { return populations.row(populations.rows() - 1).transpose(); }
};

/// CSV with columns t_au, t_ps, one e:v:J column per state, leakage and,
/// for grid traces, absorbed.
inline void write_trace_csv(std::ostream& out, const PopulationTrace& tr) {
  out << "t_au,t_ps";
  for (const auto& s : tr.states) out << ',' << to_string(s);
  out << ",leakage";
  const bool has_abs = !tr.absorbed.empty();
  if (has_abs) out << ",absorbed";
  out << '\n';
  char buf[64];
  for (int i = 0; i < tr.samples(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g", tr.times[i], units::to_picoseconds(tr.times[i]));
    out << buf;
    for (Eigen::Index j = 0; j < tr.populations.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.12e", tr.populations(i, j));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.12e", tr.leakage[i]);
    out << buf;
    if (has_abs) {
      std::snprintf(buf, sizeof buf, ",%.12e", tr.absorbed[i]);
      out << buf;
    }
    out << '\n';
  }
}

inline void write_trace_csv(const std::string& path, const PopulationTrace& tr) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_trace_csv(out, tr);
}

inline PopulationTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty trace file");
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  if (cols.size() < 4 || cols[0] != "t_au" || cols[1] != "t_ps") {
    throw ParseError(path + ": not a population trace");
  }
  PopulationTrace tr;
  std::size_t ncol = cols.size();
  const bool has_abs = cols.back() == "absorbed";
  const std::size_t leak_col = has_abs ? ncol - 2 : ncol - 1;
  if (cols[leak_col] != "leakage") throw ParseError(path + ": missing leakage column");
  for (std::size_t c = 2; c < leak_col; ++c) tr.states.push_back(parse_state(cols[c]));
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) {
      try {
        vals.push_back(std::stod(f));
      } catch (const std::logic_error&) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric field");
      }
    }
    if (vals.size() != ncol) throw ParseError(path + ":" + std::to_string(lineno) + ": wrong column count");
    Eigen::VectorXd p(tr.states.size());
    for (std::size_t j = 0; j < tr.states.size(); ++j) p[j] = vals[2 + j];
    tr.append(vals[0], p, vals[leak_col], has_abs ? std::optional<double>(vals.back()) : std::nullopt);
  }
  return tr;
}

}  // namespace pingpong
