#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace gfstack::experiments {

// One checked inequality lhs <= rhs (slack = rhs - lhs), or a reported value when
// rhs is the reference it is compared against.
struct Row {
  std::string experiment;
  long long n = 0;
  double t = 0.0;
  std::string metric;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = true;
};

inline Row le_row(std::string experiment, long long n, double t, std::string metric, double lhs, double rhs,
                  double tolerance) {
  Row r{std::move(experiment), n, t, std::move(metric), lhs, rhs, rhs - lhs, false};
  r.pass = r.slack >= -tolerance;
  return r;
}

inline Row strict_row(std::string experiment, long long n, double t, std::string metric, double lhs,
                      double rhs) {
  Row r{std::move(experiment), n, t, std::move(metric), lhs, rhs, rhs - lhs, false};
  r.pass = lhs < rhs;
  return r;
}

inline Row info_row(std::string experiment, long long n, double t, std::string metric, double value,
                    double reference = 0.0) {
  return Row{std::move(experiment), n, t, std::move(metric), value, reference, reference - value, true};
}

inline bool row_less(const Row& a, const Row& b) {
  return std::tie(a.experiment, a.n, a.t, a.metric) < std::tie(b.experiment, b.n, b.t, b.metric);
}

inline void sort_rows(std::vector<Row>& rows) { std::stable_sort(rows.begin(), rows.end(), row_less); }

inline bool all_pass(const std::vector<Row>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.pass; });
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& os, const std::vector<Row>& rows) {
  os << "experiment,n,t,metric,lhs,rhs,slack,pass\n";
  for (const Row& r : rows)
    os << csv_field(r.experiment) << ',' << r.n << ',' << fmt(r.t) << ',' << csv_field(r.metric) << ','
       << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(r.slack) << ',' << (r.pass ? "true" : "false") << '\n';
}

inline void write_json(std::ostream& os, const std::vector<Row>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Row& r : rows)
    arr.push_back({{"experiment", r.experiment}, {"n", r.n}, {"t", r.t}, {"metric", r.metric}, {"lhs", r.lhs},
                   {"rhs", r.rhs}, {"slack", r.slack}, {"pass", r.pass}});
  os << arr.dump(1) << '\n';
}

}  // namespace gfstack::experiments
