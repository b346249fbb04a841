#ifndef ISOMONO_REPORT_HPP
#define ISOMONO_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isomono/error.hpp"
#include "isomono/numkit/scalar.hpp"

namespace isomono
{

using json = nlohmann::json;

inline constexpr const char* artifact_version = "1.0.0";

inline json to_json_value(complex z) { return json::array({z.real(), z.imag()}); }

inline complex complex_from_json(const json& j)
{
  if (j.is_number()) return {j.get<real>(), 0};
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::invalid_argument, "complex number must be [re, im] or a real");
  return {j[0].get<real>(), j[1].get<real>()};
}

template <class Range>
json complex_array(const Range& r)
{
  json a = json::array();
  for (const complex& z : r) a.push_back(to_json_value(z));
  return a;
}

enum class Comparison
{
  below,
  above,
  equal
};

inline const char* to_string(Comparison c)
{
  switch (c) {
    case Comparison::below: return "below";
    case Comparison::above: return "above";
    case Comparison::equal: return "equal";
  }
  return "?";
}

inline Comparison comparison_from_string(const std::string& s)
{
  if (s == "below") return Comparison::below;
  if (s == "above") return Comparison::above;
  if (s == "equal") return Comparison::equal;
  throw Error(ErrorCode::invalid_argument, "unknown comparison '" + s + "'");
}

struct Metric
{
  std::string name;
  real value = 0;
  real threshold = 0;
  Comparison cmp = Comparison::below;

  bool ok() const
  {
    if (!std::isfinite(value)) return false;
    switch (cmp) {
      case Comparison::below: return value < threshold;
      case Comparison::above: return value > threshold;
      case Comparison::equal: return value == threshold;
    }
    return false;
  }

  /// value/threshold for "below", threshold/value for "above"; 0 or infinity for "equal".
  real ratio() const
  {
    if (!std::isfinite(value)) return std::numeric_limits<real>::infinity();
    switch (cmp) {
      case Comparison::below: return threshold > 0 ? value / threshold : value;
      case Comparison::above: return value > 0 ? threshold / value : std::numeric_limits<real>::infinity();
      case Comparison::equal: return ok() ? 0 : std::numeric_limits<real>::infinity();
    }
    return 0;
  }

  bool operator==(const Metric&) const = default;
};

struct CaseRecord
{
  std::size_t index = 0;
  std::string check;
  json inputs = json::object();
  json outputs = json::object();
  std::vector<Metric> metrics;
  bool pass = false;
  std::string message;

  void add(std::string name, real value, real threshold, Comparison cmp = Comparison::below)
  {
    metrics.push_back({std::move(name), value, threshold, cmp});
  }

  void finalize()
  {
    pass = message.empty() && !metrics.empty() &&
           std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.ok(); });
  }

  real worst_ratio() const
  {
    real w = 0;
    for (const auto& m : metrics) w = std::max(w, m.ratio());
    return w;
  }

  bool operator==(const CaseRecord&) const = default;
};

struct CheckAggregate
{
  std::string check;
  std::size_t cases = 0;
  std::size_t passed = 0;
  real worst_ratio = 0;

  bool operator==(const CheckAggregate&) const = default;
};

struct Report
{
  std::string version = artifact_version;
  std::string experiment;
  json config = json::object();
  std::vector<CaseRecord> cases;
  std::vector<CheckAggregate> aggregates;
  bool pass = false;
  /// Wall-clock seconds; not part of the deterministic content.
  json timings = json::object();

  /// Aggregates per check in order of first appearance; pass iff every case passes and there is at least one.
  void finalize()
  {
    aggregates.clear();
    std::map<std::string, std::size_t> pos;
    for (const auto& c : cases) {
      auto it = pos.find(c.check);
      if (it == pos.end()) {
        it = pos.emplace(c.check, aggregates.size()).first;
        aggregates.push_back({c.check, 0, 0, 0});
      }
      auto& a = aggregates[it->second];
      ++a.cases;
      if (c.pass) ++a.passed;
      a.worst_ratio = std::max(a.worst_ratio, c.worst_ratio());
    }
    pass = !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const CaseRecord& c) { return c.pass; });
  }

  const CheckAggregate* aggregate(const std::string& check) const
  {
    for (const auto& a : aggregates)
      if (a.check == check) return &a;
    return nullptr;
  }

  bool operator==(const Report&) const = default;
};

namespace detail
{

/// Non-finite doubles are stored as strings so the JSON stays valid.
inline json number_json(real v)
{
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline real number_from_json(const json& j)
{
  if (j.is_number()) return j.get<real>();
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<real>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<real>::infinity();
  if (s == "-inf") return -std::numeric_limits<real>::infinity();
  throw Error(ErrorCode::invalid_argument, "bad number '" + s + "'");
}

}

inline json to_json(const Metric& m)
{
  return {{"name", m.name}, {"value", detail::number_json(m.value)}, {"threshold", detail::number_json(m.threshold)},
          {"cmp", to_string(m.cmp)}, {"ok", m.ok()}};
}

inline json to_json(const CaseRecord& c)
{
  json ms = json::array();
  for (const auto& m : c.metrics) ms.push_back(to_json(m));
  return {{"index", c.index}, {"check", c.check}, {"inputs", c.inputs}, {"outputs", c.outputs},
          {"metrics", ms},    {"pass", c.pass},   {"message", c.message}};
}

inline json to_json(const Report& r)
{
  json cases = json::array();
  for (const auto& c : r.cases) cases.push_back(to_json(c));
  json aggs = json::array();
  for (const auto& a : r.aggregates)
    aggs.push_back({{"check", a.check}, {"cases", a.cases}, {"passed", a.passed}, {"worst_ratio", detail::number_json(a.worst_ratio)}});
  return {{"version", r.version}, {"experiment", r.experiment}, {"config", r.config}, {"cases", cases},
          {"aggregates", aggs},   {"pass", r.pass},             {"timings", r.timings}};
}

inline Report report_from_json(const json& j)
{
  Report r;
  r.version = j.at("version").get<std::string>();
  r.experiment = j.at("experiment").get<std::string>();
  r.config = j.at("config");
  for (const auto& c : j.at("cases")) {
    CaseRecord rec;
    rec.index = c.at("index").get<std::size_t>();
    rec.check = c.at("check").get<std::string>();
    rec.inputs = c.at("inputs");
    rec.outputs = c.at("outputs");
    for (const auto& m : c.at("metrics"))
      rec.metrics.push_back({m.at("name").get<std::string>(), detail::number_from_json(m.at("value")),
                             detail::number_from_json(m.at("threshold")), comparison_from_string(m.at("cmp").get<std::string>())});
    rec.pass = c.at("pass").get<bool>();
    rec.message = c.at("message").get<std::string>();
    r.cases.push_back(std::move(rec));
  }
  for (const auto& a : j.at("aggregates"))
    r.aggregates.push_back({a.at("check").get<std::string>(), a.at("cases").get<std::size_t>(), a.at("passed").get<std::size_t>(),
                            detail::number_from_json(a.at("worst_ratio"))});
  r.pass = j.at("pass").get<bool>();
  r.timings = j.value("timings", json::object());
  return r;
}

enum class ReportFormat
{
  json,
  csv_summary
};

inline ReportFormat report_format_from_string(const std::string& s)
{
  if (s == "json") return ReportFormat::json;
  if (s == "csv-summary" || s == "csv") return ReportFormat::csv_summary;
  throw Error(ErrorCode::invalid_argument, "unknown format '" + s + "' (expected json or csv-summary)");
}

inline std::string csv_escape(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

/// One row per case: index,check,pass,worst_ratio,failed_metrics,message
inline void write_csv_summary(const Report& r, std::ostream& os)
{
  os << "index,check,pass,worst_ratio,failed_metrics,message\n";
  for (const auto& c : r.cases) {
    std::string failed;
    for (const auto& m : c.metrics)
      if (!m.ok()) failed += (failed.empty() ? "" : ";") + m.name;
    std::ostringstream ratio;
    ratio.precision(6);
    ratio << c.worst_ratio();
    os << c.index << ',' << csv_escape(c.check) << ',' << (c.pass ? "true" : "false") << ',' << ratio.str() << ','
       << csv_escape(failed) << ',' << csv_escape(c.message) << '\n';
  }
}

inline void write_report(const Report& r, ReportFormat f, std::ostream& os)
{
  if (f == ReportFormat::json)
    os << to_json(r).dump(2) << '\n';
  else
    write_csv_summary(r, os);
}

/// Writes to `path`, or to `fallback` when path is empty; returns bytes written.
inline std::size_t emit_report(const Report& r, ReportFormat f, const std::string& path, std::ostream& fallback)
{
  std::ostringstream buf;
  write_report(r, f, buf);
  const std::string s = buf.str();
  if (path.empty()) {
    fallback << s;
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + path + "' for writing");
    out << s;
    if (!out) throw Error(ErrorCode::io_failure, "write to '" + path + "' failed");
  }
  return s.size();
}

}
#endif
