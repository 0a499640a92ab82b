#pragma once

// Run reports. The hashed section (command, config, rows, verdicts) depends
// only on the resolved configuration; the provenance block carries the
// version, argv, thread count, timestamp and the FNV-1a hash of the hashed
// section's JSON text.
// Doubles are written in shortest round-trip form; non-finite values as the
// strings "inf", "-inf" and "nan".

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gaussgame/errors.hpp"

#ifndef GAUSSGAME_VERSION
#define GAUSSGAME_VERSION "dev"
#endif

namespace gaussgame {

using ordered_json = nlohmann::ordered_json;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline ordered_json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline constexpr const char* kCsvSchema = "gaussgame-csv/1";

// One reported quantity. Every value carries an uncertainty: a standard
// error ("se"), a quadrature order ("order"), or "exact" for counts, inputs
// and closed forms.
struct ReportRow {
  std::string experiment;
  std::vector<std::pair<std::string, double>> parameters;
  std::string quantity;
  double value = 0.0;
  double uncertainty = 0.0;
  std::string uncertainty_kind = "exact";
  std::string verdict;  // empty when the row carries no verdict
};

class RunReport {
 public:
  RunReport(std::string command, std::vector<std::string> args) : command_(std::move(command)), args_(std::move(args)) {}

  ordered_json& config() { return config_; }
  const ordered_json& config() const { return config_; }
  void set_seed(std::uint64_t s) { seed_ = s; }
  void set_threads(std::size_t t) { threads_ = t; }

  void add(ReportRow row) { rows_.push_back(std::move(row)); }
  void add(std::string experiment, std::string quantity, double value, double uncertainty,
           std::string kind, std::vector<std::pair<std::string, double>> params = {}, std::string verdict = {}) {
    rows_.push_back({std::move(experiment), std::move(params), std::move(quantity), value, uncertainty,
                     std::move(kind), std::move(verdict)});
  }
  void note(std::string key, std::string value) { notes_.emplace_back(std::move(key), std::move(value)); }

  // Named verdicts; the overall verdict is PASS when all are PASS.
  void verdict(std::string name, std::string v) { verdicts_.emplace_back(std::move(name), std::move(v)); }
  std::string overall() const {
    for (const auto& [n, v] : verdicts_) {
      if (v != "PASS") return v;
    }
    return "PASS";
  }

  const std::vector<ReportRow>& rows() const noexcept { return rows_; }

  ordered_json hashed_section() const {
    ordered_json j;
    j["command"] = command_;
    j["config"] = config_;
    ordered_json rows = ordered_json::array();
    for (const auto& r : rows_) {
      ordered_json o;
      o["experiment"] = r.experiment;
      ordered_json p = ordered_json::object();
      for (const auto& [k, v] : r.parameters) p[k] = json_number(v);
      o["parameters"] = p;
      o["quantity"] = r.quantity;
      o["value"] = json_number(r.value);
      o["uncertainty"] = json_number(r.uncertainty);
      o["uncertainty_kind"] = r.uncertainty_kind;
      if (!r.verdict.empty()) o["verdict"] = r.verdict;
      rows.push_back(std::move(o));
    }
    j["results"] = rows;
    ordered_json notes = ordered_json::object();
    for (const auto& [k, v] : notes_) notes[k] = v;
    j["notes"] = notes;
    ordered_json verdicts = ordered_json::object();
    for (const auto& [k, v] : verdicts_) verdicts[k] = v;
    j["verdicts"] = verdicts;
    j["verdict"] = overall();
    return j;
  }

  std::string hashed_text() const { return hashed_section().dump(); }
  std::uint64_t hash() const { return fnv1a64(hashed_text()); }

  std::string json_text(bool with_timestamp = true) const {
    ordered_json j = hashed_section();
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash()));
    ordered_json prov;
    prov["version"] = GAUSSGAME_VERSION;
    prov["seed"] = seed_;
    prov["args"] = args_;
    prov["threads"] = threads_;
    prov["hash"] = std::string("fnv1a64:") + hex;
    if (with_timestamp) prov["timestamp"] = utc_now();
    j["provenance"] = prov;
    return j.dump(2) + "\n";
  }

  // Fixed, versioned header; one row per (experiment, parameter tuple,
  // quantity). Parameters are rendered as key=value pairs joined by ';'.
  std::string csv_text() const {
    std::ostringstream os;
    os << "# " << kCsvSchema << "\n";
    os << "command,experiment,parameters,quantity,value,uncertainty,uncertainty_kind,verdict\n";
    for (const auto& r : rows_) {
      std::string params;
      for (const auto& [k, v] : r.parameters) params += (params.empty() ? "" : ";") + k + "=" + num(v);
      os << command_ << ',' << quote(r.experiment) << ',' << quote(params) << ',' << quote(r.quantity) << ','
         << num(r.value) << ',' << num(r.uncertainty) << ',' << r.uncertainty_kind << ',' << r.verdict << "\n";
    }
    return os.str();
  }

 private:
  static std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int digits : {15, 16, 17}) {
      std::snprintf(buf, sizeof buf, "%.*g", digits, v);
      if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
  }

  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  }

  static std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string command_;
  std::vector<std::string> args_;
  ordered_json config_ = ordered_json::object();
  std::uint64_t seed_ = 0;
  std::size_t threads_ = 1;
  std::vector<ReportRow> rows_;
  std::vector<std::pair<std::string, std::string>> notes_;
  std::vector<std::pair<std::string, std::string>> verdicts_;
};

}  // namespace gaussgame
