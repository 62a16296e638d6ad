#pragma once

// Machine-readable run reports. The body (version, command, config echo,
// checks, summary) is the deterministic part: a fixed config yields the same
// body bytes. Wall-clock time lives outside the body.

#include <string>

#include "json.hpp"
#include "rcpos/linalg.hpp"

namespace rcpos {

struct Report {
  nlohmann::json body;
  double wallMs = 0.0;
};

inline nlohmann::json complexJson(const Cx& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

inline nlohmann::json pointJson(const std::vector<Cx>& p) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& z : p) j.push_back(complexJson(z));
  return j;
}

inline nlohmann::json vecJson(const VecC& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(complexJson(v[i]));
  return j;
}

inline std::string reportBodyText(const Report& r) { return r.body.dump(2); }

inline std::string reportText(const Report& r) {
  nlohmann::json j;
  j["body"] = r.body;
  j["wall_ms"] = r.wallMs;
  return j.dump(2) + "\n";
}

/// RFC-4180 field: quoted when it contains a comma, quote, CR or LF; inner
/// quotes doubled.
inline std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

/// Margin table over the report's check records: one row per record carrying
/// a margin. CRLF rows, header first.
inline std::string marginTableCsv(const nlohmann::json& body) {
  std::string out = "check,notion,point,chart,margin,status\r\n";
  for (const auto& c : body.at("checks")) {
    if (!c.contains("margin")) continue;
    auto cell = [&](const char* key) -> std::string {
      if (!c.contains(key)) return "";
      const auto& v = c.at(key);
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    out += csvField(cell("name")) + "," + csvField(cell("notion")) + "," +
           csvField(cell("point")) + "," + csvField(cell("chart")) + "," +
           csvField(cell("margin")) + "," + csvField(cell("status")) + "\r\n";
  }
  return out;
}

}  // namespace rcpos
