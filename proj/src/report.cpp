#include "cascade/report.hpp"

#include <unistd.h>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace cascade {

namespace {

Json complex_json(std::complex<double> z) {
  return Json{{"re", z.real()}, {"im", z.imag()}};
}

std::string csv_number(const Json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
  return buf;
}

std::string csv_field(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return csv_number(v);
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

bool is_complex_object(const Json& v) {
  return v.is_object() && v.size() == 2 && v.contains("re") && v.contains("im");
}

}  // namespace

Json estimate_to_json(const EstimateReport& report) {
  Json j;
  if (report.complex_valued) {
    j["estimate"] = complex_json(report.estimate);
    j["std_error"] = complex_json(report.std_error);
  } else {
    j["estimate"] = report.estimate.real();
    j["std_error"] = report.std_error.real();
  }
  j["trials"] = report.trials;
  if (report.bound_ratio) j["bound_ratio"] = *report.bound_ratio;
  if (report.truncation) j["truncation"] = *report.truncation;
  return j;
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["experiment"] = experiment_name(cfg.experiment);
  j["gamma"] = cfg.gamma;
  j["beta"] = cfg.beta;
  j["depth"] = cfg.depth;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["epsilon0"] = cfg.epsilon0;
  j["x_grid"] = cfg.x_grid;
  j["l_grid"] = cfg.l_grid;
  j["x"] = cfg.x;
  j["a"] = cfg.a;
  j["b"] = std::isfinite(cfg.b) ? Json(cfg.b) : Json("inf");
  j["kappa"] = cfg.kappa;
  j["horizon"] = cfg.horizon;
  j["breadth_mode"] = cfg.breadth_mode;
  j["bbox_diameters"] = cfg.bbox_diameters;
  return j;
}

Json report_skeleton(const RunConfig& cfg) {
  Json body;
  body["experiment"] = experiment_name(cfg.experiment);
  body["params"] = Json{{"gamma", cfg.gamma}, {"beta", cfg.beta}, {"epsilon0", cfg.epsilon0}};
  body["n"] = cfg.depth;
  body["trials"] = cfg.trials;
  body["seed"] = cfg.seed;
  body["rows"] = Json::array();
  body["details"] = Json::object();
  body["config"] = config_to_json(cfg);
  return body;
}

std::string render_csv(const Json& body) {
  const Json& rows = body.at("rows");
  std::vector<std::string> cols;
  auto add_col = [&cols](const std::string& name) {
    for (const auto& c : cols)
      if (c == name) return;
    cols.push_back(name);
  };
  for (const auto& row : rows) {
    for (auto it = row.begin(); it != row.end(); ++it) {
      if (is_complex_object(it.value())) {
        add_col(it.key() + "_re");
        add_col(it.key() + "_im");
      } else {
        add_col(it.key());
      }
    }
  }
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    Json flat = Json::object();
    for (auto it = row.begin(); it != row.end(); ++it) {
      if (is_complex_object(it.value())) {
        flat[it.key() + "_re"] = it.value().at("re");
        flat[it.key() + "_im"] = it.value().at("im");
      } else {
        flat[it.key()] = it.value();
      }
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      if (flat.contains(cols[i])) out += csv_field(flat.at(cols[i]));
    }
    out += '\n';
  }
  return out;
}

void write_report(const RunConfig& cfg, const Json& body, double elapsed_seconds) {
  const std::string bytes =
      cfg.format == RunConfig::Format::json ? body.dump(2) + "\n" : render_csv(body);
  if (cfg.output.empty()) {
    std::cout << bytes;
    std::cout.flush();
    return;
  }
  {
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + cfg.output);
    out << bytes;
  }
  char stamp[32] = "unknown";
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  if (gmtime_r(&now, &tm_utc)) std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  char host[256] = "unknown";
  if (gethostname(host, sizeof(host) - 1) != 0) std::snprintf(host, sizeof(host), "unknown");
  Json meta;
  meta["created_utc"] = stamp;
  meta["hostname"] = host;
  meta["elapsed_seconds"] = elapsed_seconds;
  meta["output"] = cfg.output;
  meta["format"] = cfg.format == RunConfig::Format::json ? "json" : "csv";
  std::ofstream side(cfg.output + ".meta.json", std::ios::binary);
  if (side) side << meta.dump(2) << "\n";
}

}  // namespace cascade
