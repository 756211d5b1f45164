// Report serialization.  The JSON body is built with ordered keys and no
// runtime metadata, so identical configs produce byte-identical files;
// timestamps and host info go into a separate "<output>.meta.json" sidecar.

#pragma once

#include <string>

#include <json.hpp>

#include "cascade/cli.hpp"
#include "cascade/stats.hpp"

namespace cascade {

using Json = nlohmann::ordered_json;

Json estimate_to_json(const EstimateReport& report);

// config echo embedded in the body; excludes execution-only knobs
// (threads, output path, format) that do not affect the estimates
Json config_to_json(const RunConfig& cfg);

Json report_skeleton(const RunConfig& cfg);

// rows flattened to one line per row; complex values split into _re/_im
std::string render_csv(const Json& body);

// serialize per cfg.format; write to cfg.output or stdout.  When writing to
// a file, also writes "<output>.meta.json" with timestamp/host/elapsed.
void write_report(const RunConfig& cfg, const Json& body, double elapsed_seconds);

}  // namespace cascade
