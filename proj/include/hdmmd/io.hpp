#pragma once

#include "hdmmd/datagen.hpp"
#include "hdmmd/kernels.hpp"
#include "hdmmd/mmd.hpp"
#include "hdmmd/montecarlo.hpp"
#include "hdmmd/theory.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace hdmmd {

using Json = nlohmann::ordered_json;

// Embedded in every JSON document the tools write.
inline constexpr const char* kSchemaVersion = "hd-mmd/1.0";

// CSV samples: one observation per row, comma separated, optional header
// (a first line with no numeric cell). ParseError cites 1-based row/column.
SampleMatrix read_csv_matrix(std::istream& in, const std::string& source);
SampleMatrix read_csv_matrix(const std::string& path);
void write_csv_matrix(std::ostream& out, const SampleMatrix& x);

// Doubles rounded to 12 significant digits; non-finite values become null.
Json json_number(double value);

Json to_json(const TestResult& r);
Json to_json(const PowerPrediction& p);
Json to_json(const ModelSpec& m);
Json to_json(const ExperimentConfig& c);
Json summary_json(const ExperimentResult& result);

// Parsers throw ConfigError naming the offending field.
ModelSpec model_from_json(const Json& j, const std::string& field);
ExperimentConfig config_from_json(const Json& j);
ReducedSummary summary_from_json(const Json& j, const std::string& field);
Json read_json_file(const std::string& path);

// Writes summary.json, replicates.csv and qq.csv into `dir` (created if needed).
void write_experiment_outputs(const ExperimentResult& result, const std::string& dir);

}  // namespace hdmmd
