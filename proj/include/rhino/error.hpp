#pragma once

#include <stdexcept>
#include <string>

namespace rhino {

/// Shape or size disagreement between arrays or layers.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error("dimension error: " + msg) {}
};

/// Invalid scalar argument (negative temperature, non-positive sigma, ...).
struct ParameterError : std::runtime_error {
  explicit ParameterError(const std::string& msg) : std::runtime_error("parameter error: " + msg) {}
};

/// Malformed graph or hypergraph structure.
struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& msg) : std::runtime_error("structural error: " + msg) {}
};

/// Bad or infeasible configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

/// File ingestion problems; carries a row number when one is known.
struct IngestError : std::runtime_error {
  explicit IngestError(const std::string& msg) : std::runtime_error("ingest error: " + msg) {}
};

/// Filesystem failures, reported with the offending path.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error("io error: " + msg) {}
};

}  // namespace rhino
