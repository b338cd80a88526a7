#ifndef SPATECON_PIPELINE_HPP
#define SPATECON_PIPELINE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "spatecon/config.hpp"

namespace spatecon {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct CommandResult {
    std::vector<std::string> outputs; // paths written, relative to output_dir
    std::vector<std::string> warnings;
};

/// Executes one batch command (ingest, weights, model1..model4, select,
/// importance) against a validated configuration. Writes the report files,
/// the resolved config, and a manifest into cfg.output_dir. Throws
/// ConfigError for configuration problems and std::runtime_error for
/// modeling failures.
CommandResult run_command(const std::string& command, const RunConfig& cfg);

/// Reads a run manifest, verifies the recorded output hashes, and prints a
/// summary. Returns false when any output is missing or altered.
bool verify_manifest(const std::string& manifest_path, std::ostream& out);

} // namespace spatecon

#endif
