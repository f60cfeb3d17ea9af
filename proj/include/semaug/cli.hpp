#pragma once

// Command-line front end. Subcommands mirror the pipeline stages:
//   augment   plan captions only            -> out/augmented_captions.json
//   build     plan, generate, mix, stats    -> out/{images/,annotations.json,failures.json,manifest.json,stats.json}
//   mix       re-mix an existing build      -> out/manifest.json
//   validate  check annotation files
//   stats     summarize a manifest
//
// Exit codes: 0 ok, 1 validation violations, 2 config error, 3 parse error,
// 4 generation failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semaug/augmenter.hpp"
#include "semaug/dataset_builder.hpp"
#include "semaug/generation_client.hpp"

namespace semaug {

enum ExitCode : int {
    kExitOk = 0,
    kExitViolations = 1,
    kExitConfig = 2,
    kExitParse = 3,
    kExitGeneration = 4,
};

struct RunConfig {
    std::vector<std::filesystem::path> datasets;
    std::filesystem::path embeddings;
    std::filesystem::path out_dir = "semaug_out";
    double ratio = 1.0;
    uint64_t seed = 0;
    AugmentationConfig augmentation;
    BackendConfig backend;
    GenerationSettings generation;

    /// Relative paths in `j` resolve against `base_dir`. Throws std::invalid_argument.
    static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir);
};

/// Thrown for anything that maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace semaug
