#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "l0path/modelselect.hpp"
#include "l0path/path.hpp"

namespace l0path::cli {

inline constexpr int kSchemaVersion = 1;

struct CVSummary {
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::size_t best_gamma_index = 0;
  std::size_t best_lambda_index = 0;
};

// A FitPath plus what is needed to reproduce or reuse it.
struct PathArtifact {
  FitPath path;
  bool local_search = false;
  std::optional<CVSummary> cv;
  // Per-gamma wall time, only written when requested.
  bool record_timing = false;
};

nlohmann::json to_json(const PathArtifact& artifact);
// Throws std::invalid_argument on schema problems.
PathArtifact from_json(const nlohmann::json& j);

void write_artifact(const std::filesystem::path& file,
                    const PathArtifact& artifact);
PathArtifact read_artifact(const std::filesystem::path& file);

// gamma, lambda, support_size, mean_loss, se
std::string cv_table_csv(const CVResult& cv);

}  // namespace l0path::cli
