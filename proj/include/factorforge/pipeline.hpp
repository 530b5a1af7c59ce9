#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "factorforge/backtest.hpp"
#include "factorforge/error.hpp"
#include "factorforge/factors.hpp"
#include "factorforge/selection.hpp"

#include <json.hpp>

namespace factorforge {

inline constexpr const char* kVersion = "1.0.0";

/// Everything one pipeline run needs; built from a single JSON config file.
struct PipelineConfig {
  std::string prices_path;
  std::string membership_path;
  std::string extra_features_path;  // optional `permno,date,<name>...` columns
  std::string out_dir = "out";
  std::uint64_t seed = 42;

  FactorConfig factors;
  SelectionConfig selection;
  ModelSpec ols, ridge, forest, boosting;
  std::vector<std::string> train_features;  // empty: use the selection report's best subset
  double train_split = 0.8;
  BacktestConfig backtest;                  // empty features: best subset as well
  std::string explain_model = "random_forest";
  std::size_t explain_max_rows = 1000;

  static PipelineConfig from_json(const nlohmann::json& j);
  /// Canonical form; its hash identifies the run in summary.json.
  nlohmann::json to_json() const;

  std::string out(const std::string& file) const;
};

/// Reads a config file and applies command-line overrides before defaults are resolved.
PipelineConfig load_pipeline_config(const std::string& path, std::optional<std::uint64_t> seed,
                                    std::optional<std::string> out_dir);

/// Error from a named stage; run-all reports the stage name on failure.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("stage " + stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct StageResult {
  std::string stage;
  std::vector<std::string> artifacts;  // relative to the output directory
};

StageResult cmd_ingest(const PipelineConfig& cfg, std::ostream& log);
StageResult cmd_factors(const PipelineConfig& cfg, std::ostream& log);
StageResult cmd_select(const PipelineConfig& cfg, std::ostream& log);
StageResult cmd_train(const PipelineConfig& cfg, std::ostream& log);
/// `model_path` empty: the trained model named by cfg.explain_model.
StageResult cmd_explain(const PipelineConfig& cfg, const std::string& model_path, std::ostream& log);
StageResult cmd_backtest(const PipelineConfig& cfg, std::ostream& log);
/// All stages in order, then summary.json with provenance and artifact hashes.
StageResult cmd_run_all(const PipelineConfig& cfg, std::ostream& log);

}  // namespace factorforge
