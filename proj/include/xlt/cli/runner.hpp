#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlt/cli/backends.hpp"
#include "xlt/cli/config.hpp"

namespace xlt::cli {

struct RunOptions {
  /// --backend values, applied over the config's "backends".
  std::vector<std::string> backend_overrides;
  /// Bounded parallelism for translation, alignment, training and scoring.
  std::size_t jobs = 1;
  /// Replaces the config's run seeds by this single seed.
  std::optional<std::int64_t> seed;
  /// Recompute stages even when their outputs are current.
  bool force = false;
  std::optional<std::filesystem::path> typology_csv;
  /// Progress lines; silent when null.
  std::ostream* log = nullptr;
};

/// build-data, project, train, select, ensemble, evaluate, report.
const std::vector<std::string>& stage_names();
/// Direct prerequisites of a stage.
const std::vector<std::string>& stage_dependencies(const std::string& stage);

/// Seed a model is trained with: the run seed, or a combination of the
/// member seed and the run seed for seed ensembles.
std::int64_t effective_seed(std::optional<std::int64_t> member_seed, std::int64_t run_seed);

/// Executes the stages of one configured run under
/// <runs_dir>/<config hash>/<stage>/. Each stage records the digest of every
/// file it wrote in stage.json; a stage whose record matches its inputs and
/// files is reused unless forced. manifest.json at the run root merges all
/// stage records with the spec, backends, seeds and reports.
class Runner {
 public:
  Runner(RunConfig config, RunOptions options);
  ~Runner();
  Runner(const Runner&) = delete;
  Runner& operator=(const Runner&) = delete;

  const std::string& config_hash() const { return hash_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }
  const RunConfig& config() const { return config_; }

  /// Runs one stage, whose prerequisites must be complete
  /// (StageDependencyMissing otherwise), or "all" for the whole chain.
  /// Returns the run manifest.
  nlohmann::json run(const std::string& stage);

  /// True when the stage's record matches its inputs and files on disk.
  bool is_complete(const std::string& stage) const;

  nlohmann::json manifest() const;

 private:
  struct Impl;
  RunConfig config_;
  RunOptions options_;
  BackendChoice choice_;
  std::string hash_;
  std::filesystem::path run_dir_;
  std::unique_ptr<Impl> impl_;

  void ensure(const std::string& stage);
  void execute(const std::string& stage);
  std::string inputs_digest(const std::string& stage) const;
  void write_manifest() const;
};

/// Loads the config and runs `stage` ("all" for every stage).
nlohmann::json run_config(const std::filesystem::path& config_path, const std::string& stage,
                          const RunOptions& options);

/// Closest MT-supported language for `target`. `supported_text` lists codes
/// separated by whitespace or commas; "#" starts a comment. Prints
/// "<target> -> <proxy> <score>" followed by the full ranking.
std::string closest_lang_report(const LanguageTag& target, const std::filesystem::path& typology_csv,
                                const std::string& supported_text);

/// Checks the published closest-language pairs against a vector export and
/// renders the outcome (including a discrepancy line per deviation).
std::string reference_pairs_report(const std::filesystem::path& typology_csv);

}  // namespace xlt::cli
