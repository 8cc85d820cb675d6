#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "xlt/align/aligner.hpp"
#include "xlt/cli/config.hpp"
#include "xlt/model/model.hpp"
#include "xlt/translate/backend.hpp"

namespace xlt::cli {

/// Applies --backend values to `choice`. "mt=<spec>", "align=<spec>" and
/// "model=<spec>" set one backend; a bare spec sets all three.
/// Errors: ConfigInvalid.
BackendChoice apply_backend_overrides(BackendChoice choice, const std::vector<std::string>& overrides);

struct Backends {
  std::unique_ptr<TranslatorBackend> translator;
  std::unique_ptr<AlignerBackend> aligner;
  std::unique_ptr<TaskModel> model;
  /// Languages proxy substitution may choose from.
  LanguageSet supported;

  /// {"mt", "align", "model"} identity strings.
  nlohmann::json identities() const;
};

/// Builds the backends of a run. Mock translators support every language
/// the run mentions (or the config's "supported" list); a mock aligner
/// links tokens through the mock translator's word order; any "mock:"
/// model is the in-process desk model. `manifest_root` is where plans for
/// a remote task model are written.
/// Errors: ConfigInvalid; BackendUnreachable when an HTTP handshake fails.
Backends make_backends(const RunConfig& config, const BackendChoice& choice,
                       const std::filesystem::path& manifest_root);

/// Every language a config mentions: source, targets, HR languages and
/// data languages.
LanguageSet languages_of(const RunConfig& config);

}  // namespace xlt::cli
