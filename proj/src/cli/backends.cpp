#include "xlt/cli/backends.hpp"

#include "xlt/error.hpp"
#include "xlt/model/desk_model.hpp"
#include "xlt/model/http_task_model.hpp"
#include "xlt/translate/http_translator.hpp"
#include "xlt/util/files.hpp"

namespace xlt::cli {

namespace {

[[noreturn]] void invalid(const std::string& message) { fail(ErrorCode::ConfigInvalid, message); }

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

void check_spec(const std::string& spec) {
  if (spec == "mock:identity" || spec == "mock:reverse" || spec == "mock:desk" || spec == "mock:oracle") return;
  if (starts_with(spec, "mock:dict:") && spec.size() > 10) return;
  if (starts_with(spec, "http:") && spec.size() > 5) return;
  invalid("unknown backend '" + spec + "'");
}

std::string url_of(const std::string& spec) {
  // "http:http://host:port" and "http://host:port" both work.
  const std::string rest = spec.substr(5);
  return starts_with(rest, "//") ? "http:" + rest : rest;
}

TokenPermutation permutation_of(const std::string& spec) {
  if (spec == "mock:reverse") return ReversalTranslator::permutation;
  if (starts_with(spec, "mock:dict:")) return DictionaryTranslator::permutation;
  return IdentityTranslator::permutation;
}

}  // namespace

BackendChoice apply_backend_overrides(BackendChoice choice, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    if (starts_with(o, "mt=")) {
      choice.mt = o.substr(3);
    } else if (starts_with(o, "align=")) {
      choice.align = o.substr(6);
    } else if (starts_with(o, "model=")) {
      choice.model = o.substr(6);
    } else {
      check_spec(o);
      choice.mt = choice.align = choice.model = o;
    }
  }
  check_spec(choice.mt);
  check_spec(choice.align);
  check_spec(choice.model);
  return choice;
}

nlohmann::json Backends::identities() const {
  return {{"mt", translator ? translator->identity() : ""},
          {"align", aligner ? aligner->identity() : ""},
          {"model", model ? model->identity() : ""}};
}

LanguageSet languages_of(const RunConfig& config) {
  LanguageSet out{config.strategy.source, config.source_train.language};
  for (const auto& t : config.strategy.targets) out.insert(t);
  for (const auto& h : config.strategy.hr_languages) out.insert(h);
  for (const auto& [lang, src] : config.target_test) out.insert(src.language);
  for (const auto& [lang, src] : config.target_validation) out.insert(src.language);
  return out;
}

Backends make_backends(const RunConfig& config, const BackendChoice& choice,
                       const std::filesystem::path& manifest_root) {
  const auto c = apply_backend_overrides(choice, {});
  Backends b;
  const LanguageSet mock_languages = config.supported ? *config.supported : languages_of(config);

  if (c.mt == "mock:identity" || c.mt == "mock:desk" || c.mt == "mock:oracle") {
    b.translator = std::make_unique<IdentityTranslator>(mock_languages);
  } else if (c.mt == "mock:reverse") {
    b.translator = std::make_unique<ReversalTranslator>(mock_languages);
  } else if (starts_with(c.mt, "mock:dict:")) {
    std::filesystem::path file(c.mt.substr(10));
    if (file.is_relative()) file = config.base_dir / file;
    nlohmann::json lexicon;
    try {
      lexicon = nlohmann::json::parse(files::read(file));
    } catch (const nlohmann::json::exception& e) {
      invalid("lexicon " + file.string() + ": " + e.what());
    }
    b.translator = std::make_unique<DictionaryTranslator>(
        DictionaryTranslator::from_json(lexicon, "mock:dict:" + file.filename().string()));
  } else {
    b.translator = std::make_unique<HttpTranslator>(url_of(c.mt));
  }
  b.supported = b.translator->supported_languages();
  if (config.supported && starts_with(c.mt, "mock:")) b.supported = *config.supported;

  if (starts_with(c.align, "http:")) {
    b.aligner = std::make_unique<HttpAligner>(url_of(c.align));
  } else {
    // "mock:oracle" (and any mock aligner paired with a mock translator)
    // follows the translator's own word order.
    const std::string source = starts_with(c.mt, "mock:") && c.align == "mock:oracle" ? c.mt : c.align;
    b.aligner = std::make_unique<OracleAligner>(permutation_of(source));
  }

  if (starts_with(c.model, "http:")) {
    b.model = std::make_unique<HttpTaskModel>(url_of(c.model), manifest_root);
  } else {
    b.model = std::make_unique<DeskModel>(DeskModelOptions{config.feature_dimension});
  }
  return b;
}

}  // namespace xlt::cli
