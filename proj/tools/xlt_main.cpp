#include <csignal>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "xlt/cli/runner.hpp"
#include "xlt/error.hpp"
#include "xlt/model/desk_model.hpp"
#include "xlt/util/files.hpp"
#include "xlt/wire/conformance.hpp"
#include "xlt/wire/servers.hpp"

namespace {

httplib::Server* active_server = nullptr;

void stop_server(int) {
  if (active_server) active_server->stop();
}

std::unique_ptr<xlt::TranslatorBackend> mock_translator(const std::string& spec, const xlt::LanguageSet& languages) {
  if (spec == "mock:identity") return std::make_unique<xlt::IdentityTranslator>(languages);
  if (spec == "mock:reverse") return std::make_unique<xlt::ReversalTranslator>(languages);
  if (spec.rfind("mock:dict:", 0) == 0) {
    const auto j = nlohmann::json::parse(xlt::files::read(spec.substr(10)));
    return std::make_unique<xlt::DictionaryTranslator>(xlt::DictionaryTranslator::from_json(j, spec));
  }
  xlt::fail(xlt::ErrorCode::ConfigInvalid, "serve-mock needs a mock backend, got '" + spec + "'");
}

xlt::TokenPermutation permutation_for(const std::string& spec) {
  if (spec == "mock:reverse") return xlt::ReversalTranslator::permutation;
  if (spec.rfind("mock:dict:", 0) == 0) return xlt::DictionaryTranslator::permutation;
  return xlt::IdentityTranslator::permutation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xlt: translation-based cross-lingual transfer toolkit"};
  app.require_subcommand(1);

  xlt::cli::RunOptions options;
  std::string config_path;
  bool quiet = false;
  std::string typology_csv;
  std::vector<std::pair<std::string, CLI::App*>> stage_commands;
  std::vector<std::string> stages = xlt::cli::stage_names();
  stages.push_back("all");
  for (const auto& stage : stages) {
    auto* sub = app.add_subcommand(stage, stage == "all" ? "run every stage" : "run the " + stage + " stage");
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--backend", options.backend_overrides,
                    "mock:identity|mock:reverse|mock:dict:<file>|http:<url>, optionally prefixed mt=, align=, model=");
    sub->add_option("--jobs", options.jobs, "parallel workers")->check(CLI::PositiveNumber);
    sub->add_option("--seed", options.seed, "single run seed instead of the configured ones");
    sub->add_flag("--force", options.force, "recompute stages even when cached");
    sub->add_option("--typology-csv", typology_csv, "typological vectors for proxy substitution");
    sub->add_flag("--quiet", quiet, "no progress output");
    stage_commands.emplace_back(stage, sub);
  }

  std::string target, supported_file, closest_csv;
  bool reference = false;
  auto* closest = app.add_subcommand("closest-lang", "closest MT-supported language by typological similarity");
  closest->add_option("--target", target, "target language code");
  closest->add_option("--typology-csv", closest_csv, "vector export (language,f1,...)")->required();
  closest->add_option("--supported", supported_file, "file listing MT-supported codes");
  closest->add_flag("--reference", reference, "check the published closest-language pairs instead");

  std::string url, kind = "mt", pair;
  auto* conformance = app.add_subcommand("conformance", "wire-protocol golden tests against a running service");
  conformance->add_option("--url", url, "service base URL")->required();
  conformance->add_option("--kind", kind, "mt or align")->check(CLI::IsMember({"mt", "align"}));
  conformance->add_option("--pair", pair, "language pair src:tgt (mt only)");

  std::string serve_backend = "mock:identity", languages = "eng", host = "127.0.0.1";
  int port = 0;
  std::size_t dimension = std::size_t{1} << 15;
  auto* serve = app.add_subcommand("serve-mock", "serve mock backends over the wire protocols");
  serve->add_option("--backend", serve_backend, "mock:identity|mock:reverse|mock:dict:<file>");
  serve->add_option("--languages", languages, "comma-separated languages for identity/reverse mocks");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks a free one)");
  serve->add_option("--feature-dimension", dimension, "desk task-model feature space");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    for (const auto& [stage, sub] : stage_commands) {
      if (!sub->parsed()) continue;
      if (!typology_csv.empty()) options.typology_csv = typology_csv;
      if (!quiet) options.log = &std::cerr;
      const auto manifest = xlt::cli::run_config(config_path, stage, options);
      if (manifest.contains("score_reports") && stage == "all") {
        const auto dir = xlt::cli::load_config(config_path).runs_dir / manifest.at("config_hash").get<std::string>();
        std::cout << xlt::files::read(dir / "report" / "report.csv");
      }
      return 0;
    }
    if (closest->parsed()) {
      if (reference) {
        std::cout << xlt::cli::reference_pairs_report(closest_csv);
        return 0;
      }
      if (target.empty() || supported_file.empty()) {
        xlt::fail(xlt::ErrorCode::ConfigInvalid, "closest-lang needs --target and --supported");
      }
      std::cout << xlt::cli::closest_lang_report(xlt::LanguageTag::parse(target), closest_csv,
                                                 xlt::files::read(supported_file));
      return 0;
    }
    if (conformance->parsed()) {
      std::vector<xlt::wire::ConformanceCheck> checks;
      if (kind == "align") {
        checks = xlt::wire::aligner_conformance(url);
      } else if (!pair.empty()) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) xlt::fail(xlt::ErrorCode::ConfigInvalid, "--pair must be src:tgt");
        checks = xlt::wire::translator_conformance(
            url, std::make_pair(xlt::LanguageTag::parse(pair.substr(0, colon)),
                                xlt::LanguageTag::parse(pair.substr(colon + 1))));
      } else {
        checks = xlt::wire::translator_conformance(url);
      }
      std::cout << xlt::wire::render(checks);
      return xlt::wire::all_passed(checks) ? 0 : 3;
    }
    if (serve->parsed()) {
      xlt::LanguageSet langs;
      std::stringstream in(languages);
      for (std::string code; std::getline(in, code, ',');) {
        if (!code.empty()) langs.insert(xlt::LanguageTag::parse(code));
      }
      const auto translator = mock_translator(serve_backend, langs);
      const xlt::OracleAligner aligner(permutation_for(serve_backend));
      auto service = std::make_shared<xlt::wire::TaskModelService>(
          std::make_shared<xlt::DeskModel>(xlt::DeskModelOptions{dimension}));
      httplib::Server server;
      xlt::wire::serve_translator(server, *translator);
      xlt::wire::serve_aligner(server, aligner);
      xlt::wire::serve_task_model(server, service);
      const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
      if (bound < 0) xlt::fail(xlt::ErrorCode::BackendUnreachable, "cannot bind " + host + ":" + std::to_string(port));
      active_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.listen_after_bind();
      return 0;
    }
  } catch (const xlt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return xlt::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
