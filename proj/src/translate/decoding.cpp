#include "xlt/translate/decoding.hpp"

#include <string>

#include "xlt/error.hpp"

namespace xlt {

std::string_view to_string(DecodingMode mode) {
  switch (mode) {
    case DecodingMode::Greedy: return "greedy";
    case DecodingMode::Beam: return "beam";
    case DecodingMode::Nucleus: return "nucleus";
  }
  return "?";
}

DecodingMode parse_decoding_mode(std::string_view text) {
  if (text == "greedy") return DecodingMode::Greedy;
  if (text == "beam") return DecodingMode::Beam;
  if (text == "nucleus") return DecodingMode::Nucleus;
  fail(ErrorCode::ContractViolation, "unknown decoding mode '" + std::string(text) + "'");
}

DecodingConfig DecodingConfig::greedy() {
  return {DecodingMode::Greedy, std::nullopt, std::nullopt, std::nullopt};
}

DecodingConfig DecodingConfig::beam(int beam_size) {
  return {DecodingMode::Beam, beam_size, std::nullopt, std::nullopt};
}

DecodingConfig DecodingConfig::nucleus(double top_p, std::int64_t seed) {
  return {DecodingMode::Nucleus, std::nullopt, top_p, seed};
}

void DecodingConfig::validate() const {
  switch (mode) {
    case DecodingMode::Greedy:
      if (beam_size || top_p || seed) {
        fail(ErrorCode::ContractViolation, "greedy decoding takes no parameters");
      }
      break;
    case DecodingMode::Beam:
      if (!beam_size || *beam_size < 1) {
        fail(ErrorCode::ContractViolation, "beam search needs a positive beam_size");
      }
      if (top_p || seed) fail(ErrorCode::ContractViolation, "beam search takes no top_p or seed");
      break;
    case DecodingMode::Nucleus:
      if (!top_p || !(*top_p > 0.0 && *top_p <= 1.0)) {
        fail(ErrorCode::ContractViolation, "nucleus sampling needs top_p in (0, 1]");
      }
      if (!seed) fail(ErrorCode::ContractViolation, "nucleus sampling needs a seed");
      if (beam_size) fail(ErrorCode::ContractViolation, "nucleus sampling takes no beam_size");
      break;
  }
}

nlohmann::json to_json(const DecodingConfig& config) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(config.mode));
  if (config.beam_size) j["beam_size"] = *config.beam_size;
  if (config.top_p) j["top_p"] = *config.top_p;
  if (config.seed) j["seed"] = *config.seed;
  return j;
}

DecodingConfig decoding_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("mode") || !j["mode"].is_string()) {
    fail(ErrorCode::ContractViolation, "decoding needs a string \"mode\"");
  }
  DecodingConfig config;
  config.mode = parse_decoding_mode(j["mode"].get<std::string>());
  config.beam_size.reset();
  auto present = [&](const char* key) { return j.contains(key) && !j[key].is_null(); };
  try {
    if (present("beam_size")) config.beam_size = j["beam_size"].get<int>();
    if (present("top_p")) config.top_p = j["top_p"].get<double>();
    if (present("seed")) config.seed = j["seed"].get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ContractViolation, std::string("decoding: ") + e.what());
  }
  if (config.mode == DecodingMode::Beam && !config.beam_size) config.beam_size = 5;
  if (config.mode == DecodingMode::Nucleus) {
    if (!config.top_p) config.top_p = 0.8;
    if (!config.seed) config.seed = 0;
  }
  config.validate();
  return config;
}

}  // namespace xlt
