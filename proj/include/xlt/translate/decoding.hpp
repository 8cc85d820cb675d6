#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <json.hpp>

namespace xlt {

enum class DecodingMode { Greedy, Beam, Nucleus };

std::string_view to_string(DecodingMode mode);
DecodingMode parse_decoding_mode(std::string_view text);

/// Exactly the parameters of `mode` are set: beam_size for beam search,
/// top_p and seed for nucleus sampling, nothing for greedy.
struct DecodingConfig {
  DecodingMode mode = DecodingMode::Beam;
  std::optional<int> beam_size = 5;
  std::optional<double> top_p;
  std::optional<std::int64_t> seed;

  static DecodingConfig greedy();
  static DecodingConfig beam(int beam_size = 5);
  static DecodingConfig nucleus(double top_p = 0.8, std::int64_t seed = 0);

  /// Throws ContractViolation when the parameter set does not match the mode.
  void validate() const;

  bool operator==(const DecodingConfig&) const = default;
};

/// Wire form {"mode", "beam_size", "top_p", "seed"}; unset parameters are
/// omitted on output and may be absent or null on input.
nlohmann::json to_json(const DecodingConfig& config);
DecodingConfig decoding_from_json(const nlohmann::json& j);

}  // namespace xlt
