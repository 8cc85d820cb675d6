#include "xlt/align/aligner.hpp"

#include <sstream>

#include "xlt/error.hpp"
#include "xlt/util/hash.hpp"

namespace xlt {

OracleAligner::OracleAligner(TokenPermutation permutation, double drop_probability,
                             std::uint64_t seed)
    : permutation_(permutation), drop_probability_(drop_probability), seed_(seed) {
  if (!permutation_) fail(ErrorCode::ContractViolation, "oracle aligner needs a permutation");
  if (!(drop_probability_ >= 0.0 && drop_probability_ <= 1.0)) {
    fail(ErrorCode::ContractViolation, "drop probability must lie in [0, 1]");
  }
}

AlignmentLinks OracleAligner::align(std::span<const std::string> src_tokens,
                                    std::span<const std::string> tgt_tokens) const {
  const auto mapping = permutation_(src_tokens.size());
  std::set<AlignmentLinks::Link> links;
  std::uint64_t sentence = splitmix64(seed_);
  for (const auto& token : src_tokens) {
    sentence = fnv1a64(token, sentence);
    sentence = fnv1a64(" ", sentence);
  }
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (mapping[i] >= tgt_tokens.size()) continue;
    if (drop_probability_ > 0.0 &&
        unit_interval(splitmix64(sentence ^ splitmix64(i))) < drop_probability_) {
      continue;
    }
    links.emplace(i, mapping[i]);
  }
  return AlignmentLinks(src_tokens.size(), tgt_tokens.size(), std::move(links));
}

std::string OracleAligner::identity() const {
  std::ostringstream os;
  os << "mock:oracle";
  if (drop_probability_ > 0.0) os << "(drop=" << drop_probability_ << ",seed=" << seed_ << ")";
  return os.str();
}

HttpAligner::HttpAligner(std::string base_url, RetryPolicy policy)
    : client_(std::move(base_url), policy) {}

AlignmentLinks HttpAligner::align(std::span<const std::string> src_tokens,
                                  std::span<const std::string> tgt_tokens) const {
  nlohmann::json body{{"src_tokens", std::vector<std::string>(src_tokens.begin(), src_tokens.end())},
                      {"tgt_tokens", std::vector<std::string>(tgt_tokens.begin(), tgt_tokens.end())}};
  const auto reply = client_.post("/v1/align", body);
  std::set<AlignmentLinks::Link> links;
  try {
    for (const auto& link : reply.at("links")) {
      if (!link.is_array() || link.size() != 2) {
        fail(ErrorCode::MalformedPair, "link " + link.dump());
      }
      links.emplace(link[0].get<std::size_t>(), link[1].get<std::size_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BackendFailure, "malformed /v1/align reply: " + std::string(e.what()));
  }
  return AlignmentLinks(src_tokens.size(), tgt_tokens.size(), std::move(links));
}

}  // namespace xlt
