#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xlt/align/alignment.hpp"
#include "xlt/translate/backend.hpp"
#include "xlt/util/http_json.hpp"

namespace xlt {

class AlignerBackend {
 public:
  virtual ~AlignerBackend() = default;

  /// Both token lists are non-empty.
  virtual AlignmentLinks align(std::span<const std::string> src_tokens,
                               std::span<const std::string> tgt_tokens) const = 0;

  virtual bool accepts_concurrent_requests() const { return true; }
  virtual std::string identity() const = 0;
};

/// Knows how a mock translator moved tokens and links them accordingly.
/// With a drop probability p, each source token independently loses its
/// link with probability p. The decision is a hash of (seed, sentence,
/// token index), so it is reproducible and order-independent; distinct
/// sentences get independent draws.
class OracleAligner final : public AlignerBackend {
 public:
  explicit OracleAligner(TokenPermutation permutation, double drop_probability = 0.0,
                         std::uint64_t seed = 0);

  AlignmentLinks align(std::span<const std::string> src_tokens,
                       std::span<const std::string> tgt_tokens) const override;
  std::string identity() const override;

 private:
  TokenPermutation permutation_;
  double drop_probability_;
  std::uint64_t seed_;
};

/// POST /v1/align {"src_tokens": [...], "tgt_tokens": [...]} -> {"links": [[i, j], ...]}
class HttpAligner final : public AlignerBackend {
 public:
  explicit HttpAligner(std::string base_url, RetryPolicy policy = {});

  AlignmentLinks align(std::span<const std::string> src_tokens,
                       std::span<const std::string> tgt_tokens) const override;
  std::string identity() const override { return "http:" + client_.base_url(); }

 private:
  JsonHttpClient client_;
};

}  // namespace xlt
