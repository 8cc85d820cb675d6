#include "xlt/wire/conformance.hpp"

#include <functional>

#include <httplib.h>
#include <json.hpp>

#include "xlt/error.hpp"

namespace xlt::wire {

using nlohmann::json;

namespace {

struct Reply {
  int status = 0;
  json body;
};

class Probe {
 public:
  explicit Probe(const std::string& url) : client_(url) {
    client_.set_connection_timeout(std::chrono::seconds(10));
    client_.set_read_timeout(std::chrono::seconds(120));
  }

  Reply get(const std::string& path) { return wrap(client_.Get(path)); }
  Reply post(const std::string& path, const json& body) { return post_raw(path, body.dump()); }
  Reply post_raw(const std::string& path, const std::string& body) {
    return wrap(client_.Post(path, body, "application/json"));
  }

 private:
  static Reply wrap(const httplib::Result& r) {
    if (!r) fail(ErrorCode::BackendUnreachable, httplib::to_string(r.error()));
    return {r->status, json::parse(r->body, nullptr, false)};
  }

  httplib::Client client_;
};

bool is_error_object(const Reply& r) {
  return r.status != 200 && r.body.is_object() && r.body.contains("error") &&
         r.body["error"].is_object() && r.body["error"].contains("code") &&
         r.body["error"].contains("message");
}

// Runs one check; any exception counts as a failure with its message.
void check(std::vector<ConformanceCheck>& out, const std::string& name,
           const std::function<std::string()>& body) {
  try {
    const std::string problem = body();
    out.push_back({name, problem.empty(), problem});
  } catch (const std::exception& e) {
    out.push_back({name, false, e.what()});
  }
}

json translate_body(const LanguageTag& src, const LanguageTag& tgt, const json& decoding,
                    const std::vector<std::string>& texts) {
  return {{"src", src.str()}, {"tgt", tgt.str()}, {"decoding", decoding}, {"texts", texts}};
}

const json kBeam = {{"mode", "beam"}, {"beam_size", 5}};
const json kGreedy = {{"mode", "greedy"}};
const json kNucleus = {{"mode", "nucleus"}, {"top_p", 0.8}, {"seed", 7}};

const std::vector<std::string> kTexts = {"the first sentence", "a second one here",
                                         "third", "", "and the fifth sentence of the batch"};

}  // namespace

std::vector<ConformanceCheck> translator_conformance(
    const std::string& base_url, std::optional<std::pair<LanguageTag, LanguageTag>> pair) {
  Probe probe(base_url);
  std::vector<ConformanceCheck> out;

  std::vector<LanguageTag> languages;
  check(out, "handshake", [&]() -> std::string {
    const auto r = probe.get("/v1/languages");
    if (r.status != 200) return "HTTP " + std::to_string(r.status);
    if (!r.body.contains("languages") || !r.body["languages"].is_array()) return "no languages array";
    if (!r.body.contains("concurrent") || !r.body["concurrent"].is_boolean()) return "no concurrent flag";
    for (const auto& l : r.body["languages"]) languages.push_back(LanguageTag::parse(l.get<std::string>()));
    if (languages.size() < 2 && !pair) return "fewer than two languages advertised";
    return "";
  });
  if (!pair) {
    if (languages.size() < 2) return out;
    pair = {languages[0], languages[1]};
  }
  const auto [src, tgt] = *pair;

  auto translate = [&](const json& decoding, const std::vector<std::string>& texts) {
    return probe.post("/v1/translate", translate_body(src, tgt, decoding, texts));
  };

  check(out, "positional_count", [&]() -> std::string {
    const auto r = translate(kBeam, kTexts);
    if (r.status != 200) return "HTTP " + std::to_string(r.status);
    const auto& t = r.body["translations"];
    if (!t.is_array() || t.size() != kTexts.size()) return "expected one translation per text";
    for (const auto& s : t) {
      if (!s.is_string()) return "non-string translation";
    }
    return "";
  });
  check(out, "positional_integrity", [&]() -> std::string {
    const auto batch = translate(kBeam, kTexts).body["translations"];
    for (std::size_t i = 0; i < kTexts.size(); ++i) {
      const auto single = translate(kBeam, {kTexts[i]}).body["translations"];
      if (single.size() != 1 || single[0] != batch[i]) {
        return "translation " + std::to_string(i) + " differs between batch and single request";
      }
    }
    return "";
  });
  check(out, "empty_batch", [&]() -> std::string {
    const auto r = translate(kBeam, {});
    if (r.status != 200) return "HTTP " + std::to_string(r.status);
    return r.body["translations"] == json::array() ? "" : "expected an empty translations array";
  });
  for (const auto& [name, decoding] :
       {std::pair{"beam_deterministic", kBeam}, std::pair{"greedy_deterministic", kGreedy},
        std::pair{"nucleus_seeded_repeatable", kNucleus}}) {
    check(out, name, [&, decoding = decoding]() -> std::string {
      const auto a = translate(decoding, kTexts);
      const auto b = translate(decoding, kTexts);
      if (a.status != 200 || b.status != 200) return "HTTP " + std::to_string(a.status);
      return a.body["translations"] == b.body["translations"] ? "" : "repeated request differs";
    });
  }
  check(out, "beam_without_top_p_accepted", [&]() -> std::string {
    const auto r = translate({{"mode", "beam"}, {"beam_size", 5}}, {"x"});
    return r.status == 200 ? "" : "HTTP " + std::to_string(r.status);
  });
  check(out, "beam_with_top_p_rejected", [&]() -> std::string {
    const auto r = translate({{"mode", "beam"}, {"beam_size", 5}, {"top_p", 0.8}}, {"x"});
    return is_error_object(r) ? "" : "expected an error object, got HTTP " + std::to_string(r.status);
  });
  check(out, "unsupported_language_rejected", [&]() -> std::string {
    const auto r = probe.post("/v1/translate", translate_body(src, LanguageTag("zzz"), kBeam, {"x"}));
    return is_error_object(r) ? "" : "expected an error object, got HTTP " + std::to_string(r.status);
  });
  check(out, "malformed_body_rejected", [&]() -> std::string {
    const auto r = probe.post_raw("/v1/translate", "{not json");
    return is_error_object(r) ? "" : "expected an error object, got HTTP " + std::to_string(r.status);
  });
  return out;
}

std::vector<ConformanceCheck> aligner_conformance(const std::string& base_url) {
  Probe probe(base_url);
  std::vector<ConformanceCheck> out;
  const json body = {{"src_tokens", {"a", "small", "house", "."}},
                     {"tgt_tokens", {"une", "petite", "maison", "here", "."}}};
  check(out, "links_in_range", [&]() -> std::string {
    const auto r = probe.post("/v1/align", body);
    if (r.status != 200) return "HTTP " + std::to_string(r.status);
    if (!r.body.contains("links") || !r.body["links"].is_array()) return "no links array";
    for (const auto& l : r.body["links"]) {
      if (!l.is_array() || l.size() != 2) return "link is not a pair";
      if (l[0].get<std::size_t>() >= 4 || l[1].get<std::size_t>() >= 5) return "link out of range";
    }
    return "";
  });
  check(out, "deterministic", [&]() -> std::string {
    return probe.post("/v1/align", body).body == probe.post("/v1/align", body).body
               ? ""
               : "repeated request differs";
  });
  check(out, "empty_tokens_rejected", [&]() -> std::string {
    const auto r = probe.post("/v1/align", {{"src_tokens", json::array()}, {"tgt_tokens", {"x"}}});
    return is_error_object(r) ? "" : "expected an error object, got HTTP " + std::to_string(r.status);
  });
  return out;
}

std::string render(const std::vector<ConformanceCheck>& checks) {
  std::string out;
  for (const auto& c : checks) {
    out += (c.passed ? "PASS " : "FAIL ") + c.name;
    if (!c.passed) out += ": " + c.detail;
    out += "\n";
  }
  return out;
}

bool all_passed(const std::vector<ConformanceCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

}  // namespace xlt::wire
