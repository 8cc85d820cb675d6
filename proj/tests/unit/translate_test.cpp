#include <doctest.h>

#include <atomic>
#include <thread>

#include "synthetic.hpp"
#include "xlt/error.hpp"
#include "xlt/translate/translate.hpp"

using namespace xlt;

namespace {

const LanguageTag eng("eng"), spa("spa"), deu("deu"), grn("grn");

Dataset one(const std::string& text, TaskKind task = TaskKind::TC) {
  Dataset d;
  d.task = task;
  d.label_set = {"x"};
  d.sequences.push_back({"0", text, task == TaskKind::NLI ? std::optional<std::string>("b") : std::nullopt, "x",
                         eng, {}});
  return d;
}

// Prefixes every text with "t:" and records the largest batch it saw.
class TaggingTranslator final : public TranslatorBackend {
 public:
  LanguageSet supported_languages() const override { return {eng, spa}; }
  std::vector<std::string> translate_batch(std::span<const TranslationRequest> requests,
                                           const DecodingConfig&) const override {
    std::size_t seen = max_batch.load();
    while (requests.size() > seen && !max_batch.compare_exchange_weak(seen, requests.size())) {
    }
    std::vector<std::string> out;
    for (const auto& r : requests) out.push_back("t:" + r.text);
    // Later chunks finish first when run concurrently.
    if (!requests.empty() && requests.front().text == "0") std::this_thread::sleep_for(std::chrono::milliseconds(20));
    return out;
  }
  std::string identity() const override { return "tagging"; }
  mutable std::atomic<std::size_t> max_batch{0};
};

class FailingTranslator final : public TranslatorBackend {
 public:
  LanguageSet supported_languages() const override { return {eng, spa}; }
  std::vector<std::string> translate_batch(std::span<const TranslationRequest> requests,
                                           const DecodingConfig&) const override {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (requests[i].text == "boom") fail(ErrorCode::BackendFailure, "model error", i);
    }
    return std::vector<std::string>(requests.size(), "ok");
  }
  std::string identity() const override { return "failing"; }
};

}  // namespace

TEST_SUITE("translate") {
  TEST_CASE("decoding configurations") {
    const auto beam = DecodingConfig::beam();
    CHECK(beam.beam_size == 5);
    CHECK_FALSE(beam.top_p);
    const auto nuc = DecodingConfig::nucleus();
    CHECK(nuc.top_p == 0.8);
    CHECK(nuc.seed == 0);
    CHECK_FALSE(nuc.beam_size);
    DecodingConfig both = beam;
    both.top_p = 0.8;
    CHECK_THROWS_AS(both.validate(), Error);
    DecodingConfig zero = beam;
    zero.beam_size = 0;
    CHECK_THROWS_AS(zero.validate(), Error);
    DecodingConfig p = nuc;
    p.top_p = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
    for (const auto& c : {DecodingConfig::greedy(), beam, nuc}) CHECK(decoding_from_json(to_json(c)) == c);
    const auto j = to_json(beam);
    CHECK(j.at("mode") == "beam");
    CHECK_FALSE(j.contains("top_p"));
  }

  TEST_CASE("mock backends") {
    const LanguageSet langs{eng, spa};
    const std::vector<TranslationRequest> req{{"a b c", eng, spa}};
    CHECK(IdentityTranslator(langs).translate_batch(req, {}) == std::vector<std::string>{"a b c"});
    CHECK(ReversalTranslator(langs).translate_batch(req, {}) == std::vector<std::string>{"c b a"});
    CHECK(ReversalTranslator::permutation(3) == std::vector<std::size_t>{2, 1, 0});
    const DictionaryTranslator dict({{{eng, spa}, {{"red", "rojo"}}}});
    CHECK(dict.translate_batch(std::vector<TranslationRequest>{{"red car", eng, spa}}, {}) ==
          std::vector<std::string>{"rojo car"});
    try {
      dict.translate_batch(std::vector<TranslationRequest>{{"red", spa, eng}}, {});
      FAIL("expected UndeclaredPair");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UndeclaredPair);
    }
    const auto from_json = DictionaryTranslator::from_json({{"eng-spa", {{"cat", "gato"}}}});
    CHECK(from_json.translate_batch(std::vector<TranslationRequest>{{"cat", eng, spa}}, {}) ==
          std::vector<std::string>{"gato"});
  }

  TEST_CASE("translate_dataset relabels and keeps labels") {
    const IdentityTranslator id({eng, spa});
    const auto d = testing::make_tc_dataset(20, 1);
    const auto t = translate_dataset(id, d, eng, spa, {});
    REQUIRE(t.sequences.size() == d.sequences.size());
    for (std::size_t i = 0; i < d.sequences.size(); ++i) {
      CHECK(t.sequences[i].text_a == d.sequences[i].text_a);
      CHECK(t.sequences[i].label == d.sequences[i].label);
      CHECK(t.sequences[i].id == d.sequences[i].id);
      CHECK(t.sequences[i].language == spa);
      CHECK(t.sequences[i].provenance.origin == Origin::Translated);
    }
    const DictionaryTranslator dict({{{eng, spa}, {{"cat", "gato"}}}});
    CHECK(translate_dataset(dict, one("cat"), eng, spa, {}).sequences[0].text_a == "gato");
  }

  TEST_CASE("NLI fields are separate requests") {
    const DictionaryTranslator dict({{{eng, spa}, {{"a", "x"}, {"b", "y"}}}});
    const auto t = translate_dataset(dict, one("a", TaskKind::NLI), eng, spa, {});
    CHECK(t.sequences[0].text_a == "x");
    CHECK(t.sequences[0].text_b == "y");
  }

  TEST_CASE("errors: unsupported language, wrong source, NER") {
    const IdentityTranslator id({eng, spa});
    try {
      translate_dataset(id, one("a"), eng, deu, {});
      FAIL("expected UnsupportedLanguage");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedLanguage);
    }
    CHECK_THROWS_AS(translate_dataset(id, one("a"), spa, eng, {}), Error);
    CHECK_THROWS_AS(translate_dataset(id, testing::make_ner_dataset(2, 1), eng, spa, {}), Error);
  }

  TEST_CASE("batching preserves order under concurrency") {
    TaggingTranslator tr;
    std::vector<std::string> texts;
    for (int i = 0; i < 100; ++i) texts.push_back(std::to_string(i));
    const auto out = translate_texts(tr, texts, eng, spa, {}, {7, 4});
    REQUIRE(out.size() == 100);
    for (int i = 0; i < 100; ++i) CHECK(out[i] == "t:" + std::to_string(i));
    CHECK(tr.max_batch.load() == 7);
    CHECK(translate_texts(tr, {}, eng, spa, {}).empty());
  }

  TEST_CASE("backend errors carry the global request index") {
    FailingTranslator tr;
    std::vector<std::string> texts(50, "fine");
    texts[37] = "boom";
    try {
      translate_texts(tr, texts, eng, spa, {}, {8, 2});
      FAIL("expected BackendFailure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BackendFailure);
      CHECK(e.index() == 37u);
    }
  }

  TEST_CASE("roundtrip laws") {
    const auto d = testing::make_tc_dataset(30, 2);
    const IdentityTranslator id({eng, spa});
    const auto rt = roundtrip_dataset(id, d, eng, spa, eng, {});
    for (std::size_t i = 0; i < d.sequences.size(); ++i) {
      CHECK(rt.sequences[i].text_a == d.sequences[i].text_a);
      CHECK(rt.sequences[i].provenance.origin == Origin::Roundtrip);
      CHECK(rt.sequences[i].provenance.pivot == spa);
      CHECK(rt.sequences[i].language == eng);
    }
    const ReversalTranslator rev({eng, spa});
    const auto twice = roundtrip_dataset(rev, d, eng, spa, eng, {});
    for (std::size_t i = 0; i < d.sequences.size(); ++i) CHECK(twice.sequences[i].text_a == d.sequences[i].text_a);
    CHECK_THROWS_AS(roundtrip_dataset(id, d, eng, eng, eng, {}), Error);
  }

  TEST_CASE("roundtrip through a pivot composes the two lexicons") {
    const DictionaryTranslator::Lexicon en_es{{"one", "uno"},   {"two", "dos"},   {"three", "tres"}, {"four", "cuatro"},
                                              {"five", "cinco"}, {"six", "seis"}, {"seven", "siete"}, {"eight", "ocho"},
                                              {"nine", "nueve"}, {"ten", "diez"}};
    const DictionaryTranslator::Lexicon es_de{{"uno", "eins"},   {"dos", "zwei"},  {"tres", "drei"}, {"cuatro", "vier"},
                                              {"cinco", "fuenf"}, {"seis", "sechs"}, {"siete", "sieben"},
                                              {"ocho", "acht"},  {"nueve", "neun"}, {"diez", "zehn"}};
    const DictionaryTranslator dict({{{eng, spa}, en_es}, {{spa, deu}, es_de}});
    Dataset d = one("one two three four five six seven eight nine ten extra");
    const auto out = roundtrip_dataset(dict, d, eng, spa, deu, {});
    CHECK(out.sequences[0].text_a == "eins zwei drei vier fuenf sechs sieben acht neun zehn extra");
    CHECK(out.sequences[0].language == deu);
    CHECK(out.sequences[0].provenance.pivot == spa);
  }

  TEST_CASE("roundtrip errors report the hop") {
    const DictionaryTranslator dict(std::map<DictionaryTranslator::LanguagePair, DictionaryTranslator::Lexicon>{{{eng, spa}, DictionaryTranslator::Lexicon{}}});
    try {
      roundtrip_dataset(dict, one("a"), eng, spa, eng, {});
      FAIL("expected an error on the way back");
    } catch (const Error& e) {
      CHECK(e.hop() == 2);
    }
  }

  TEST_CASE("language support ignores missing scripts") {
    const LanguageSet s{LanguageTag("eng", "Latn")};
    CHECK(supports(s, eng));
    CHECK(resolve_language(s, eng) == LanguageTag("eng", "Latn"));
    CHECK_FALSE(supports(s, spa));
  }

  TEST_CASE("NER token sequences survive whitespace retokenization") {
    const ReversalTranslator rev({eng, spa});
    const auto out = translate_token_sequences(rev, {{"a", "b", "c"}, {"d"}}, eng, spa, {});
    CHECK(out == std::vector<std::vector<std::string>>{{"c", "b", "a"}, {"d"}});
  }
}
