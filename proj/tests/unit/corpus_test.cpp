#include <doctest.h>

#include <functional>
#include <random>

#include "synthetic.hpp"
#include "xlt/corpus/bio.hpp"
#include "xlt/corpus/formats.hpp"
#include "xlt/error.hpp"

using namespace xlt;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::ContractViolation;
}

// Random BIO-valid tag sequence over two types.
std::vector<std::string> random_bio(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::string> tags;
  std::string open;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rng() % 4;
    if (r == 0 || (r == 3 && open.empty())) {
      tags.push_back("O");
      open.clear();
    } else if (r == 3) {
      tags.push_back("I-" + open);
    } else {
      open = r == 1 ? "PER" : "LOC";
      tags.push_back("B-" + open);
    }
  }
  return tags;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("language tags") {
    CHECK(LanguageTag::parse("eng_latn").str() == "eng_Latn");
    CHECK(LanguageTag::parse("ENG").str() == "eng");
    CHECK(LanguageTag::parse("grn") == LanguageTag("grn"));
    CHECK(LanguageTag("eng", "Latn").same_language(LanguageTag("eng")));
    CHECK_THROWS_AS(LanguageTag::parse("e"), Error);
    CHECK_THROWS_AS(LanguageTag::parse("engl"), Error);
    CHECK_THROWS_AS(LanguageTag::parse("eng_La"), Error);
    CHECK_THROWS_AS(LanguageTag::parse("en1"), Error);
  }

  TEST_CASE("BIO grammar, repair and spans") {
    const std::vector<std::string> ok{"B-PER", "I-PER", "O", "B-LOC"};
    CHECK(bio::is_valid(ok));
    const std::vector<std::string> bad{"O", "I-PER"};
    CHECK_FALSE(bio::is_valid(bad));
    const std::vector<std::string> wrong_type{"B-LOC", "I-PER"};
    CHECK_FALSE(bio::is_valid(wrong_type));
    CHECK(bio::repair(bad) == std::vector<std::string>{"O", "B-PER"});
    CHECK(bio::repair(wrong_type) == std::vector<std::string>{"B-LOC", "B-PER"});
    const auto s = bio::spans(ok);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == bio::Span{"PER", 0, 2});
    CHECK(s[1] == bio::Span{"LOC", 3, 4});
    CHECK(code_of([&] { bio::spans(bad); }) == ErrorCode::InvalidBIO);
    CHECK_FALSE(bio::parse_tag("X-PER"));
    CHECK_FALSE(bio::parse_tag("B-"));
  }

  TEST_CASE("parse_conll: worked example and errors") {
    const auto d = parse_conll("EU NNP B-ORG\nrejects VB O\n\n", 2);
    REQUIRE(d.tokens.size() == 1);
    CHECK(d.tokens[0].tokens == std::vector<std::string>{"EU", "rejects"});
    CHECK(d.tokens[0].tags == std::vector<std::string>{"B-ORG", "O"});
    CHECK(d.label_set == std::vector<std::string>{"ORG"});
    CHECK(code_of([] { parse_conll("", 1); }) == ErrorCode::EmptyInput);
    CHECK(code_of([] { parse_conll("EU B-ORG\n", 2); }) == ErrorCode::RaggedLine);
    CHECK(code_of([] { parse_conll("EU NNP ORG\n", 2); }) == ErrorCode::InvalidTag);
  }

  TEST_CASE("parse_conll skips DOCSTART and repairs IOB1") {
    const std::string text =
        "-DOCSTART- -X- O\n\n"
        "Peter NNP I-PER\nBlackburn NNP I-PER\nin IN O\nBonn NNP I-LOC\n\n"
        "-DOCSTART- -X- O\n\n"
        "Ok UH O\n";
    const auto d = parse_conll(text, 2);
    REQUIRE(d.tokens.size() == 2);
    CHECK(d.tokens[0].tags == std::vector<std::string>{"B-PER", "I-PER", "O", "B-LOC"});
    CHECK(d.label_set == std::vector<std::string>{"PER", "LOC"});
    for (const auto& inst : d.tokens) CHECK(bio::is_valid(inst.tags));
  }

  TEST_CASE("CoNLL writer round trip on 1000 sentences") {
    auto d = testing::make_ner_dataset(1000, 3);
    d.validate();
    ParseOptions options;
    const auto back = parse_conll(write_conll(d), 1, options);
    REQUIRE(back.tokens.size() == d.tokens.size());
    for (std::size_t i = 0; i < d.tokens.size(); ++i) {
      CHECK(back.tokens[i].tokens == d.tokens[i].tokens);
      CHECK(back.tokens[i].tags == d.tokens[i].tags);
    }
    // Entity types in file order.
    CHECK(back.label_set.size() == 2);
  }

  TEST_CASE("random CoNLL files always parse to BIO-valid instances") {
    std::mt19937_64 rng(17);
    for (int file = 0; file < 200; ++file) {
      std::string text;
      const int sentences = 1 + static_cast<int>(rng() % 5);
      for (int s = 0; s < sentences; ++s) {
        const std::size_t n = 1 + rng() % 8;
        for (std::size_t i = 0; i < n; ++i) {
          static const char* tags[] = {"O", "B-PER", "I-PER", "B-LOC", "I-LOC"};
          text += "w" + std::to_string(i) + " " + tags[rng() % 5] + "\n";
        }
        text += "\n";
      }
      const auto d = parse_conll(text, 1);
      CHECK(d.tokens.size() == static_cast<std::size_t>(sentences));
      for (const auto& inst : d.tokens) {
        CHECK(inst.tokens.size() == inst.tags.size());
        CHECK(bio::is_valid(inst.tags));
      }
      CHECK(parse_conll(text, 1) == d);
    }
  }

  TEST_CASE("parse_sequence_tsv") {
    TsvSchema schema;
    schema.text_a = "premise";
    schema.text_b = "hypothesis";
    const auto d = parse_sequence_tsv("premise\thypothesis\tlabel\na\tb\tentailment\nc\td\tneutral\n", schema,
                                      TaskKind::NLI);
    REQUIRE(d.sequences.size() == 2);
    CHECK(d.sequences[1].text_b == "d");
    CHECK(d.sequences[0].id == "0");
    CHECK(d.label_set == std::vector<std::string>{"entailment", "neutral"});

    CHECK(code_of([&] { parse_sequence_tsv("premise\thypothesis\nx\ty\n", schema, TaskKind::NLI); }) ==
          ErrorCode::MissingColumn);
    CHECK(code_of([&] {
            parse_sequence_tsv("premise\thypothesis\tlabel\nx\ty\n", schema, TaskKind::NLI);
          }) == ErrorCode::MissingColumn);

    TsvSchema closed = default_schema(TaskKind::TC);
    closed.closed_labels = std::vector<std::string>{"positive", "negative", "neutral"};
    const auto tc = parse_sequence_tsv("id\ttext_a\tlabel\n1\tgood\tpositive\n", closed, TaskKind::TC);
    CHECK(tc.label_set == *closed.closed_labels);
    CHECK(code_of([&] { parse_sequence_tsv("id\ttext_a\tlabel\n1\tx\tmixed\n", closed, TaskKind::TC); }) ==
          ErrorCode::LabelOutsideSet);

    TsvSchema positional;
    positional.header = false;
    positional.text_a = "0";
    positional.label = "1";
    const auto p = parse_sequence_tsv("hello\tpos\nbye\tneg\n", positional, TaskKind::TC);
    CHECK(p.sequences.size() == 2);
    CHECK(p.sequences[1].label == "neg");
  }

  TEST_CASE("TSV writer round trip on 500 synthetic TC rows") {
    const auto d = testing::make_tc_dataset(500, 4);
    const auto back = parse_sequence_tsv(write_sequence_tsv(d), default_schema(TaskKind::TC), TaskKind::TC);
    REQUIRE(back.sequences.size() == 500);
    for (std::size_t i = 0; i < 500; ++i) {
      CHECK(back.sequences[i].id == d.sequences[i].id);
      CHECK(back.sequences[i].text_a == d.sequences[i].text_a);
      CHECK(back.sequences[i].label == d.sequences[i].label);
    }
  }

  TEST_CASE("JSONL round trip keeps every field") {
    auto tc = testing::make_tc_dataset(50, 5);
    tc.sequences[3].provenance = {Origin::Roundtrip, LanguageTag("tur")};
    tc.sequences[4].language = LanguageTag("eng", "Latn");
    CHECK(read_jsonl(write_jsonl(tc), {tc.split, tc.task, tc.label_set}) == tc);

    const auto nli = testing::make_synthetic_task(TaskKind::NLI, {30, 5, 5}).source_train;
    CHECK(read_jsonl(write_jsonl(nli), {nli.split, {}, nli.label_set}) == nli);

    auto ner = testing::make_ner_dataset(40, 6);
    ner.tokens[0].provenance = {Origin::Translated, std::nullopt};
    CHECK(read_jsonl(write_jsonl(ner), {ner.split, {}, ner.label_set}) == ner);
  }

  TEST_CASE("JSONL schema fields") {
    const auto tc = testing::make_tc_dataset(1, 5);
    const auto line = nlohmann::json::parse(write_jsonl(tc));
    for (const char* k : {"id", "task", "language", "script", "provenance", "pivot", "text_a", "text_b", "label"}) {
      CHECK(line.contains(k));
    }
    const auto ner = testing::make_ner_dataset(1, 5);
    const auto nline = nlohmann::json::parse(write_jsonl(ner));
    for (const char* k : {"id", "task", "language", "script", "provenance", "pivot", "tokens", "tags"}) {
      CHECK(nline.contains(k));
    }
  }

  TEST_CASE("JSONL empty and malformed input") {
    Dataset empty;
    empty.task = TaskKind::TC;
    CHECK(write_jsonl(empty).empty());
    CHECK(read_jsonl("", {Split::Train, TaskKind::TC, std::vector<std::string>{}}) == empty);

    const auto text = write_jsonl(testing::make_tc_dataset(5, 8));
    const auto truncated = text.substr(0, text.size() - 10);
    try {
      read_jsonl(truncated);
      FAIL("expected MalformedLine");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedLine);
      CHECK(e.index() == 5u);
    }
  }

  TEST_CASE("dataset invariants") {
    auto d = testing::make_tc_dataset(3, 9);
    d.sequences[1].id = d.sequences[0].id;
    CHECK_THROWS_AS(d.validate(), Error);
    auto nli = testing::make_synthetic_task(TaskKind::NLI, {3, 1, 1}).source_train;
    nli.sequences[0].text_b.reset();
    CHECK_THROWS_AS(nli.validate(), Error);
    auto ner = testing::make_ner_dataset(3, 9);
    ner.tokens[0].tags[0] = "I-PER";
    ner.tokens[0].tags.resize(1);
    CHECK_THROWS_AS(ner.validate(), Error);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) CHECK(bio::is_valid(random_bio(rng, 1 + rng() % 7)));
    CHECK(ner_tag_vocabulary({"PER", "LOC"}) ==
          std::vector<std::string>{"O", "B-PER", "I-PER", "B-LOC", "I-LOC"});
  }
}
