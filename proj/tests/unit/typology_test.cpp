#include <doctest.h>

#include <cmath>
#include <random>

#include "xlt/error.hpp"
#include "xlt/typology/typology.hpp"
#include "xlt/util/files.hpp"

using namespace xlt;

namespace {

std::string code(std::size_t i) {
  std::string s = "aaa";
  s[1] = static_cast<char>('a' + i / 26 % 26);
  s[2] = static_cast<char>('a' + i % 26);
  return s;
}

double dot_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST_SUITE("typology") {
  TEST_CASE("cosine similarity") {
    const std::vector<double> v{1, 2, 3}, w{4, 5, 6};
    CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(cosine_similarity(v, w) == doctest::Approx(32.0 / std::sqrt(14.0 * 77.0)).epsilon(1e-15));
    CHECK(cosine_similarity(v, w) == doctest::Approx(0.974631846).epsilon(1e-9));
    CHECK_THROWS_AS(cosine_similarity(v, std::vector<double>{1, 2}), Error);
    CHECK_THROWS_AS(cosine_similarity(v, std::vector<double>{0, 0, 0}), Error);
  }

  TEST_CASE("cosine is symmetric") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (int i = 0; i < 500; ++i) {
      std::vector<double> a(12), b(12);
      for (auto& x : a) x = n(rng);
      for (auto& x : b) x = n(rng);
      CHECK(std::abs(cosine_similarity(a, b) - cosine_similarity(b, a)) < 1e-12);
      const double c = cosine_similarity(a, b);
      CHECK(c >= -1.0);
      CHECK(c <= 1.0);
    }
  }

  TEST_CASE("CSV loading imputes missing cells") {
    const auto store = TypologyStore::from_csv("language,f1,f2,f3\nnah,1,,0.5\ngrn,0,1,nan\nquy,1,1,1\n", "test");
    CHECK(store.size() == 3);
    CHECK(store.dimension() == 3);
    CHECK(*store.find(LanguageTag("nah")) == std::vector<double>{1, 0, 0.5});
    CHECK(store.missing_counts().at("nah") == 1);
    CHECK(store.missing_counts().at("grn") == 1);
    CHECK_FALSE(store.missing_counts().count("quy"));
    CHECK(store.contains(LanguageTag("grn", "Latn")));
    CHECK_THROWS_AS(TypologyStore::from_csv("language,f1,f2\nnah,1\n"), Error);
    CHECK_THROWS_AS(TypologyStore::from_csv("language,f1\nnah,x\n"), Error);
  }

  TEST_CASE("closest_supported: duplicate vector and errors") {
    TypologyStore store("test", 3);
    store.insert(LanguageTag("nah"), {1, 2, 3});
    store.insert(LanguageTag("xxx"), {1, 2, 3});
    store.insert(LanguageTag("yyy"), {3, 2, 1});
    const auto c = closest_supported(LanguageTag("nah"), {LanguageTag("xxx"), LanguageTag("yyy")}, store);
    CHECK(c.language == LanguageTag("xxx"));
    CHECK(c.score == doctest::Approx(1.0));
    CHECK(c.ranking.size() == 2);
    try {
      closest_supported(LanguageTag("zzz"), {LanguageTag("xxx")}, store);
      FAIL("expected TargetMissingVector");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TargetMissingVector);
    }
    try {
      closest_supported(LanguageTag("nah"), {LanguageTag("qqq")}, store);
      FAIL("expected NoCandidate");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoCandidate);
    }
  }

  TEST_CASE("exact ties go to the smaller code") {
    TypologyStore store("test", 2);
    store.insert(LanguageTag("tgt"), {1, 1});
    store.insert(LanguageTag("zzz"), {2, 2});
    store.insert(LanguageTag("bbb"), {1, 1});
    const auto c = closest_supported(LanguageTag("tgt"), {LanguageTag("zzz"), LanguageTag("bbb")}, store);
    CHECK(c.language == LanguageTag("bbb"));
  }

  TEST_CASE("three-candidate fixture against a hand scan") {
    TypologyStore store("test", 3);
    const std::vector<double> t{1, 0, 1}, a{1, 1, 0}, b{0, 1, 1}, c{1, 0, 0.9};
    store.insert(LanguageTag("tgt"), t);
    store.insert(LanguageTag("aaa"), a);
    store.insert(LanguageTag("bbb"), b);
    store.insert(LanguageTag("ccc"), c);
    const auto r = closest_supported(LanguageTag("tgt"), {LanguageTag("aaa"), LanguageTag("bbb"), LanguageTag("ccc")},
                                     store);
    CHECK(r.language == LanguageTag("ccc"));
    CHECK(r.score == doctest::Approx(dot_cosine(t, c)));
  }

  TEST_CASE("random fixtures: brute-force argmax and scale invariance") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int fixture = 0; fixture < 50; ++fixture) {
      const std::size_t dim = 4 + rng() % 20, candidates = 2 + rng() % 10;
      TypologyStore store("test", dim);
      auto random_vec = [&] {
        std::vector<double> v(dim);
        for (auto& x : v) x = u(rng) < 0.3 ? 0.0 : u(rng);
        v[rng() % dim] = 1.0;
        return v;
      };
      const auto target = random_vec();
      store.insert(LanguageTag("tgt"), target);
      LanguageSet supported;
      std::vector<std::vector<double>> vecs;
      std::string best;
      double best_score = -2;
      for (std::size_t i = 0; i < candidates; ++i) {
        vecs.push_back(random_vec());
        store.insert(LanguageTag(code(i)), vecs.back());
        supported.emplace(code(i));
        const double s = dot_cosine(target, vecs.back());
        if (s > best_score) {
          best_score = s;
          best = code(i);
        }
      }
      const auto r = closest_supported(LanguageTag("tgt"), supported, store);
      CHECK(r.language.code() == best);

      TypologyStore scaled("test", dim);
      scaled.insert(LanguageTag("tgt"), target);
      for (std::size_t i = 0; i < candidates; ++i) {
        auto v = vecs[i];
        const double k = 0.01 + 100.0 * u(rng);
        for (auto& x : v) x *= k;
        scaled.insert(LanguageTag(code(i)), v);
      }
      CHECK(closest_supported(LanguageTag("tgt"), supported, scaled).language == r.language);
    }
  }

  TEST_CASE("reference pairs with the bundled knn export") {
    const auto store = TypologyStore::load_csv(std::string(XLT_TEST_DATA_DIR) + "/uriel_knn.csv");
    const auto checks = check_reference_pairs(store, reference_closest_pairs());
    CHECK(checks.size() == 12);
    std::size_t reproduced = 0;
    for (const auto& c : checks) reproduced += c.reproduced;
    const auto report = render_discrepancy_report(checks, store.feature_set());
    MESSAGE(report);
    CHECK(report.find("reproduced " + std::to_string(reproduced) + "/12") != std::string::npos);
    for (const auto& c : checks) {
      if (c.reproduced) continue;
      CHECK(report.find(c.winner.str()) != std::string::npos);
      CHECK(c.winner_score >= c.expected_score);
    }
  }
}
