#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "snaptag/tagrank.hpp"

using namespace snaptag;

TEST_CASE("normalize_tag_name trims and lowercases") {
  CHECK(normalize_tag_name("  Pizza ") == "pizza");
  CHECK(normalize_tag_name("FOOD") == "food");
  CHECK(normalize_tag_name("") == "");
  CHECK(normalize_tag_name("two words") == "two words");
}

TEST_CASE("tag_score: single-source contributions") {
  // scene term is the raw probability
  auto scene = tag_score({make_scene_candidate("food", 0.9)});
  CHECK(scene.score == doctest::Approx(0.9).epsilon(1e-12));

  // ocr term is damped by 0.8
  auto ocr = tag_score({make_ocr_candidate("pizza", 1.0)});
  CHECK(ocr.score == doctest::Approx(0.8).epsilon(1e-12));

  // related term is parent_prob * exp(-model_score)
  auto rel0 = tag_score({make_related_candidate("italy", 0.0, 1.0)});
  CHECK(rel0.score == doctest::Approx(1.0).epsilon(1e-12));

  auto rel = tag_score({make_related_candidate("italy", 1.0, 0.5)});
  CHECK(rel.score == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-9));
  CHECK(rel.score == doctest::Approx(0.18393972).epsilon(1e-6));
}

TEST_CASE("tag_score: multi-source additivity") {
  std::vector<TagCandidate> cands = {
      make_scene_candidate("food", 0.6),
      make_ocr_candidate("food", 0.5),
      make_related_candidate("food", 0.5, 0.7),
  };
  double expected = 0.6 + 0.8 * 0.5 + 0.7 * std::exp(-0.5);
  auto r = tag_score(cands);
  CHECK(r.score == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.contributions.size() == 3);
  double total = 0.0;
  for (const auto& c : r.contributions) total += c.value;
  CHECK(total == doctest::Approx(r.score).epsilon(1e-12));
}

TEST_CASE("related contribution decreases as the model score grows") {
  double prev = 1e9;
  for (double s : {0.0, 0.25, 0.5, 1.0, 2.0, 5.0}) {
    auto r = tag_score({make_related_candidate("x", s, 1.0)});
    CHECK(r.score < prev);
    prev = r.score;
  }
}

TEST_CASE("rank_tags: worked three-tag example") {
  std::vector<TagCandidate> cands = {
      make_scene_candidate("Food", 0.7),
      make_ocr_candidate("pizza", 0.9),
      make_ocr_candidate("food", 0.4),
      make_related_candidate("italian", 0.5, 0.7),
  };
  auto ranked = rank_tags(cands);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].name == "food");  // 0.7 + 0.32 = 1.02
  CHECK(ranked[0].score == doctest::Approx(0.7 + 0.8 * 0.4).epsilon(1e-12));
  CHECK(ranked[1].name == "pizza");  // 0.72
  CHECK(ranked[1].score == doctest::Approx(0.72).epsilon(1e-12));
  CHECK(ranked[2].name == "italian");  // 0.7 * e^-0.5 ~= 0.4246
  CHECK(ranked[2].score ==
        doctest::Approx(0.7 * std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("rank_tags: equal scores order by name ascending") {
  auto ranked = rank_tags({make_scene_candidate("zebra", 0.5),
                           make_scene_candidate("apple", 0.5)});
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].name == "apple");
  CHECK(ranked[1].name == "zebra");
}

TEST_CASE("rank_tags is invariant under input permutation") {
  std::vector<TagCandidate> cands = {
      make_scene_candidate("a", 0.3),  make_ocr_candidate("b", 0.6),
      make_ocr_candidate("a", 0.2),    make_related_candidate("c", 1.0, 0.9),
      make_scene_candidate("b", 0.1),  make_related_candidate("a", 0.2, 0.4),
  };
  auto base = rank_tags(cands);
  std::mt19937 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(cands.begin(), cands.end(), rng);
    auto shuffled = rank_tags(cands);
    REQUIRE(shuffled.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(shuffled[i].name == base[i].name);
      CHECK(shuffled[i].score == base[i].score);
    }
  }
}

TEST_CASE("rank_tags: empty input and scores stay positive") {
  CHECK(rank_tags({}).empty());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> p(0.001, 1.0);
  std::vector<TagCandidate> cands;
  for (int i = 0; i < 30; ++i)
    cands.push_back(make_related_candidate("t" + std::to_string(i % 7),
                                           p(rng) * 4.0, p(rng)));
  for (const auto& r : rank_tags(cands)) CHECK(r.score > 0.0);
}
