#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace udreorder;

TEST_CASE("normalize_label strips subtypes only at universal granularity") {
  CHECK(normalize_label("obl:tmod", Granularity::universal) == "obl");
  CHECK(normalize_label("obl:tmod", Granularity::subtyped) == "obl:tmod");
  CHECK(normalize_label("obl", Granularity::universal) == "obl");
  CHECK(normalize_label("acl:relcl:extra", Granularity::universal) == "acl");
}

TEST_CASE("the head participates in its own children's ordering") {
  // "She runs": the only pair is (nsubj at 1, the head itself at 2).
  auto s = testutil::make_sentence({2, 0}, {"nsubj", "root"});
  auto table = estimate_pods({s}, "en", Granularity::universal);
  REQUIRE(table.counts().size() == 1);
  CHECK(table.count("root", "nsubj", "root") == 1);
  CHECK(table.provenance().sentences == 1);
}

TEST_CASE("three-token sentence counts all local pairs") {
  auto s = testutil::make_sentence({2, 0, 2}, {"nsubj", "root", "obj"});
  auto table = estimate_pods({s}, "en", Granularity::universal);
  CHECK(table.count("root", "nsubj", "root") == 1);
  CHECK(table.count("root", "nsubj", "obj") == 1);
  CHECK(table.count("root", "root", "obj") == 1);
  CHECK(table.counts().size() == 3);
}

TEST_CASE("nested structure files pairs under each parent's label") {
  // 1 det -> 2, 2 nsubj -> 3, 3 root.
  auto s = testutil::make_sentence({2, 3, 0}, {"det", "nsubj", "root"});
  auto table = estimate_pods({s}, "en", Granularity::universal);
  CHECK(table.count("nsubj", "det", "nsubj") == 1);
  CHECK(table.count("root", "nsubj", "root") == 1);
  CHECK(table.counts().size() == 2);
}

TEST_CASE("estimator matches the pair-scan oracle on random trees") {
  std::mt19937 rng(40123);
  for (int trial = 0; trial < 80; ++trial) {
    int n = std::uniform_int_distribution<int>(1, 8)(rng);
    bool projective = trial % 2 == 0;
    auto heads = projective ? testutil::random_projective_heads(rng, n)
                            : testutil::random_tree_heads(rng, n);
    bool subtyped = trial % 3 == 0;
    auto deprels = testutil::random_deprels(rng, heads, subtyped);
    auto s = testutil::make_sentence(heads, deprels);
    for (auto g : {Granularity::universal, Granularity::subtyped}) {
      auto table = estimate_pods({s}, "xx", g);
      auto expect = testutil::oracle_counts(s, g);
      INFO("trial " << trial << " granularity " << to_string(g));
      CHECK(table.counts() == expect);
    }
  }
}

TEST_CASE("probability and pair_total") {
  PodTable t("en", Granularity::universal);
  t.add({"root", "nsubj", "root"}, 9);
  t.add({"root", "root", "nsubj"}, 1);
  CHECK(t.pair_total("root", "nsubj", "root") == 10);
  CHECK(t.pair_total("root", "root", "nsubj") == 10);
  CHECK(t.probability("root", "nsubj", "root") == 0.9);
  CHECK(t.probability("root", "root", "nsubj") == 0.1);
  CHECK(t.probability("root", "obj", "obl") == std::nullopt);
  CHECK(t.probability("root", "obj", "obj") == 0.5);
  CHECK(t.probability("root", "nsubj", "nsubj") == 0.5);
  CHECK(t.count("root", "obj", "obl") == 0);
}

TEST_CASE("probabilities of a pair and its flip sum to one") {
  std::mt19937 rng(555);
  PodTable t("xx", Granularity::universal);
  const auto& alpha = testutil::label_alphabet();
  for (int i = 0; i < 200; ++i) {
    t.add({alpha[rng() % alpha.size()], alpha[rng() % alpha.size()],
           alpha[rng() % alpha.size()]},
          1 + rng() % 5);
  }
  for (const auto& [triple, n] : t.counts()) {
    if (triple.first == triple.second) continue;
    auto p = t.probability(triple.parent, triple.first, triple.second);
    auto q = t.probability(triple.parent, triple.second, triple.first);
    REQUIRE(p.has_value());
    REQUIRE(q.has_value());
    CHECK_THAT(*p + *q, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("merge sums counts and unions provenance") {
  PodAccumulator a("en", Granularity::universal);
  a.add_treebank_name("B-Bank");
  a.add_treebank_name("A-Bank");
  a.add_sentence(testutil::make_sentence({2, 0}, {"nsubj", "root"}));
  PodTable ta = a.take();
  CHECK(ta.provenance().treebank == "A-Bank+B-Bank");

  PodAccumulator b("en", Granularity::universal);
  b.add_treebank_name("B-Bank");
  b.add_treebank_name("C-Bank");
  b.add_sentence(testutil::make_sentence({2, 0}, {"nsubj", "root"}));
  b.add_sentence(testutil::make_sentence({0, 1}, {"root", "obj"}));
  PodTable tb = b.take();

  PodTable m = merge(ta, tb);
  CHECK(m.count("root", "nsubj", "root") == 2);
  CHECK(m.count("root", "root", "obj") == 1);
  CHECK(m.provenance().sentences == 3);
  CHECK(m.provenance().treebank == "A-Bank+B-Bank+C-Bank");

  PodTable m2 = merge(tb, ta);
  CHECK(m == m2);
}

TEST_CASE("merge rejects mismatched tables") {
  PodTable en("en", Granularity::universal);
  PodTable ga("ga", Granularity::universal);
  PodTable sub("en", Granularity::subtyped);
  try {
    merge(en, ga);
    FAIL("expected PodError");
  } catch (const PodError& e) {
    CHECK(e.kind() == PodErrorKind::language_mismatch);
  }
  try {
    merge(en, sub);
    FAIL("expected PodError");
  } catch (const PodError& e) {
    CHECK(e.kind() == PodErrorKind::granularity_mismatch);
  }
}

TEST_CASE("estimating a treebank equals merging estimates of its halves") {
  std::mt19937 rng(909);
  std::vector<Sentence> all;
  for (int i = 0; i < 30; ++i) {
    int n = std::uniform_int_distribution<int>(1, 9)(rng);
    auto heads = testutil::random_projective_heads(rng, n);
    all.push_back(testutil::make_sentence(heads, testutil::random_deprels(rng, heads)));
  }
  std::vector<Sentence> left(all.begin(), all.begin() + 15);
  std::vector<Sentence> right(all.begin() + 15, all.end());
  auto whole = estimate_pods(all, "xx", Granularity::universal, "T");
  auto parts = merge(estimate_pods(left, "xx", Granularity::universal, "T"),
                     estimate_pods(right, "xx", Granularity::universal, "T"));
  CHECK(whole == parts);
}

TEST_CASE("accumulator rejects invalid trees, lenient variant skips them") {
  PodAccumulator acc("en", Granularity::universal);
  auto bad = testutil::make_sentence({0, 0}, {"root", "root"});
  REQUIRE_THROWS_AS(acc.add_sentence(bad), ConlluError);
  CHECK_FALSE(acc.try_add_sentence(bad));
  CHECK(acc.try_add_sentence(testutil::make_sentence({0}, {"root"})));
  CHECK(acc.skipped() == 2);
  CHECK(acc.table().provenance().sentences == 1);
}

TEST_CASE("json round trip preserves the table") {
  std::mt19937 rng(321);
  std::vector<Sentence> sents;
  for (int i = 0; i < 10; ++i) {
    int n = std::uniform_int_distribution<int>(2, 8)(rng);
    auto heads = testutil::random_projective_heads(rng, n);
    sents.push_back(testutil::make_sentence(heads, testutil::random_deprels(rng, heads, true)));
  }
  auto table = estimate_pods(sents, "de", Granularity::subtyped, "De-Bank");
  std::ostringstream out;
  save_pods(table, out);
  std::istringstream in(out.str());
  auto back = load_pods(in);
  CHECK(back == table);
}

TEST_CASE("pod json layout") {
  auto table = estimate_pods({testutil::make_sentence({2, 0}, {"nsubj", "root"})},
                             "en", Granularity::universal, "Bank");
  auto j = to_json(table);
  CHECK(j["format_version"] == kPodFormatVersion);
  CHECK(j["language"] == "en");
  CHECK(j["granularity"] == "universal");
  CHECK(j["provenance"]["treebank"] == "Bank");
  CHECK(j["provenance"]["sentences"] == 1);
  REQUIRE(j["triples"].size() == 1);
  CHECK(j["triples"][0]["parent"] == "root");
  CHECK(j["triples"][0]["first"] == "nsubj");
  CHECK(j["triples"][0]["second"] == "root");
  CHECK(j["triples"][0]["count"] == 1);
}

TEST_CASE("corrupt and mismatched pod files") {
  auto expect_kind = [](const std::string& text, PodErrorKind kind) {
    std::istringstream in(text);
    try {
      load_pods(in);
      FAIL("expected PodError for: " << text);
    } catch (const PodError& e) {
      CHECK(e.kind() == kind);
    }
  };
  expect_kind("[]", PodErrorKind::corrupt_table);
  expect_kind("{not json", PodErrorKind::corrupt_table);
  expect_kind(R"({"language":"en","granularity":"universal","triples":[]})",
              PodErrorKind::corrupt_table);
  expect_kind(R"({"format_version":2,"language":"en","granularity":"universal","triples":[]})",
              PodErrorKind::version_mismatch);
  expect_kind(R"({"format_version":1,"language":"en","granularity":"weird","triples":[]})",
              PodErrorKind::corrupt_table);
  expect_kind(R"({"format_version":1,"language":"en","granularity":"universal",
                  "triples":[{"parent":"root","first":"a","second":"b","count":0}]})",
              PodErrorKind::corrupt_table);
  expect_kind(R"({"format_version":1,"language":"en","granularity":"universal",
                  "triples":[{"parent":"root","first":"a","count":3}]})",
              PodErrorKind::corrupt_table);
}

TEST_CASE("bundled vso table has the expected probabilities") {
  auto table = load_pods(testutil::data_file("irish_root_pods.json"));
  CHECK(table.language() == "ga");
  CHECK(table.granularity() == Granularity::universal);
  CHECK(table.provenance().treebank == "Irish-IDT");
  CHECK(table.provenance().sentences == 4005);
  CHECK(table.counts().size() == 62);

  auto prob = [&](const char* i, const char* j) {
    auto p = table.probability("root", i, j);
    REQUIRE(p.has_value());
    return *p;
  };
  CHECK_THAT(prob("root", "nsubj"), Catch::Matchers::WithinAbs(2423.0 / 2483.0, 1e-9));
  CHECK_THAT(prob("nsubj", "obj"), Catch::Matchers::WithinAbs(469.0 / 471.0, 1e-9));
  CHECK_THAT(prob("obj", "obl"), Catch::Matchers::WithinAbs(755.0 / 974.0, 1e-9));
  CHECK_THAT(prob("advmod", "obj"), Catch::Matchers::WithinAbs(77.0 / 148.0, 1e-9));
}

TEST_CASE("pod distance") {
  PodTable a("a", Granularity::universal);
  PodTable b("b", Granularity::universal);

  SECTION("no shared pair is undefined") {
    a.add({"root", "nsubj", "root"}, 5);
    b.add({"root", "obj", "obl"}, 5);
    CHECK(pod_distance(a, b) == std::nullopt);
    CHECK(pod_distance(a, PodTable("c", Granularity::universal)) == std::nullopt);
  }

  SECTION("identical tables have distance zero") {
    a.add({"root", "nsubj", "root"}, 5);
    a.add({"root", "root", "obj"}, 3);
    a.add({"root", "obj", "root"}, 2);
    CHECK(pod_distance(a, a) == 0.0);
  }

  SECTION("fully opposed tables have distance one") {
    a.add({"root", "nsubj", "root"}, 5);
    b.add({"root", "root", "nsubj"}, 7);
    std::vector<PairDivergence> pairs;
    auto d = pod_distance_breakdown(a, b, &pairs);
    REQUIRE(d.has_value());
    CHECK(*d == 1.0);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].parent == "root");
    CHECK(pairs[0].first == "nsubj");
    CHECK(pairs[0].second == "root");
    CHECK(pairs[0].weight == 12);
  }

  SECTION("weighted mean over shared pairs") {
    a.add({"root", "nsubj", "root"}, 3);
    a.add({"root", "root", "nsubj"}, 1);
    a.add({"root", "obj", "obl"}, 1);
    b.add({"root", "nsubj", "root"}, 1);
    b.add({"root", "root", "nsubj"}, 1);
    b.add({"root", "obj", "obl"}, 2);
    b.add({"root", "obl", "obj"}, 2);
    // Pair (nsubj, root): p_a = 0.75, p_b = 0.5, weight 4 + 2 = 6.
    // Pair (obj, obl):    p_a = 1.0,  p_b = 0.5, weight 1 + 4 = 5.
    double expect = (6 * 0.25 + 5 * 0.5) / 11.0;
    auto d = pod_distance(a, b);
    REQUIRE(d.has_value());
    CHECK_THAT(*d, Catch::Matchers::WithinAbs(expect, 1e-12));
  }

  SECTION("same-label pairs are excluded") {
    a.add({"root", "conj", "conj"}, 10);
    b.add({"root", "conj", "conj"}, 10);
    CHECK(pod_distance(a, b) == std::nullopt);
  }

  SECTION("granularity mismatch throws") {
    PodTable sub("a", Granularity::subtyped);
    REQUIRE_THROWS_AS(pod_distance(a, sub), PodError);
  }
}
