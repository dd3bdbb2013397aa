#include <gtest/gtest.h>

#include <random>

#include "simpfact/corpus.hpp"
#include "test_util.hpp"

namespace simpfact::corpus {
namespace {

using simpfact::testing::TempDir;

TEST(LoadParallelCorpus, SingleLineRoundTrip) {
  TempDir dir;
  auto c = dir.write("c.txt", "A b c.\n");
  auto s = dir.write("s.txt", "A b.\n");
  const auto pairs = load_parallel_corpus(c, s, {OriginKind::reference, "wikilarge"});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].complex_text, "A b c.");
  EXPECT_EQ(pairs[0].simple_text, "A b.");
  EXPECT_EQ(pairs[0].id, "wikilarge:1");
}

TEST(LoadParallelCorpus, LineCountMismatchNamesBothCounts) {
  TempDir dir;
  auto c = dir.write("c.txt", "a.\nb.\nc.\n");
  auto s = dir.write("s.txt", "a.\nb.\n");
  try {
    load_parallel_corpus(c, s, {OriginKind::reference, "x"});
    FAIL() << "expected AlignmentError";
  } catch (const AlignmentError& e) {
    EXPECT_NE(std::string(e.what()).find("3 vs 2"), std::string::npos);
    EXPECT_EQ(e.complex_lines(), 3u);
    EXPECT_EQ(e.simple_lines(), 2u);
  }
}

TEST(LoadParallelCorpus, FourHundredValidationLines) {
  TempDir dir;
  std::string c, s;
  for (int i = 0; i < 400; ++i) {
    c += "Complex sentence number " + std::to_string(i) + " here.\n";
    s += "Simple sentence " + std::to_string(i) + ".\n";
  }
  const auto pairs = load_parallel_corpus(dir.write("c.txt", c), dir.write("s.txt", s),
                                          {OriginKind::reference, "newsela"}, Split::validation);
  ASSERT_EQ(pairs.size(), 400u);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(pairs[i].split, Split::validation);
    EXPECT_EQ(pairs[i].id, "newsela:" + std::to_string(i + 1));
  }
  EXPECT_EQ(pairs[399].simple_text, "Simple sentence 399.");
}

TEST(LoadParallelCorpus, DecodeErrorCarriesByteOffset) {
  TempDir dir;
  auto c = dir.write("c.txt", "ok line\nbad \xFF here\n");
  auto s = dir.write("s.txt", "ok\nok\n");
  try {
    load_parallel_corpus(c, s, {OriginKind::reference, "x"});
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.byte_offset(), 12u);
  }
}

TEST(LoadParallelCorpus, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_THROW(load_parallel_corpus(dir / "nope", dir / "nope2", {}), IoError);
}

TEST(LoadParallelCorpus, EmptyLineRejected) {
  TempDir dir;
  EXPECT_THROW(load_parallel_corpus(dir.write("c.txt", "a\n  \n"), dir.write("s.txt", "a\nb\n"), {}),
               ValidationError);
}

TEST(Records, PairRoundTripPreservesUnknownFields) {
  TempDir dir;
  const std::string line =
      R"({"complex_text":"A b c.","id":"p1","note":{"k":[1,2]},"origin":{"kind":"system","name":"EditNTS"},"simple_text":"A b.","split":"test"})";
  auto path = dir.write("pairs.jsonl", line + "\n");
  auto pairs = load_pairs(path);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].origin.kind, OriginKind::system);
  EXPECT_EQ(pairs[0].origin.name, "EditNTS");
  EXPECT_EQ(pairs[0].extra["note"]["k"][1], 2);
  save_pairs(dir / "out.jsonl", pairs);
  EXPECT_EQ(io::read_file(dir / "out.jsonl"), line + "\n");
  EXPECT_EQ(load_pairs(dir / "out.jsonl"), pairs);
}

TEST(Records, RandomPairsAndVotesRoundTrip) {
  TempDir dir;
  std::mt19937 rng(5);
  std::vector<SentencePair> pairs;
  std::vector<AnnotationVote> votes;
  std::uniform_int_distribution<int> lab(-1, 2);
  for (int i = 0; i < 50; ++i) {
    SentencePair p;
    p.id = "p" + std::to_string(i);
    p.complex_text = "Complex \"quoted\" caf\xC3\xA9 " + testing::random_word(rng, 6);
    p.simple_text = "Simple\t" + testing::random_word(rng, 6);
    p.origin = {i % 2 ? OriginKind::system : OriginKind::reference, "sys" + std::to_string(i % 3)};
    p.split = static_cast<Split>(i % 4);
    if (i % 5 == 0) p.extra["extra_" + std::to_string(i)] = i;
    pairs.push_back(p);
    for (int a = 0; a < 3; ++a) {
      AnnotationVote v;
      v.pair_id = p.id;
      v.annotator_id = "w" + std::to_string(a);
      for (auto c : kAllCategories) v.labels[c] = static_cast<Severity>(lab(rng));
      v.submitted_at = 1600000000 + i * 10 + a;
      if (a == 1) v.extra["hit"] = "h" + std::to_string(i);
      votes.push_back(v);
    }
  }
  save_pairs(dir / "p.jsonl", pairs);
  save_votes(dir / "v.jsonl", votes);
  const auto p2 = load_pairs(dir / "p.jsonl");
  const auto v2 = load_votes(dir / "v.jsonl");
  EXPECT_EQ(p2, pairs);
  EXPECT_EQ(v2, votes);
  save_pairs(dir / "p2.jsonl", p2);
  EXPECT_EQ(io::read_file(dir / "p.jsonl"), io::read_file(dir / "p2.jsonl"));
}

TEST(Records, MalformedLineNamesFileAndLine) {
  TempDir dir;
  auto path = dir.write("v.jsonl",
                        R"({"pair_id":"a","annotator_id":"w","insertion":0,"deletion":0,"substitution":0})"
                        "\n"
                        R"({"pair_id":"a","annotator_id":"x","insertion":3,"deletion":0,"substitution":0})"
                        "\n");
  try {
    load_votes(path);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("v.jsonl:2"), std::string::npos) << e.what();
  }
}

TEST(Records, DuplicateVoteRejected) {
  TempDir dir;
  const std::string v = R"({"pair_id":"a","annotator_id":"w","insertion":0,"deletion":0,"substitution":0})";
  EXPECT_THROW(load_votes(dir.write("v.jsonl", v + "\n" + v + "\n")), ValidationError);
}

TEST(Records, DuplicatePairIdRejected) {
  TempDir dir;
  const std::string p = R"({"id":"a","complex_text":"x","simple_text":"y"})";
  EXPECT_THROW(load_pairs(dir.write("p.jsonl", p + "\n" + p + "\n")), ValidationError);
}

TEST(SentenceCount, TerminalRuns) {
  EXPECT_EQ(count_sentences("One sentence."), 1u);
  EXPECT_EQ(count_sentences("No terminal punctuation"), 1u);
  EXPECT_EQ(count_sentences("First. Second!"), 2u);
  EXPECT_EQ(count_sentences("Wait... what?!"), 2u);
  EXPECT_EQ(count_sentences("He said \"go.\" Then left."), 2u);
  EXPECT_EQ(count_sentences("A U.S.-based firm grew 3.5 percent."), 1u);
}

SentencePair make_pair(std::string c, std::string s) {
  SentencePair p;
  p.id = "x";
  p.complex_text = std::move(c);
  p.simple_text = std::move(s);
  return p;
}

TEST(NoiseFilter, IdenticalKeptDisjointDropped) {
  EXPECT_TRUE(passes_noise_filter(make_pair("The cat sat.", "The cat sat.")));
  EXPECT_FALSE(passes_noise_filter(make_pair("alpha beta", "gamma delta")));
}

TEST(NoiseFilter, ThresholdDependsOnSentenceCount) {
  // {a b c} vs {a d e f g h i}... built so that Jaccard = 3/10 = 0.3
  const std::string complex = "a b c d e f g";
  const std::string one = "a b c x y z";
  ASSERT_DOUBLE_EQ(token_set_jaccard(complex, one), 0.3);
  EXPECT_FALSE(passes_noise_filter(make_pair(complex, one)));
  const std::string two = "a b c x. y z.";
  ASSERT_DOUBLE_EQ(token_set_jaccard(complex, two), 3.0 / 11.0);
  EXPECT_TRUE(passes_noise_filter(make_pair(complex, two)));
}

TEST(NoiseFilter, LowercaseFlag) {
  auto p = make_pair("The Cat", "the cat");
  EXPECT_TRUE(passes_noise_filter(p));
  NoiseFilterOptions opts;
  opts.lowercase = false;
  EXPECT_FALSE(passes_noise_filter(p, opts));
}

TEST(NoiseFilter, SubsequenceAndIdempotent) {
  std::mt19937 rng(3);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", ".", "f"};
  std::vector<SentencePair> pairs;
  for (int i = 0; i < 300; ++i) {
    auto p = make_pair("w " + testing::join(testing::random_tokens(rng, 8, vocab)),
                       "w " + testing::join(testing::random_tokens(rng, 8, vocab)));
    p.id = "p" + std::to_string(i);
    pairs.push_back(p);
  }
  const auto once = noise_filter(pairs);
  const auto twice = noise_filter(once);
  EXPECT_EQ(once, twice);
  std::size_t j = 0;
  for (const auto& p : pairs) {
    if (j < once.size() && once[j] == p) ++j;
  }
  EXPECT_EQ(j, once.size());
  EXPECT_LT(once.size(), pairs.size());
  EXPECT_GT(once.size(), 0u);
}

}  // namespace
}  // namespace simpfact::corpus
