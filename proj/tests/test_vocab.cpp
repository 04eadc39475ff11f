#include <doctest.h>

#include "lateralbench/mcq/vocab.hpp"

using namespace lateral;
using namespace lateral::mcq;

TEST_CASE("tokenizer lowercases and splits on whitespace and punctuation") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("a  b\tc\nd") == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(tokenize("it's 42%") == std::vector<std::string>{"it", "s", "42"});
  CHECK(tokenize("...") == std::vector<std::string>{});
  CHECK(tokenize("") == std::vector<std::string>{});
}

TEST_CASE("build_vocab orders by frequency then token") {
  SUBCASE("min_freq 1 keeps both tokens, frequent first") {
    const auto vocab = build_vocab({"a a b"}, 1);
    CHECK(vocab.size() == kNumSpecialTokens + 2);
    CHECK(vocab.id_of("a") == kNumSpecialTokens);
    CHECK(vocab.id_of("b") == kNumSpecialTokens + 1);
  }

  SUBCASE("min_freq 2 drops rare tokens; encoding them yields UNK") {
    const auto vocab = build_vocab({"a a b"}, 2);
    CHECK(vocab.id_of("a") == kNumSpecialTokens);
    CHECK(vocab.id_of("b") == kUnkId);
    CHECK(vocab.encode("b a b") ==
          std::vector<int>{kUnkId, kNumSpecialTokens, kUnkId});
  }

  SUBCASE("ties resolve token-ascending") {
    const auto vocab = build_vocab({"beta alpha"}, 1);
    CHECK(vocab.id_of("alpha") == kNumSpecialTokens);
    CHECK(vocab.id_of("beta") == kNumSpecialTokens + 1);
  }

  SUBCASE("identical corpus gives identical vocab") {
    const std::vector<std::string> corpus = {"x y z", "z z q"};
    CHECK(build_vocab(corpus, 1) == build_vocab(corpus, 1));
  }

  SUBCASE("empty corpus is an error") {
    try {
      build_vocab({}, 1);
      FAIL("expected EmptyCorpus");
    } catch (const Error& e) {
      CHECK(e.code() == errc::empty_corpus);
    }
  }
}

TEST_CASE("special token ids are reserved and stable") {
  const Vocabulary vocab;
  CHECK(vocab.id_of("[CLS]") == kClsId);
  CHECK(vocab.id_of("[SEP]") == kSepId);
  CHECK(vocab.id_of("[PAD]") == kPadId);
  CHECK(vocab.id_of("[UNK]") == kUnkId);
  CHECK(vocab.size() == kNumSpecialTokens);
}

TEST_CASE("encode_pair lays out CLS Q SEP C SEP with a PAD suffix") {
  const auto vocab = build_vocab({"a b c"}, 1);
  const int a = vocab.id_of("a"), b = vocab.id_of("b"), c = vocab.id_of("c");

  SUBCASE("ample max_len") {
    const auto pair = encode_pair("a b", "c", vocab, 10);
    CHECK(pair.token_ids ==
          std::vector<int>{kClsId, a, b, kSepId, c, kSepId, kPadId, kPadId,
                           kPadId, kPadId});
    CHECK(pair.attention_mask ==
          std::vector<uint8_t>{1, 1, 1, 1, 1, 1, 0, 0, 0, 0});
    CHECK(pair.valid_length() == 6);
  }

  SUBCASE("empty choice is an error") {
    try {
      encode_pair("a b", "", vocab, 10);
      FAIL("expected EmptySegment");
    } catch (const Error& e) {
      CHECK(e.code() == errc::empty_segment);
    }
  }

  SUBCASE("empty question is an error") {
    CHECK_THROWS_AS(encode_pair("?!", "c", vocab, 10), Error);
  }

  SUBCASE("longest-first truncation trims the question, keeps the choice") {
    // Q of 10 tokens, C of 2, max_len 8 -> Q truncated to 3.
    const auto longer = build_vocab({"q1 q2 q3 q4 q5 q6 q7 q8 q9 q10 c1 c2"}, 1);
    const auto pair = encode_pair("q1 q2 q3 q4 q5 q6 q7 q8 q9 q10", "c1 c2",
                                  longer, 8);
    REQUIRE(pair.token_ids.size() == 8);
    CHECK(pair.token_ids[0] == kClsId);
    CHECK(pair.token_ids[1] == longer.id_of("q1"));
    CHECK(pair.token_ids[2] == longer.id_of("q2"));
    CHECK(pair.token_ids[3] == longer.id_of("q3"));
    CHECK(pair.token_ids[4] == kSepId);
    CHECK(pair.token_ids[5] == longer.id_of("c1"));
    CHECK(pair.token_ids[6] == longer.id_of("c2"));
    CHECK(pair.token_ids[7] == kSepId);
    CHECK(pair.valid_length() == 8);
  }

  SUBCASE("a long choice is trimmed down but never to zero") {
    const auto longer = build_vocab({"q c1 c2 c3 c4 c5 c6 c7 c8"}, 1);
    const auto pair = encode_pair("q", "c1 c2 c3 c4 c5 c6 c7 c8", longer, 6);
    REQUIRE(pair.token_ids.size() == 6);
    // budget 3: choice trimmed toward the question's length, then the tie
    // trims the question.
    CHECK(pair.token_ids[0] == kClsId);
    CHECK(pair.valid_length() == 6);
    int seps = 0;
    for (int id : pair.token_ids) seps += id == kSepId ? 1 : 0;
    CHECK(seps == 2);
  }

  SUBCASE("max_len too small for any choice token") {
    try {
      encode_pair("a", "c", vocab, 3);
      FAIL("expected ChoiceTruncatedAway");
    } catch (const Error& e) {
      CHECK(e.code() == errc::choice_truncated_away);
    }
  }

  SUBCASE("untruncated pairs carry exactly two SEPs") {
    const auto pair = encode_pair("a b c", "b a", vocab, 16);
    int seps = 0;
    for (int id : pair.token_ids) seps += id == kSepId ? 1 : 0;
    CHECK(seps == 2);
    // PAD strictly as suffix
    bool in_pad = false;
    for (size_t i = 0; i < pair.token_ids.size(); ++i) {
      if (pair.token_ids[i] == kPadId) in_pad = true;
      if (in_pad) {
        CHECK(pair.token_ids[i] == kPadId);
        CHECK(pair.attention_mask[i] == 0);
      } else {
        CHECK(pair.attention_mask[i] == 1);
      }
    }
  }
}
