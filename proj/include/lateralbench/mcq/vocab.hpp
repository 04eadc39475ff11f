#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lateralbench/error.hpp"

namespace lateral::mcq {

// Reserved token ids. Stable across save/load.
inline constexpr int kClsId = 0;
inline constexpr int kSepId = 1;
inline constexpr int kPadId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kNumSpecialTokens = 4;

// Deterministic word-level tokenizer: lowercases ASCII, keeps runs of
// alphanumeric bytes, treats whitespace and punctuation as separators.
std::vector<std::string> tokenize(const std::string& text);

class Vocabulary {
 public:
  Vocabulary();

  // Grows the vocabulary with `token` if absent; returns its id.
  int add_token(const std::string& token);

  int id_of(const std::string& token) const;  // kUnkId when unknown
  const std::string& token_of(int id) const;
  int size() const { return static_cast<int>(id_to_token_.size()); }

  std::vector<int> encode(const std::string& text) const;

  // Regular tokens in id order (ids kNumSpecialTokens..size-1).
  std::vector<std::string> regular_tokens() const;

  bool operator==(const Vocabulary& other) const {
    return id_to_token_ == other.id_to_token_;
  }

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Builds a vocabulary over the tokenized corpus. Tokens with frequency >=
// min_freq are kept, assigned ids in (frequency desc, token asc) order for
// determinism; everything else maps to UNK. Throws empty_corpus.
Vocabulary build_vocab(const std::vector<std::string>& corpus, int min_freq = 1);

// The encoded question-choice pair: [CLS] Q [SEP] C [SEP] padded to max_len.
// mask is 1 on real tokens, 0 on the PAD suffix.
struct PairSequence {
  std::vector<int> token_ids;
  std::vector<uint8_t> attention_mask;

  int length() const { return static_cast<int>(token_ids.size()); }
  int valid_length() const;
};

// Encodes one question-choice pair. When the pair exceeds max_len the longer
// segment is trimmed token-by-token first (ties trim the question), never
// trimming the choice to zero. Throws empty_segment when either side
// tokenizes to nothing, choice_truncated_away when max_len cannot fit a
// single choice token.
PairSequence encode_pair(const std::string& question, const std::string& choice,
                         const Vocabulary& vocab, int max_len);

}  // namespace lateral::mcq
