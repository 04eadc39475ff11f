#include "lateralbench/mcq/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace lateral::mcq {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

Vocabulary::Vocabulary() {
  id_to_token_ = {"[CLS]", "[SEP]", "[PAD]", "[UNK]"};
  for (int i = 0; i < kNumSpecialTokens; ++i) {
    token_to_id_.emplace(id_to_token_[i], i);
  }
}

int Vocabulary::add_token(const std::string& token) {
  auto [it, inserted] = token_to_id_.emplace(token, size());
  if (inserted) id_to_token_.push_back(token);
  return it->second;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  return id_to_token_.at(static_cast<size_t>(id));
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& token : tokenize(text)) ids.push_back(id_of(token));
  return ids;
}

std::vector<std::string> Vocabulary::regular_tokens() const {
  return {id_to_token_.begin() + kNumSpecialTokens, id_to_token_.end()};
}

Vocabulary build_vocab(const std::vector<std::string>& corpus, int min_freq) {
  if (corpus.empty()) {
    throw Error(errc::empty_corpus, "cannot build a vocabulary from no text");
  }
  std::map<std::string, long> freq;  // ordered: ties resolve token-ascending
  for (const auto& text : corpus) {
    for (const auto& token : tokenize(text)) ++freq[token];
  }
  std::vector<std::pair<std::string, long>> entries(freq.begin(), freq.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  for (const auto& [token, count] : entries) {
    if (count >= min_freq) vocab.add_token(token);
  }
  return vocab;
}

int PairSequence::valid_length() const {
  int n = 0;
  for (uint8_t m : attention_mask) n += m;
  return n;
}

PairSequence encode_pair(const std::string& question, const std::string& choice,
                         const Vocabulary& vocab, int max_len) {
  std::vector<int> q_ids = vocab.encode(question);
  std::vector<int> c_ids = vocab.encode(choice);
  if (q_ids.empty()) {
    throw Error(errc::empty_segment, "question tokenizes to nothing");
  }
  if (c_ids.empty()) {
    throw Error(errc::empty_segment, "choice tokenizes to nothing");
  }

  // Layout [CLS] Q [SEP] C [SEP] leaves max_len - 3 slots for tokens.
  const int budget = max_len - 3;
  if (budget < 1) {
    throw Error(errc::choice_truncated_away,
                "max_len " + std::to_string(max_len) +
                    " cannot fit a single choice token");
  }
  // Longest-first truncation; ties trim the question. The choice segment is
  // the discriminative one and never reaches zero.
  while (static_cast<int>(q_ids.size() + c_ids.size()) > budget) {
    if (c_ids.size() > q_ids.size() && c_ids.size() > 1) {
      c_ids.pop_back();
    } else if (!q_ids.empty()) {
      q_ids.pop_back();
    } else {
      c_ids.pop_back();  // q already empty; budget >= 1 keeps c non-empty
    }
  }

  PairSequence pair;
  pair.token_ids.reserve(static_cast<size_t>(max_len));
  pair.token_ids.push_back(kClsId);
  pair.token_ids.insert(pair.token_ids.end(), q_ids.begin(), q_ids.end());
  pair.token_ids.push_back(kSepId);
  pair.token_ids.insert(pair.token_ids.end(), c_ids.begin(), c_ids.end());
  pair.token_ids.push_back(kSepId);
  pair.attention_mask.assign(pair.token_ids.size(), 1);
  while (static_cast<int>(pair.token_ids.size()) < max_len) {
    pair.token_ids.push_back(kPadId);
    pair.attention_mask.push_back(0);
  }
  return pair;
}

}  // namespace lateral::mcq
