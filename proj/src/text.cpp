#include "qevo/text.hpp"

#include <stdexcept>

namespace qevo {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// ASCII letters/digits and any non-ASCII byte (UTF-8 sequences pass through).
bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

unsigned char lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? c + ('a' - 'A') : c; }

std::string clean_chunk(std::string_view chunk) {
  std::string out;
  bool has_word = false;
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    const auto c = static_cast<unsigned char>(chunk[i]);
    if (is_word_byte(c)) {
      out.push_back(static_cast<char>(lower(c)));
      has_word = true;
    } else if ((c == '#' || c == '@') && out.empty()) {
      out.push_back(static_cast<char>(c));
    } else if (c == '-' && has_word && is_word_byte(static_cast<unsigned char>(out.back())) &&
               i + 1 < chunk.size() && is_word_byte(static_cast<unsigned char>(chunk[i + 1]))) {
      out.push_back('-');
    }
  }
  if (!has_word) out.clear();
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      std::string token = clean_chunk(text.substr(start, i - start));
      if (!token.empty()) tokens.push_back(std::move(token));
    }
  }
  return tokens;
}

Phrase::Phrase(std::span<const std::string> tokens) {
  if (tokens.empty() || tokens.size() > kMaxTokens) {
    throw std::invalid_argument("phrase needs 1 to 3 tokens");
  }
  for (const auto& t : tokens) {
    if (t.empty()) throw std::invalid_argument("empty token in phrase");
    for (char c : t) {
      if (is_space(static_cast<unsigned char>(c))) {
        throw std::invalid_argument("token contains whitespace: " + t);
      }
    }
    if (!key_.empty()) key_.push_back(' ');
    key_ += t;
  }
}

Phrase Phrase::from_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto end = key.find(' ', start);
    const auto stop = end == std::string_view::npos ? key.size() : end;
    parts.emplace_back(key.substr(start, stop - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return Phrase(parts);
}

std::vector<std::string> Phrase::tokens() const {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = key_.find(' ', start);
    out.push_back(key_.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::size_t Phrase::token_count() const noexcept {
  if (key_.empty()) return 0;
  std::size_t n = 1;
  for (char c : key_) n += c == ' ';
  return n;
}

std::set<std::string> extract_ngram_keys(std::span<const std::string> tokens) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string key = tokens[i];
    out.insert(key);
    for (std::size_t len = 2; len <= Phrase::kMaxTokens && i + len <= tokens.size(); ++len) {
      key.push_back(' ');
      key += tokens[i + len - 1];
      out.insert(key);
    }
  }
  return out;
}

std::set<Phrase> extract_ngrams(std::span<const std::string> tokens) {
  std::set<Phrase> out;
  for (const auto& key : extract_ngram_keys(tokens)) out.insert(Phrase::from_key(key));
  return out;
}

std::set<std::string> document_ngram_keys(std::string_view text) {
  const auto tokens = tokenize(text);
  return extract_ngram_keys(tokens);
}

}  // namespace qevo
