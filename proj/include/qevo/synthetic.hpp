#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qevo/corpus.hpp"

namespace qevo {

/// Planted-query benchmark corpora. Each document holds a random subset of
/// `vocabulary` words (word r present with probability
/// min(max_presence, scale * (r+1)^-exponent)) interleaved with filler tokens
/// unique to that document, so the only n-grams shared between documents are
/// the single words. Labels come from the planted target query.
struct SyntheticSpec {
  std::size_t documents = 5000;
  std::size_t vocabulary = 500;
  double scale = 0.5;
  double exponent = 0.7;
  double max_presence = 0.5;
  std::uint64_t seed = 1;
  std::string id_prefix = "d";
  std::int64_t first_timestamp = 1584662400;  // 2020-03-20T00:00:00Z
  /// Empty: draw a 2-clause, 4-literal target "(A OR B) AND (C OR NOT D)".
  std::string target_query;
};

struct SyntheticCorpus {
  std::vector<Document> documents;
  std::string target_query;
};

std::string synthetic_word(std::size_t rank);

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace qevo
