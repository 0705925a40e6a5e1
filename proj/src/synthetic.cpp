#include "qevo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qevo/provider.hpp"
#include "qevo/rng.hpp"

namespace qevo {

std::string synthetic_word(std::size_t rank) { return "w" + std::to_string(rank); }

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  std::vector<double> presence(spec.vocabulary);
  for (std::size_t r = 0; r < spec.vocabulary; ++r) {
    presence[r] = std::min(spec.max_presence,
                           spec.scale * std::pow(static_cast<double>(r + 1), -spec.exponent));
  }

  SyntheticCorpus out;
  std::vector<std::set<std::string>> doc_words(spec.documents);
  out.documents.reserve(spec.documents);
  for (std::size_t i = 0; i < spec.documents; ++i) {
    std::vector<std::size_t> words;
    for (std::size_t r = 0; r < spec.vocabulary; ++r) {
      if (bernoulli(rng, presence[r])) words.push_back(r);
    }
    // Fisher-Yates on the word order.
    for (std::size_t k = words.size(); k > 1; --k) {
      std::swap(words[k - 1], words[uniform_below(rng, k)]);
    }
    // Fillers unique to this document separate the words, so no word pair
    // forms a shared bigram.
    const std::string filler = "z" + spec.id_prefix + std::to_string(i) + "n";
    std::string text = filler + "0";
    for (std::size_t k = 0; k < words.size(); ++k) {
      text += ' ' + synthetic_word(words[k]) + ' ' + filler + std::to_string(k + 1);
      doc_words[i].insert(synthetic_word(words[k]));
    }
    Document doc;
    doc.id = spec.id_prefix + std::to_string(i);
    doc.text = std::move(text);
    doc.fetched_at = spec.first_timestamp + static_cast<std::int64_t>(i) * 60;
    out.documents.push_back(std::move(doc));
  }

  out.target_query = spec.target_query;
  if (out.target_query.empty()) {
    // (A OR B) AND (C OR NOT D) over frequent-but-not-top words, redrawn
    // until the relevant class is neither tiny nor dominant.
    const std::size_t pool = std::min<std::size_t>(40, spec.vocabulary);
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::vector<std::size_t> picks;
      while (picks.size() < 4 && picks.size() < pool) {
        const auto r = static_cast<std::size_t>(uniform_below(rng, pool));
        if (std::find(picks.begin(), picks.end(), r) == picks.end()) picks.push_back(r);
      }
      if (picks.size() < 4) break;
      out.target_query = "(" + synthetic_word(picks[0]) + " OR " + synthetic_word(picks[1]) +
                         ") AND (" + synthetic_word(picks[2]) + " OR NOT " +
                         synthetic_word(picks[3]) + ")";
      const CompiledQuery q(out.target_query);
      std::size_t hits = 0;
      for (const auto& words : doc_words) hits += q.matches(words);
      const double frac = static_cast<double>(hits) / static_cast<double>(spec.documents);
      if (frac >= 0.1 && frac <= 0.6) break;
    }
  }

  const CompiledQuery target(out.target_query);
  for (std::size_t i = 0; i < spec.documents; ++i) {
    out.documents[i].label =
        target.matches_text(out.documents[i].text) ? Label::relevant : Label::irrelevant;
  }
  return out;
}

}  // namespace qevo
