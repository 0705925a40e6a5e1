#include "qevo/corpus.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

#include "qevo/errors.hpp"

namespace qevo {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::relevant:
      return "relevant";
    case Label::irrelevant:
      return "irrelevant";
    case Label::unlabeled:
      break;
  }
  return "unlabeled";
}

std::string_view to_string(Source source) {
  return source == Source::provider_fetch ? "provider-fetch" : "seed-corpus";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "relevant") return Label::relevant;
  if (text == "irrelevant") return Label::irrelevant;
  if (text == "unlabeled") return Label::unlabeled;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view text) {
  if (text == "seed-corpus") return Source::seed_corpus;
  if (text == "provider-fetch") return Source::provider_fetch;
  return std::nullopt;
}

std::optional<std::size_t> VocabularyIndex::find(std::string_view key) const {
  const auto it = ids_.find(std::string(key));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t VocabularyIndex::push_back(Phrase phrase, std::uint32_t frequency) {
  const auto id = static_cast<std::uint32_t>(entries_.size());
  const auto [it, inserted] = ids_.emplace(phrase.key(), id);
  if (!inserted) throw FormatError("phrase listed twice in vocabulary: " + phrase.key());
  entries_.push_back({std::move(phrase), frequency});
  return id;
}

DocBitVector::DocBitVector(std::string doc_id, std::size_t bit_length)
    : doc_id_(std::move(doc_id)), bit_length_(bit_length), words_(words_for_bits(bit_length), 0) {}

DocBitVector::DocBitVector(std::string doc_id, std::size_t bit_length,
                           std::vector<std::uint64_t> words)
    : doc_id_(std::move(doc_id)), bit_length_(bit_length), words_(std::move(words)) {
  if (words_.size() != words_for_bits(bit_length_)) {
    throw FormatError("document " + doc_id_ + ": word count does not match bit length");
  }
  if (bit_length_ % 64 != 0 && !words_.empty() &&
      (words_.back() >> (bit_length_ % 64)) != 0) {
    throw FormatError("document " + doc_id_ + ": bits set beyond bit length");
  }
}

void DocBitVector::resize(std::size_t bit_length) {
  words_.resize(words_for_bits(bit_length), 0);
  bit_length_ = bit_length;
  if (bit_length_ % 64 != 0) {
    words_.back() &= (std::uint64_t{1} << (bit_length_ % 64)) - 1;
  }
}

std::size_t DocBitVector::popcount() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::optional<std::size_t> CorpusIndex::find_document(std::string_view id) const {
  const auto it = doc_ordinals_.find(std::string(id));
  if (it == doc_ordinals_.end()) return std::nullopt;
  return it->second;
}

CorpusIndex build_index(std::span<const Document> corpus) {
  if (corpus.empty()) throw EmptyCorpus();

  CorpusIndex index;
  std::vector<std::set<std::string>> doc_keys;
  doc_keys.reserve(corpus.size());
  std::unordered_map<std::string, std::uint32_t> df;
  std::unordered_map<std::string, std::uint32_t> first_doc;

  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (!index.doc_ordinals_.emplace(corpus[d].id, static_cast<std::uint32_t>(d)).second) {
      throw DuplicateDocumentId(corpus[d].id);
    }
    doc_keys.push_back(document_ngram_keys(corpus[d].text));
    for (const auto& key : doc_keys.back()) {
      if (++df[key] == 1) first_doc.emplace(key, static_cast<std::uint32_t>(d));
    }
  }

  std::vector<std::pair<std::string, std::uint32_t>> frequent;
  for (auto& [key, count] : df) {
    if (count >= 2) {
      frequent.emplace_back(key, count);
    } else {
      index.singletons_.emplace(key, first_doc.at(key));
    }
  }
  std::sort(frequent.begin(), frequent.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (auto& [key, count] : frequent) index.vocabulary_.push_back(Phrase::from_key(key), count);

  const std::size_t n = index.vocabulary_.size();
  index.vectors_.reserve(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    DocBitVector vec(corpus[d].id, n);
    for (const auto& key : doc_keys[d]) {
      if (auto id = index.vocabulary_.find(key)) vec.set(*id);
    }
    index.vectors_.push_back(std::move(vec));
  }
  return index;
}

CorpusIndex append_documents(const CorpusIndex& index, std::span<const Document> docs) {
  CorpusIndex out = index;
  const std::size_t old_count = out.vectors_.size();

  std::vector<std::set<std::string>> new_keys;
  new_keys.reserve(docs.size());
  // (document ordinal, phrase id) for older documents that gain a bit.
  std::vector<std::pair<std::uint32_t, std::size_t>> promoted;

  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto ordinal = static_cast<std::uint32_t>(old_count + i);
    if (!out.doc_ordinals_.emplace(docs[i].id, ordinal).second) {
      throw DuplicateDocumentId(docs[i].id);
    }
    new_keys.push_back(document_ngram_keys(docs[i].text));
    for (const auto& key : new_keys.back()) {
      if (auto id = out.vocabulary_.find(key)) {
        out.vocabulary_.increment(*id);
      } else if (auto it = out.singletons_.find(key); it != out.singletons_.end()) {
        const auto id_new = out.vocabulary_.push_back(Phrase::from_key(key), 2);
        promoted.emplace_back(it->second, id_new);
        out.singletons_.erase(it);
      } else {
        out.singletons_.emplace(key, ordinal);
      }
    }
  }

  const std::size_t n = out.vocabulary_.size();
  for (auto& vec : out.vectors_) vec.resize(n);
  for (auto [ordinal, id] : promoted) {
    if (ordinal < old_count) out.vectors_[ordinal].set(id);
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    DocBitVector vec(docs[i].id, n);
    for (const auto& key : new_keys[i]) {
      if (auto id = out.vocabulary_.find(key)) vec.set(*id);
    }
    out.vectors_.push_back(std::move(vec));
  }
  return out;
}

CorpusIndex assemble_index(VocabularyIndex vocabulary, std::vector<DocBitVector> vectors,
                           std::map<std::string, std::uint32_t> singletons) {
  CorpusIndex index;
  const std::size_t n = vocabulary.size();
  for (std::size_t d = 0; d < vectors.size(); ++d) {
    if (vectors[d].bit_length() != n) {
      throw FormatError("vector " + vectors[d].doc_id() + " has wrong bit length");
    }
    if (!index.doc_ordinals_.emplace(vectors[d].doc_id(), static_cast<std::uint32_t>(d)).second) {
      throw DuplicateDocumentId(vectors[d].doc_id());
    }
  }
  for (const auto& [key, ordinal] : singletons) {
    if (ordinal >= vectors.size()) throw FormatError("singleton refers to unknown document");
    if (vocabulary.find(key)) throw FormatError("singleton also in vocabulary: " + key);
  }
  index.vocabulary_ = std::move(vocabulary);
  index.vectors_ = std::move(vectors);
  index.singletons_ = std::move(singletons);
  return index;
}

}  // namespace qevo
