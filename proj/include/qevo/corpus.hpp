#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qevo/text.hpp"

namespace qevo {

enum class Label { unlabeled, relevant, irrelevant };
enum class Source { seed_corpus, provider_fetch };

std::string_view to_string(Label label);
std::string_view to_string(Source source);
std::optional<Label> parse_label(std::string_view text);
std::optional<Source> parse_source(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  Label label = Label::unlabeled;
  Source source = Source::seed_corpus;
  std::optional<std::int64_t> fetched_at;  // UTC seconds
};

struct VocabularyEntry {
  Phrase phrase;
  std::uint32_t frequency = 0;  // number of documents containing the phrase
};

/// Phrase <-> id mapping. Ids assigned at build time are ordered by
/// descending document frequency (ties lexicographic); later appends take the
/// next free id and never move existing ones.
class VocabularyIndex {
 public:
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Phrase& phrase(std::size_t id) const { return entries_.at(id).phrase; }
  std::uint32_t frequency(std::size_t id) const { return entries_.at(id).frequency; }
  const std::vector<VocabularyEntry>& entries() const noexcept { return entries_; }

  std::optional<std::size_t> find(std::string_view key) const;
  std::optional<std::size_t> find(const Phrase& phrase) const { return find(phrase.key()); }

  /// Appends a phrase with the next free id and returns that id.
  std::size_t push_back(Phrase phrase, std::uint32_t frequency);
  void increment(std::size_t id) { ++entries_.at(id).frequency; }

 private:
  std::vector<VocabularyEntry> entries_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Presence bitmap of one document over the vocabulary, 64 bits per word.
/// Bits at positions >= bit_length() are always zero.
class DocBitVector {
 public:
  DocBitVector() = default;
  DocBitVector(std::string doc_id, std::size_t bit_length);
  DocBitVector(std::string doc_id, std::size_t bit_length, std::vector<std::uint64_t> words);

  const std::string& doc_id() const noexcept { return doc_id_; }
  std::size_t bit_length() const noexcept { return bit_length_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  bool test(std::size_t bit) const noexcept {
    return (words_[bit >> 6] >> (bit & 63)) & 1U;
  }
  void set(std::size_t bit) noexcept { words_[bit >> 6] |= std::uint64_t{1} << (bit & 63); }
  /// Grows (zero-filled) or shrinks, clearing bits beyond the new length.
  void resize(std::size_t bit_length);
  std::size_t popcount() const noexcept;

  friend bool operator==(const DocBitVector&, const DocBitVector&) = default;

 private:
  std::string doc_id_;
  std::size_t bit_length_ = 0;
  std::vector<std::uint64_t> words_;
};

constexpr std::size_t words_for_bits(std::size_t bits) { return (bits + 63) / 64; }

/// Vocabulary plus one DocBitVector per document. Also remembers n-grams seen
/// in exactly one document so that appends can promote them once a second
/// document contains them. Treat instances as immutable snapshots;
/// append_documents returns a new value.
class CorpusIndex {
 public:
  const VocabularyIndex& vocabulary() const noexcept { return vocabulary_; }
  const std::vector<DocBitVector>& vectors() const noexcept { return vectors_; }
  std::size_t document_count() const noexcept { return vectors_.size(); }
  std::optional<std::size_t> find_document(std::string_view id) const;
  /// n-grams occurring in exactly one document, keyed to that document's ordinal.
  const std::map<std::string, std::uint32_t>& singletons() const noexcept { return singletons_; }

  friend CorpusIndex build_index(std::span<const Document> corpus);
  friend CorpusIndex append_documents(const CorpusIndex& index, std::span<const Document> docs);
  friend CorpusIndex assemble_index(VocabularyIndex vocabulary, std::vector<DocBitVector> vectors,
                                    std::map<std::string, std::uint32_t> singletons);

 private:
  VocabularyIndex vocabulary_;
  std::vector<DocBitVector> vectors_;
  std::unordered_map<std::string, std::uint32_t> doc_ordinals_;
  std::map<std::string, std::uint32_t> singletons_;
};

/// Builds the vocabulary (n-grams with document frequency >= 2) and bit vectors.
/// Throws EmptyCorpus or DuplicateDocumentId.
CorpusIndex build_index(std::span<const Document> corpus);

/// Adds documents without renumbering existing phrases. Throws DuplicateDocumentId.
CorpusIndex append_documents(const CorpusIndex& index, std::span<const Document> docs);

/// Reassembles an index from persisted parts; validates shapes (FormatError).
CorpusIndex assemble_index(VocabularyIndex vocabulary, std::vector<DocBitVector> vectors,
                           std::map<std::string, std::uint32_t> singletons);

}  // namespace qevo
