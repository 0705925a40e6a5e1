#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "qevo/corpus.hpp"
#include "qevo/engine.hpp"
#include "qevo/evaluator.hpp"

namespace qevo {

/// Immutable view of the local database at one version.
struct DataSnapshot {
  std::uint64_t version = 0;
  std::shared_ptr<const CorpusIndex> index;
  std::shared_ptr<const std::vector<Document>> documents;  // same order as index vectors
  std::shared_ptr<const PhraseMajorBitmap> columns;
  std::shared_ptr<const LabelMasks> labels;

  const VocabularyIndex& vocabulary() const { return index->vocabulary(); }
  std::size_t document_count() const { return documents->size(); }
  std::vector<Label> label_vector() const;
};

/// Local document store. Readers take snapshots; the single writer publishes a
/// new snapshot per change, so readers never see a partial update.
class LocalDatabase {
 public:
  explicit LocalDatabase(std::vector<Document> docs);
  LocalDatabase(CorpusIndex index, std::vector<Document> docs);

  std::shared_ptr<const DataSnapshot> snapshot() const;

  /// Appends documents whose ids are new; returns how many were added.
  std::size_t append(std::vector<Document> docs);
  /// Returns false for unknown ids.
  bool set_label(std::string_view id, Label label);
  bool contains(std::string_view id) const;

 private:
  void publish(std::shared_ptr<const CorpusIndex> index,
               std::shared_ptr<const std::vector<Document>> docs, bool rebuild_columns);

  mutable std::mutex mutex_;
  std::shared_ptr<const DataSnapshot> current_;
};

/// Fitness over one snapshot: column-wise confusion counts and loss with the
/// genome length penalty. The sampler covers the snapshot's vocabulary.
Objective make_objective(std::shared_ptr<const DataSnapshot> snapshot, const LossParams& params,
                         double phrase_sample_gamma);

}  // namespace qevo
