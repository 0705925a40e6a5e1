#include "qevo/database.hpp"

#include <unordered_set>

#include "qevo/errors.hpp"

namespace qevo {

std::vector<Label> DataSnapshot::label_vector() const {
  std::vector<Label> labels;
  labels.reserve(documents->size());
  for (const auto& d : *documents) labels.push_back(d.label);
  return labels;
}

LocalDatabase::LocalDatabase(std::vector<Document> docs) {
  auto index = std::make_shared<const CorpusIndex>(build_index(docs));
  publish(std::move(index), std::make_shared<const std::vector<Document>>(std::move(docs)), true);
}

LocalDatabase::LocalDatabase(CorpusIndex index, std::vector<Document> docs) {
  if (index.document_count() != docs.size()) {
    throw FormatError("index and documents differ in length");
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (index.vectors()[i].doc_id() != docs[i].id) {
      throw FormatError("index and documents disagree at " + docs[i].id);
    }
  }
  publish(std::make_shared<const CorpusIndex>(std::move(index)),
          std::make_shared<const std::vector<Document>>(std::move(docs)), true);
}

void LocalDatabase::publish(std::shared_ptr<const CorpusIndex> index,
                            std::shared_ptr<const std::vector<Document>> docs,
                            bool rebuild_columns) {
  auto snap = std::make_shared<DataSnapshot>();
  snap->version = current_ ? current_->version + 1 : 1;
  snap->index = std::move(index);
  snap->documents = std::move(docs);
  if (rebuild_columns || !current_) {
    snap->columns = std::make_shared<const PhraseMajorBitmap>(snap->index->vectors(),
                                                              snap->index->vocabulary().size());
  } else {
    snap->columns = current_->columns;
  }
  const auto labels = snap->label_vector();
  snap->labels = std::make_shared<const LabelMasks>(labels);
  std::lock_guard lock(mutex_);
  current_ = std::move(snap);
}

std::shared_ptr<const DataSnapshot> LocalDatabase::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

std::size_t LocalDatabase::append(std::vector<Document> docs) {
  const auto snap = snapshot();
  std::vector<Document> fresh;
  std::unordered_set<std::string> seen;
  for (auto& d : docs) {
    if (snap->index->find_document(d.id) || !seen.insert(d.id).second) continue;
    fresh.push_back(std::move(d));
  }
  if (fresh.empty()) return 0;

  auto index = std::make_shared<const CorpusIndex>(append_documents(*snap->index, fresh));
  auto all = std::make_shared<std::vector<Document>>(*snap->documents);
  const auto added = fresh.size();
  for (auto& d : fresh) all->push_back(std::move(d));
  publish(std::move(index), std::move(all), true);
  return added;
}

bool LocalDatabase::set_label(std::string_view id, Label label) {
  const auto snap = snapshot();
  const auto ordinal = snap->index->find_document(id);
  if (!ordinal) return false;
  auto docs = std::make_shared<std::vector<Document>>(*snap->documents);
  (*docs)[*ordinal].label = label;
  publish(snap->index, std::move(docs), false);
  return true;
}

bool LocalDatabase::contains(std::string_view id) const {
  return snapshot()->index->find_document(id).has_value();
}

Objective make_objective(std::shared_ptr<const DataSnapshot> snapshot, const LossParams& params,
                         double phrase_sample_gamma) {
  Objective obj;
  obj.version = snapshot->version;
  obj.sampler =
      std::make_shared<const PhraseSampler>(snapshot->vocabulary().size(), phrase_sample_gamma);
  obj.evaluate = [snapshot = std::move(snapshot), params](const Genome& genome) {
    const auto query = decode(genome, snapshot->vocabulary().size());
    Fitness f;
    f.counts = evaluate_columns(query, *snapshot->columns, *snapshot->labels);
    f.loss = loss(f.counts, genome.size(), params);
    return f;
  };
  return obj;
}

}  // namespace qevo
