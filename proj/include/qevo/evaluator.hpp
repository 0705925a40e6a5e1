#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qevo/corpus.hpp"
#include "qevo/query.hpp"

namespace qevo {

/// Confusion counts over labeled documents; unlabeled ones are not counted.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t labeled_relevant() const noexcept { return tp + fn; }
  std::uint64_t labeled_irrelevant() const noexcept { return fp + tn; }
  /// FP / labeled irrelevant; NoLabeledData when there are none.
  double false_positive_rate() const;
  /// FN / labeled relevant; NoLabeledData when there are none.
  double false_negative_rate() const;
  double f1() const noexcept;

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct LossParams {
  double eps_fp = 0.01;
  double eps_fn = 0.01;
  double delta_fp = 0.05;
  double delta_fn = 0.05;
  double lambda_len = 0.001;  // multiplicative penalty per genome element
};

/// XNOR clause semantics: every non-empty clause needs one literal whose sign
/// agrees with the phrase's presence. Throws PhraseIdOutOfRange.
bool matches(const ClauseQuery& query, const DocBitVector& doc);

/// Row-wise evaluation; labels[i] belongs to vectors[i]. Documents are split
/// across `threads` workers; the result does not depend on the split.
ConfusionCounts evaluate_corpus(const ClauseQuery& query, std::span<const DocBitVector> vectors,
                                std::span<const Label> labels, unsigned threads = 1);

/// Phrase-major transpose of the document vectors: column p holds one bit per
/// document. Always recomputable from the row form.
class PhraseMajorBitmap {
 public:
  PhraseMajorBitmap() = default;
  PhraseMajorBitmap(std::span<const DocBitVector> vectors, std::size_t vocabulary_size);

  std::size_t phrase_count() const noexcept { return phrase_count_; }
  std::size_t document_count() const noexcept { return document_count_; }
  std::size_t words_per_column() const noexcept { return words_per_column_; }
  std::span<const std::uint64_t> column(std::size_t phrase) const {
    return {bits_.data() + phrase * words_per_column_, words_per_column_};
  }

 private:
  std::size_t phrase_count_ = 0;
  std::size_t document_count_ = 0;
  std::size_t words_per_column_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Document-indexed label bitmaps matching a PhraseMajorBitmap's layout.
struct LabelMasks {
  std::vector<std::uint64_t> relevant;
  std::vector<std::uint64_t> irrelevant;
  std::uint64_t relevant_count = 0;
  std::uint64_t irrelevant_count = 0;

  explicit LabelMasks(std::span<const Label> labels = {});
};

/// Bit d set iff document d matches. Throws PhraseIdOutOfRange.
std::vector<std::uint64_t> match_mask(const ClauseQuery& query, const PhraseMajorBitmap& bitmap);

/// Word-parallel equivalent of evaluate_corpus.
ConfusionCounts evaluate_columns(const ClauseQuery& query, const PhraseMajorBitmap& bitmap,
                                 const LabelMasks& labels);

/// (f_p + eps_fp)(f_n + eps_fn) / ((1 + delta_fp - f_p)(1 + delta_fn - f_n)),
/// scaled by (1 + lambda_len * genome_length). Returns +infinity when a
/// denominator factor is not positive.
double loss_from_rates(double fp_rate, double fn_rate, std::size_t genome_length,
                       const LossParams& params);
/// Throws NoLabeledData when either class has no labeled documents.
double loss(const ConfusionCounts& counts, std::size_t genome_length, const LossParams& params);

}  // namespace qevo
