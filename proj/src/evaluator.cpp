#include "qevo/evaluator.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include "qevo/errors.hpp"

namespace qevo {

double ConfusionCounts::false_positive_rate() const {
  if (labeled_irrelevant() == 0) throw NoLabeledData();
  return static_cast<double>(fp) / static_cast<double>(labeled_irrelevant());
}

double ConfusionCounts::false_negative_rate() const {
  if (labeled_relevant() == 0) throw NoLabeledData();
  return static_cast<double>(fn) / static_cast<double>(labeled_relevant());
}

double ConfusionCounts::f1() const noexcept {
  const auto denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

bool matches(const ClauseQuery& query, const DocBitVector& doc) {
  for (const auto& clause : query.clauses) {
    if (clause.empty()) continue;
    bool satisfied = false;
    for (const auto& lit : clause) {
      if (lit.phrase_id >= doc.bit_length()) {
        throw PhraseIdOutOfRange(lit.phrase_id, doc.bit_length());
      }
      if (doc.test(lit.phrase_id) != lit.negated) {
        satisfied = true;
        break;
      }
    }
    if (!satisfied) return false;
  }
  return true;
}

namespace {

ConfusionCounts count_range(const ClauseQuery& query, std::span<const DocBitVector> vectors,
                            std::span<const Label> labels, std::size_t begin, std::size_t end) {
  ConfusionCounts c;
  for (std::size_t d = begin; d < end; ++d) {
    if (labels[d] == Label::unlabeled) continue;
    const bool hit = matches(query, vectors[d]);
    const bool relevant = labels[d] == Label::relevant;
    if (hit) {
      ++(relevant ? c.tp : c.fp);
    } else {
      ++(relevant ? c.fn : c.tn);
    }
  }
  return c;
}

void check_ids(const ClauseQuery& query, std::size_t limit) {
  for (const auto& clause : query.clauses) {
    for (const auto& lit : clause) {
      if (lit.phrase_id >= limit) throw PhraseIdOutOfRange(lit.phrase_id, limit);
    }
  }
}

}  // namespace

ConfusionCounts evaluate_corpus(const ClauseQuery& query, std::span<const DocBitVector> vectors,
                                std::span<const Label> labels, unsigned threads) {
  if (labels.size() != vectors.size()) {
    throw std::invalid_argument("labels and vectors differ in length");
  }
  const std::size_t n = vectors.size();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) return count_range(query, vectors, labels, 0, n);

  // Validate up front so workers never throw.
  for (const auto& v : vectors) check_ids(query, v.bit_length());

  std::vector<ConfusionCounts> partial(threads);
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(n, t * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      workers.emplace_back([&, t, begin, end] {
        partial[t] = count_range(query, vectors, labels, begin, end);
      });
    }
  }
  ConfusionCounts total;
  for (const auto& p : partial) total += p;
  return total;
}

PhraseMajorBitmap::PhraseMajorBitmap(std::span<const DocBitVector> vectors,
                                     std::size_t vocabulary_size)
    : phrase_count_(vocabulary_size),
      document_count_(vectors.size()),
      words_per_column_(words_for_bits(vectors.size())),
      bits_(vocabulary_size * words_for_bits(vectors.size()), 0) {
  for (std::size_t d = 0; d < vectors.size(); ++d) {
    const auto words = vectors[d].words();
    const std::uint64_t doc_bit = std::uint64_t{1} << (d & 63);
    const std::size_t doc_word = d >> 6;
    for (std::size_t w = 0; w < words.size(); ++w) {
      std::uint64_t word = words[w];
      while (word != 0) {
        const std::size_t p = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
        word &= word - 1;
        if (p < phrase_count_) bits_[p * words_per_column_ + doc_word] |= doc_bit;
      }
    }
  }
}

LabelMasks::LabelMasks(std::span<const Label> labels)
    : relevant(words_for_bits(labels.size()), 0), irrelevant(words_for_bits(labels.size()), 0) {
  for (std::size_t d = 0; d < labels.size(); ++d) {
    const std::uint64_t bit = std::uint64_t{1} << (d & 63);
    if (labels[d] == Label::relevant) {
      relevant[d >> 6] |= bit;
      ++relevant_count;
    } else if (labels[d] == Label::irrelevant) {
      irrelevant[d >> 6] |= bit;
      ++irrelevant_count;
    }
  }
}

std::vector<std::uint64_t> match_mask(const ClauseQuery& query, const PhraseMajorBitmap& bitmap) {
  check_ids(query, bitmap.phrase_count());
  const std::size_t words = bitmap.words_per_column();
  std::vector<std::uint64_t> result(words, ~std::uint64_t{0});
  if (words > 0 && bitmap.document_count() % 64 != 0) {
    result.back() = (std::uint64_t{1} << (bitmap.document_count() % 64)) - 1;
  }
  std::vector<std::uint64_t> clause_bits(words);
  for (const auto& clause : query.clauses) {
    if (clause.empty()) continue;
    std::fill(clause_bits.begin(), clause_bits.end(), 0);
    for (const auto& lit : clause) {
      const auto column = bitmap.column(lit.phrase_id);
      if (lit.negated) {
        for (std::size_t w = 0; w < words; ++w) clause_bits[w] |= ~column[w];
      } else {
        for (std::size_t w = 0; w < words; ++w) clause_bits[w] |= column[w];
      }
    }
    for (std::size_t w = 0; w < words; ++w) result[w] &= clause_bits[w];
  }
  return result;
}

ConfusionCounts evaluate_columns(const ClauseQuery& query, const PhraseMajorBitmap& bitmap,
                                 const LabelMasks& labels) {
  const auto mask = match_mask(query, bitmap);
  ConfusionCounts c;
  for (std::size_t w = 0; w < mask.size(); ++w) {
    c.tp += static_cast<std::uint64_t>(std::popcount(mask[w] & labels.relevant[w]));
    c.fp += static_cast<std::uint64_t>(std::popcount(mask[w] & labels.irrelevant[w]));
  }
  c.fn = labels.relevant_count - c.tp;
  c.tn = labels.irrelevant_count - c.fp;
  return c;
}

double loss_from_rates(double fp_rate, double fn_rate, std::size_t genome_length,
                       const LossParams& params) {
  const double den_fp = 1.0 + params.delta_fp - fp_rate;
  const double den_fn = 1.0 + params.delta_fn - fn_rate;
  if (den_fp <= 0.0 || den_fn <= 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = (fp_rate + params.eps_fp) * (fn_rate + params.eps_fn) / (den_fp * den_fn);
  return ratio * (1.0 + params.lambda_len * static_cast<double>(genome_length));
}

double loss(const ConfusionCounts& counts, std::size_t genome_length, const LossParams& params) {
  return loss_from_rates(counts.false_positive_rate(), counts.false_negative_rate(), genome_length,
                         params);
}

}  // namespace qevo
