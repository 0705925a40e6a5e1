#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "qevo/corpus.hpp"
#include "qevo/query.hpp"
#include "qevo/rng.hpp"
#include "qevo/text.hpp"

namespace qevo::testing {

inline Document doc(std::string id, std::string text, Label label = Label::unlabeled) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.label = label;
  return d;
}

inline DocBitVector bits(std::size_t length, std::initializer_list<std::size_t> set) {
  DocBitVector v("doc", length);
  for (auto b : set) v.set(b);
  return v;
}

/// Reference evaluator: works on raw n-gram sets and a phrase table, with no
/// bitmaps involved.
inline bool naive_matches(const ClauseQuery& q, const std::set<std::string>& ngrams,
                          const VocabularyIndex& vocab) {
  for (const auto& clause : q.clauses) {
    if (clause.empty()) continue;
    bool any = false;
    for (const auto& lit : clause) {
      const bool present = ngrams.count(vocab.phrase(lit.phrase_id).key()) > 0;
      if (present != lit.negated) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

/// Random valid genome over phrases 1..n with roughly `zeros` separators.
inline Genome random_genome(Rng& rng, std::size_t n, std::size_t max_len,
                            double zero_rate = 0.2) {
  Genome g;
  const auto len = uniform_below(rng, max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    if (bernoulli(rng, zero_rate)) {
      g.values.push_back(0);
    } else {
      auto v = static_cast<std::int32_t>(uniform_below(rng, n) + 1);
      g.values.push_back(bernoulli(rng, 0.3) ? -v : v);
    }
  }
  return g;
}

inline bool valid_genome(const Genome& g, std::size_t n) {
  return std::all_of(g.values.begin(), g.values.end(), [n](std::int32_t v) {
    return static_cast<std::size_t>(v < 0 ? -static_cast<std::int64_t>(v) : v) <= n;
  });
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("qevo-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace qevo::testing
