#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qevo/corpus.hpp"

namespace qevo {

/// One JSON object per line: id, text, optional label/source/fetched_at.
/// Blank lines are skipped. Throws FormatError with the line number.
std::vector<Document> read_jsonl(std::istream& in);
std::vector<Document> read_jsonl(const std::filesystem::path& path);
void write_jsonl(std::ostream& out, std::span<const Document> docs);
void write_jsonl(const std::filesystem::path& path, std::span<const Document> docs);

Document document_from_json_line(std::string_view line);
std::string document_to_json_line(const Document& doc);

/// Separate label file: JSON lines of {"id": ..., "label": ...}.
std::map<std::string, Label> read_labels(const std::filesystem::path& path);
/// Overrides document labels with the given map; ids not in the corpus are ignored.
void apply_labels(std::vector<Document>& docs, const std::map<std::string, Label>& labels);

// Binary index container, all integers little-endian:
//
//   magic    "QEVI"
//   u16      format version (kIndexFormatVersion)
//   u32      vocabulary count, then per phrase:
//              u32 byte length, UTF-8 bytes (tokens joined by ' '), u32 frequency
//   u32      vector count, then per document:
//              u32 id byte length, UTF-8 id, u32 word count, u64 words
//   u32      singleton count, then per n-gram (sorted by bytes):
//              u32 byte length, UTF-8 bytes, u32 document ordinal
//
// The singleton section lets a loaded index accept further appends.
inline constexpr std::uint16_t kIndexFormatVersion = 1;

void write_index(std::ostream& out, const CorpusIndex& index);
void write_index(const std::filesystem::path& path, const CorpusIndex& index);
CorpusIndex read_index(std::istream& in);
CorpusIndex read_index(const std::filesystem::path& path);

}  // namespace qevo
