#include "qevo/corpus_io.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "qevo/errors.hpp"

namespace qevo {

using nlohmann::json;

Document document_from_json_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("document must be a JSON object");
  if (!j.contains("id") || !j["id"].is_string()) throw FormatError("document needs string \"id\"");
  if (!j.contains("text") || !j["text"].is_string()) {
    throw FormatError("document needs string \"text\"");
  }
  Document doc;
  doc.id = j["id"].get<std::string>();
  doc.text = j["text"].get<std::string>();
  if (doc.id.empty()) throw FormatError("document id is empty");
  if (doc.text.find_first_not_of(" \t\r\n\f\v") == std::string::npos) {
    throw FormatError("document " + doc.id + " has empty text");
  }
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    auto label = it->is_string() ? parse_label(it->get<std::string>()) : std::nullopt;
    if (!label) throw FormatError("document " + doc.id + ": bad label");
    doc.label = *label;
  }
  if (auto it = j.find("source"); it != j.end() && !it->is_null()) {
    auto source = it->is_string() ? parse_source(it->get<std::string>()) : std::nullopt;
    if (!source) throw FormatError("document " + doc.id + ": bad source");
    doc.source = *source;
  }
  if (auto it = j.find("fetched_at"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw FormatError("document " + doc.id + ": bad fetched_at");
    doc.fetched_at = it->get<std::int64_t>();
  }
  return doc;
}

std::string document_to_json_line(const Document& doc) {
  json j{{"id", doc.id}, {"text", doc.text}};
  if (doc.label != Label::unlabeled) j["label"] = to_string(doc.label);
  j["source"] = to_string(doc.source);
  if (doc.fetched_at) j["fetched_at"] = *doc.fetched_at;
  return j.dump();
}

std::vector<Document> read_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(document_from_json_line(line));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

std::vector<Document> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, std::span<const Document> docs) {
  for (const auto& doc : docs) out << document_to_json_line(doc) << '\n';
}

void write_jsonl(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_jsonl(out, docs);
}

std::map<std::string, Label> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::map<std::string, Label> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      const auto label = parse_label(j.at("label").get<std::string>());
      if (!label) throw FormatError("bad label");
      labels[j.at("id").get<std::string>()] = *label;
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return labels;
}

void apply_labels(std::vector<Document>& docs, const std::map<std::string, Label>& labels) {
  for (auto& doc : docs) {
    if (auto it = labels.find(doc.id); it != labels.end()) doc.label = it->second;
  }
}

namespace {

constexpr std::array<char, 4> kMagic{'Q', 'E', 'V', 'I'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("truncated index file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

void put_string(std::ostream& out, std::string_view s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto len = get_le<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw FormatError("truncated index file");
  return s;
}

}  // namespace

void write_index(std::ostream& out, const CorpusIndex& index) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kIndexFormatVersion);

  const auto& vocab = index.vocabulary();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.size()));
  for (const auto& entry : vocab.entries()) {
    put_string(out, entry.phrase.key());
    put_le<std::uint32_t>(out, entry.frequency);
  }

  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.vectors().size()));
  for (const auto& vec : index.vectors()) {
    put_string(out, vec.doc_id());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vec.words().size()));
    for (auto w : vec.words()) put_le<std::uint64_t>(out, w);
  }

  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.singletons().size()));
  for (const auto& [key, ordinal] : index.singletons()) {
    put_string(out, key);
    put_le<std::uint32_t>(out, ordinal);
  }
}

void write_index(const std::filesystem::path& path, const CorpusIndex& index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_index(out, index);
}

CorpusIndex read_index(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("not a QEVI index file");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kIndexFormatVersion) {
    throw FormatError("unsupported index format version " + std::to_string(version));
  }

  VocabularyIndex vocab;
  const auto phrase_count = get_le<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < phrase_count; ++i) {
    auto key = get_string(in);
    const auto freq = get_le<std::uint32_t>(in);
    try {
      vocab.push_back(Phrase::from_key(key), freq);
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("bad phrase in index: ") + e.what());
    }
  }

  std::vector<DocBitVector> vectors;
  const auto doc_count = get_le<std::uint32_t>(in);
  vectors.reserve(doc_count);
  for (std::uint32_t d = 0; d < doc_count; ++d) {
    auto id = get_string(in);
    const auto word_count = get_le<std::uint32_t>(in);
    if (word_count != words_for_bits(phrase_count)) {
      throw FormatError("document " + id + " has " + std::to_string(word_count) + " words");
    }
    std::vector<std::uint64_t> words(word_count);
    for (auto& w : words) w = get_le<std::uint64_t>(in);
    vectors.emplace_back(std::move(id), phrase_count, std::move(words));
  }

  std::map<std::string, std::uint32_t> singletons;
  const auto singleton_count = get_le<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < singleton_count; ++i) {
    auto key = get_string(in);
    singletons.emplace(std::move(key), get_le<std::uint32_t>(in));
  }
  return assemble_index(std::move(vocab), std::move(vectors), std::move(singletons));
}

CorpusIndex read_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_index(in);
}

}  // namespace qevo
