#include "semdist/embed_io.hpp"

#include "semdist/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace semdist {

namespace {

constexpr std::array<std::uint8_t, 4> kEmbeddingMagic{'S', 'E', 'M', 'B'};
constexpr std::array<std::uint8_t, 4> kMatrixMagic{'S', 'M', 'A', 'T'};

void check_finite(const DenseMatrix& m, const std::string& what) {
  for (std::size_t i = 0; i < m.values().size(); ++i) {
    if (!std::isfinite(m.values()[i])) {
      throw Error(ErrorKind::NonFiniteValue,
                  what + " has a non-finite value at flat index " + std::to_string(i));
    }
  }
}

class ByteWriter {
 public:
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  void u32(std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }

  void f32(double v) {
    const float narrowed = static_cast<float>(v);
    if (!std::isfinite(narrowed)) {
      throw Error(ErrorKind::NonFiniteValue, "value " + std::to_string(v) + " does not fit in float32");
    }
    u32(std::bit_cast<std::uint32_t>(narrowed));
  }

  void count(std::size_t n, const char* what) {
    if (n > 0xFFFFFFFFu) throw Error(ErrorKind::InvalidShape, std::string(what) + " exceeds u32 range");
    u32(static_cast<std::uint32_t>(n));
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void require(std::uint64_t n, const char* field) const {
    if (n > remaining()) {
      throw Error(ErrorKind::TruncatedFile,
                  std::string("need ") + std::to_string(n) + " bytes for " + field + ", have " +
                      std::to_string(remaining()),
                  pos_);
    }
  }

  void magic(const std::array<std::uint8_t, 4>& expected) {
    require(4, "magic");
    if (!std::equal(expected.begin(), expected.end(), bytes_.begin())) {
      throw Error(ErrorKind::MagicMismatch,
                  std::string("expected magic '") +
                      std::string(expected.begin(), expected.end()) + "'",
                  0);
    }
    pos_ = 4;
  }

  std::uint32_t u32(const char* field) {
    require(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f32(const char* field) {
    const std::uint64_t at = pos_;
    const float v = std::bit_cast<float>(u32(field));
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFiniteValue, std::string("non-finite ") + field, at);
    }
    return static_cast<double>(v);
  }

  std::string string(std::uint32_t len, const char* field) {
    require(len, field);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }

  void version() {
    const std::uint64_t at = pos_;
    const std::uint32_t v = u32("version");
    if (v != kFormatVersion) {
      throw Error(ErrorKind::UnsupportedVersion, "version " + std::to_string(v), at);
    }
  }

  void finish() const {
    if (remaining() != 0) {
      throw Error(ErrorKind::TrailingData,
                  std::to_string(remaining()) + " unexpected bytes after last record", pos_);
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

DenseMatrix read_floats(ByteReader& in, std::uint32_t rows, std::uint32_t cols, const char* field) {
  const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
  in.require(n * 4, field);
  std::vector<double> values;
  values.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) values.push_back(in.f32(field));
  return DenseMatrix(rows, cols, std::move(values));
}

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

const nlohmann::json& required_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::MissingField, line_prefix(line) + "missing key '" + key + "'");
  }
  if (!it->is_string()) {
    throw Error(ErrorKind::InvalidField, line_prefix(line) + "'" + key + "' must be a string");
  }
  return *it;
}

std::string string_field(const nlohmann::json& obj, const char* key, std::size_t line,
                         const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::MissingField,
                line_prefix(line) + context + " is missing key '" + key + "'");
  }
  if (!it->is_string()) {
    throw Error(ErrorKind::InvalidField,
                line_prefix(line) + context + "." + key + " must be a string");
  }
  return it->get<std::string>();
}

const nlohmann::json* optional_array(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  if (!it->is_array()) {
    throw Error(ErrorKind::InvalidField, line_prefix(line) + "'" + key + "' must be an array");
  }
  return &*it;
}

KnowledgeItem parse_item(const std::string& text, std::size_t line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, line_prefix(line) + e.what());
  }
  if (!obj.is_object()) {
    throw Error(ErrorKind::ParseError, line_prefix(line) + "expected a JSON object");
  }

  KnowledgeItem item;
  item.id = required_string(obj, "id", line).get<std::string>();
  item.prompt = required_string(obj, "prompt", line).get<std::string>();
  item.target = required_string(obj, "target", line).get<std::string>();
  item.old = required_string(obj, "old", line).get<std::string>();
  if (item.target.empty()) throw Error(ErrorKind::InvalidField, line_prefix(line) + "'target' is empty");
  if (item.old.empty()) throw Error(ErrorKind::InvalidField, line_prefix(line) + "'old' is empty");

  if (auto it = obj.find("new"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw Error(ErrorKind::InvalidField, line_prefix(line) + "'new' must be a string");
    }
    item.new_answer = it->get<std::string>();
  }

  if (const auto* arr = optional_array(obj, "rephrases", line)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto& r = (*arr)[i];
      const std::string ctx = "rephrases[" + std::to_string(i) + "]";
      if (!r.is_object()) throw Error(ErrorKind::InvalidField, line_prefix(line) + ctx + " must be an object");
      item.rephrases.push_back({string_field(r, "prompt", line, ctx), string_field(r, "answer", line, ctx)});
    }
  }
  if (const auto* arr = optional_array(obj, "locality_probes", line)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto& p = (*arr)[i];
      const std::string ctx = "locality_probes[" + std::to_string(i) + "]";
      if (!p.is_object()) throw Error(ErrorKind::InvalidField, line_prefix(line) + ctx + " must be an object");
      item.locality_probes.push_back({string_field(p, "prompt", line, ctx),
                                      string_field(p, "old_answer", line, ctx),
                                      string_field(p, "new_answer", line, ctx)});
    }
  }
  return item;
}

}  // namespace

// --- EmbeddingTable --------------------------------------------------------

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidShape, "embedding dimension must be positive");
}

void EmbeddingTable::insert(std::string id, DenseMatrix tokens) {
  if (tokens.rows() == 0) {
    throw Error(ErrorKind::InvalidShape, "record '" + id + "' has no token rows");
  }
  if (tokens.cols() != dim_) {
    throw Error(ErrorKind::InvalidShape, "record '" + id + "' has " + std::to_string(tokens.cols()) +
                                             " columns, table dim is " + std::to_string(dim_));
  }
  check_finite(tokens, "record '" + id + "'");
  if (records_.contains(id)) throw Error(ErrorKind::DuplicateId, "duplicate embedding id '" + id + "'");
  records_.emplace(std::move(id), std::move(tokens));
}

bool EmbeddingTable::contains(std::string_view id) const { return records_.find(id) != records_.end(); }

const DenseMatrix* EmbeddingTable::find(std::string_view id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

const DenseMatrix& EmbeddingTable::at(std::string_view id) const {
  if (const auto* m = find(id)) return *m;
  throw Error(ErrorKind::MissingEmbedding, "no embedding record '" + std::string(id) + "'");
}

// --- SEMB ------------------------------------------------------------------

std::vector<std::uint8_t> encode_embeddings(const EmbeddingTable& table) {
  ByteWriter out;
  out.bytes(kEmbeddingMagic);
  out.u32(kFormatVersion);
  out.count(table.dim(), "dim");
  out.count(table.size(), "record count");
  for (const auto& [id, tokens] : table.records()) {
    out.count(id.size(), "id length");
    out.bytes({reinterpret_cast<const std::uint8_t*>(id.data()), id.size()});
    out.count(tokens.rows(), "token count");
    for (double v : tokens.values()) out.f32(v);
  }
  return out.take();
}

EmbeddingTable decode_embeddings(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.magic(kEmbeddingMagic);
  in.version();
  const std::uint64_t dim_at = in.offset();
  const std::uint32_t dim = in.u32("dim");
  if (dim == 0) throw Error(ErrorKind::InvalidShape, "dim must be positive", dim_at);
  const std::uint32_t count = in.u32("count");

  EmbeddingTable table(dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint64_t record_at = in.offset();
    const std::uint32_t id_len = in.u32("id_len");
    std::string id = in.string(id_len, "id");
    const std::uint64_t tokens_at = in.offset();
    const std::uint32_t tokens = in.u32("token_count");
    if (tokens == 0) {
      throw Error(ErrorKind::InvalidShape, "record '" + id + "' has token_count 0", tokens_at);
    }
    DenseMatrix m = read_floats(in, tokens, dim, "token values");
    if (table.contains(id)) {
      throw Error(ErrorKind::DuplicateId, "duplicate embedding id '" + id + "'", record_at);
    }
    table.insert(std::move(id), std::move(m));
  }
  in.finish();
  return table;
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file_bytes(path));
}

void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  write_file_bytes(path, encode_embeddings(table));
}

// --- SMAT ------------------------------------------------------------------

std::vector<std::uint8_t> encode_matrix(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw Error(ErrorKind::InvalidShape, "matrix dimensions must be positive");
  check_finite(m, "matrix");
  ByteWriter out;
  out.bytes(kMatrixMagic);
  out.u32(kFormatVersion);
  out.count(m.rows(), "rows");
  out.count(m.cols(), "cols");
  for (double v : m.values()) out.f32(v);
  return out.take();
}

DenseMatrix decode_matrix(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.magic(kMatrixMagic);
  in.version();
  const std::uint64_t shape_at = in.offset();
  const std::uint32_t rows = in.u32("rows");
  const std::uint32_t cols = in.u32("cols");
  if (rows == 0 || cols == 0) throw Error(ErrorKind::InvalidShape, "rows and cols must be positive", shape_at);
  DenseMatrix m = read_floats(in, rows, cols, "matrix values");
  in.finish();
  return m;
}

DenseMatrix read_matrix(const std::filesystem::path& path) { return decode_matrix(read_file_bytes(path)); }

void write_matrix(const DenseMatrix& m, const std::filesystem::path& path) {
  write_file_bytes(path, encode_matrix(m));
}

// --- Datasets --------------------------------------------------------------

std::string embedding_key(std::string_view item_id, AnswerRole role) {
  std::string key(item_id);
  switch (role) {
    case AnswerRole::Target: key += "#target"; break;
    case AnswerRole::Old: key += "#old"; break;
    case AnswerRole::New: key += "#new"; break;
  }
  return key;
}

std::vector<KnowledgeItem> parse_dataset(std::istream& in) {
  std::vector<KnowledgeItem> items;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    KnowledgeItem item = parse_item(text, line);
    auto [it, inserted] = first_line.emplace(item.id, line);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateId, "id '" + item.id + "' on lines " + std::to_string(it->second) +
                                              " and " + std::to_string(line));
    }
    items.push_back(std::move(item));
  }
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read failed after line " + std::to_string(line));
  return items;
}

std::vector<KnowledgeItem> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
  return parse_dataset(in);
}

std::string format_item(const KnowledgeItem& item) {
  nlohmann::ordered_json obj;
  obj["id"] = item.id;
  obj["prompt"] = item.prompt;
  obj["target"] = item.target;
  obj["old"] = item.old;
  if (item.new_answer) obj["new"] = *item.new_answer;
  if (!item.rephrases.empty()) {
    auto& arr = obj["rephrases"] = nlohmann::ordered_json::array();
    for (const auto& r : item.rephrases) arr.push_back({{"prompt", r.prompt}, {"answer", r.answer}});
  }
  if (!item.locality_probes.empty()) {
    auto& arr = obj["locality_probes"] = nlohmann::ordered_json::array();
    for (const auto& p : item.locality_probes) {
      arr.push_back({{"prompt", p.prompt}, {"old_answer", p.old_answer}, {"new_answer", p.new_answer}});
    }
  }
  try {
    return obj.dump();
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorKind::InvalidField, "item '" + item.id + "': " + e.what());
  }
}

void write_dataset(std::span<const KnowledgeItem> items, std::ostream& out) {
  for (const auto& item : items) out << format_item(item) << '\n';
}

void write_dataset(std::span<const KnowledgeItem> items, const std::filesystem::path& path) {
  std::ostringstream buf;
  write_dataset(items, buf);
  const std::string s = buf.str();
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

// --- File helpers ----------------------------------------------------------

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read failed for '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for '" + path.string() + "'");
}

}  // namespace semdist
