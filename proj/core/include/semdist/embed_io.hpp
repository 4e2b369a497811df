#pragma once

#include "semdist/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semdist {

// ---------------------------------------------------------------------------
// Embedding tables (SEMB)
//
//   "SEMB" | version u32 = 1 | dim u32 | count u32 |
//   count x { id_len u32 | id bytes | token_count u32 | token_count*dim f32 }
//
// All integers and floats little-endian; records sorted by id on write.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kFormatVersion = 1;

// Per-token embedding matrices keyed by string id, all sharing one width.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 1);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  // Throws DuplicateId, InvalidShape or NonFiniteValue.
  void insert(std::string id, DenseMatrix tokens);

  bool contains(std::string_view id) const;
  const DenseMatrix* find(std::string_view id) const;
  // Throws MissingEmbedding naming the key.
  const DenseMatrix& at(std::string_view id) const;

  const std::map<std::string, DenseMatrix, std::less<>>& records() const noexcept {
    return records_;
  }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t dim_;
  std::map<std::string, DenseMatrix, std::less<>> records_;
};

std::vector<std::uint8_t> encode_embeddings(const EmbeddingTable& table);
EmbeddingTable decode_embeddings(std::span<const std::uint8_t> bytes);

EmbeddingTable read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dense matrices (SMAT)
//
//   "SMAT" | version u32 = 1 | rows u32 | cols u32 | rows*cols f32 row-major
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_matrix(const DenseMatrix& m);
DenseMatrix decode_matrix(std::span<const std::uint8_t> bytes);

DenseMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const DenseMatrix& m, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Knowledge datasets (JSON Lines)
// ---------------------------------------------------------------------------

struct Rephrase {
  std::string prompt;
  std::string answer;
  friend bool operator==(const Rephrase&, const Rephrase&) = default;
};

struct LocalityProbe {
  std::string prompt;
  std::string old_answer;
  std::string new_answer;
  friend bool operator==(const LocalityProbe&, const LocalityProbe&) = default;
};

struct KnowledgeItem {
  std::string id;
  std::string prompt;
  std::string target;
  std::string old;
  std::optional<std::string> new_answer;
  std::vector<Rephrase> rephrases;
  std::vector<LocalityProbe> locality_probes;
  friend bool operator==(const KnowledgeItem&, const KnowledgeItem&) = default;
};

// Which answer of an item an embedding record belongs to.
enum class AnswerRole { Target, Old, New };

// "<item_id>#target", "<item_id>#old", "<item_id>#new".
std::string embedding_key(std::string_view item_id, AnswerRole role);

// Line numbers in errors are 1-based. Blank lines are skipped.
std::vector<KnowledgeItem> parse_dataset(std::istream& in);
std::vector<KnowledgeItem> read_dataset(const std::filesystem::path& path);

std::string format_item(const KnowledgeItem& item);
void write_dataset(std::span<const KnowledgeItem> items, std::ostream& out);
void write_dataset(std::span<const KnowledgeItem> items, const std::filesystem::path& path);

// Whole-file helpers shared by the binary readers and writers.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace semdist
