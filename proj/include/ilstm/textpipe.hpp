#pragma once

#include "ilstm/numerics.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ilstm {

using Token = std::string;

// Lowercases, keeps [a-z0-9'], detaches every '?' as its own token and turns
// everything else into a separator. Idempotent; empty output is allowed.
std::vector<Token> clean_and_tokenize(std::string_view raw);

struct EmbedStats {
  std::size_t tokens = 0;
  std::size_t oov = 0;
};

// Immutable word -> vector map in GloVe text format. Dimension is taken from
// the first line and enforced on every other one.
class EmbeddingTable {
 public:
  static EmbeddingTable load_glove(const std::string& path);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

  // Pointer to the stored row, or nullptr for out-of-vocabulary words.
  const double* find(const std::string& word) const;

  // One vector per token; unknown tokens map to all-zeros and bump
  // stats->oov when stats is given.
  std::vector<Vector> embed(std::span<const Token> tokens,
                            EmbedStats* stats = nullptr) const;

 private:
  std::unordered_map<std::string, std::size_t> index_;  // word -> row offset
  std::vector<double> storage_;                         // rows back to back
  std::size_t dim_ = 0;
};

}  // namespace ilstm
