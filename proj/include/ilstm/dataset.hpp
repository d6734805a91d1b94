#pragma once

#include "ilstm/numerics.hpp"
#include "ilstm/textpipe.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ilstm {

// Two-level label set: main classes and `MAIN:sub` fine labels, both sorted
// lexicographically so indices are a pure function of the label set.
class LabelTaxonomy {
 public:
  static LabelTaxonomy from_labels(std::span<const std::string> fine_labels);

  // Scans only the label column of a TREC-format file.
  static LabelTaxonomy from_file(const std::string& path);

  std::size_t main_count() const { return mains_.size(); }
  std::size_t fine_count() const { return fines_.size(); }
  const std::vector<std::string>& main_names() const { return mains_; }
  const std::vector<std::string>& fine_names() const { return fines_; }

  // Throws on unknown names.
  std::size_t main_index(const std::string& name) const;
  std::size_t fine_index(const std::string& name) const;
  bool has_fine(const std::string& name) const;

  std::size_t main_of_fine(std::size_t fine_idx) const;

  // The paper's structure: exactly 6 main classes and 50 fine labels.
  void require_trec_shape() const;

  bool operator==(const LabelTaxonomy& other) const {
    return mains_ == other.mains_ && fines_ == other.fines_;
  }

 private:
  std::vector<std::string> mains_;
  std::vector<std::string> fines_;
  std::vector<std::size_t> fine_to_main_;
  std::unordered_map<std::string, std::size_t> main_idx_;
  std::unordered_map<std::string, std::size_t> fine_idx_;
};

struct LabeledQuestion {
  std::vector<Token> tokens;
  std::size_t main_index = 0;
  std::size_t fine_index = 0;
};

// Splits `MAIN:sub` at its single ':'. Throws on zero or multiple colons or
// an empty part, quoting the offending string.
std::pair<std::string, std::string> parse_label(const std::string& raw);

// One example per line: `LABEL question text`. UTF-8 with Latin-1 fallback.
// Every line must parse; unknown labels name the label and line number.
std::vector<LabeledQuestion> load_trec(const std::string& path,
                                       const LabelTaxonomy& taxonomy);

// Seeded, stratified-by-main-class split into (train, val).
std::pair<std::vector<LabeledQuestion>, std::vector<LabeledQuestion>>
split_validation(std::span<const LabeledQuestion> data, double fraction,
                 Rng& rng);

// Indices into the caller's example storage.
using Batch = std::vector<std::size_t>;

// One epoch's batches over n examples: fresh shuffle from rng, final partial
// batch included.
std::vector<Batch> batches(std::size_t n, std::size_t batch_size, Rng& rng);

}  // namespace ilstm
