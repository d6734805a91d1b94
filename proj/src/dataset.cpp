#include "ilstm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

namespace ilstm {

namespace {

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c >> 5) == 0x6) {
      extra = 1;
    } else if ((c >> 4) == 0xe) {
      extra = 2;
    } else if ((c >> 3) == 0x1e) {
      extra = 3;
    } else {
      return false;
    }
    if (i + extra >= s.size()) {
      return false;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) {
        return false;
      }
    }
    i += extra + 1;
  }
  return true;
}

std::string latin1_to_utf8(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

// The distributed TREC files contain stray Latin-1 bytes; decode line-wise
// with a single aggregate warning.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  std::size_t fallback_count = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!valid_utf8(line)) {
      line = latin1_to_utf8(line);
      ++fallback_count;
    }
    lines.push_back(line);
  }
  if (fallback_count > 0) {
    std::cerr << "warning: " << path << ": " << fallback_count
              << " line(s) were not valid UTF-8, decoded as Latin-1\n";
  }
  return lines;
}

std::vector<std::string> scan_labels(const std::string& path) {
  std::vector<std::string> labels;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string& line = lines[k];
    const std::size_t sep = line.find(' ');
    if (sep == 0 || sep == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(k + 1) +
                               ": expected `LABEL question text`");
    }
    labels.push_back(line.substr(0, sep));
  }
  return labels;
}

}  // namespace

LabelTaxonomy LabelTaxonomy::from_labels(
    std::span<const std::string> fine_labels) {
  std::set<std::string> mains;
  std::set<std::string> fines;
  for (const std::string& raw : fine_labels) {
    auto [main, sub] = parse_label(raw);
    mains.insert(main);
    fines.insert(main + ":" + sub);
  }
  if (mains.empty()) {
    throw std::invalid_argument("taxonomy requires at least one label");
  }

  LabelTaxonomy t;
  t.mains_.assign(mains.begin(), mains.end());
  t.fines_.assign(fines.begin(), fines.end());
  for (std::size_t k = 0; k < t.mains_.size(); ++k) {
    t.main_idx_.emplace(t.mains_[k], k);
  }
  t.fine_to_main_.reserve(t.fines_.size());
  for (std::size_t k = 0; k < t.fines_.size(); ++k) {
    t.fine_idx_.emplace(t.fines_[k], k);
    const std::string main = t.fines_[k].substr(0, t.fines_[k].find(':'));
    t.fine_to_main_.push_back(t.main_index(main));
  }
  return t;
}

LabelTaxonomy LabelTaxonomy::from_file(const std::string& path) {
  const std::vector<std::string> labels = scan_labels(path);
  return from_labels(labels);
}

std::size_t LabelTaxonomy::main_index(const std::string& name) const {
  auto it = main_idx_.find(name);
  if (it == main_idx_.end()) {
    throw std::invalid_argument("unknown main class: " + name);
  }
  return it->second;
}

std::size_t LabelTaxonomy::fine_index(const std::string& name) const {
  auto it = fine_idx_.find(name);
  if (it == fine_idx_.end()) {
    throw std::invalid_argument("unknown fine label: " + name);
  }
  return it->second;
}

bool LabelTaxonomy::has_fine(const std::string& name) const {
  return fine_idx_.count(name) > 0;
}

std::size_t LabelTaxonomy::main_of_fine(std::size_t fine_idx) const {
  if (fine_idx >= fine_to_main_.size()) {
    throw std::invalid_argument("fine index " + std::to_string(fine_idx) +
                                " out of range");
  }
  return fine_to_main_[fine_idx];
}

void LabelTaxonomy::require_trec_shape() const {
  if (main_count() != 6 || fine_count() != 50) {
    throw std::runtime_error(
        "taxonomy has " + std::to_string(main_count()) + " main classes and " +
        std::to_string(fine_count()) + " fine labels, expected 6 and 50");
  }
}

std::pair<std::string, std::string> parse_label(const std::string& raw) {
  const std::size_t first = raw.find(':');
  if (first == std::string::npos || raw.find(':', first + 1) != std::string::npos) {
    throw std::invalid_argument("label `" + raw +
                                "` is not of the form MAIN:sub");
  }
  std::string main = raw.substr(0, first);
  std::string sub = raw.substr(first + 1);
  if (main.empty() || sub.empty()) {
    throw std::invalid_argument("label `" + raw + "` has an empty part");
  }
  return {std::move(main), std::move(sub)};
}

std::vector<LabeledQuestion> load_trec(const std::string& path,
                                       const LabelTaxonomy& taxonomy) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<LabeledQuestion> out;
  out.reserve(lines.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string& line = lines[k];
    const std::string where = path + ":" + std::to_string(k + 1);
    const std::size_t sep = line.find(' ');
    if (sep == 0 || sep == std::string::npos) {
      throw std::runtime_error(where + ": expected `LABEL question text`");
    }
    const std::string label = line.substr(0, sep);
    auto [main, sub] = parse_label(label);
    const std::string fine = main + ":" + sub;
    if (!taxonomy.has_fine(fine)) {
      throw std::runtime_error(where + ": unknown label `" + label + "`");
    }
    const std::size_t fine_idx = taxonomy.fine_index(fine);

    LabeledQuestion q;
    q.tokens = clean_and_tokenize(std::string_view(line).substr(sep + 1));
    if (q.tokens.empty()) {
      throw std::runtime_error(where + ": question cleans to nothing");
    }
    q.fine_index = fine_idx;
    q.main_index = taxonomy.main_of_fine(fine_idx);
    out.push_back(std::move(q));
  }
  return out;
}

std::pair<std::vector<LabeledQuestion>, std::vector<LabeledQuestion>>
split_validation(std::span<const LabeledQuestion> data, double fraction,
                 Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must be in (0, 1)");
  }

  std::size_t main_count = 0;
  for (const LabeledQuestion& q : data) {
    main_count = std::max(main_count, q.main_index + 1);
  }
  std::vector<std::vector<std::size_t>> by_main(main_count);
  for (std::size_t k = 0; k < data.size(); ++k) {
    by_main[data[k].main_index].push_back(k);
  }

  std::vector<LabeledQuestion> train;
  std::vector<LabeledQuestion> val;
  for (std::vector<std::size_t>& group : by_main) {
    rng.shuffle(group);
    const std::size_t take =
        static_cast<std::size_t>(std::lround(fraction * group.size()));
    for (std::size_t k = 0; k < group.size(); ++k) {
      (k < take ? val : train).push_back(data[group[k]]);
    }
  }
  if (train.empty() || val.empty()) {
    throw std::runtime_error("validation fraction " + std::to_string(fraction) +
                             " leaves an empty side for " +
                             std::to_string(data.size()) + " examples");
  }
  return {std::move(train), std::move(val)};
}

std::vector<Batch> batches(std::size_t n, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) {
    throw std::invalid_argument("batch_size must be >= 1");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) {
    order[k] = k;
  }
  rng.shuffle(order);

  std::vector<Batch> out;
  out.reserve((n + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return out;
}

}  // namespace ilstm
