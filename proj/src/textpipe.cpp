#include "ilstm/textpipe.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace ilstm {

std::vector<Token> clean_and_tokenize(std::string_view raw) {
  std::vector<Token> out;
  Token current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  };
  for (unsigned char ch : raw) {
    if (ch >= 'A' && ch <= 'Z') {
      ch = static_cast<unsigned char>(ch - 'A' + 'a');
    }
    if ((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '\'') {
      current.push_back(static_cast<char>(ch));
    } else if (ch == '?') {
      flush();
      out.emplace_back("?");
    } else {
      flush();
    }
  }
  flush();
  return out;
}

EmbeddingTable EmbeddingTable::load_glove(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open embedding file: " + path);
  }

  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::size_t word_end = line.find(' ');
    if (word_end == 0 || word_end == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected `word v1 .. vN`");
    }
    std::string word = line.substr(0, word_end);

    std::vector<double> values;
    if (table.dim_ > 0) {
      values.reserve(table.dim_);
    }
    const char* p = line.data() + word_end;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') {
        ++p;
      }
      if (p == end) {
        break;
      }
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": unparsable float near `" +
                                 std::string(p, std::min<std::size_t>(8, end - p)) +
                                 "`");
      }
      values.push_back(v);
      p = next;
    }

    if (table.dim_ == 0) {
      if (values.empty()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": no vector components");
      }
      table.dim_ = values.size();
    } else if (values.size() != table.dim_) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               std::to_string(values.size()) +
                               " components, expected " +
                               std::to_string(table.dim_));
    }

    auto [it, inserted] = table.index_.try_emplace(
        std::move(word), table.storage_.size());
    if (inserted) {
      table.storage_.insert(table.storage_.end(), values.begin(), values.end());
    } else {
      std::cerr << "warning: " << path << ":" << line_no
                << ": duplicate word `" << it->first << "`, last wins\n";
      std::copy(values.begin(), values.end(),
                table.storage_.begin() + static_cast<std::ptrdiff_t>(it->second));
    }
  }

  if (table.index_.empty()) {
    throw std::runtime_error(path + ": empty embedding file");
  }
  return table;
}

const double* EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) {
    return nullptr;
  }
  return storage_.data() + it->second;
}

std::vector<Vector> EmbeddingTable::embed(std::span<const Token> tokens,
                                          EmbedStats* stats) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const Token& tok : tokens) {
    if (stats) {
      ++stats->tokens;
    }
    const double* row = find(tok);
    if (row) {
      out.emplace_back(row, row + dim_);
    } else {
      out.emplace_back(dim_, 0.0);
      if (stats) {
        ++stats->oov;
      }
    }
  }
  return out;
}

}  // namespace ilstm
