#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetsign {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

// Row-by-row CSV assembly.  String cells are quoted only when they contain a
// comma, quote or newline, so the usual plain-word identifiers stay verbatim.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    append_row(header);
  }

  CsvWriter& cell(std::string value) {
    pending_.push_back(std::move(value));
    if (pending_.size() == columns_) {
      append_row(pending_);
      pending_.clear();
    }
    return *this;
  }
  CsvWriter& cell(double v) { return cell(format_double(v)); }
  CsvWriter& cell(int v) { return cell(std::to_string(v)); }
  CsvWriter& cell(long long v) { return cell(std::to_string(v)); }
  CsvWriter& cell(size_t v) { return cell(std::to_string(v)); }
  CsvWriter& cell(const char* v) { return cell(std::string(v)); }
  CsvWriter& cell(bool v) { return cell(std::string(v ? "true" : "false")); }

  const std::string& text() const {
    if (!pending_.empty()) throw std::logic_error("CsvWriter: unfinished row");
    return text_;
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("CsvWriter: cannot open " + path);
    out << text();
    if (!out) throw std::runtime_error("CsvWriter: write failed for " + path);
  }

 private:
  void append_row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      append_cell(cells[i]);
    }
    text_ += '\n';
  }

  void append_cell(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
      text_ += value;
      return;
    }
    text_ += '"';
    for (char c : value) {
      if (c == '"') text_ += '"';
      text_ += c;
    }
    text_ += '"';
  }

  size_t columns_;
  std::vector<std::string> pending_;
  std::string text_;
};

}  // namespace hetsign
