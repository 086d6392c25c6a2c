// polq/io.hpp — deterministic file output: CSV tables and stable-key JSON.
//
// Every artifact written through this module is byte-reproducible: floats are
// rendered at 17 significant digits, JSON keys keep insertion order, and line
// endings are LF regardless of platform.
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace polq::io {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v);  // %.17g

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& values);
  std::size_t n_rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const ordered_json& value);
ordered_json read_json_file(const std::filesystem::path& path);

}  // namespace polq::io
