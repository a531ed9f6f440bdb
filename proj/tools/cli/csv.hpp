#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace maser::cli {

/// Rows of already formatted cells under a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row();
  CsvTable& add(double x);
  CsvTable& add(std::int64_t x);
  CsvTable& add(std::size_t x);
  CsvTable& add(bool x);
  CsvTable& add(const std::string& x);

  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }

  /// Header, rows, then "# complete=<bool> version=<v> config_hash=<hex>".
  [[nodiscard]] std::string render(bool complete, std::uint64_t hash) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string hex64(std::uint64_t x);

/// Writes the rendered table to dir/name (creating dir). Throws
/// std::runtime_error when the file cannot be written.
std::string write_csv(const std::string& dir, const std::string& name, const CsvTable& table,
                      bool complete, std::uint64_t hash);

}  // namespace maser::cli
