#include "cli/csv.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cli/config.hpp"

#ifndef MASER_LDP_VERSION
#define MASER_LDP_VERSION "0.0.0"
#endif

namespace maser::cli {

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::add(double x) { return add(format_real(x)); }
CsvTable& CsvTable::add(std::int64_t x) { return add(std::to_string(x)); }
CsvTable& CsvTable::add(std::size_t x) { return add(std::to_string(x)); }
CsvTable& CsvTable::add(bool x) { return add(std::string(x ? "true" : "false")); }

CsvTable& CsvTable::add(const std::string& x) {
  if (rows_.empty()) throw std::logic_error("CsvTable::add before row()");
  rows_.back().push_back(x);
  return *this;
}

std::string hex64(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) s[static_cast<std::size_t>(i)] = digits[x & 0xf];
  return s;
}

namespace {

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string q = "\"";
  for (char c : cell) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::string CsvTable::render(bool complete, std::uint64_t hash) const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + quote(cells[i]);
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  out += std::string("# complete=") + (complete ? "true" : "false") +
         " version=" + MASER_LDP_VERSION + " config_hash=" + hex64(hash) + "\n";
  return out;
}

std::string write_csv(const std::string& dir, const std::string& name, const CsvTable& table,
                      bool complete, std::uint64_t hash) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << table.render(complete, hash);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
  return path;
}

}  // namespace maser::cli
