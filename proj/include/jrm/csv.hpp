#pragma once

// Tiny CSV emitter with a fixed numeric format: every double is written as
// "%.16e" (17 significant digits) so round-tripped values compare exactly
// and artifacts are byte-stable across runs.

#include <cstdint>
#include <string>
#include <vector>

namespace jrm::csv {

std::string num(double v);
std::string num(std::int64_t v);

class Table {
 public:
  explicit Table(std::vector<std::string> header);
  void row(std::vector<std::string> cells);
  std::string text() const;
  void save(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace jrm::csv
