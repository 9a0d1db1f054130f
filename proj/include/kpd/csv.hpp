#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "kpd/types.hpp"

namespace kpd {

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string csv_num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

inline std::string csv_int(long long x) { return std::to_string(x); }

/// CSV accumulator with a fixed column count set by the header.
class CsvDoc {
 public:
  explicit CsvDoc(const std::vector<std::string>& header)
      : cols_(header.size()) {
    append(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_)
      throw PreconditionError("CsvDoc: row width does not match the header");
    append(cells);
  }

  const std::string& str() const { return out_; }

 private:
  void append(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }
  std::string out_;
  size_t cols_;
};

}  // namespace kpd
