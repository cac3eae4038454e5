#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "assocdb/assoc.hpp"
#include "assocdb/errors.hpp"
#include "assocdb/number.hpp"

namespace assocdb {

/// Parallel row/col/value string lists, as read from a triple file or fed
/// to put_triple.
struct StringTriples {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::string> vals;

  std::size_t size() const { return rows.size(); }
  void push_back(std::string r, std::string c, std::string v) {
    rows.push_back(std::move(r));
    cols.push_back(std::move(c));
    vals.push_back(std::move(v));
  }
  bool operator==(const StringTriples&) const = default;
};

namespace detail {

// Splits a line on tabs into exactly `n` fields.
inline bool split_tabs(std::string_view line, std::size_t n, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out.size() == n;
}

inline bool has_reserved_byte(std::string_view s) {
  return s.find_first_of("\t\n") != std::string_view::npos;
}

}  // namespace detail

/// Reads `row<TAB>col<TAB>value<LF>` lines. A final line without LF is accepted.
inline StringTriples read_triples_tsv(std::istream& in) {
  StringTriples t;
  std::string line;
  std::vector<std::string_view> fields;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::split_tabs(line, 3, fields)) {
      throw FormatError("triple file line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    }
    t.push_back(std::string(fields[0]), std::string(fields[1]), std::string(fields[2]));
  }
  if (in.bad()) throw FormatError("read error in triple file");
  return t;
}

inline StringTriples read_triples_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open triple file: " + path);
  return read_triples_tsv(in);
}

inline void write_triples_tsv(std::ostream& out, const StringTriples& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.rows[i] << '\t' << t.cols[i] << '\t' << t.vals[i] << '\n';
  }
}

/// Writes A in row-major order; numeric values use format_number.
inline void write_triples_tsv(std::ostream& out, const AssocArray& a) {
  auto cells = a.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << a.row_keys()[cells[i].row] << '\t' << a.col_keys()[cells[i].col] << '\t';
    if (a.is_numeric()) {
      out << format_number(a.number(i));
    } else {
      out << a.text(i);
    }
    out << '\n';
  }
}

}  // namespace assocdb
