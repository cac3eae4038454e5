#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "assocdb/errors.hpp"
#include "assocdb/keyspec.hpp"
#include "assocdb/number.hpp"

namespace assocdb {

enum class ValueMode { Numeric, String };

/// How duplicate (row, col) pairs are merged during construction.
/// Sum is Numeric-only; the others compare with < (byte order for strings).
enum class Collision { Sum, KeepFirst, KeepLast, Min, Max };

using Value = std::variant<double, std::string>;

struct Triples {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<Value> vals;

  std::size_t size() const { return rows.size(); }
  bool operator==(const Triples&) const = default;
};

/// Sparse two-dimensional array with sorted string row and column keys.
///
/// The representation is canonical: row and column keys are strictly sorted
/// and every key is referenced by at least one entry, entries are stored
/// row-major, and in Numeric mode no stored value is zero. Two arrays holding
/// the same triples therefore compare equal member-wise.
///
/// Arrays are immutable; every operation returns a new array.
class AssocArray {
 public:
  struct Cell {
    std::uint32_t row;
    std::uint32_t col;
    bool operator==(const Cell&) const = default;
  };

  AssocArray() = default;

  ValueMode mode() const { return mode_; }
  bool is_numeric() const { return mode_ == ValueMode::Numeric; }
  const std::vector<std::string>& row_keys() const { return rows_; }
  const std::vector<std::string>& col_keys() const { return cols_; }
  std::span<const Cell> cells() const { return cells_; }

  std::size_t nnz() const { return cells_.size(); }
  std::pair<std::size_t, std::size_t> size() const { return {rows_.size(), cols_.size()}; }
  bool empty() const { return cells_.empty(); }

  double number(std::size_t i) const { return nums_[i]; }
  const std::string& text(std::size_t i) const { return pool_[pool_idx_[i]]; }
  Value value(std::size_t i) const {
    if (mode_ == ValueMode::Numeric) return nums_[i];
    return text(i);
  }
  // Sorted unique string values (String mode).
  const std::vector<std::string>& string_pool() const { return pool_; }

  std::optional<Value> at(std::string_view row, std::string_view col) const {
    auto r = find_key(rows_, row);
    auto c = find_key(cols_, col);
    if (!r || !c) return std::nullopt;
    Cell key{*r, *c};
    auto it = std::lower_bound(cells_.begin(), cells_.end(), key, row_major);
    if (it == cells_.end() || !(*it == key)) return std::nullopt;
    return value(static_cast<std::size_t>(it - cells_.begin()));
  }

  /// Describes the first violated representation invariant, or returns an
  /// empty string when the array is well formed.
  std::string check_invariants() const {
    auto strictly_sorted = [](const std::vector<std::string>& v) {
      return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>{}) == v.end();
    };
    if (!strictly_sorted(rows_)) return "row keys not strictly sorted";
    if (!strictly_sorted(cols_)) return "column keys not strictly sorted";
    std::vector<bool> row_used(rows_.size()), col_used(cols_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      const Cell& c = cells_[i];
      if (c.row >= rows_.size() || c.col >= cols_.size()) return "cell index out of range";
      if (i > 0 && !row_major(cells_[i - 1], c)) return "cells not strictly row-major (duplicate or unsorted)";
      row_used[c.row] = true;
      col_used[c.col] = true;
    }
    if (std::find(row_used.begin(), row_used.end(), false) != row_used.end()) return "dangling row key";
    if (std::find(col_used.begin(), col_used.end(), false) != col_used.end()) return "dangling column key";
    if (mode_ == ValueMode::Numeric) {
      if (nums_.size() != cells_.size() || !pool_.empty() || !pool_idx_.empty()) return "numeric storage mismatch";
      for (double v : nums_) {
        if (v == 0.0) return "explicit zero stored";
        if (!std::isfinite(v)) return "non-finite value stored";
      }
    } else {
      if (pool_idx_.size() != cells_.size() || !nums_.empty()) return "string storage mismatch";
      if (!strictly_sorted(pool_)) return "string pool not strictly sorted";
      std::vector<bool> used(pool_.size());
      for (auto idx : pool_idx_) {
        if (idx >= pool_.size()) return "string pool index out of range";
        used[idx] = true;
      }
      if (std::find(used.begin(), used.end(), false) != used.end()) return "unreferenced pooled string";
    }
    return {};
  }

  bool operator==(const AssocArray&) const = default;

  // Sub-array selection, e.g. A("alice,", ":") or A(KeySpec::positional(1, 2), ":").
  AssocArray operator()(const KeySpec& rows, const KeySpec& cols) const;

  class Builder;

 private:
  static bool row_major(const Cell& a, const Cell& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  }

  static std::optional<std::uint32_t> find_key(const std::vector<std::string>& keys, std::string_view k) {
    auto it = std::lower_bound(keys.begin(), keys.end(), k, std::less<>{});
    if (it == keys.end() || *it != k) return std::nullopt;
    return static_cast<std::uint32_t>(it - keys.begin());
  }

  ValueMode mode_ = ValueMode::Numeric;
  std::vector<std::string> rows_;
  std::vector<std::string> cols_;
  std::vector<Cell> cells_;
  std::vector<double> nums_;
  std::vector<std::string> pool_;
  std::vector<std::uint32_t> pool_idx_;
};

/// Assembles canonical arrays from cells over candidate key sets. Drops
/// numeric zeros and unreferenced keys; the caller guarantees cells are
/// strictly row-major over the supplied (sorted, unique) key vectors.
class AssocArray::Builder {
 public:
  static AssocArray numeric(std::vector<std::string> rows, std::vector<std::string> cols,
                            std::vector<Cell> cells, std::vector<double> vals) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (vals[i] == 0.0) continue;
      cells[w] = cells[i];
      vals[w] = vals[i];
      ++w;
    }
    cells.resize(w);
    vals.resize(w);
    AssocArray a;
    a.mode_ = ValueMode::Numeric;
    a.nums_ = std::move(vals);
    compact(a, std::move(rows), std::move(cols), std::move(cells));
    return a;
  }

  // `vals[i]` indexes `pool`, which must be sorted and unique.
  static AssocArray strings(std::vector<std::string> rows, std::vector<std::string> cols,
                            std::vector<Cell> cells, std::vector<std::string> pool,
                            std::vector<std::uint32_t> vals) {
    std::vector<std::uint32_t> remap(pool.size(), UINT32_MAX);
    for (auto v : vals) remap[v] = 0;
    std::uint32_t next = 0;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (remap[i] == 0) {
        remap[i] = next++;
        kept.push_back(std::move(pool[i]));
      }
    }
    for (auto& v : vals) v = remap[v];
    AssocArray a;
    a.mode_ = ValueMode::String;
    a.pool_ = std::move(kept);
    a.pool_idx_ = std::move(vals);
    compact(a, std::move(rows), std::move(cols), std::move(cells));
    return a;
  }

 private:
  static void compact(AssocArray& a, std::vector<std::string> rows, std::vector<std::string> cols,
                      std::vector<Cell> cells) {
    std::vector<std::uint32_t> rmap(rows.size(), UINT32_MAX), cmap(cols.size(), UINT32_MAX);
    for (const auto& c : cells) {
      rmap[c.row] = 0;
      cmap[c.col] = 0;
    }
    a.rows_ = keep_used(std::move(rows), rmap);
    a.cols_ = keep_used(std::move(cols), cmap);
    for (auto& c : cells) c = Cell{rmap[c.row], cmap[c.col]};
    a.cells_ = std::move(cells);
  }

  static std::vector<std::string> keep_used(std::vector<std::string> keys, std::vector<std::uint32_t>& map) {
    std::vector<std::string> out;
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (map[i] != UINT32_MAX) {
        map[i] = next++;
        out.push_back(std::move(keys[i]));
      }
    }
    return out;
  }
};

namespace detail {

// Sorted unique copy of `keys` plus the index of each input key within it.
inline std::pair<std::vector<std::string>, std::vector<std::uint32_t>> intern(std::span<const std::string> keys) {
  std::vector<std::uint32_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
  std::vector<std::string> uniq;
  std::vector<std::uint32_t> ids(keys.size());
  for (auto i : order) {
    if (uniq.empty() || uniq.back() != keys[i]) uniq.push_back(keys[i]);
    ids[i] = static_cast<std::uint32_t>(uniq.size() - 1);
  }
  return {std::move(uniq), std::move(ids)};
}

// Stable row-major order of input triples, grouped by (row, col).
inline std::vector<std::uint32_t> row_major_order(const std::vector<std::uint32_t>& rid,
                                                  const std::vector<std::uint32_t>& cid) {
  std::vector<std::uint32_t> order(rid.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return rid[a] != rid[b] ? rid[a] < rid[b] : cid[a] < cid[b];
  });
  return order;
}

inline void check_lengths(std::size_t r, std::size_t c, std::size_t v) {
  if (r != c || r != v) {
    throw ShapeError("triple lists differ in length: rows=" + std::to_string(r) + " cols=" + std::to_string(c) +
                     " vals=" + std::to_string(v));
  }
}

inline const char* collision_name(Collision c) {
  switch (c) {
    case Collision::Sum: return "sum";
    case Collision::KeepFirst: return "keep-first";
    case Collision::KeepLast: return "keep-last";
    case Collision::Min: return "min";
    case Collision::Max: return "max";
  }
  return "?";
}

template <class T>
void fold(T& acc, const T& next, Collision policy) {
  switch (policy) {
    case Collision::Sum:
      if constexpr (std::is_same_v<T, double>) {
        acc += next;
      }
      break;
    case Collision::KeepFirst: break;
    case Collision::KeepLast: acc = next; break;
    case Collision::Min:
      if (next < acc) acc = next;
      break;
    case Collision::Max:
      if (acc < next) acc = next;
      break;
  }
}

}  // namespace detail

/// Numeric-mode construction. Duplicate (row, col) pairs fold with `policy`
/// in input order; zero results are dropped.
inline AssocArray from_numeric_triples(std::span<const std::string> rows, std::span<const std::string> cols,
                                       std::span<const double> vals, Collision policy = Collision::Sum) {
  detail::check_lengths(rows.size(), cols.size(), vals.size());
  for (double v : vals) {
    if (!std::isfinite(v)) throw ModeError("numeric values must be finite");
  }
  auto [rkeys, rid] = detail::intern(rows);
  auto [ckeys, cid] = detail::intern(cols);
  auto order = detail::row_major_order(rid, cid);
  std::vector<AssocArray::Cell> cells;
  std::vector<double> out;
  for (auto i : order) {
    AssocArray::Cell c{rid[i], cid[i]};
    if (!cells.empty() && cells.back() == c) {
      detail::fold(out.back(), vals[i], policy);
    } else {
      cells.push_back(c);
      out.push_back(vals[i]);
    }
  }
  return AssocArray::Builder::numeric(std::move(rkeys), std::move(ckeys), std::move(cells), std::move(out));
}

/// String-mode construction. Sum is rejected: string arithmetic is undefined.
inline AssocArray from_string_triples(std::span<const std::string> rows, std::span<const std::string> cols,
                                      std::span<const std::string> vals, Collision policy = Collision::KeepLast) {
  detail::check_lengths(rows.size(), cols.size(), vals.size());
  if (policy == Collision::Sum) throw ModeError("sum collision is not defined for string values");
  auto [rkeys, rid] = detail::intern(rows);
  auto [ckeys, cid] = detail::intern(cols);
  auto order = detail::row_major_order(rid, cid);
  std::vector<AssocArray::Cell> cells;
  std::vector<std::uint32_t> picked;  // index into vals
  for (auto i : order) {
    AssocArray::Cell c{rid[i], cid[i]};
    if (!cells.empty() && cells.back() == c) {
      std::uint32_t& cur = picked.back();
      switch (policy) {
        case Collision::KeepLast: cur = i; break;
        case Collision::Min:
          if (vals[i] < vals[cur]) cur = i;
          break;
        case Collision::Max:
          if (vals[cur] < vals[i]) cur = i;
          break;
        default: break;
      }
    } else {
      cells.push_back(c);
      picked.push_back(i);
    }
  }
  std::vector<std::string> chosen;
  chosen.reserve(picked.size());
  for (auto i : picked) chosen.push_back(vals[i]);
  auto [pool, idx] = detail::intern(chosen);
  return AssocArray::Builder::strings(std::move(rkeys), std::move(ckeys), std::move(cells), std::move(pool),
                                      std::move(idx));
}

/// Construction from mixed-kind value lists; all values must share one kind.
/// Without an explicit policy, Numeric sums and String keeps the last write.
inline AssocArray from_triples(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                               const std::vector<Value>& vals, std::optional<Collision> policy = std::nullopt) {
  detail::check_lengths(rows.size(), cols.size(), vals.size());
  if (vals.empty()) return AssocArray{};
  const bool numeric = std::holds_alternative<double>(vals.front());
  for (const auto& v : vals) {
    if (std::holds_alternative<double>(v) != numeric) throw ModeError("string and numeric values mixed in one call");
  }
  if (numeric) {
    std::vector<double> nums;
    nums.reserve(vals.size());
    for (const auto& v : vals) nums.push_back(std::get<double>(v));
    return from_numeric_triples(rows, cols, nums, policy.value_or(Collision::Sum));
  }
  std::vector<std::string> strs;
  strs.reserve(vals.size());
  for (const auto& v : vals) strs.push_back(std::get<std::string>(v));
  return from_string_triples(rows, cols, strs, policy.value_or(Collision::KeepLast));
}

inline AssocArray from_triples(const Triples& t, std::optional<Collision> policy = std::nullopt) {
  return from_triples(t.rows, t.cols, t.vals, policy);
}

/// Row-major listing of the entries; from_triples(triples(A)) == A.
inline Triples triples(const AssocArray& a) {
  Triples t;
  t.rows.reserve(a.nnz());
  t.cols.reserve(a.nnz());
  t.vals.reserve(a.nnz());
  auto cells = a.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    t.rows.push_back(a.row_keys()[cells[i].row]);
    t.cols.push_back(a.col_keys()[cells[i].col]);
    t.vals.push_back(a.value(i));
  }
  return t;
}

namespace detail {

// Keeps the entries for which keep(i) holds, over the same candidate keys.
template <class Pred>
AssocArray filter_entries(const AssocArray& a, Pred keep) {
  auto cells = a.cells();
  std::vector<AssocArray::Cell> out;
  if (a.is_numeric()) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (keep(i)) {
        out.push_back(cells[i]);
        vals.push_back(a.number(i));
      }
    }
    return AssocArray::Builder::numeric(a.row_keys(), a.col_keys(), std::move(out), std::move(vals));
  }
  std::vector<std::uint32_t> idx;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (keep(i)) {
      out.push_back(cells[i]);
      auto it = std::lower_bound(a.string_pool().begin(), a.string_pool().end(), a.text(i));
      idx.push_back(static_cast<std::uint32_t>(it - a.string_pool().begin()));
    }
  }
  return AssocArray::Builder::strings(a.row_keys(), a.col_keys(), std::move(out), a.string_pool(), std::move(idx));
}

inline void require_numeric(const AssocArray& a, const char* op) {
  if (!a.is_numeric()) throw ModeError(std::string(op) + " requires numeric arrays");
}

// Union of two sorted unique key vectors plus index maps from each input.
struct KeyUnion {
  std::vector<std::string> keys;
  std::vector<std::uint32_t> from_a;
  std::vector<std::uint32_t> from_b;
};

inline KeyUnion merge_keys(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  KeyUnion u;
  u.from_a.resize(a.size());
  u.from_b.resize(b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    const auto id = static_cast<std::uint32_t>(u.keys.size());
    if (j == b.size() || (i < a.size() && a[i] < b[j])) {
      u.from_a[i] = id;
      u.keys.push_back(a[i++]);
    } else if (i == a.size() || b[j] < a[i]) {
      u.from_b[j] = id;
      u.keys.push_back(b[j++]);
    } else {
      u.from_a[i] = id;
      u.from_b[j] = id;
      u.keys.push_back(a[i]);
      ++i;
      ++j;
    }
  }
  return u;
}

// Walks the union of A's and B's entries in row-major order; `emit` receives
// the merged cell and optional entry indices into A and B.
template <class Emit>
void merge_entries(const AssocArray& a, const AssocArray& b, const KeyUnion& ru, const KeyUnion& cu, Emit emit) {
  auto ac = a.cells();
  auto bc = b.cells();
  auto map_a = [&](std::size_t i) { return AssocArray::Cell{ru.from_a[ac[i].row], cu.from_a[ac[i].col]}; };
  auto map_b = [&](std::size_t j) { return AssocArray::Cell{ru.from_b[bc[j].row], cu.from_b[bc[j].col]}; };
  auto less = [](const AssocArray::Cell& x, const AssocArray::Cell& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  };
  std::size_t i = 0, j = 0;
  while (i < ac.size() || j < bc.size()) {
    if (j == bc.size()) {
      emit(map_a(i), std::optional<std::size_t>(i), std::optional<std::size_t>());
      ++i;
    } else if (i == ac.size()) {
      emit(map_b(j), std::optional<std::size_t>(), std::optional<std::size_t>(j));
      ++j;
    } else {
      auto x = map_a(i);
      auto y = map_b(j);
      if (less(x, y)) {
        emit(x, std::optional<std::size_t>(i), std::optional<std::size_t>());
        ++i;
      } else if (less(y, x)) {
        emit(y, std::optional<std::size_t>(), std::optional<std::size_t>(j));
        ++j;
      } else {
        emit(x, std::optional<std::size_t>(i), std::optional<std::size_t>(j));
        ++i;
        ++j;
      }
    }
  }
}

template <class Combine>
AssocArray numeric_union(const AssocArray& a, const AssocArray& b, Combine combine) {
  auto ru = merge_keys(a.row_keys(), b.row_keys());
  auto cu = merge_keys(a.col_keys(), b.col_keys());
  std::vector<AssocArray::Cell> cells;
  std::vector<double> vals;
  merge_entries(a, b, ru, cu, [&](AssocArray::Cell c, std::optional<std::size_t> i, std::optional<std::size_t> j) {
    cells.push_back(c);
    vals.push_back(combine(i, j));
  });
  return AssocArray::Builder::numeric(std::move(ru.keys), std::move(cu.keys), std::move(cells), std::move(vals));
}

}  // namespace detail

/// Sub-array of the entries whose row key satisfies `rows` and column key
/// satisfies `cols`. Keys left without entries are dropped.
inline AssocArray index(const AssocArray& a, const KeySpec& rows, const KeySpec& cols) {
  if (rows.is_all() && cols.is_all()) return a;
  std::vector<bool> row_ok(a.row_keys().size()), col_ok(a.col_keys().size());
  for (auto i : rows.select(a.row_keys())) row_ok[i] = true;
  for (auto i : cols.select(a.col_keys())) col_ok[i] = true;
  auto cells = a.cells();
  return detail::filter_entries(a, [&](std::size_t i) { return row_ok[cells[i].row] && col_ok[cells[i].col]; });
}

inline AssocArray AssocArray::operator()(const KeySpec& rows, const KeySpec& cols) const {
  return index(*this, rows, cols);
}

/// Entries whose value equals `v` exactly.
inline AssocArray eq_filter(const AssocArray& a, const Value& v) {
  const bool numeric_v = std::holds_alternative<double>(v);
  if (a.empty() && a.row_keys().empty()) {
    // The empty array carries no meaningful mode.
    return AssocArray{};
  }
  if (numeric_v != a.is_numeric()) throw ModeError("value kind does not match array mode");
  if (numeric_v) {
    const double target = std::get<double>(v);
    return detail::filter_entries(a, [&](std::size_t i) { return a.number(i) == target; });
  }
  const auto& target = std::get<std::string>(v);
  return detail::filter_entries(a, [&](std::size_t i) { return a.text(i) == target; });
}

inline AssocArray operator==(const AssocArray& a, double v) { return eq_filter(a, v); }
inline AssocArray operator==(const AssocArray& a, const std::string& v) { return eq_filter(a, v); }

inline AssocArray add(const AssocArray& a, const AssocArray& b) {
  detail::require_numeric(a, "add");
  detail::require_numeric(b, "add");
  return detail::numeric_union(a, b, [&](std::optional<std::size_t> i, std::optional<std::size_t> j) {
    return (i ? a.number(*i) : 0.0) + (j ? b.number(*j) : 0.0);
  });
}

inline AssocArray subtract(const AssocArray& a, const AssocArray& b) {
  detail::require_numeric(a, "subtract");
  detail::require_numeric(b, "subtract");
  return detail::numeric_union(a, b, [&](std::optional<std::size_t> i, std::optional<std::size_t> j) {
    return (i ? a.number(*i) : 0.0) - (j ? b.number(*j) : 0.0);
  });
}

/// 1.0 wherever both arrays hold an entry. Works in either mode.
inline AssocArray elementwise_and(const AssocArray& a, const AssocArray& b) {
  return detail::numeric_union(a, b, [](std::optional<std::size_t> i, std::optional<std::size_t> j) {
    return (i && j) ? 1.0 : 0.0;
  });
}

/// 1.0 wherever either array holds an entry. Works in either mode.
inline AssocArray elementwise_or(const AssocArray& a, const AssocArray& b) {
  return detail::numeric_union(a, b, [](std::optional<std::size_t>, std::optional<std::size_t>) { return 1.0; });
}

/// (+, *) product joining A's column keys with B's row keys.
inline AssocArray matmul(const AssocArray& a, const AssocArray& b) {
  detail::require_numeric(a, "matmul");
  detail::require_numeric(b, "matmul");
  // Row extents of B.
  auto bc = b.cells();
  std::vector<std::size_t> b_row_start(b.row_keys().size() + 1, 0);
  for (const auto& c : bc) ++b_row_start[c.row + 1];
  std::partial_sum(b_row_start.begin(), b_row_start.end(), b_row_start.begin());

  // A column id -> B row id.
  std::vector<std::int64_t> join(a.col_keys().size(), -1);
  {
    std::size_t i = 0, j = 0;
    const auto& ak = a.col_keys();
    const auto& bk = b.row_keys();
    while (i < ak.size() && j < bk.size()) {
      if (ak[i] < bk[j]) {
        ++i;
      } else if (bk[j] < ak[i]) {
        ++j;
      } else {
        join[i++] = static_cast<std::int64_t>(j++);
      }
    }
  }

  // Sparse accumulator over B's columns, reset per row of A.
  std::vector<double> acc(b.col_keys().size(), 0.0);
  std::vector<bool> touched(b.col_keys().size(), false);
  std::vector<std::uint32_t> touched_list;
  std::vector<AssocArray::Cell> cells;
  std::vector<double> vals;
  auto ac = a.cells();
  std::size_t i = 0;
  while (i < ac.size()) {
    const auto row = ac[i].row;
    for (; i < ac.size() && ac[i].row == row; ++i) {
      const auto jr = join[ac[i].col];
      if (jr < 0) continue;
      const double av = a.number(i);
      for (auto k = b_row_start[jr]; k < b_row_start[jr + 1]; ++k) {
        const auto col = bc[k].col;
        if (!touched[col]) {
          touched[col] = true;
          touched_list.push_back(col);
        }
        acc[col] += av * b.number(k);
      }
    }
    std::sort(touched_list.begin(), touched_list.end());
    for (auto col : touched_list) {
      cells.push_back({row, col});
      vals.push_back(acc[col]);
      acc[col] = 0.0;
      touched[col] = false;
    }
    touched_list.clear();
  }
  return AssocArray::Builder::numeric(a.row_keys(), b.col_keys(), std::move(cells), std::move(vals));
}

/// Entry (r, c, v) becomes (c, r, v).
inline AssocArray transpose(const AssocArray& a) {
  auto cells = a.cells();
  std::vector<std::uint32_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) {
    return cells[x].col != cells[y].col ? cells[x].col < cells[y].col : cells[x].row < cells[y].row;
  });
  std::vector<AssocArray::Cell> out;
  out.reserve(cells.size());
  for (auto i : order) out.push_back({cells[i].col, cells[i].row});
  if (a.is_numeric()) {
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (auto i : order) vals.push_back(a.number(i));
    return AssocArray::Builder::numeric(a.col_keys(), a.row_keys(), std::move(out), std::move(vals));
  }
  std::vector<std::uint32_t> idx;
  idx.reserve(cells.size());
  const auto& pool = a.string_pool();
  for (auto i : order) {
    idx.push_back(static_cast<std::uint32_t>(std::lower_bound(pool.begin(), pool.end(), a.text(i)) - pool.begin()));
  }
  return AssocArray::Builder::strings(a.col_keys(), a.row_keys(), std::move(out), pool, std::move(idx));
}

inline AssocArray operator+(const AssocArray& a, const AssocArray& b) { return add(a, b); }
inline AssocArray operator-(const AssocArray& a, const AssocArray& b) { return subtract(a, b); }
inline AssocArray operator&(const AssocArray& a, const AssocArray& b) { return elementwise_and(a, b); }
inline AssocArray operator|(const AssocArray& a, const AssocArray& b) { return elementwise_or(a, b); }
inline AssocArray operator*(const AssocArray& a, const AssocArray& b) { return matmul(a, b); }

/// String-mode copy with numbers rendered by format_number.
inline AssocArray to_strings(const AssocArray& a) {
  if (!a.is_numeric()) return a;
  auto t = triples(a);
  std::vector<std::string> vals;
  vals.reserve(t.size());
  for (const auto& v : t.vals) vals.push_back(format_number(std::get<double>(v)));
  return from_string_triples(t.rows, t.cols, vals);
}

/// Numeric-mode copy; every string value must parse as a finite number.
inline AssocArray to_numeric(const AssocArray& a) {
  if (a.is_numeric()) return a;
  auto t = triples(a);
  std::vector<double> vals;
  vals.reserve(t.size());
  for (const auto& v : t.vals) {
    const auto& s = std::get<std::string>(v);
    auto n = parse_number(s);
    if (!n) throw ModeError("value '" + s + "' is not a number");
    vals.push_back(*n);
  }
  return from_numeric_triples(t.rows, t.cols, vals);
}

}  // namespace assocdb
