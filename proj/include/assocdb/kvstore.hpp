#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "assocdb/errors.hpp"
#include "assocdb/number.hpp"
#include "assocdb/tsv.hpp"

namespace assocdb::kv {

enum class Combiner { None, SumDecimal };

inline const char* combiner_name(Combiner c) { return c == Combiner::SumDecimal ? "sum" : "none"; }

struct StoreEntry {
  std::string row;
  std::string col;
  std::string value;
  bool operator==(const StoreEntry&) const = default;
};

struct MutationBatch {
  std::string table;
  std::vector<StoreEntry> writes;
};

/// Row selection for scans.
class RowRange {
 public:
  struct All {};
  struct Closed {
    std::string first;
    std::string last;
  };
  struct Prefix {
    std::string prefix;
  };

  static RowRange all() { return RowRange(All{}); }
  static RowRange closed(std::string first, std::string last) {
    return RowRange(Closed{std::move(first), std::move(last)});
  }
  static RowRange exact(std::string key) { return closed(key, key); }
  static RowRange prefix(std::string p) { return RowRange(Prefix{std::move(p)}); }

  const std::variant<All, Closed, Prefix>& get() const { return v_; }

 private:
  explicit RowRange(std::variant<All, Closed, Prefix> v) : v_(std::move(v)) {}
  std::variant<All, Closed, Prefix> v_;
};

struct ColumnFilter {
  enum class Kind { Any, Exact, Prefix };
  Kind kind = Kind::Any;
  std::string text;

  static ColumnFilter any() { return {}; }
  static ColumnFilter exact(std::string c) { return {Kind::Exact, std::move(c)}; }
  static ColumnFilter prefix(std::string p) { return {Kind::Prefix, std::move(p)}; }

  bool matches(std::string_view col) const {
    switch (kind) {
      case Kind::Any: return true;
      case Kind::Exact: return col == text;
      case Kind::Prefix: return col.starts_with(text);
    }
    return false;
  }
};

/// One named table of (row, col) -> value, sorted by (row, col) bytes.
///
/// Batches apply under an exclusive lock and scans copy their result under a
/// shared lock, so a scan never observes part of a batch.
class Table {
 public:
  Table(std::string name, Combiner combiner) : name_(std::move(name)), combiner_(combiner) {}

  const std::string& name() const { return name_; }
  Combiner combiner() const { return combiner_; }

  /// Applies all writes atomically, in order. Nothing is applied if any
  /// write is invalid.
  void apply(const std::vector<StoreEntry>& writes) {
    if (writes.empty()) return;
    std::vector<double> incoming;
    for (const auto& w : writes) {
      if (detail::has_reserved_byte(w.row) || detail::has_reserved_byte(w.col) ||
          detail::has_reserved_byte(w.value)) {
        throw FormatError("tab or newline in entry key or value (table " + name_ + ")");
      }
      if (combiner_ == Combiner::SumDecimal) {
        auto v = parse_number(w.value);
        if (!v) throw FormatError("table " + name_ + " sums decimals; cannot parse '" + w.value + "'");
        incoming.push_back(*v);
      }
    }
    std::unique_lock lock(mu_);
    for (std::size_t i = 0; i < writes.size(); ++i) {
      const auto& w = writes[i];
      if (combiner_ == Combiner::None) {
        contents_.insert_or_assign(Key{w.row, w.col}, w.value);
        continue;
      }
      auto [it, inserted] = contents_.try_emplace(Key{w.row, w.col}, std::string());
      double sum = incoming[i];
      if (!inserted) sum += *parse_number(it->second);
      it->second = format_number(sum);
    }
  }

  std::vector<StoreEntry> scan(const RowRange& rows = RowRange::all(),
                               const ColumnFilter& cols = ColumnFilter::any()) const {
    std::vector<StoreEntry> out;
    std::shared_lock lock(mu_);
    auto emit = [&](const auto& kv) {
      if (cols.matches(kv.first.second)) out.push_back({kv.first.first, kv.first.second, kv.second});
    };
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, RowRange::All>) {
            for (const auto& kv : contents_) emit(kv);
          } else if constexpr (std::is_same_v<T, RowRange::Closed>) {
            if (r.last < r.first) return;
            for (auto it = contents_.lower_bound(Key{r.first, {}}); it != contents_.end() && it->first.first <= r.last;
                 ++it) {
              emit(*it);
            }
          } else {
            for (auto it = contents_.lower_bound(Key{r.prefix, {}});
                 it != contents_.end() && it->first.first.starts_with(r.prefix); ++it) {
              emit(*it);
            }
          }
        },
        rows.get());
    return out;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return contents_.size();
  }

  /// Header line then one sorted entry per line.
  void snapshot(std::ostream& out) const {
    std::shared_lock lock(mu_);
    out << "#table:" << name_ << "\tcombiner:" << combiner_name(combiner_) << '\n';
    for (const auto& [k, v] : contents_) out << k.first << '\t' << k.second << '\t' << v << '\n';
  }

  static std::shared_ptr<Table> load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("snapshot: missing header");
    std::vector<std::string_view> f;
    if (!detail::split_tabs(line, 2, f) || !f[0].starts_with("#table:") || !f[1].starts_with("combiner:")) {
      throw FormatError("snapshot: malformed header '" + line + "'");
    }
    std::string name(f[0].substr(7));
    auto comb_text = f[1].substr(9);
    Combiner comb;
    if (comb_text == "none") {
      comb = Combiner::None;
    } else if (comb_text == "sum") {
      comb = Combiner::SumDecimal;
    } else {
      throw FormatError("snapshot: unknown combiner '" + std::string(comb_text) + "'");
    }
    if (name.empty()) throw FormatError("snapshot: empty table name");
    auto table = std::make_shared<Table>(name, comb);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!detail::split_tabs(line, 3, f)) {
        throw FormatError("snapshot line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
      }
      Key key{std::string(f[0]), std::string(f[1])};
      if (!table->contents_.empty() && !(table->contents_.rbegin()->first < key)) {
        throw FormatError("snapshot line " + std::to_string(lineno) + ": entries not strictly sorted");
      }
      if (comb == Combiner::SumDecimal && !parse_number(f[2])) {
        throw FormatError("snapshot line " + std::to_string(lineno) + ": non-numeric value in sum table");
      }
      table->contents_.emplace_hint(table->contents_.end(), std::move(key), std::string(f[2]));
    }
    if (in.bad()) throw FormatError("snapshot: read error");
    return table;
  }

 private:
  using Key = std::pair<std::string, std::string>;

  std::string name_;
  Combiner combiner_;
  mutable std::shared_mutex mu_;
  std::map<Key, std::string> contents_;
};

/// In-memory collection of named tables. Thread-safe; operations on
/// different tables do not contend beyond the catalog lookup.
class Store {
 public:
  Store() = default;
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  static void check_name(std::string_view name) {
    if (name.empty() || name == "." || name == ".." || name.find_first_of("/\\\t\n") != std::string_view::npos) {
      throw TableConflict("invalid table name '" + std::string(name) + "'");
    }
  }

  /// Creates `name`, or returns the existing table when the combiner matches.
  std::shared_ptr<Table> create_table(const std::string& name, Combiner combiner = Combiner::None) {
    check_name(name);
    std::unique_lock lock(mu_);
    auto it = tables_.find(name);
    if (it != tables_.end()) {
      if (it->second->combiner() != combiner) {
        throw TableConflict("table " + name + " exists with combiner " + combiner_name(it->second->combiner()));
      }
      return it->second;
    }
    auto t = std::make_shared<Table>(name, combiner);
    tables_.emplace(name, t);
    return t;
  }

  void delete_table(const std::string& name) {
    std::unique_lock lock(mu_);
    tables_.erase(name);
  }

  bool has_table(const std::string& name) const {
    std::shared_lock lock(mu_);
    return tables_.contains(name);
  }

  std::shared_ptr<Table> table(const std::string& name) const {
    std::shared_lock lock(mu_);
    auto it = tables_.find(name);
    if (it == tables_.end()) throw TableNotFound(name);
    return it->second;
  }

  void apply_batch(const MutationBatch& b) { table(b.table)->apply(b.writes); }

  std::vector<StoreEntry> scan(const std::string& name, const RowRange& rows = RowRange::all(),
                               const ColumnFilter& cols = ColumnFilter::any()) const {
    return table(name)->scan(rows, cols);
  }

  std::vector<std::string> list_tables() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> names;
    for (const auto& [n, t] : tables_) names.push_back(n);
    return names;
  }

  std::size_t entry_count(const std::string& name) const { return table(name)->size(); }

  void snapshot(const std::string& name, std::ostream& out) const { table(name)->snapshot(out); }

  void snapshot(const std::string& name, const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write snapshot: " + path.string());
    snapshot(name, out);
    out.flush();
    if (!out) throw FormatError("write failed: " + path.string());
  }

  std::string snapshot_string(const std::string& name) const {
    std::ostringstream out;
    snapshot(name, out);
    return out.str();
  }

  /// Loads a snapshot, replacing any table of the same name.
  std::shared_ptr<Table> restore(std::istream& in) {
    auto t = Table::load(in);
    check_name(t->name());
    std::unique_lock lock(mu_);
    tables_.insert_or_assign(t->name(), t);
    return t;
  }

  std::shared_ptr<Table> restore(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open snapshot: " + path.string());
    return restore(in);
  }

  /// Writes every table to `<dir>/<name>.tbl` and removes files of tables
  /// no longer present.
  void save_dir(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto names = list_tables();
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".tbl") continue;
      auto stem = entry.path().stem().string();
      if (!std::binary_search(names.begin(), names.end(), stem)) fs::remove(entry.path());
    }
    for (const auto& n : names) {
      if (has_table(n)) snapshot(n, dir / (n + ".tbl"));
    }
  }

  void load_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(dir)) return;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".tbl") restore(entry.path());
    }
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Table>> tables_;
};

}  // namespace assocdb::kv
