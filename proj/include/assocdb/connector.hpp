#pragma once

#include <charconv>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "assocdb/assoc.hpp"
#include "assocdb/errors.hpp"
#include "assocdb/keyspec.hpp"
#include "assocdb/kvstore.hpp"
#include "assocdb/number.hpp"
#include "assocdb/tsv.hpp"

namespace assocdb {

inline constexpr std::size_t kDefaultBatchChars = 500000;

struct DbConfig {
  std::string instance;
  std::filesystem::path data_dir;  // empty: in-memory only
  std::size_t batch_chars = kDefaultBatchChars;
};

/// Parses `key=value` lines. `#` starts a comment; surrounding blanks are
/// ignored. Recognized keys: instance, data_dir, batch_chars.
inline DbConfig parse_config(std::istream& in) {
  auto trim = [](std::string_view s) {
    const auto* ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return std::string_view{};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  DbConfig cfg;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "instance") {
      cfg.instance = value;
    } else if (key == "data_dir") {
      cfg.data_dir = std::filesystem::path(std::string(value));
    } else if (key == "batch_chars") {
      std::size_t n = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
      if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size() || n == 0) {
        throw ConfigError("config line " + std::to_string(lineno) + ": batch_chars must be a positive integer");
      }
      cfg.batch_chars = n;
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
    }
  }
  return cfg;
}

/// Reads a config file. A relative data_dir is resolved against the
/// directory holding the file.
inline DbConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  auto cfg = parse_config(in);
  if (!cfg.data_dir.empty() && cfg.data_dir.is_relative()) cfg.data_dir = path.parent_path() / cfg.data_dir;
  return cfg;
}

/// Kept for parity with the JVM-backed workflow; the embedded store needs
/// no runtime start-up.
inline void dbinit() {}

class TableBinding;
class TablePair;

/// Connection handle. Copies share the same store.
class DbServer {
 public:
  explicit DbServer(std::string instance, std::size_t batch_chars = kDefaultBatchChars,
                    std::filesystem::path data_dir = {})
      : instance_(std::move(instance)),
        store_(std::make_shared<kv::Store>()),
        batch_chars_(batch_chars),
        data_dir_(std::move(data_dir)) {
    if (batch_chars_ < 1) throw ConfigError("batch budget must be at least 1 character");
    if (!data_dir_.empty()) store_->load_dir(data_dir_);
  }

  const std::string& instance() const { return instance_; }
  std::size_t batch_chars() const { return batch_chars_; }
  void set_batch_chars(std::size_t n) {
    if (n < 1) throw ConfigError("batch budget must be at least 1 character");
    batch_chars_ = n;
  }
  const std::filesystem::path& data_dir() const { return data_dir_; }
  kv::Store& store() const { return *store_; }

  std::vector<std::string> tables() const { return store_->list_tables(); }

  /// Persists all tables when the server was configured with a data_dir.
  void flush() const {
    if (!data_dir_.empty()) store_->save_dir(data_dir_);
  }

  TableBinding table(const std::string& name) const;
  TableBinding operator[](const std::string& name) const;
  TablePair pair(const std::string& name, const std::string& transpose_name,
                 kv::Combiner combiner = kv::Combiner::None) const;
  TableBinding degree_table(const std::string& name) const;

 private:
  std::string instance_;
  std::shared_ptr<kv::Store> store_;
  std::size_t batch_chars_;
  std::filesystem::path data_dir_;
};

/// Opens the instance described by a config file. A non-empty `instance`
/// argument names the handle; otherwise the config's `instance` key does.
inline DbServer dbsetup(std::string_view instance, const std::filesystem::path& config_path) {
  auto cfg = load_config(config_path);
  std::string name = !instance.empty() ? std::string(instance) : cfg.instance;
  return DbServer(std::move(name), cfg.batch_chars, cfg.data_dir);
}

struct IngestStats {
  std::size_t entries = 0;
  std::size_t batches = 0;
  double seconds = 0.0;
};

class TableBinding {
 public:
  TableBinding(DbServer db, std::string name) : db_(std::move(db)), name_(std::move(name)) {}

  const DbServer& server() const { return db_; }
  const std::string& name() const { return name_; }
  std::shared_ptr<kv::Table> handle() const { return db_.store().table(name_); }

  AssocArray operator()(const KeySpec& rows, const KeySpec& cols) const;

 private:
  DbServer db_;
  std::string name_;
};

/// A table plus its transpose. Every put writes each entry to both.
class TablePair {
 public:
  TablePair(DbServer db, std::string name, std::string transpose_name)
      : db_(std::move(db)), name_(std::move(name)), transpose_name_(std::move(transpose_name)) {
    if (name_ == transpose_name_) throw TableConflict("table pair needs two distinct names, got " + name_ + " twice");
  }

  const DbServer& server() const { return db_; }
  const std::string& name() const { return name_; }
  const std::string& transpose_name() const { return transpose_name_; }
  TableBinding main() const { return TableBinding(db_, name_); }
  TableBinding transposed() const { return TableBinding(db_, transpose_name_); }

  AssocArray operator()(const KeySpec& rows, const KeySpec& cols) const;

 private:
  DbServer db_;
  std::string name_;
  std::string transpose_name_;
};

inline TableBinding bind_table(const DbServer& db, const std::string& name) {
  db.store().create_table(name, kv::Combiner::None);
  return TableBinding(db, name);
}

inline TablePair bind_pair(const DbServer& db, const std::string& name, const std::string& transpose_name,
                           kv::Combiner combiner = kv::Combiner::None) {
  TablePair pair(db, name, transpose_name);
  db.store().create_table(name, combiner);
  db.store().create_table(transpose_name, combiner);
  return pair;
}

/// Binds a table whose values accumulate by decimal sum.
inline TableBinding bind_degree_table(const DbServer& db, const std::string& name) {
  db.store().create_table(name, kv::Combiner::SumDecimal);
  return TableBinding(db, name);
}

inline TableBinding DbServer::table(const std::string& name) const { return bind_table(*this, name); }
inline TableBinding DbServer::operator[](const std::string& name) const { return bind_table(*this, name); }
inline TablePair DbServer::pair(const std::string& name, const std::string& transpose_name,
                                kv::Combiner combiner) const {
  return bind_pair(*this, name, transpose_name, combiner);
}
inline TableBinding DbServer::degree_table(const std::string& name) const { return bind_degree_table(*this, name); }

namespace detail {

// Accumulates writes for one table and ships a batch whenever the next
// triple would push the summed row+col+value length past the budget.
class BatchWriter {
 public:
  BatchWriter(std::shared_ptr<kv::Table> table, std::size_t budget, IngestStats& stats)
      : table_(std::move(table)), budget_(budget), stats_(stats) {}

  void add(std::string row, std::string col, std::string value) {
    const std::size_t n = row.size() + col.size() + value.size();
    if (!pending_.empty() && chars_ + n > budget_) flush();
    pending_.push_back({std::move(row), std::move(col), std::move(value)});
    chars_ += n;
  }

  void flush() {
    if (pending_.empty()) return;
    table_->apply(pending_);
    ++stats_.batches;
    stats_.entries += pending_.size();
    pending_.clear();
    chars_ = 0;
  }

 private:
  std::shared_ptr<kv::Table> table_;
  std::size_t budget_;
  IngestStats& stats_;
  std::vector<kv::StoreEntry> pending_;
  std::size_t chars_ = 0;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string value_text(const AssocArray& a, std::size_t i) {
  return a.is_numeric() ? format_number(a.number(i)) : a.text(i);
}

}  // namespace detail

/// Writes every entry of `a`; numeric values are stored as decimals.
inline IngestStats put(const TableBinding& t, const AssocArray& a) {
  detail::Stopwatch clock;
  IngestStats stats;
  detail::BatchWriter main(t.handle(), t.server().batch_chars(), stats);
  auto cells = a.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    main.add(a.row_keys()[cells[i].row], a.col_keys()[cells[i].col], detail::value_text(a, i));
  }
  main.flush();
  stats.seconds = clock.seconds();
  return stats;
}

/// Writes every entry to the main table and its swap to the transpose table.
/// Not atomic across the two tables.
inline IngestStats put(const TablePair& t, const AssocArray& a) {
  detail::Stopwatch clock;
  IngestStats stats;
  const auto budget = t.server().batch_chars();
  detail::BatchWriter main(t.main().handle(), budget, stats);
  detail::BatchWriter trans(t.transposed().handle(), budget, stats);
  auto cells = a.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& r = a.row_keys()[cells[i].row];
    const auto& c = a.col_keys()[cells[i].col];
    auto v = detail::value_text(a, i);
    main.add(r, c, v);
    trans.add(c, r, std::move(v));
  }
  main.flush();
  trans.flush();
  stats.seconds = clock.seconds();
  return stats;
}

/// Writes the triples in order without merging duplicates; the table's
/// combiner decides what repeated keys mean.
inline IngestStats put_triple(const TableBinding& t, const std::vector<std::string>& rows,
                              const std::vector<std::string>& cols, const std::vector<std::string>& vals) {
  detail::check_lengths(rows.size(), cols.size(), vals.size());
  detail::Stopwatch clock;
  IngestStats stats;
  detail::BatchWriter main(t.handle(), t.server().batch_chars(), stats);
  for (std::size_t i = 0; i < rows.size(); ++i) main.add(rows[i], cols[i], vals[i]);
  main.flush();
  stats.seconds = clock.seconds();
  return stats;
}

inline IngestStats put_triple(const TablePair& t, const std::vector<std::string>& rows,
                              const std::vector<std::string>& cols, const std::vector<std::string>& vals) {
  detail::check_lengths(rows.size(), cols.size(), vals.size());
  detail::Stopwatch clock;
  IngestStats stats;
  const auto budget = t.server().batch_chars();
  detail::BatchWriter main(t.main().handle(), budget, stats);
  detail::BatchWriter trans(t.transposed().handle(), budget, stats);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    main.add(rows[i], cols[i], vals[i]);
    trans.add(cols[i], rows[i], vals[i]);
  }
  main.flush();
  trans.flush();
  stats.seconds = clock.seconds();
  return stats;
}

template <class Binding>
IngestStats put_triple(const Binding& t, const StringTriples& triples) {
  return put_triple(t, triples.rows, triples.cols, triples.vals);
}

namespace detail {

inline std::vector<kv::RowRange> row_ranges(const KeySpec& spec) {
  return std::visit(
      [](const auto& s) -> std::vector<kv::RowRange> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KeySpec::All>) {
          return {kv::RowRange::all()};
        } else if constexpr (std::is_same_v<T, KeySpec::List>) {
          std::vector<kv::RowRange> out;
          for (const auto& k : s.keys) out.push_back(kv::RowRange::exact(k));
          return out;
        } else if constexpr (std::is_same_v<T, KeySpec::Range>) {
          return {kv::RowRange::closed(s.first, s.last)};
        } else if constexpr (std::is_same_v<T, KeySpec::Prefix>) {
          return {kv::RowRange::prefix(s.prefix)};
        } else {
          throw UnsupportedQuery("positional key specs cannot be used against database tables");
        }
      },
      spec.get());
}

// Store-side column filter where one exists; callers still apply the full
// KeySpec predicate.
inline kv::ColumnFilter column_filter(const KeySpec& spec) {
  if (const auto* p = std::get_if<KeySpec::Prefix>(&spec.get())) return kv::ColumnFilter::prefix(p->prefix);
  if (const auto* l = std::get_if<KeySpec::List>(&spec.get()); l && l->keys.size() == 1) {
    return kv::ColumnFilter::exact(l->keys.front());
  }
  return kv::ColumnFilter::any();
}

// Scans `table` by the row spec, keeping columns matching `cols`. With
// `swap`, each stored (r, c, v) is returned as (c, r, v).
inline AssocArray scan_to_array(const kv::Table& table, const KeySpec& rows, const KeySpec& cols, bool swap) {
  if (rows.is_positional() || cols.is_positional()) {
    throw UnsupportedQuery("positional key specs cannot be used against database tables");
  }
  StringTriples t;
  const auto filter = column_filter(cols);
  for (const auto& range : row_ranges(rows)) {
    for (auto& e : table.scan(range, filter)) {
      if (!cols.is_all() && !cols.matches(e.col)) continue;
      if (swap) {
        t.push_back(std::move(e.col), std::move(e.row), std::move(e.value));
      } else {
        t.push_back(std::move(e.row), std::move(e.col), std::move(e.value));
      }
    }
  }
  return from_string_triples(t.rows, t.cols, t.vals);
}

}  // namespace detail

/// Sub-array of a table. Results are String mode, values as stored.
inline AssocArray query(const TableBinding& t, const KeySpec& rows, const KeySpec& cols) {
  return detail::scan_to_array(*t.handle(), rows, cols, false);
}

/// Column-only queries read the transpose table by row and swap back; any
/// query constraining rows reads the main table.
inline AssocArray query(const TablePair& t, const KeySpec& rows, const KeySpec& cols) {
  if (rows.is_all() && !cols.is_all()) {
    return detail::scan_to_array(*t.transposed().handle(), cols, KeySpec::all(), true);
  }
  return detail::scan_to_array(*t.main().handle(), rows, cols, false);
}

inline AssocArray TableBinding::operator()(const KeySpec& rows, const KeySpec& cols) const {
  return query(*this, rows, cols);
}
inline AssocArray TablePair::operator()(const KeySpec& rows, const KeySpec& cols) const {
  return query(*this, rows, cols);
}

inline void drop(const TableBinding& t) { t.server().store().delete_table(t.name()); }

inline void drop(const TablePair& t) {
  t.server().store().delete_table(t.name());
  t.server().store().delete_table(t.transpose_name());
}

}  // namespace assocdb
