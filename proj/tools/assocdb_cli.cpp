// assocdb: command-line driver for the table workflow and the ingest/query
// benchmarks. Exit codes: 0 ok, 2 usage, 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "assocdb/assocdb.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;
constexpr const char* kMetaTable = "TedgeMeta";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out;
  std::vector<int> scales{12};
  std::vector<int> workers{1};
  int edge_factor = 16;
  std::optional<std::size_t> batch_chars;
  std::uint64_t seed = 20180101;
  std::vector<std::uint64_t> targets{1, 10, 100, 1000, 10000};
  std::vector<std::string> classes{"SVR", "SVC", "MVR", "MVC"};
  bool ingest_first = false;
  std::string snapshot_dir;

  std::string table;
  std::string transpose;
  bool degree = false;
  std::string file;
  std::string rows = ":";
  std::string cols = ":";
};

std::filesystem::path config_path(const Options& o) {
  if (!o.config.empty()) return o.config;
  if (const char* env = std::getenv("ASSOCDB_CONFIG"); env && *env) return env;
  throw UsageError("no config file: pass --config PATH or set ASSOCDB_CONFIG");
}

assocdb::DbServer open_db(const Options& o) {
  auto db = assocdb::dbsetup("", config_path(o));
  if (o.batch_chars) db.set_batch_chars(*o.batch_chars);
  return db;
}

void validate_bench_flags(const Options& o) {
  if (o.scales.empty() || o.workers.empty()) throw UsageError("--scales and --workers need at least one value");
  for (int s : o.scales) {
    if (s < 1 || s > 30) throw UsageError("scale " + std::to_string(s) + " outside [1, 30]");
  }
  for (int k : o.workers) {
    if (k < 1 || k > 1024) throw UsageError("worker count " + std::to_string(k) + " outside [1, 1024]");
  }
  if (o.edge_factor < 1) throw UsageError("--edge-factor must be positive");
  if (o.batch_chars && *o.batch_chars < 1) throw UsageError("--batch-chars must be positive");
}

assocdb::bench::QueryPlan query_plan(const Options& o) {
  assocdb::bench::QueryPlan plan;
  plan.targets = o.targets;
  plan.classes.clear();
  try {
    for (const auto& c : o.classes) plan.classes.push_back(assocdb::bench::parse_class(c));
    plan.validate();
  } catch (const assocdb::BenchError& e) {
    throw UsageError(e.what());
  }
  plan.seed = o.seed;
  return plan;
}

void drop_bench_tables(const assocdb::DbServer& db) {
  const assocdb::bench::BenchTables names;
  for (const auto& n : {names.edge, names.edge_transpose, names.degree, std::string(kMetaTable)}) {
    db.store().delete_table(n);
  }
}

std::vector<assocdb::bench::BenchRecord> ingest_grid(const Options& o, const assocdb::DbServer& db) {
  std::vector<assocdb::bench::BenchRecord> records;
  for (int s : o.scales) {
    for (int k : o.workers) {
      drop_bench_tables(db);
      assocdb::bench::IngestPlan plan;
      plan.workers = k;
      plan.scale = s;
      plan.edge_factor = o.edge_factor;
      plan.base_seed = o.seed;
      plan.batch_chars = db.batch_chars();
      auto recs = assocdb::bench::run_ingest(plan, db);
      const auto& agg = recs.back();
      std::cout << "ingest s=" << s << " k=" << k << " generated_edges=" << plan.generated_edges()
                << " entries=" << agg.edges << " seconds=" << agg.seconds << " rate=" << agg.rate << '\n';
      if (!o.snapshot_dir.empty()) {
        const auto dir = std::filesystem::path(o.snapshot_dir) / ("s" + std::to_string(s) + "_k" + std::to_string(k));
        std::filesystem::create_directories(dir);
        for (const auto& n : db.tables()) db.store().snapshot(n, dir / (n + ".tbl"));
      }
      records.insert(records.end(), recs.begin(), recs.end());
      auto meta = assocdb::bind_table(db, kMetaTable);
      assocdb::put_triple(meta, {"last_ingest", "last_ingest"}, {"k", "scale"},
                          {std::to_string(k), std::to_string(s)});
    }
  }
  return records;
}

void write_records(const Options& o, const std::string& fallback,
                   const std::vector<assocdb::bench::BenchRecord>& records) {
  const std::string path = o.out.empty() ? fallback : o.out;
  assocdb::bench::write_csv(path, records);
  std::cout << "wrote " << records.size() << " records to " << path << '\n';
}

int cmd_ingest(const Options& o) {
  validate_bench_flags(o);
  auto db = open_db(o);
  auto records = ingest_grid(o, db);
  db.flush();
  write_records(o, "ingest.csv", records);
  return kExitOk;
}

int cmd_query(const Options& o) {
  validate_bench_flags(o);
  auto plan = query_plan(o);
  auto db = open_db(o);
  if (o.ingest_first) {
    Options first = o;
    first.scales = {o.scales.front()};
    first.workers = {o.workers.front()};
    ingest_grid(first, db);
    db.flush();
  }
  if (db.store().has_table(kMetaTable)) {
    auto meta = assocdb::query(assocdb::TableBinding(db, kMetaTable), "last_ingest,", ":");
    if (auto k = meta.at("last_ingest", "k")) plan.workers = std::stoi(std::get<std::string>(*k));
    if (auto s = meta.at("last_ingest", "scale")) plan.scale = std::stoi(std::get<std::string>(*s));
  }
  for (const auto* n : {"Tedge", "TedgeT", "TedgeDeg"}) {
    if (!db.store().has_table(n)) throw assocdb::BenchError(std::string("table ") + n + " missing; run ingest first");
  }
  auto records = assocdb::bench::run_query(plan, db);
  write_records(o, "query.csv", records);
  return kExitOk;
}

void require_table(const Options& o) {
  if (o.table.empty()) throw UsageError("--table is required");
  if (o.degree && !o.transpose.empty()) throw UsageError("--degree and --transpose are mutually exclusive");
}

int cmd_put(const Options& o) {
  require_table(o);
  if (o.file.empty()) throw UsageError("--file is required");
  auto triples = assocdb::read_triples_tsv(o.file);
  auto db = open_db(o);
  assocdb::IngestStats stats;
  if (!o.transpose.empty()) {
    stats = assocdb::put_triple(assocdb::bind_pair(db, o.table, o.transpose), triples);
  } else if (o.degree) {
    stats = assocdb::put_triple(assocdb::bind_degree_table(db, o.table), triples);
  } else {
    stats = assocdb::put_triple(assocdb::bind_table(db, o.table), triples);
  }
  db.flush();
  std::cerr << "put " << stats.entries << " entries in " << stats.batches << " batches\n";
  return kExitOk;
}

int cmd_get(const Options& o) {
  require_table(o);
  assocdb::KeySpec rows, cols;
  try {
    rows = assocdb::KeySpec::parse(o.rows);
    cols = assocdb::KeySpec::parse(o.cols);
  } catch (const assocdb::KeyListError& e) {
    throw UsageError(e.what());
  }
  auto db = open_db(o);
  assocdb::AssocArray result;
  if (!o.transpose.empty()) {
    result = assocdb::query(assocdb::TablePair(db, o.table, o.transpose), rows, cols);
  } else {
    result = assocdb::query(assocdb::TableBinding(db, o.table), rows, cols);
  }
  if (o.out.empty()) {
    assocdb::write_triples_tsv(std::cout, result);
  } else {
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw assocdb::FormatError("cannot write " + o.out);
    assocdb::write_triples_tsv(out, result);
  }
  return kExitOk;
}

int cmd_delete(const Options& o) {
  require_table(o);
  auto db = open_db(o);
  if (!o.transpose.empty()) {
    assocdb::drop(assocdb::TablePair(db, o.table, o.transpose));
  } else {
    assocdb::drop(assocdb::TableBinding(db, o.table));
  }
  db.flush();
  return kExitOk;
}

int cmd_tables(const Options& o) {
  auto db = open_db(o);
  for (const auto& n : db.tables()) std::cout << n << '\n';
  return kExitOk;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Config file (falls back to $ASSOCDB_CONFIG)");
  cmd->add_option("--batch-chars", o.batch_chars, "Per-batch character budget (overrides config)");
}

void add_bench(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "CSV output path");
  cmd->add_option("--scales", o.scales, "Graph scales, comma separated")->delimiter(',');
  cmd->add_option("--workers", o.workers, "Worker counts, comma separated")->delimiter(',');
  cmd->add_option("--edge-factor", o.edge_factor, "Edges per vertex");
  cmd->add_option("--seed", o.seed, "Base seed for generation and vertex sampling");
  cmd->add_option("--snapshot-dir", o.snapshot_dir, "Snapshot tables here after each ingest grid point");
}

void add_table(CLI::App* cmd, Options& o) {
  cmd->add_option("--table", o.table, "Table name");
  cmd->add_option("--transpose", o.transpose, "Transpose table name (binds a table pair)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Associative arrays over an embedded sorted key-value store"};
  app.require_subcommand(1);
  Options o;

  auto* ingest = app.add_subcommand("ingest", "Parallel power-law graph ingest benchmark");
  add_common(ingest, o);
  add_bench(ingest, o);

  auto* query = app.add_subcommand("query", "Degree-stratified query benchmark");
  add_common(query, o);
  add_bench(query, o);
  query->add_option("--targets", o.targets, "Degree targets, comma separated")->delimiter(',');
  query->add_option("--classes", o.classes, "Query classes (SVR,SVC,MVR,MVC)")->delimiter(',');
  query->add_flag("--ingest-first", o.ingest_first, "Ingest the first --scales/--workers point before querying");

  auto* put = app.add_subcommand("put", "Ingest a TSV triple file into a table or table pair");
  add_common(put, o);
  add_table(put, o);
  put->add_option("--file", o.file, "TSV triple file");
  put->add_flag("--degree", o.degree, "Bind the table with a summing combiner");

  auto* get = app.add_subcommand("get", "Query a table and print TSV triples");
  add_common(get, o);
  add_table(get, o);
  get->add_option("--rows", o.rows, "Row keys as a D4M string list (default ':')");
  get->add_option("--cols", o.cols, "Column keys as a D4M string list (default ':')");
  get->add_option("--out", o.out, "Write TSV here instead of stdout");

  auto* del = app.add_subcommand("delete", "Delete a table or table pair");
  add_common(del, o);
  add_table(del, o);

  auto* tables = app.add_subcommand("tables", "List tables");
  add_common(tables, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(o);
    if (query->parsed()) return cmd_query(o);
    if (put->parsed()) return cmd_put(o);
    if (get->parsed()) return cmd_get(o);
    if (del->parsed()) return cmd_delete(o);
    if (tables->parsed()) return cmd_tables(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
