#pragma once

#include <algorithm>
#include <barrier>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "assocdb/connector.hpp"
#include "assocdb/errors.hpp"
#include "assocdb/graphgen.hpp"
#include "assocdb/number.hpp"

namespace assocdb::bench {

/// Store-side names for the edge table pair and the degree table.
struct BenchTables {
  std::string edge = "Tedge";
  std::string edge_transpose = "TedgeT";
  std::string degree = "TedgeDeg";
};

struct IngestPlan {
  int workers = 1;
  int scale = 12;
  int edge_factor = 16;
  std::uint64_t base_seed = 20180101;
  std::size_t batch_chars = kDefaultBatchChars;
  graph::QuadrantProbs probs;

  // Each generated edge lands in the main and the transpose table.
  static constexpr std::uint64_t kEntriesPerEdge = 2;

  std::uint64_t edges_per_worker() const { return static_cast<std::uint64_t>(edge_factor) << scale; }
  std::uint64_t generated_edges() const { return static_cast<std::uint64_t>(workers) * edges_per_worker(); }
  std::uint64_t ingested_entries() const { return generated_edges() * kEntriesPerEdge; }

  graph::GenParams worker_params(int worker) const {
    return graph::GenParams{scale, edge_factor, base_seed + static_cast<std::uint64_t>(worker), probs};
  }

  void validate() const {
    if (workers < 1) throw BenchError("worker count must be at least 1");
    if (batch_chars < 1) throw BenchError("batch budget must be at least 1 character");
    worker_params(0).validate();
  }
};

enum class QueryClass { SVR, SVC, MVR, MVC };

inline const char* class_name(QueryClass c) {
  switch (c) {
    case QueryClass::SVR: return "SVR";
    case QueryClass::SVC: return "SVC";
    case QueryClass::MVR: return "MVR";
    case QueryClass::MVC: return "MVC";
  }
  return "?";
}

inline QueryClass parse_class(std::string_view s) {
  if (s == "SVR") return QueryClass::SVR;
  if (s == "SVC") return QueryClass::SVC;
  if (s == "MVR") return QueryClass::MVR;
  if (s == "MVC") return QueryClass::MVC;
  throw BenchError("unknown query class '" + std::string(s) + "'");
}

struct QueryPlan {
  std::vector<std::uint64_t> targets{1, 10, 100, 1000, 10000};
  std::size_t multi_count = 5;
  std::vector<QueryClass> classes{QueryClass::SVR, QueryClass::SVC, QueryClass::MVR, QueryClass::MVC};
  std::uint64_t seed = 20180101;
  // Labels copied into the records; they do not affect what is queried.
  int workers = 0;
  int scale = 0;

  void validate() const {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i] == 0) throw BenchError("degree targets must be positive");
      if (i > 0 && targets[i] <= targets[i - 1]) throw BenchError("degree targets must be strictly increasing");
    }
    if (multi_count < 1) throw BenchError("multi-vertex query needs at least one vertex");
  }
};

struct BenchRecord {
  std::string experiment;  // "ingest" or "query"
  std::string cls;         // "aggregate", "worker<i>", or a query class
  int k = 0;
  int scale = 0;
  std::uint64_t target_degree = 0;
  std::uint64_t edges = 0;
  double seconds = 0.0;
  double rate = 0.0;

  bool operator==(const BenchRecord&) const = default;
};

namespace detail {

inline BenchRecord make_record(std::string experiment, std::string cls, int k, int scale, std::uint64_t target,
                               std::uint64_t edges, double seconds) {
  seconds = std::max(seconds, 1e-9);
  return BenchRecord{std::move(experiment), std::move(cls), k,       scale,
                     target,                edges,          seconds, static_cast<double>(edges) / seconds};
}

inline std::uint64_t sum_values(const AssocArray& a) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.nnz(); ++i) {
    if (a.is_numeric()) {
      total += a.number(i);
    } else {
      auto v = parse_number(a.text(i));
      if (!v) throw BenchError("non-numeric edge value '" + a.text(i) + "'");
      total += *v;
    }
  }
  return static_cast<std::uint64_t>(total);
}

}  // namespace detail

/// Parallel ingest. Each of `plan.workers` threads generates its own graph
/// (seed = base_seed + worker index), waits at a common barrier, then writes
/// its adjacency array to the edge pair and its degree counts to the degree
/// table. Only the writes are timed.
///
/// Edge tables are created with a summing combiner so graphs from different
/// workers that share an edge accumulate multiplicity instead of overwriting.
///
/// Returns one record per worker followed by the aggregate, whose elapsed
/// time is the slowest worker's.
inline std::vector<BenchRecord> run_ingest(const IngestPlan& plan, const DbServer& db, const BenchTables& names = {}) {
  plan.validate();
  auto& store = db.store();
  for (const auto* n : {&names.edge, &names.edge_transpose, &names.degree}) {
    if (!store.has_table(*n)) continue;
    if (store.entry_count(*n) > 0) throw BenchError("table " + *n + " is not empty; refusing to ingest");
    store.delete_table(*n);
  }
  DbServer server = db;
  server.set_batch_chars(plan.batch_chars);
  const auto pair = bind_pair(server, names.edge, names.edge_transpose, kv::Combiner::SumDecimal);
  const auto deg = bind_degree_table(server, names.degree);

  const int k = plan.workers;
  std::barrier<> start(k);
  std::vector<double> elapsed(static_cast<std::size_t>(k), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
  {
    std::vector<std::jthread> workers;
    for (int w = 0; w < k; ++w) {
      workers.emplace_back([&, w] {
        const auto idx = static_cast<std::size_t>(w);
        AssocArray adjacency;
        graph::DegreeTriples degrees;
        try {
          const auto edges = graph::generate(plan.worker_params(w));
          adjacency = graph::to_adjacency(edges);
          degrees = graph::degrees(edges);
        } catch (...) {
          errors[idx] = std::current_exception();
          start.arrive_and_drop();
          return;
        }
        start.arrive_and_wait();
        try {
          assocdb::detail::Stopwatch clock;
          put(pair, adjacency);
          put_triple(deg, degrees.out);
          put_triple(deg, degrees.in);
          elapsed[idx] = clock.seconds();
        } catch (...) {
          errors[idx] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<BenchRecord> records;
  const auto per_worker = plan.edges_per_worker() * IngestPlan::kEntriesPerEdge;
  for (int w = 0; w < k; ++w) {
    records.push_back(detail::make_record("ingest", "worker" + std::to_string(w), k, plan.scale, 0, per_worker,
                                          elapsed[static_cast<std::size_t>(w)]));
  }
  records.push_back(detail::make_record("ingest", "aggregate", k, plan.scale, 0, plan.ingested_entries(),
                                        *std::max_element(elapsed.begin(), elapsed.end())));
  return records;
}

enum class Direction { Out, In };

/// Picks `count` vertices whose degree is closest to `target`. Candidates
/// are ranked by |degree - target| then vertex key; the cohort is every
/// vertex at least as close as the count-th candidate, and the result is a
/// seeded sample from it. Deterministic for equal inputs.
inline std::vector<std::string> select_vertices(const TableBinding& degree_table, std::uint64_t target,
                                                std::size_t count, Direction which, std::uint64_t seed) {
  const char* col = which == Direction::Out ? graph::kOutDegree : graph::kInDegree;
  auto entries = degree_table.handle()->scan(kv::RowRange::all(), kv::ColumnFilter::exact(col));
  if (entries.empty()) throw BenchError("degree table " + degree_table.name() + " has no " + col + " entries");

  struct Candidate {
    std::uint64_t distance;
    std::string key;
  };
  std::vector<Candidate> ranked;
  ranked.reserve(entries.size());
  for (auto& e : entries) {
    auto d = parse_number(e.value);
    if (!d) throw BenchError("non-numeric degree for vertex " + e.row);
    const auto deg = static_cast<std::uint64_t>(*d);
    ranked.push_back({deg > target ? deg - target : target - deg, std::move(e.row)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.key < b.key;
  });
  count = std::min(count, ranked.size());
  if (count == 0) return {};
  const auto cutoff = ranked[count - 1].distance;
  std::size_t cohort = count;
  while (cohort < ranked.size() && ranked[cohort].distance <= cutoff) ++cohort;

  // Partial Fisher-Yates over the cohort.
  graph::detail::EdgeRng rng(seed, target * 2 + (which == Direction::In ? 1 : 0));
  std::vector<std::string> picked;
  for (std::size_t i = 0; i < count; ++i) {
    const auto span = static_cast<std::uint64_t>(cohort - i);
    const auto j = i + static_cast<std::size_t>((static_cast<unsigned __int128>(rng.next()) * span) >> 64);
    std::swap(ranked[i], ranked[j]);
    picked.push_back(ranked[i].key);
  }
  return picked;
}

/// Degree-stratified query benchmark over an ingested edge pair. For each
/// target the same out-degree and in-degree samples serve every class: the
/// single-vertex classes use the first sampled vertex.
///
/// Every query's returned edge count (sum of stored multiplicities) is
/// checked against the degree table; a mismatch throws BenchError.
inline std::vector<BenchRecord> run_query(const QueryPlan& plan, const DbServer& db, const BenchTables& names = {}) {
  plan.validate();
  const TablePair pair(db, names.edge, names.edge_transpose);
  const TableBinding deg(db, names.degree);
  for (const auto* n : {&names.edge, &names.edge_transpose, &names.degree}) {
    if (db.store().entry_count(*n) == 0) throw BenchError("table " + *n + " is empty; run an ingest first");
  }

  std::vector<BenchRecord> records;
  if (plan.classes.empty()) return records;
  for (auto target : plan.targets) {
    const auto out_keys = select_vertices(deg, target, plan.multi_count, Direction::Out, plan.seed);
    const auto in_keys = select_vertices(deg, target, plan.multi_count, Direction::In, plan.seed);
    for (auto cls : plan.classes) {
      const bool row = cls == QueryClass::SVR || cls == QueryClass::MVR;
      const bool single = cls == QueryClass::SVR || cls == QueryClass::SVC;
      const auto& pool = row ? out_keys : in_keys;
      std::vector<std::string> keys(pool.begin(), single ? pool.begin() + 1 : pool.end());
      const auto spec = KeySpec::list(keys);
      auto run = [&] { return row ? query(pair, spec, KeySpec::all()) : query(pair, KeySpec::all(), spec); };

      run();  // warm-up
      assocdb::detail::Stopwatch clock;
      const auto result = run();
      const double seconds = clock.seconds();

      const auto returned = detail::sum_values(result);
      const auto predicted = detail::sum_values(
          query(deg, spec, KeySpec::list({row ? graph::kOutDegree : graph::kInDegree})));
      if (returned != predicted) {
        throw BenchError(std::string(class_name(cls)) + " at target " + std::to_string(target) + " returned " +
                         std::to_string(returned) + " edges; degree table predicts " + std::to_string(predicted));
      }
      records.push_back(
          detail::make_record("query", class_name(cls), plan.workers, plan.scale, target, returned, seconds));
    }
  }
  return records;
}

inline constexpr std::string_view kCsvHeader = "experiment,class,k,scale,target_degree,edges,seconds,rate";

inline void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.experiment << ',' << r.cls << ',' << r.k << ',' << r.scale << ',' << r.target_degree << ','
        << r.edges << ',' << format_number(r.seconds) << ',' << format_number(r.rate) << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  write_csv(out, records);
  out.flush();
  if (!out) throw FormatError("write failed: " + path.string());
}

inline std::vector<BenchRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("csv: missing or unexpected header");
  std::vector<BenchRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto where = "csv line " + std::to_string(lineno);
    std::vector<std::string_view> f;
    std::string_view rest = line;
    while (true) {
      auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 8) throw FormatError(where + ": expected 8 fields");
    auto integer = [&](std::string_view s) {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw FormatError(where + ": bad integer '" + std::string(s) + "'");
      }
      return v;
    };
    auto real = [&](std::string_view s) {
      auto v = parse_number(s);
      if (!v) throw FormatError(where + ": bad number '" + std::string(s) + "'");
      return *v;
    };
    BenchRecord r;
    r.experiment = f[0];
    r.cls = f[1];
    r.k = static_cast<int>(integer(f[2]));
    r.scale = static_cast<int>(integer(f[3]));
    r.target_degree = integer(f[4]);
    r.edges = integer(f[5]);
    r.seconds = real(f[6]);
    r.rate = real(f[7]);
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<BenchRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace assocdb::bench
