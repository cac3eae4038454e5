#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "assocdb/kvstore.hpp"

using namespace assocdb;
using namespace assocdb::kv;

namespace {

MutationBatch batch(std::string table, std::vector<StoreEntry> writes) { return {std::move(table), std::move(writes)}; }

std::vector<std::string> rows_of(const std::vector<StoreEntry>& es) {
  std::vector<std::string> out;
  for (const auto& e : es) out.push_back(e.row);
  return out;
}

}  // namespace

TEST(Store, CreateTable) {
  Store s;
  s.create_table("my_Tedge");
  EXPECT_TRUE(s.has_table("my_Tedge"));
  EXPECT_NO_THROW(s.create_table("my_Tedge"));
  s.create_table("T", Combiner::SumDecimal);
  EXPECT_THROW(s.create_table("T", Combiner::None), TableConflict);
  EXPECT_THROW(s.create_table(""), TableConflict);
  EXPECT_THROW(s.create_table("a/b"), TableConflict);
}

TEST(Store, DeleteTable) {
  Store s;
  s.create_table("T");
  s.delete_table("T");
  EXPECT_FALSE(s.has_table("T"));
  EXPECT_NO_THROW(s.delete_table("missing"));
}

TEST(Store, LifecycleLeavesFreshTable) {
  Store s;
  s.create_table("T");
  s.apply_batch(batch("T", {{"r", "c", "v"}}));
  s.delete_table("T");
  s.create_table("T");
  EXPECT_EQ(s.entry_count("T"), 0u);
}

TEST(Store, ListTablesSorted) {
  Store s;
  EXPECT_TRUE(s.list_tables().empty());
  s.create_table("zeta");
  s.create_table("alpha");
  EXPECT_EQ(s.list_tables(), (std::vector<std::string>{"alpha", "zeta"}));
}

TEST(Store, SumCombinerAccumulates) {
  Store s;
  s.create_table("Deg", Combiner::SumDecimal);
  s.apply_batch(batch("Deg", {{"v1", "OutDeg", "1"}}));
  s.apply_batch(batch("Deg", {{"v1", "OutDeg", "1"}}));
  EXPECT_EQ(s.scan("Deg").at(0).value, "2");
  s.apply_batch(batch("Deg", {{"v1", "OutDeg", "0.5"}, {"v1", "OutDeg", "0.5"}}));
  EXPECT_EQ(s.scan("Deg").at(0).value, "3");
}

TEST(Store, SumCombinerRejectsNonNumberAtomically) {
  Store s;
  s.create_table("Deg", Combiner::SumDecimal);
  EXPECT_THROW(s.apply_batch(batch("Deg", {{"a", "c", "1"}, {"b", "c", "x"}})), FormatError);
  EXPECT_EQ(s.entry_count("Deg"), 0u);
}

TEST(Store, PlainTableLastWriteWins) {
  Store s;
  s.create_table("T");
  s.apply_batch(batch("T", {{"r", "c", "a"}}));
  s.apply_batch(batch("T", {{"r", "c", "b"}}));
  EXPECT_EQ(s.scan("T").at(0).value, "b");
  s.apply_batch(batch("T", {{"r", "c", "x"}, {"r", "c", "y"}}));
  EXPECT_EQ(s.scan("T").at(0).value, "y");
  EXPECT_EQ(s.entry_count("T"), 1u);
}

TEST(Store, EmptyBatchIsNoop) {
  Store s;
  s.create_table("T");
  s.apply_batch(batch("T", {}));
  EXPECT_EQ(s.entry_count("T"), 0u);
}

TEST(Store, MissingTableErrors) {
  Store s;
  EXPECT_THROW(s.apply_batch(batch("nope", {{"r", "c", "v"}})), TableNotFound);
  EXPECT_THROW(s.scan("nope"), TableNotFound);
  EXPECT_THROW(s.entry_count("nope"), TableNotFound);
}

TEST(Store, ReservedBytesRejected) {
  Store s;
  s.create_table("T");
  EXPECT_THROW(s.apply_batch(batch("T", {{"r\t", "c", "v"}})), FormatError);
  EXPECT_THROW(s.apply_batch(batch("T", {{"r", "c\n", "v"}})), FormatError);
  EXPECT_THROW(s.apply_batch(batch("T", {{"r", "c", "v\n"}})), FormatError);
}

TEST(Scan, EmptyTable) {
  Store s;
  s.create_table("T");
  EXPECT_TRUE(s.scan("T").empty());
}

TEST(Scan, ClosedRange) {
  Store s;
  s.create_table("T");
  s.apply_batch(batch("T", {{"a", "x", "1"}, {"b", "x", "1"}, {"c", "x", "1"}, {"d", "x", "1"}}));
  EXPECT_EQ(rows_of(s.scan("T", RowRange::closed("b", "c"))), (std::vector<std::string>{"b", "c"}));
  EXPECT_TRUE(s.scan("T", RowRange::closed("c", "b")).empty());
  EXPECT_EQ(rows_of(s.scan("T", RowRange::exact("d"))), std::vector<std::string>{"d"});
}

TEST(Scan, PrefixColumnFilter) {
  Store s;
  s.create_table("Deg", Combiner::SumDecimal);
  s.apply_batch(batch("Deg", {{"1", "InDeg", "3"}, {"1", "OutDeg", "2"}, {"2", "OutDeg", "5"}, {"3", "InDeg", "1"}}));
  auto out = s.scan("Deg", RowRange::all(), ColumnFilter::prefix("Out"));
  ASSERT_EQ(out.size(), 2u);
  for (const auto& e : out) EXPECT_EQ(e.col, "OutDeg");
}

TEST(Scan, MatchesFilterOracleOnRandomTables) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Store s;
    s.create_table("T");
    std::map<std::pair<std::string, std::string>, std::string> model;
    std::vector<StoreEntry> writes;
    for (int i = 0; i < 200; ++i) {
      std::string r(1 + rng() % 3, 'a'), c(1 + rng() % 2, 'x');
      for (auto& ch : r) ch = static_cast<char>('a' + rng() % 4);
      for (auto& ch : c) ch = static_cast<char>('p' + rng() % 3);
      std::string v = std::to_string(rng() % 100);
      writes.push_back({r, c, v});
      model[{r, c}] = v;
    }
    s.apply_batch(batch("T", writes));
    EXPECT_EQ(s.entry_count("T"), model.size());
    const std::string lo = "ab", hi = "c";
    std::vector<StoreEntry> want;
    for (const auto& [k, v] : model) {
      if (k.first >= lo && k.first <= hi && k.second.starts_with("q")) want.push_back({k.first, k.second, v});
    }
    EXPECT_EQ(s.scan("T", RowRange::closed(lo, hi), ColumnFilter::prefix("q")), want);
    want.clear();
    for (const auto& [k, v] : model) {
      if (k.first.starts_with("b")) want.push_back({k.first, k.second, v});
    }
    EXPECT_EQ(s.scan("T", RowRange::prefix("b")), want);
  }
}

TEST(Scan, OutputStrictlySorted) {
  Store s;
  s.create_table("T");
  s.apply_batch(batch("T", {{"b", "z", "1"}, {"a", "y", "1"}, {"b", "a", "1"}, {"a", "b", "1"}}));
  auto out = s.scan("T");
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_LT(std::tie(out[i - 1].row, out[i - 1].col), std::tie(out[i].row, out[i].col));
  }
}

TEST(Store, EntryCountGrowsByAtMostBatchSize) {
  Store s;
  s.create_table("T");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto before = s.entry_count("T");
    std::vector<StoreEntry> writes;
    const auto n = rng() % 20;
    for (std::size_t j = 0; j < n; ++j) writes.push_back({std::to_string(rng() % 30), "c", "v"});
    s.apply_batch(batch("T", writes));
    EXPECT_LE(s.entry_count("T"), before + n);
  }
}

TEST(Store, CountsUniqueWrites) {
  Store s;
  s.create_table("T");
  std::vector<StoreEntry> writes;
  for (int i = 0; i < 1000; ++i) writes.push_back({"r" + std::to_string(i), "c", "v"});
  s.apply_batch(batch("T", writes));
  EXPECT_EQ(s.entry_count("T"), 1000u);
}

TEST(Store, SumCommutesAcrossBatchOrders) {
  std::mt19937_64 rng(8);
  std::vector<MutationBatch> batches;
  for (int b = 0; b < 30; ++b) {
    std::vector<StoreEntry> writes;
    for (int i = 0; i < 10; ++i) {
      writes.push_back({"v" + std::to_string(rng() % 7), "OutDeg", std::to_string(static_cast<int>(rng() % 9) - 4) +
                                                                     "." + std::to_string(rng() % 10)});
    }
    batches.push_back(batch("Deg", writes));
  }
  auto contents = [&](const std::vector<MutationBatch>& order) {
    Store s;
    s.create_table("Deg", Combiner::SumDecimal);
    for (const auto& b : order) s.apply_batch(b);
    std::map<std::string, double> out;
    for (const auto& e : s.scan("Deg")) out[e.row] = *parse_number(e.value);
    return out;
  };
  auto base = contents(batches);
  for (int perm = 0; perm < 5; ++perm) {
    std::shuffle(batches.begin(), batches.end(), rng);
    auto other = contents(batches);
    ASSERT_EQ(other.size(), base.size());
    for (const auto& [k, v] : base) EXPECT_NEAR(other[k], v, 1e-9) << k;
  }
}

TEST(Snapshot, HeaderOnlyForEmptyTable) {
  Store s;
  s.create_table("Deg", Combiner::SumDecimal);
  EXPECT_EQ(s.snapshot_string("Deg"), "#table:Deg\tcombiner:sum\n");
}

TEST(Snapshot, RestoreIsIdentity) {
  Store s;
  s.create_table("T");
  std::vector<StoreEntry> writes;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    writes.push_back({"r" + std::to_string(rng() % 5000), "c" + std::to_string(rng() % 7), std::to_string(rng())});
  }
  s.apply_batch(batch("T", writes));
  const auto first = s.snapshot_string("T");

  Store other;
  std::istringstream in(first);
  auto t = other.restore(in);
  EXPECT_EQ(t->combiner(), Combiner::None);
  EXPECT_EQ(other.scan("T"), s.scan("T"));
  EXPECT_EQ(other.snapshot_string("T"), first);
}

TEST(Snapshot, RestoreKeepsCombiner) {
  Store s;
  std::istringstream in("#table:Deg\tcombiner:sum\nv\tOutDeg\t2\n");
  s.restore(in);
  s.apply_batch(batch("Deg", {{"v", "OutDeg", "3"}}));
  EXPECT_EQ(s.scan("Deg").at(0).value, "5");
}

TEST(Snapshot, MalformedInputs) {
  Store s;
  for (const char* text : {"", "no header\n", "#table:T\tcombiner:max\n", "#table:T\tcombiner:none\na\tb\n",
                           "#table:T\tcombiner:none\nb\tc\tv\na\tc\tv\n", "#table:D\tcombiner:sum\na\tb\tx\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(s.restore(in), FormatError) << text;
  }
}

TEST(Snapshot, DirectoryRoundTrip) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "assocdb_kvstore_dir_test";
  fs::remove_all(dir);
  Store s;
  s.create_table("A");
  s.create_table("B", Combiner::SumDecimal);
  s.apply_batch(batch("A", {{"r", "c", "v"}}));
  s.apply_batch(batch("B", {{"r", "c", "4"}}));
  s.save_dir(dir);
  s.delete_table("A");
  s.save_dir(dir);
  EXPECT_FALSE(fs::exists(dir / "A.tbl"));

  Store loaded;
  loaded.load_dir(dir);
  EXPECT_EQ(loaded.list_tables(), std::vector<std::string>{"B"});
  EXPECT_EQ(loaded.snapshot_string("B"), s.snapshot_string("B"));
  fs::remove_all(dir);
}

// Writers apply batches of 25 entries at distinct keys, all valued with the
// batch id. Readers must see every batch either whole or not at all.
TEST(Concurrency, ScansNeverSeeTornBatches) {
  Store s;
  s.create_table("M");
  constexpr int kWriters = 4, kBatches = 200, kPerBatch = 25;
  std::atomic<bool> done{false};
  std::atomic<int> torn{0}, scans{0};

  std::vector<std::thread> readers;
  for (int r = 0; r < 2; ++r) {
    readers.emplace_back([&] {
      while (!done.load()) {
        std::map<std::string, int> seen;
        for (const auto& e : s.scan("M")) ++seen[e.value];
        for (const auto& [id, n] : seen) {
          if (n != kPerBatch) ++torn;
        }
        ++scans;
      }
    });
  }
  std::vector<std::thread> writers;
  for (int w = 0; w < kWriters; ++w) {
    writers.emplace_back([&, w] {
      for (int b = 0; b < kBatches; ++b) {
        const auto id = std::to_string(w) + "-" + std::to_string(b);
        std::vector<StoreEntry> writes;
        for (int i = 0; i < kPerBatch; ++i) writes.push_back({"m" + std::to_string(i) + "/" + id, "c", id});
        s.apply_batch(batch("M", writes));
      }
    });
  }
  for (auto& t : writers) t.join();
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(torn.load(), 0);
  EXPECT_GT(scans.load(), 0);
  EXPECT_EQ(s.entry_count("M"), static_cast<std::size_t>(kWriters * kBatches * kPerBatch));
}
