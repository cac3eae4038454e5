#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "assocdb/bench.hpp"
#include "assocdb/tsv.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("assocdb_cli_" + std::to_string(rd()));
    fs::create_directories(dir_ / "data");
    std::ofstream(dir_ / "db.conf") << "# test config\ninstance = clitest\ndata_dir = data\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, bool with_config = true) const {
    std::string cmd = std::string("\"") + ASSOCDB_CLI_PATH + "\" " + args;
    if (with_config) cmd += " --config \"" + (dir_ / "db.conf").string() + "\"";
    cmd += " > \"" + (dir_ / "stdout.txt").string() + "\" 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out() const {
    std::ifstream in(dir_ / "stdout.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, IngestWritesWorkerAndAggregateRows) {
  ASSERT_EQ(run("ingest --scales 8 --workers 1 --out " + path("ingest.csv")), 0);
  auto records = assocdb::bench::read_csv(fs::path(path("ingest.csv")));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].cls, "worker0");
  EXPECT_EQ(records[1].cls, "aggregate");
  EXPECT_EQ(records[1].edges, 2u * 16 * 256);
  EXPECT_TRUE(fs::exists(dir_ / "data" / "Tedge.tbl"));
}

TEST_F(Cli, IngestGrid) {
  ASSERT_EQ(run("ingest --scales 6,7 --workers 1,2 --out " + path("grid.csv")), 0);
  auto records = assocdb::bench::read_csv(fs::path(path("grid.csv")));
  EXPECT_EQ(records.size(), 2u * (2 + 3));
}

TEST_F(Cli, MissingConfigIsUsageError) {
  ::unsetenv("ASSOCDB_CONFIG");
  EXPECT_EQ(run("ingest --scales 4", false), 2);
}

TEST_F(Cli, ConfigFromEnvironment) {
  ::setenv("ASSOCDB_CONFIG", path("db.conf").c_str(), 1);
  EXPECT_EQ(run("tables", false), 0);
  ::unsetenv("ASSOCDB_CONFIG");
}

TEST_F(Cli, BadFlagsAreUsageErrors) {
  EXPECT_EQ(run("ingest --scales 0"), 2);
  EXPECT_EQ(run("ingest --workers x"), 2);
  EXPECT_EQ(run("query --classes XYZ"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("get"), 2);
}

TEST_F(Cli, QueryAfterIngest) {
  ASSERT_EQ(run("ingest --scales 9 --workers 1 --out " + path("ingest.csv")), 0);
  ASSERT_EQ(run("query --out " + path("query.csv")), 0);
  auto records = assocdb::bench::read_csv(fs::path(path("query.csv")));
  ASSERT_EQ(records.size(), 20u);
  EXPECT_EQ(records[0].k, 1);
  EXPECT_EQ(records[0].scale, 9);
  ASSERT_EQ(run("query --classes SVR --out " + path("svr.csv")), 0);
  EXPECT_EQ(assocdb::bench::read_csv(fs::path(path("svr.csv"))).size(), 5u);
}

TEST_F(Cli, QueryIngestFirst) {
  ASSERT_EQ(run("query --ingest-first --scales 7 --workers 2 --targets 1,10 --out " + path("q.csv")), 0);
  auto records = assocdb::bench::read_csv(fs::path(path("q.csv")));
  ASSERT_EQ(records.size(), 8u);
  EXPECT_EQ(records[0].k, 2);
}

TEST_F(Cli, QueryOnEmptyDatabaseFails) {
  EXPECT_EQ(run("query --out " + path("q.csv")), 3);
}

TEST_F(Cli, PutGetDeleteTables) {
  std::ofstream(path("in.tsv")) << "alice\tage\t47\nbob\tage\t30\ncarl\tcity\tboston\n";
  ASSERT_EQ(run("put --table People --transpose PeopleT --file " + path("in.tsv")), 0);

  ASSERT_EQ(run("get --table People"), 0);
  EXPECT_EQ(out(), "alice\tage\t47\nbob\tage\t30\ncarl\tcity\tboston\n");

  ASSERT_EQ(run("get --table People --rows \"al*,\""), 0);
  EXPECT_EQ(out(), "alice\tage\t47\n");

  ASSERT_EQ(run("get --table People --transpose PeopleT --cols city,"), 0);
  EXPECT_EQ(out(), "carl\tcity\tboston\n");

  ASSERT_EQ(run("tables"), 0);
  EXPECT_EQ(out(), "People\nPeopleT\n");

  ASSERT_EQ(run("delete --table People --transpose PeopleT"), 0);
  ASSERT_EQ(run("tables"), 0);
  EXPECT_EQ(out(), "");
}

TEST_F(Cli, PutDegreeSums) {
  std::ofstream(path("d.tsv")) << "v1\tDegree\t2\nv1\tDegree\t3\n";
  ASSERT_EQ(run("put --table Deg --degree --file " + path("d.tsv")), 0);
  ASSERT_EQ(run("get --table Deg --out " + path("got.tsv")), 0);
  auto got = assocdb::read_triples_tsv(fs::path(path("got.tsv")));
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got.vals[0], "5");
}

TEST_F(Cli, MalformedTsvIsRuntimeError) {
  std::ofstream(path("bad.tsv")) << "only\ttwo\n";
  EXPECT_EQ(run("put --table T --file " + path("bad.tsv")), 3);
}
