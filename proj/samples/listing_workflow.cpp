// End-to-end tour of the connector: set up a server, bind a table pair and a
// degree table, ingest an array, query a row and a column, delete.
//
//   listing_workflow [db.conf]
//
// Without an argument a throwaway in-memory config is written to the
// system temp directory.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "assocdb/assocdb.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace assocdb;

  fs::path config;
  if (argc > 1) {
    config = argv[1];
  } else {
    config = fs::temp_directory_path() / "assocdb_listing_db.conf";
    std::ofstream(config) << "instance=mydb02\n";
  }

  try {
    dbinit();
    auto DB = dbsetup("mydb02", config);

    auto Tedge = DB.pair("my_Tedge", "my_TedgeT");
    auto TedgeDeg = DB.degree_table("my_TedgeDeg");

    // Incidence-style edges e1..e3 over vertices v1..v3.
    auto A = from_string_triples(std::vector<std::string>{"e1", "e1", "e2", "e3"},
                                 std::vector<std::string>{"v1", "v2", "v2", "v1"},
                                 std::vector<std::string>{"1", "1", "1", "1"});
    auto stats = put(Tedge, A);
    put_triple(TedgeDeg, {"v1", "v2"}, {"Degree", "Degree"}, {"2", "2"});
    std::cout << "wrote " << stats.entries << " entries in " << stats.batches << " batch(es)\n";

    auto Arow = Tedge("e1,", ":");
    auto Acol = Tedge(":", "v1,");
    std::cout << "Tedge[\"e1,\", :]\n";
    write_triples_tsv(std::cout, Arow);
    std::cout << "Tedge[:, \"v1,\"]\n";
    write_triples_tsv(std::cout, Acol);

    drop(Tedge);
    drop(TedgeDeg);
    std::cout << "tables left: " << DB.tables().size() << '\n';
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
