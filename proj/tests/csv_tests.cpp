#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "cycsurv/csv.hpp"

using namespace cycsurv;

namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    path_ = (std::filesystem::temp_directory_path() /
             ("cycsurv_csv_test_" + std::to_string(counter_++) + ".csv"))
                .string();
    std::ofstream out(path_, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::string path_;
};

}  // namespace

TEST_CASE("plain fields pass through unquoted", "[csv]") {
  CHECK(csv_escape("abc") == "abc");
  CHECK(csv_escape("") == "");
  CHECK(csv_escape("3.14") == "3.14");
}

TEST_CASE("special characters trigger quoting with doubled quotes", "[csv]") {
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("line1\nline2") == "\"line1\nline2\"");
  CHECK(csv_escape("a\r\nb") == "\"a\r\nb\"");
}

TEST_CASE("doubles survive a text round trip exactly", "[csv]") {
  for (double x : {0.1 + 0.2, 4.0 * std::atan(1.0), 1e-300, -56.00000000000001,
                   1.455185323707e-02}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("writer and reader are inverse on awkward fields", "[csv]") {
  std::ostringstream buf;
  CsvWriter w(buf);
  w.row({"id", "label", "note"});
  w.row({"1", "a,b", "say \"hi\""});
  w.row({"2", "", "line1\nline2"});

  TempFile f(buf.str());
  const auto rows = read_csv(f.path());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"id", "label", "note"});
  CHECK(rows[1] == std::vector<std::string>{"1", "a,b", "say \"hi\""});
  CHECK(rows[2] == std::vector<std::string>{"2", "", "line1\nline2"});
}

TEST_CASE("reader accepts CRLF line endings", "[csv]") {
  TempFile f("a,b\r\n1,2\r\n");
  const auto rows = read_csv(f.path());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"a", "b"});
  CHECK(rows[1] == std::vector<std::string>{"1", "2"});
}

TEST_CASE("reader rejects malformed input", "[csv]") {
  TempFile unterminated("a,\"oops\n");
  CHECK_THROWS_AS(read_csv(unterminated.path()), std::runtime_error);
  CHECK_THROWS_AS(read_csv("/nonexistent/path/file.csv"), std::runtime_error);
}
