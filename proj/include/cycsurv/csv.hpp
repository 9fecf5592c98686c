#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cycsurv {

// Minimal RFC 4180 CSV support.  Fields containing commas, quotes or
// newlines are quoted with internal quotes doubled; everything else is
// written bare.  Numbers are rendered with 17 significant digits so that
// parsing them back reproduces the exact double.

std::string csv_escape(const std::string& field);
std::string format_double(double x);  // %.17g, with nan/inf spelled out

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

// Reads a whole CSV file into rows of fields, honoring quoted fields with
// embedded commas, doubled quotes and newlines.  Throws std::runtime_error
// on unreadable files or malformed quoting.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace cycsurv
