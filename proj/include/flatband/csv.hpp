#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <type_traits>
#include <vector>

namespace flatband {

// Shortest round-trip text is not guaranteed stable across libraries; we emit
// a fixed 17 significant digits instead.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string> header);
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);

  template <typename... Ts>
  void row(const Ts&... values) {
    std::string line;
    bool first = true;
    ((append(line, first, values), first = false), ...);
    write_line(line);
  }

  void comment(const std::string& text);

 private:
  template <typename T>
  static void append(std::string& line, bool first, const T& v) {
    if (!first) line += ',';
    if constexpr (std::is_integral_v<T>) {
      line += std::to_string(v);
    } else if constexpr (std::is_floating_point_v<T>) {
      line += format_double(static_cast<double>(v));
    } else {
      line += std::string(v);
    }
  }
  void write_line(const std::string& line);

  std::ostream& os_;
  std::size_t columns_;
};

// Numeric CSV with a header row. Lines starting with '#' are skipped; rows whose
// first field is not numeric are kept separately as labelled rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::string>> labelled_rows;

  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> values(const std::string& name) const;
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

}  // namespace flatband
