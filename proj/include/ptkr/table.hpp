#pragma once

#include <Eigen/Core>

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ptkr {

enum class ColumnType { integer, real };

struct Column {
  std::string name;
  ColumnType type = ColumnType::real;

  bool operator==(const Column&) const = default;
};

// Rectangular table of numbers. Integer columns hold exact integers in a
// double (|v| < 2^53); complex values are stored as two real columns.
class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<Column> columns);

  const std::vector<Column>& columns() const noexcept { return columns_; }
  std::size_t column_count() const noexcept { return columns_.size(); }
  std::size_t row_count() const noexcept { return rows_.size(); }

  void add_row(std::vector<double> row);
  const std::vector<double>& row(std::size_t i) const { return rows_.at(i); }
  double at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;  // throws SchemaMismatchError
  Eigen::VectorXd column(const std::string& name) const;

  // Metadata written as `# key: value` lines.
  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> meta(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& metadata() const noexcept {
    return meta_;
  }

  // Values and columns only; metadata is ignored.
  bool same_data(const ResultTable& other) const;

 private:
  std::vector<Column> columns_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::pair<std::string, std::string>> meta_;
};

// Complex column pair `<name>_re`, `<name>_im`.
std::vector<Column> complex_columns(const std::string& name);

std::string to_csv(const ResultTable& table);
ResultTable from_csv(const std::string& text);

// Atomic: written to a temporary file in the same directory, then renamed.
void write_text_atomic(const std::string& path, const std::string& text);
void write_table(const std::string& path, const ResultTable& table);

// With `expected`, the header must carry exactly these columns.
ResultTable read_table(const std::string& path,
                       const std::optional<std::vector<Column>>& expected = std::nullopt);

inline constexpr const char* kTableFormat = "ptkr-table/1";

}  // namespace ptkr
