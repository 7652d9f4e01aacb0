#include "ptkr/table.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "ptkr/errors.hpp"
#include "ptkr/text.hpp"

namespace ptkr {

namespace {

const char* type_name(ColumnType t) { return t == ColumnType::integer ? "int" : "real"; }

std::string format_cell(double v, ColumnType t) {
  if (t == ColumnType::integer && std::isfinite(v)) {
    return std::to_string(static_cast<long long>(v));
  }
  return format_real(v);
}

}  // namespace

ResultTable::ResultTable(std::vector<Column> columns) : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name.empty() ||
        columns_[i].name.find_first_of(",\n\r#") != std::string::npos) {
      throw InvalidArgument("invalid column name '" + columns_[i].name + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (columns_[i].name == columns_[j].name) {
        throw InvalidArgument("duplicate column '" + columns_[i].name + "'");
      }
    }
  }
}

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns_.size()) {
    throw SchemaMismatchError("row has " + std::to_string(row.size()) + " values, table has " +
                              std::to_string(columns_.size()) + " columns");
  }
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (columns_[j].type == ColumnType::integer && std::isfinite(row[j]) &&
        row[j] != std::trunc(row[j])) {
      throw InvalidArgument("non-integer value in integer column '" + columns_[j].name + "'");
    }
  }
  rows_.push_back(std::move(row));
}

std::optional<std::size_t> ResultTable::find(const std::string& name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name == name) return j;
  }
  return std::nullopt;
}

std::size_t ResultTable::index_of(const std::string& name) const {
  const auto j = find(name);
  if (!j) throw SchemaMismatchError("table has no column '" + name + "'");
  return *j;
}

Eigen::VectorXd ResultTable::column(const std::string& name) const {
  const std::size_t j = index_of(name);
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) out(static_cast<Eigen::Index>(i)) = rows_[i][j];
  return out;
}

void ResultTable::set_meta(const std::string& key, const std::string& value) {
  if (key.find_first_of(":\n\r") != std::string::npos || value.find_first_of("\n\r") != std::string::npos) {
    throw InvalidArgument("metadata may not contain line breaks or ':' in keys");
  }
  for (auto& [k, v] : meta_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta_.emplace_back(key, value);
}

std::optional<std::string> ResultTable::meta(const std::string& key) const {
  for (const auto& [k, v] : meta_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

bool ResultTable::same_data(const ResultTable& other) const {
  if (columns_ != other.columns_ || rows_.size() != other.rows_.size()) return false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      const double a = rows_[i][j];
      const double b = other.rows_[i][j];
      if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
    }
  }
  return true;
}

std::vector<Column> complex_columns(const std::string& name) {
  return {{name + "_re", ColumnType::real}, {name + "_im", ColumnType::real}};
}

std::string to_csv(const ResultTable& table) {
  std::string out = std::string("# format: ") + kTableFormat + "\n";
  for (const auto& [k, v] : table.metadata()) {
    if (k == "format" || k == "types") continue;
    out += "# " + k + ": " + v + "\n";
  }
  out += "# types: ";
  for (std::size_t j = 0; j < table.column_count(); ++j) {
    if (j) out += ',';
    out += type_name(table.columns()[j].type);
  }
  out += '\n';
  for (std::size_t j = 0; j < table.column_count(); ++j) {
    if (j) out += ',';
    out += table.columns()[j].name;
  }
  out += '\n';
  for (std::size_t i = 0; i < table.row_count(); ++i) {
    const auto& row = table.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_cell(row[j], table.columns()[j].type);
    }
    out += '\n';
  }
  return out;
}

ResultTable from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> types;
  std::optional<ResultTable> table;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with('#')) {
      if (table) throw SchemaMismatchError("metadata after the header row (line " + std::to_string(lineno) + ")");
      const std::string_view body = trim(std::string_view(line).substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const std::string key(trim(body.substr(0, colon)));
      const std::string value(trim(body.substr(colon + 1)));
      if (key == "types") {
        types = value.empty() ? std::vector<std::string>{} : split(value, ',');
      } else if (key != "format") {
        meta.emplace_back(key, value);
      }
      continue;
    }
    if (!table) {
      const auto names = line.empty() ? std::vector<std::string>{} : split(line, ',');
      if (!types.empty() && types.size() != names.size()) {
        throw SchemaMismatchError("types line lists " + std::to_string(types.size()) +
                                  " columns, header has " + std::to_string(names.size()));
      }
      std::vector<Column> cols;
      for (std::size_t j = 0; j < names.size(); ++j) {
        ColumnType t = ColumnType::real;
        if (!types.empty()) {
          if (types[j] == "int") {
            t = ColumnType::integer;
          } else if (types[j] != "real") {
            throw SchemaMismatchError("unknown column type '" + types[j] + "'");
          }
        }
        cols.push_back({names[j], t});
      }
      try {
        table.emplace(std::move(cols));
      } catch (const InvalidArgument& e) {
        throw SchemaMismatchError(e.what());
      }
      for (const auto& [k, v] : meta) table->set_meta(k, v);
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != table->column_count()) {
      throw SchemaMismatchError("line " + std::to_string(lineno) + " has " +
                                std::to_string(cells.size()) + " fields, expected " +
                                std::to_string(table->column_count()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      const auto v = parse_real(cell);
      if (!v) {
        throw SchemaMismatchError("line " + std::to_string(lineno) + ": '" + cell +
                                  "' is not a number");
      }
      row.push_back(*v);
    }
    try {
      table->add_row(std::move(row));
    } catch (const InvalidArgument& e) {
      throw SchemaMismatchError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!table) throw SchemaMismatchError("table has no header row");
  return *table;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() /
                       ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

void write_table(const std::string& path, const ResultTable& table) {
  write_text_atomic(path, to_csv(table));
}

ResultTable read_table(const std::string& path, const std::optional<std::vector<Column>>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open table '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  ResultTable table = from_csv(text.str());
  if (expected && table.columns() != *expected) {
    std::string want;
    for (const auto& c : *expected) want += (want.empty() ? "" : ",") + c.name;
    throw SchemaMismatchError("'" + path + "' does not have the expected columns " + want);
  }
  return table;
}

}  // namespace ptkr
