#include "rpreg/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "rpreg/errors.hpp"

namespace rpreg {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& what) {
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto cells = split(view);
    if (!have_header) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto name = trim(cells[c]);
        if (name.empty()) fail(line_no, c + 1, "empty column name");
        table.header.emplace_back(name);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      fail(line_no, std::min(cells.size(), table.header.size()) + 1,
           "expected " + std::to_string(table.header.size()) + " fields, found " +
               std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto text = trim(cells[c]);
      double value = 0.0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
      if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() ||
          !std::isfinite(value)) {
        fail(line_no, c + 1, "not a finite number: '" + std::string(text) + "'");
      }
      row[c] = value;
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::EmptyData, "CSV input has no header row");
  if (rows.empty()) throw Error(ErrorCode::EmptyData, "CSV input has no data rows");

  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return read_csv(in);
}

RegressionData to_regression(const CsvTable& table) {
  if (table.values.cols() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "need a response column and at least one predictor");
  }
  RegressionData data;
  data.response_name = table.header.front();
  data.predictor_names.assign(table.header.begin() + 1, table.header.end());
  data.y = table.values.col(0);
  data.x = table.values.rightCols(table.values.cols() - 1);
  return data;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value == 0.0 ? 0.0 : value);
  return std::string(buf, res.ptr);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

void write_regression_csv(std::ostream& out, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  std::vector<std::string> cells{"y"};
  for (Eigen::Index j = 0; j < x.cols(); ++j) cells.push_back("x" + std::to_string(j + 1));
  write_csv_row(out, cells);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    cells.clear();
    cells.push_back(format_double(y[i]));
    for (Eigen::Index j = 0; j < x.cols(); ++j) cells.push_back(format_double(x(i, j)));
    write_csv_row(out, cells);
  }
}

}  // namespace rpreg
