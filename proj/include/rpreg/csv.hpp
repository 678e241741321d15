#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rpreg {

// Numeric CSV: comma separated, one header row, '.' decimal point.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

// Throws Error(ParseError) with "line L, column C" in the message.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

// First column is the response, the rest are predictors.
struct RegressionData {
  std::string response_name;
  std::vector<std::string> predictor_names;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};
RegressionData to_regression(const CsvTable& table);

// Shortest round-trip decimal form.
std::string format_double(double value);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

// Writes y followed by the columns of x, header "y,x1,...,xp".
void write_regression_csv(std::ostream& out, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace rpreg
