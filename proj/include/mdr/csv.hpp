#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mdr {

/// Shortest round-trip decimal representation of a double.
std::string fmt_double(double x);

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

/// Splits a line on commas. No quoting; the formats here are plain numeric.
std::vector<std::string> split_csv_line(const std::string& line);

std::string trim(const std::string& s);

/// Plain numeric matrix: one row per line, comma-separated, no header.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector_csv(const std::string& path);

}  // namespace mdr
