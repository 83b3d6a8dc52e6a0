#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ecmc/common.hpp"

namespace ecmc {

// Raw CSV contents: one header row plus data rows, all fields as text.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated file. Supports double-quoted fields with embedded
// commas and quotes; accepts LF and CRLF line endings. Throws ParseError with
// a line number on ragged rows, EmptyInputError on a missing header.
CsvTable read_csv(const std::filesystem::path& path);

// Splits one CSV line, honouring double quotes.
std::vector<std::string> split_csv_line(std::string_view line);

// Shortest decimal string that round-trips to the same double. Non-finite
// values are rendered as the literal token "NA".
std::string format_double(double value);

// Strict full-string parses; `context` names the offending location in the
// ParseError message.
double parse_double(std::string_view text, const std::string& context);
long long parse_integer(std::string_view text, const std::string& context);

// Dense matrix with row and column labels and a presence mask; absent cells
// are stored as 0 with present=false and serialized as the token "NA".
struct LabeledMatrix {
    std::string corner_label;  // header text above the row labels
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Eigen::MatrixXd values;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> present;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

LabeledMatrix make_labeled_matrix(std::string corner_label,
                                  std::vector<std::string> row_labels,
                                  std::vector<std::string> col_labels);

void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& matrix);
LabeledMatrix read_matrix_csv(const std::filesystem::path& path);

// Writes text to the path, replacing the file atomically enough for batch use.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ecmc
