#include "ecmc/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ecmc {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream stream(path);
    if (!stream) {
        throw ParseError("cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() && line_number > 1) {
            continue;  // tolerate trailing blank lines
        }
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                throw ParseError(path.string() + ":" + std::to_string(line_number) +
                                 ": expected " + std::to_string(table.header.size()) +
                                 " fields, found " + std::to_string(fields.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty()) {
        throw EmptyInputError(path.string() + ": no header row");
    }
    return table;
}

std::string format_double(double value) {
    if (!std::isfinite(value)) {
        return "NA";
    }
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw NumericalError("double formatting failed");
    }
    return std::string(buffer, end);
}

double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(context + ": not a number: '" + std::string(text) + "'");
    }
    return value;
}

long long parse_integer(std::string_view text, const std::string& context) {
    long long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(context + ": not an integer: '" + std::string(text) + "'");
    }
    return value;
}

LabeledMatrix make_labeled_matrix(std::string corner_label,
                                  std::vector<std::string> row_labels,
                                  std::vector<std::string> col_labels) {
    LabeledMatrix m;
    m.corner_label = std::move(corner_label);
    m.row_labels = std::move(row_labels);
    m.col_labels = std::move(col_labels);
    const auto r = static_cast<Eigen::Index>(m.row_labels.size());
    const auto c = static_cast<Eigen::Index>(m.col_labels.size());
    m.values = Eigen::MatrixXd::Zero(r, c);
    m.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(r, c, true);
    return m;
}

namespace {

std::string quote_if_needed(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) {
        return field;
    }
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') {
            quoted += "\"\"";
        } else {
            quoted.push_back(c);
        }
    }
    quoted.push_back('"');
    return quoted;
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& matrix) {
    if (static_cast<Eigen::Index>(matrix.row_labels.size()) != matrix.values.rows() ||
        static_cast<Eigen::Index>(matrix.col_labels.size()) != matrix.values.cols()) {
        throw ContractViolation("matrix labels do not match value dimensions");
    }
    std::ostringstream out;
    out << quote_if_needed(matrix.corner_label);
    for (const auto& col : matrix.col_labels) {
        out << ',' << quote_if_needed(col);
    }
    out << '\n';
    for (Eigen::Index r = 0; r < matrix.values.rows(); ++r) {
        out << quote_if_needed(matrix.row_labels[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < matrix.values.cols(); ++c) {
            out << ',';
            if (!matrix.present(r, c)) {
                out << "NA";
            } else {
                out << format_double(matrix.values(r, c));
            }
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

LabeledMatrix read_matrix_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty()) {
        throw ParseError(path.string() + ": empty header");
    }
    LabeledMatrix m;
    m.corner_label = table.header.front();
    m.col_labels.assign(table.header.begin() + 1, table.header.end());
    const auto cols = static_cast<Eigen::Index>(m.col_labels.size());
    const auto rows = static_cast<Eigen::Index>(table.rows.size());
    m.values = Eigen::MatrixXd::Zero(rows, cols);
    m.present = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, true);
    m.row_labels.reserve(table.rows.size());
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = table.rows[static_cast<std::size_t>(r)];
        m.row_labels.push_back(row.front());
        for (Eigen::Index c = 0; c < cols; ++c) {
            const std::string& cell = row[static_cast<std::size_t>(c) + 1];
            if (cell == "NA") {
                m.present(r, c) = false;
            } else {
                m.values(r, c) = parse_double(
                    cell, path.string() + " row " + m.row_labels.back());
            }
        }
    }
    return m;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ParseError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw ParseError("write failed for " + path.string());
    }
}

}  // namespace ecmc
