#ifndef MACD_IO_HPP
#define MACD_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <vector>

#include "macd/error.hpp"
#include "macd/types.hpp"

// TSV formats:
//   expression:  header "id<TAB>gene1<TAB>gene2...", one row per cell/spot
//   labels:      header "id<TAB>cell_type", one row per cell
//   proportions: header "id<TAB>type1<TAB>type2...", rows on the simplex
// UTF-8, '.' decimal separator, no thousands separators.

namespace macd {

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !tok.empty();
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

/// Shortest decimal string that round-trips the double. Locale-independent.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

struct TableData {
    std::vector<std::string> col_names; // header cells after "id"
    std::vector<std::string> row_ids;
    Matrix values;
};

inline TableData read_tsv_table(const std::string& path, bool require_nonnegative) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open file");

    TableData t;
    std::string line;
    size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file, expected header");
    ++line_no;
    line = strip_cr(std::move(line));
    auto header = split_tabs(line);
    if (header.empty() || header[0] != "id")
        throw ParseError(path, 1, "first header cell must be 'id'");
    if (header.size() < 2) throw ParseError(path, 1, "header has no data columns");

    std::unordered_set<std::string_view> seen_cols;
    t.col_names.reserve(header.size() - 1);
    for (size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw ParseError(path, 1, "empty column name");
        if (!seen_cols.insert(header[j]).second)
            throw ParseError(path, 1, "duplicate column name '" + std::string(header[j]) + "'");
        t.col_names.emplace_back(header[j]);
    }
    const size_t n_cols = t.col_names.size();

    std::vector<double> flat;
    std::unordered_set<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(std::move(line));
        if (line.empty()) continue;
        auto cells = split_tabs(line);
        if (cells.size() != n_cols + 1)
            throw ParseError(path, line_no, "expected " + std::to_string(n_cols + 1) +
                             " fields, got " + std::to_string(cells.size()));
        std::string id(cells[0]);
        if (id.empty()) throw ParseError(path, line_no, "empty row id");
        if (!seen_ids.insert(id).second)
            throw ParseError(path, line_no, "duplicate row id '" + id + "'");
        t.row_ids.push_back(std::move(id));
        for (size_t j = 1; j < cells.size(); ++j) {
            double v;
            if (!parse_double(cells[j], v))
                throw ParseError(path, line_no, "non-numeric value '" + std::string(cells[j]) +
                                 "' in column " + std::to_string(j + 1));
            if (require_nonnegative && v < 0.0)
                throw ParseError(path, line_no, "negative value in column " + std::to_string(j + 1));
            flat.push_back(v);
        }
    }
    if (t.row_ids.empty()) throw ParseError(path, line_no, "no data rows");

    t.values = Matrix(t.row_ids.size(), n_cols);
    std::copy(flat.begin(), flat.end(), t.values.storage().begin());
    return t;
}

inline void write_tsv_table(const std::string& path, const std::vector<std::string>& col_names,
                            const std::vector<std::string>& row_ids, const Matrix& values) {
    std::ofstream out(path, std::ios::binary); // binary: byte-stable newlines
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "id";
    for (const auto& c : col_names) out << '\t' << c;
    out << '\n';
    std::string buf;
    for (size_t i = 0; i < row_ids.size(); ++i) {
        buf.clear();
        buf += row_ids[i];
        for (size_t j = 0; j < values.cols(); ++j) {
            buf += '\t';
            buf += format_double(values(i, j));
        }
        buf += '\n';
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace detail

inline ExpressionMatrix load_expression_matrix(const std::string& path) {
    auto t = detail::read_tsv_table(path, /*require_nonnegative=*/true);
    ExpressionMatrix m;
    m.row_ids = std::move(t.row_ids);
    m.gene_names = std::move(t.col_names);
    m.values = std::move(t.values);
    return m;
}

inline void save_expression_matrix(const std::string& path, const ExpressionMatrix& m) {
    detail::write_tsv_table(path, m.gene_names, m.row_ids, m.values);
}

inline ProportionMatrix load_proportion_matrix(const std::string& path) {
    auto t = detail::read_tsv_table(path, /*require_nonnegative=*/true);
    ProportionMatrix p;
    p.spot_ids = std::move(t.row_ids);
    p.type_order = std::move(t.col_names);
    p.values = std::move(t.values);
    p.validate();
    return p;
}

inline void save_proportion_matrix(const std::string& path, const ProportionMatrix& p) {
    detail::write_tsv_table(path, p.type_order, p.spot_ids, p.values);
}

inline CellTypeLabels load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open file");

    CellTypeLabels labels;
    std::string line;
    size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file, expected header");
    ++line_no;
    line = detail::strip_cr(std::move(line));
    auto header = detail::split_tabs(line);
    if (header.size() != 2 || header[0] != "id" || header[1] != "cell_type")
        throw ParseError(path, 1, "expected header 'id<TAB>cell_type'");

    std::unordered_set<std::string> seen_types;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(std::move(line));
        if (line.empty()) continue;
        auto cells = detail::split_tabs(line);
        if (cells.size() != 2)
            throw ParseError(path, line_no, "expected 2 fields, got " + std::to_string(cells.size()));
        std::string id(cells[0]), type(cells[1]);
        if (id.empty() || type.empty()) throw ParseError(path, line_no, "empty field");
        if (!labels.assignments.emplace(id, type).second)
            throw ParseError(path, line_no, "duplicate cell id '" + id + "'");
        if (seen_types.insert(type).second) labels.type_order.push_back(std::move(type));
    }
    if (labels.assignments.empty()) throw ParseError(path, line_no, "no data rows");
    return labels;
}

inline void save_labels(const std::string& path, const CellTypeLabels& labels,
                        const std::vector<std::string>& cell_order) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "id\tcell_type\n";
    for (const auto& id : cell_order) out << id << '\t' << labels.type_of(id) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

} // namespace macd

#endif
