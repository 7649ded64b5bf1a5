#include "tabgap/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace tabgap {

bool CsvReader::next(CsvRecord& record) {
    record.cells.clear();
    record.quoted.clear();
    int c = in_.get();
    if (c == std::istream::traits_type::eof()) return false;
    ++line_;
    record.line_no = line_;

    std::string cell;
    bool in_quotes = false;
    bool was_quoted = false;
    const auto push_cell = [&] {
        record.cells.push_back(std::move(cell));
        record.quoted.push_back(was_quoted);
        cell.clear();
        was_quoted = false;
    };
    while (true) {
        if (c == std::istream::traits_type::eof()) {
            push_cell();
            return true;
        }
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                const int peek = in_.peek();
                if (peek == '"') {
                    in_.get();
                    cell.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_;
                cell.push_back(ch);
            }
        } else if (ch == '"' && cell.empty() && !was_quoted) {
            in_quotes = true;
            was_quoted = true;
        } else if (ch == ',') {
            push_cell();
        } else if (ch == '\r') {
            // swallow; the following '\n' ends the record
        } else if (ch == '\n') {
            push_cell();
            return true;
        } else {
            cell.push_back(ch);
        }
        c = in_.get();
    }
}

namespace {

bool needs_quoting(const std::string& cell) {
    for (char ch : cell) {
        if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') return true;
    }
    return false;
}

}  // namespace

void write_csv_row(std::ostream& out, std::span<const std::string> cells,
                   const std::vector<bool>& force_quote) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out.put(',');
        const std::string& cell = cells[i];
        const bool forced = i < force_quote.size() && force_quote[i];
        if (forced || needs_quoting(cell)) {
            out.put('"');
            for (char ch : cell) {
                if (ch == '"') out.put('"');
                out.put(ch);
            }
            out.put('"');
        } else {
            out << cell;
        }
    }
    out.put('\n');
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_double(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) return std::nullopt;
    return value;
}

std::optional<long long> parse_int(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    long long value = 0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) return std::nullopt;
    return value;
}

}  // namespace tabgap
