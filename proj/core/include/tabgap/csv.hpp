#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tabgap {

struct CsvRecord {
    std::vector<std::string> cells;
    std::vector<bool> quoted;  // per cell: whether it was written in quotes
    std::size_t line_no = 0;   // 1-based line the record started on
};

/// RFC-4180-style CSV reader: quoted fields, embedded commas/quotes/newlines,
/// CRLF tolerant. A bare empty cell and a quoted "" are distinguished via
/// `quoted`, which is how missing values survive round trips.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads one record; returns false at end of input.
    bool next(CsvRecord& record);

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

/// Writes one CSV record, quoting cells that contain separators or quotes.
/// A cell in `force_quote` is quoted even when empty (empty-string values);
/// bare empty cells mean missing.
void write_csv_row(std::ostream& out, std::span<const std::string> cells,
                   const std::vector<bool>& force_quote = {});

/// Shortest round-trip decimal rendering of a double (std::to_chars).
std::string format_double(double v);

/// Parses a full double; std::nullopt when the cell is not a number.
std::optional<double> parse_double(const std::string& cell);

std::optional<long long> parse_int(const std::string& cell);

}  // namespace tabgap
