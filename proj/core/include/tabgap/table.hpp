#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace tabgap {

enum class ColumnType { string, integer, real };

std::string to_string(ColumnType t);
ColumnType column_type_from_string(const std::string& s);

/// In-memory tabular artifact: named typed columns with an explicit
/// per-cell missing mask. Serialization is CSV with a header row; missing
/// cells are bare empty, empty strings are quoted. Reals render via
/// shortest round-trip decimals, so persist/load is bit-exact.
class Table {
public:
    Table() = default;

    std::size_t add_string_column(const std::string& name);
    std::size_t add_integer_column(const std::string& name);
    std::size_t add_real_column(const std::string& name);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return names_.size(); }
    const std::vector<std::string>& column_names() const { return names_; }
    ColumnType type(std::size_t col) const { return types_[col]; }

    /// Index of a named column; throws IoError when absent.
    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;

    void append_row();  // adds a row of all-missing cells

    void set_string(std::size_t row, std::size_t col, std::string value);
    void set_integer(std::size_t row, std::size_t col, long long value);
    void set_real(std::size_t row, std::size_t col, double value);
    void set_missing(std::size_t row, std::size_t col);

    bool missing(std::size_t row, std::size_t col) const;
    const std::string& get_string(std::size_t row, std::size_t col) const;
    long long get_integer(std::size_t row, std::size_t col) const;
    double get_real(std::size_t row, std::size_t col) const;

    /// Real view of any numeric cell (integer cells widen); missing -> NaN.
    double numeric(std::size_t row, std::size_t col) const;

    void write_csv(std::ostream& out) const;

    /// Reads a CSV with the given column types; header must match `names`
    /// length and content is taken as authoritative column names.
    static Table read_csv(std::istream& in, const std::vector<ColumnType>& types);

    bool operator==(const Table& other) const;

private:
    struct StringColumn {
        std::vector<std::string> values;
    };
    struct IntegerColumn {
        std::vector<long long> values;
    };
    struct RealColumn {
        std::vector<double> values;
    };
    using ColumnData = std::variant<StringColumn, IntegerColumn, RealColumn>;

    std::vector<std::string> names_;
    std::vector<ColumnType> types_;
    std::vector<ColumnData> columns_;
    std::vector<std::vector<std::uint8_t>> missing_;  // per column
    std::size_t n_rows_ = 0;
};

}  // namespace tabgap
