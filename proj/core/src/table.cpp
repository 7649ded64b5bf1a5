#include "tabgap/table.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "tabgap/csv.hpp"
#include "tabgap/error.hpp"

namespace tabgap {

std::string to_string(ColumnType t) {
    switch (t) {
        case ColumnType::string: return "string";
        case ColumnType::integer: return "integer";
        case ColumnType::real: return "real";
    }
    return "unknown";
}

ColumnType column_type_from_string(const std::string& s) {
    if (s == "string") return ColumnType::string;
    if (s == "integer") return ColumnType::integer;
    if (s == "real") return ColumnType::real;
    throw IoError("unknown column type: " + s);
}

std::size_t Table::add_string_column(const std::string& name) {
    names_.push_back(name);
    types_.push_back(ColumnType::string);
    columns_.emplace_back(StringColumn{std::vector<std::string>(n_rows_)});
    missing_.emplace_back(n_rows_, std::uint8_t{1});
    return names_.size() - 1;
}

std::size_t Table::add_integer_column(const std::string& name) {
    names_.push_back(name);
    types_.push_back(ColumnType::integer);
    columns_.emplace_back(IntegerColumn{std::vector<long long>(n_rows_)});
    missing_.emplace_back(n_rows_, std::uint8_t{1});
    return names_.size() - 1;
}

std::size_t Table::add_real_column(const std::string& name) {
    names_.push_back(name);
    types_.push_back(ColumnType::real);
    columns_.emplace_back(RealColumn{std::vector<double>(n_rows_)});
    missing_.emplace_back(n_rows_, std::uint8_t{1});
    return names_.size() - 1;
}

std::size_t Table::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return i;
    }
    throw IoError("table has no column named '" + name + "'");
}

bool Table::has_column(const std::string& name) const {
    for (const auto& n : names_) {
        if (n == name) return true;
    }
    return false;
}

void Table::append_row() {
    ++n_rows_;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        std::visit([](auto& col) { col.values.emplace_back(); }, columns_[c]);
        missing_[c].push_back(1);
    }
}

void Table::set_string(std::size_t row, std::size_t col, std::string value) {
    std::get<StringColumn>(columns_[col]).values[row] = std::move(value);
    missing_[col][row] = 0;
}

void Table::set_integer(std::size_t row, std::size_t col, long long value) {
    std::get<IntegerColumn>(columns_[col]).values[row] = value;
    missing_[col][row] = 0;
}

void Table::set_real(std::size_t row, std::size_t col, double value) {
    if (std::isnan(value)) {
        set_missing(row, col);
        return;
    }
    std::get<RealColumn>(columns_[col]).values[row] = value;
    missing_[col][row] = 0;
}

void Table::set_missing(std::size_t row, std::size_t col) { missing_[col][row] = 1; }

bool Table::missing(std::size_t row, std::size_t col) const { return missing_[col][row] != 0; }

const std::string& Table::get_string(std::size_t row, std::size_t col) const {
    return std::get<StringColumn>(columns_[col]).values[row];
}

long long Table::get_integer(std::size_t row, std::size_t col) const {
    return std::get<IntegerColumn>(columns_[col]).values[row];
}

double Table::get_real(std::size_t row, std::size_t col) const {
    return std::get<RealColumn>(columns_[col]).values[row];
}

double Table::numeric(std::size_t row, std::size_t col) const {
    if (missing(row, col)) return std::numeric_limits<double>::quiet_NaN();
    switch (types_[col]) {
        case ColumnType::integer: return static_cast<double>(get_integer(row, col));
        case ColumnType::real: return get_real(row, col);
        case ColumnType::string: break;
    }
    throw IoError("column '" + names_[col] + "' is not numeric");
}

void Table::write_csv(std::ostream& out) const {
    write_csv_row(out, names_);
    std::vector<std::string> cells(n_cols());
    std::vector<bool> force(n_cols());
    for (std::size_t r = 0; r < n_rows_; ++r) {
        for (std::size_t c = 0; c < n_cols(); ++c) {
            force[c] = false;
            if (missing(r, c)) {
                cells[c].clear();
                continue;
            }
            switch (types_[c]) {
                case ColumnType::string:
                    cells[c] = get_string(r, c);
                    force[c] = cells[c].empty();
                    break;
                case ColumnType::integer:
                    cells[c] = std::to_string(get_integer(r, c));
                    break;
                case ColumnType::real:
                    cells[c] = format_double(get_real(r, c));
                    break;
            }
        }
        write_csv_row(out, cells, force);
    }
}

Table Table::read_csv(std::istream& in, const std::vector<ColumnType>& types) {
    CsvReader reader(in);
    CsvRecord rec;
    if (!reader.next(rec)) throw IoError("table CSV is empty (missing header)");
    if (rec.cells.size() != types.size()) {
        throw IoError("table CSV header has " + std::to_string(rec.cells.size()) +
                      " columns, expected " + std::to_string(types.size()));
    }
    Table t;
    for (std::size_t c = 0; c < types.size(); ++c) {
        switch (types[c]) {
            case ColumnType::string: t.add_string_column(rec.cells[c]); break;
            case ColumnType::integer: t.add_integer_column(rec.cells[c]); break;
            case ColumnType::real: t.add_real_column(rec.cells[c]); break;
        }
    }
    while (reader.next(rec)) {
        if (rec.cells.size() != types.size()) {
            throw IoError("table CSV line " + std::to_string(rec.line_no) + " has " +
                          std::to_string(rec.cells.size()) + " cells, expected " +
                          std::to_string(types.size()));
        }
        const std::size_t row = t.n_rows();
        t.append_row();
        for (std::size_t c = 0; c < types.size(); ++c) {
            const std::string& cell = rec.cells[c];
            const bool quoted = rec.quoted[c];
            if (cell.empty() && !quoted) continue;  // missing
            switch (types[c]) {
                case ColumnType::string: t.set_string(row, c, cell); break;
                case ColumnType::integer: {
                    const auto v = parse_int(cell);
                    if (!v) {
                        throw IoError("table CSV line " + std::to_string(rec.line_no) +
                                      ": bad integer '" + cell + "'");
                    }
                    t.set_integer(row, c, *v);
                    break;
                }
                case ColumnType::real: {
                    const auto v = parse_double(cell);
                    if (!v) {
                        throw IoError("table CSV line " + std::to_string(rec.line_no) +
                                      ": bad real '" + cell + "'");
                    }
                    t.set_real(row, c, *v);
                    break;
                }
            }
        }
    }
    return t;
}

bool Table::operator==(const Table& other) const {
    if (names_ != other.names_ || types_ != other.types_ || n_rows_ != other.n_rows_) return false;
    for (std::size_t c = 0; c < n_cols(); ++c) {
        for (std::size_t r = 0; r < n_rows_; ++r) {
            if (missing(r, c) != other.missing(r, c)) return false;
            if (missing(r, c)) continue;
            switch (types_[c]) {
                case ColumnType::string:
                    if (get_string(r, c) != other.get_string(r, c)) return false;
                    break;
                case ColumnType::integer:
                    if (get_integer(r, c) != other.get_integer(r, c)) return false;
                    break;
                case ColumnType::real:
                    if (get_real(r, c) != other.get_real(r, c)) return false;
                    break;
            }
        }
    }
    return true;
}

}  // namespace tabgap
