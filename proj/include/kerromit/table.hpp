#ifndef KERROMIT_TABLE_HPP
#define KERROMIT_TABLE_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kerromit/error.hpp"

namespace kerromit
{
using Cell = std::variant<double, std::string>;
using ordered_json = nlohmann::ordered_json;

// Rows share one fixed column schema. `details` optionally carries a nested
// JSON object per row (complex amplitudes and the like) that only the JSON
// format emits.
struct Table
{
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<ordered_json> details;
    ordered_json metadata = ordered_json::object();

    void add_row(std::vector<Cell> row, ordered_json detail = nullptr)
    {
        if (row.size() != columns.size())
            throw ValidationError("table '" + name + "': row has " + std::to_string(row.size()) +
                                  " cells, schema has " + std::to_string(columns.size()));
        rows.push_back(std::move(row));
        details.push_back(std::move(detail));
    }
};

class IoError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

enum class Format
{
    csv,
    json,
};

inline Format parse_format(std::string_view s)
{
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ValidationError("unknown output format '" + std::string(s) + "' (expected csv or json)");
}

// Shortest representation that round-trips.
inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace detail
{
inline std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline ordered_json cell_to_json(const Cell &c)
{
    if (const double *d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) return *d;
        return format_number(*d); // JSON has no NaN/Inf
    }
    return std::get<std::string>(c);
}
} // namespace detail

inline void write_csv(std::ostream &out, const Table &t)
{
    out << "# " << t.metadata.dump() << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (const double *d = std::get_if<double>(&row[i])) out << format_number(*d);
            else out << detail::csv_field(std::get<std::string>(row[i]));
        }
        out << '\n';
    }
}

inline ordered_json table_to_json(const Table &t)
{
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        ordered_json obj = ordered_json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = detail::cell_to_json(t.rows[r][i]);
        if (r < t.details.size() && !t.details[r].is_null()) obj["detail"] = t.details[r];
        rows.push_back(std::move(obj));
    }
    ordered_json doc = ordered_json::object();
    doc["metadata"] = t.metadata;
    doc["rows"] = std::move(rows);
    return doc;
}

inline void write_json(std::ostream &out, const Table &t) { out << table_to_json(t).dump(2) << '\n'; }

// Writes to `path`, or to `out` when the path is empty. Nothing is created for
// an empty table.
inline void emit(const Table &t, Format format, const std::string &path, std::ostream &out = std::cout)
{
    if (t.rows.empty()) throw ValidationError("table '" + t.name + "' has no rows; nothing written");
    std::ostringstream buf;
    if (format == Format::csv) write_csv(buf, t);
    else write_json(buf, t);

    if (path.empty()) {
        out << buf.str();
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    file << buf.str();
    if (!file.flush()) throw IoError("failed writing '" + path + "'");
}

// Inverse of write_json: the column order is taken from the first row.
inline Table read_json_table(std::string_view text)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(std::string("malformed table JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("rows") || !doc["rows"].is_array())
        throw ValidationError("table JSON must be an object with a 'rows' array");
    Table t;
    t.metadata = doc.value("metadata", ordered_json::object());
    for (const auto &obj : doc["rows"]) {
        if (t.columns.empty()) {
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (it.key() != "detail") t.columns.push_back(it.key());
        }
        std::vector<Cell> row;
        for (const auto &col : t.columns) {
            const auto &v = obj.at(col);
            if (v.is_number()) row.emplace_back(v.get<double>());
            else if (v.is_string()) {
                auto s = v.get<std::string>();
                if (s == "nan") row.emplace_back(std::nan(""));
                else if (s == "inf") row.emplace_back(INFINITY);
                else if (s == "-inf") row.emplace_back(-INFINITY);
                else row.emplace_back(std::move(s));
            } else throw ValidationError("table JSON cell '" + col + "' is neither number nor string");
        }
        t.add_row(std::move(row), obj.contains("detail") ? obj["detail"] : ordered_json(nullptr));
    }
    return t;
}
} // namespace kerromit

#endif
