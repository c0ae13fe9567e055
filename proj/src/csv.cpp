#include "aperture/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aperture/error.hpp"
#include "aperture/format.hpp"

namespace aperture {

namespace {

// One parsed record plus the 1-based line it started on (quoted fields
// may span lines, so records and lines need not align).
struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

std::vector<Record> split_records(const std::string& text) {
    std::vector<Record> records;
    Record current;
    std::string field;
    bool quoted = false;
    bool any_field = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        any_field = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(current));
        current = Record{};
        current.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\n') ++line;
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty() && !any_field) {
            quoted = true;
            any_field = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() || !current.fields.empty() || any_field) end_record();
            else current.line = line; // skip blank line
        } else if (c == '\r') {
            // tolerated before LF; bare CR inside a field is kept
            if (!(i + 1 < text.size() && text[i + 1] == '\n')) field += c;
        } else {
            field += c;
            any_field = true;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", "line " + std::to_string(line));
    if (!field.empty() || !current.fields.empty() || any_field) {
        records.push_back(std::move(current));
        records.back().fields.push_back(std::move(field));
    }
    return records;
}

Cell parse_cell(const std::string& field) {
    if (field.empty()) return missing_cell();
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc{} && ptr == last && std::isfinite(v)) return Cell{v};
    return Cell{field};
}

} // namespace

Table parse_csv(const std::string& text, const std::map<std::string, ColumnKind>& hints) {
    auto records = split_records(text);
    if (records.empty()) throw ParseError("CSV input is empty");

    Table t;
    const Record& header = records[0];
    for (const auto& name : header.fields) {
        if (name.empty()) throw ParseError("CSV header has an empty column name");
        Column c;
        c.name = name;
        t.columns.push_back(std::move(c));
    }

    for (std::size_t r = 1; r < records.size(); ++r) {
        const Record& rec = records[r];
        if (rec.fields.size() != header.fields.size())
            throw ParseError("CSV row has " + std::to_string(rec.fields.size()) +
                                 " fields, header has " + std::to_string(header.fields.size()),
                             "line " + std::to_string(rec.line));
        std::vector<Cell> row;
        for (const auto& f : rec.fields) row.push_back(parse_cell(f));
        t.rows.push_back(std::move(row));
    }

    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        auto hint = hints.find(t.columns[c].name);
        if (hint != hints.end()) {
            t.columns[c].kind = hint->second;
            continue;
        }
        if (t.rows.empty()) continue; // header-only: keep the Continuous default
        std::vector<Cell> values;
        for (const auto& row : t.rows) values.push_back(row[c]);
        t.columns[c].kind = infer_column_kind(values);
    }

    t.check_invariants();
    return t;
}

Table load_csv(const std::string& path, const std::map<std::string, ColumnKind>& hints) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CSV file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str(), hints);
    } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " in '" + path + "'");
    }
}

std::string write_csv(const Table& t) {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
        return out;
    };

    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += quote(t.columns[c].name);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            if (is_number(row[c])) out += format_double(as_number(row[c]));
            else if (is_text(row[c])) out += quote(as_text(row[c]));
        }
        out += '\n';
    }
    return out;
}

} // namespace aperture
