#include "tabreg/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tabreg {

namespace {

// One record, honoring quotes (embedded commas, doubled quotes, newlines).
// Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            fields.push_back(std::move(field));
            return true;
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s) {
    if (!needs_quoting(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

bool role_is_numeric(ColumnRole role) {
    switch (role) {
        case ColumnRole::categorical_feature:
        case ColumnRole::date_feature:
            return false;
        default:
            return true;
    }
}

} // namespace

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

Table load_csv(const std::string& path, const std::map<std::string, ColumnRole>& schema,
               LoadReport* report, bool allow_empty, bool allow_missing_columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CSV file: " + path);

    std::vector<std::string> header;
    if (!read_record(in, header)) throw DataError("CSV file is empty: " + path);

    // File position of each schema column; -1 while unseen.
    std::vector<int> slot_of_header(header.size(), -1);
    std::map<std::string, bool> seen;
    for (const auto& [name, role] : schema) seen[name] = false;

    std::vector<Column> columns;
    LoadReport local;
    for (std::size_t h = 0; h < header.size(); ++h) {
        auto it = schema.find(header[h]);
        if (it == schema.end()) {
            local.ignored_columns.push_back(header[h]);
            continue;
        }
        seen[header[h]] = true;
        slot_of_header[h] = static_cast<int>(columns.size());
        Column c;
        c.name = header[h];
        c.role = it->second;
        c.is_numeric = role_is_numeric(it->second);
        columns.push_back(std::move(c));
    }

    std::string absent;
    for (const auto& [name, was_seen] : seen) {
        if (!was_seen) absent += (absent.empty() ? "" : ", ") + name;
    }
    if (!absent.empty() && !allow_missing_columns) {
        throw DataError("schema columns missing from CSV header: " + absent);
    }

    std::vector<std::string> fields;
    std::size_t n_rows = 0;
    while (read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue; // trailing blank line
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(n_rows + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        for (std::size_t h = 0; h < header.size(); ++h) {
            const int slot = slot_of_header[h];
            if (slot < 0) continue;
            Column& c = columns[static_cast<std::size_t>(slot)];
            const std::string& cell = fields[h];
            if (c.is_numeric) {
                double v = 0.0;
                if (!cell.empty() && parse_double(cell, v)) {
                    c.numeric.push_back(v);
                    c.missing.push_back(0);
                } else {
                    c.numeric.push_back(0.0);
                    c.missing.push_back(1);
                    ++local.missing_count;
                    ++local.missing_by_column[c.name];
                }
            } else {
                if (cell.empty()) {
                    c.text.emplace_back();
                    c.missing.push_back(1);
                    ++local.missing_count;
                    ++local.missing_by_column[c.name];
                } else {
                    c.text.push_back(cell);
                    c.missing.push_back(0);
                }
            }
        }
        ++n_rows;
    }
    if (n_rows == 0 && !allow_empty) throw DataError("CSV has no data rows: " + path);
    local.n_rows = static_cast<std::int64_t>(n_rows);
    if (report) *report = std::move(local);
    return Table(std::move(columns));
}

void write_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    const auto& cols = table.columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out << ',';
        write_field(out, cols[i].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out << ',';
            const Column& c = cols[i];
            if (c.is_missing(r)) continue; // empty cell
            if (c.is_numeric) out << format_number(c.numeric[r]);
            else write_field(out, c.text[r]);
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing CSV: " + path);
}

std::map<std::string, ColumnRole> load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("schema file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError("schema file must be a JSON object of column→role");
    std::map<std::string, ColumnRole> schema;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string()) {
            throw ConfigError("schema value for '" + it.key() + "' must be a role string");
        }
        schema[it.key()] = role_from_string(it.value().get<std::string>());
    }
    return schema;
}

void save_schema(const std::map<std::string, ColumnRole>& schema, const std::string& path) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, role] : schema) j[name] = to_string(role);
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

} // namespace tabreg
