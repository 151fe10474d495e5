#ifndef TABREG_CSV_HPP
#define TABREG_CSV_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tabreg/table.hpp"

namespace tabreg {

/// What load_csv saw: cells that failed numeric parsing become missing
/// markers and are counted here (empty cells count too).
struct LoadReport {
    std::int64_t n_rows = 0;
    std::int64_t missing_count = 0;
    std::map<std::string, std::int64_t> missing_by_column;
    std::vector<std::string> ignored_columns; // present in the file, absent from the schema
};

/// Load an RFC-4180 CSV (UTF-8, header row required, '.' decimal separator)
/// against a column→role schema. Only schema columns are ingested; extra file
/// columns are recorded in the report and skipped. Numeric-role cells that do
/// not parse become missing markers.
///
/// Throws DataError on: missing file, schema columns absent from the header
/// (all missing names listed), zero data rows (unless allow_empty, used by
/// prediction on header-only inputs). With allow_missing_columns, schema
/// columns absent from the header are skipped instead of fatal — pipeline
/// stages read filtered files this way.
Table load_csv(const std::string& path, const std::map<std::string, ColumnRole>& schema,
               LoadReport* report = nullptr, bool allow_empty = false,
               bool allow_missing_columns = false);

/// Write a table as RFC-4180 CSV. Numbers use the shortest representation
/// that round-trips exactly, so load_csv(write_csv(t)) is value-identical
/// and a rewrite of a file produced here is byte-identical.
void write_csv(const Table& table, const std::string& path);

/// Canonical cell format for a double (shortest exact round-trip).
std::string format_number(double v);

/// Schema file: JSON object mapping column name to role string.
std::map<std::string, ColumnRole> load_schema(const std::string& path);
void save_schema(const std::map<std::string, ColumnRole>& schema, const std::string& path);

} // namespace tabreg

#endif
