#ifndef TABREG_TABLE_HPP
#define TABREG_TABLE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabreg/error.hpp"

namespace tabreg {

enum class ColumnRole {
    identifier,          // row key, never a model feature
    numeric_feature,     //
    categorical_feature, // text categories, encoded before modeling
    date_feature,        // ISO-8601 date or bare calendar year, split before modeling
    target,              //
    appraisal_baseline,  // assessor's valuation column, used only by the baseline model
};

std::string to_string(ColumnRole role);
ColumnRole role_from_string(const std::string& s);

/// One named column. Storage is either numeric or text depending on role;
/// missing cells are tracked by an explicit per-cell mask, never a sentinel
/// value inside the data.
struct Column {
    std::string name;
    ColumnRole role = ColumnRole::numeric_feature;
    bool is_numeric = true;
    std::vector<double> numeric;
    std::vector<std::string> text;
    std::vector<std::uint8_t> missing; // 1 = missing, same length as the data

    std::size_t size() const { return is_numeric ? numeric.size() : text.size(); }
    bool is_missing(std::size_t row) const { return missing[row] != 0; }

    static Column make_numeric(std::string name, ColumnRole role, std::vector<double> values);
    static Column make_text(std::string name, ColumnRole role, std::vector<std::string> values);
};

/// Column-oriented dataset: the universal currency of the pipeline.
///
/// Invariants, checked at construction:
///   - all columns have the same number of rows,
///   - column names are unique,
///   - at most one column has role target.
///
/// Tables are immutable after construction; transformations return new
/// tables, so concurrent readers need no synchronization.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<Column> columns);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return columns_.size(); }
    const std::vector<Column>& columns() const { return columns_; }
    const Column& column(std::size_t i) const { return columns_[i]; }

    /// Index of a column by name, or nullopt.
    std::optional<std::size_t> find(const std::string& name) const;
    /// Column by name; throws DataError if absent.
    const Column& column(const std::string& name) const;
    bool has_column(const std::string& name) const { return find(name).has_value(); }

    /// Index of the target column, if any.
    std::optional<std::size_t> target_index() const;
    /// Index of the appraisal-baseline column, if any.
    std::optional<std::size_t> baseline_index() const;

    /// New table with the given rows, in the given order.
    Table select_rows(const std::vector<std::size_t>& rows) const;
    /// New table restricted to the named columns, in the given order.
    Table select_columns(const std::vector<std::string>& names) const;
    /// New table with an extra column appended.
    Table with_column(Column column) const;
    /// New table with the named column replaced by the given columns (in place).
    Table replace_column(const std::string& name, std::vector<Column> replacements) const;
    /// New table without the named columns.
    Table drop_columns(const std::vector<std::string>& names) const;

    /// Names of feature-role columns (numeric, categorical, date), in table order.
    std::vector<std::string> feature_names() const;
    /// Names of numeric-storage feature-role columns, in table order.
    std::vector<std::string> numeric_feature_names() const;

    /// Byte-exact serialization of one row's cells for the given columns.
    /// Equal rows serialize identically; used for dedup and leakage checks.
    std::string row_key(std::size_t row, const std::vector<std::size_t>& cols) const;

    /// 64-bit FNV-1a fingerprint of the full table contents (names, roles, cells).
    std::uint64_t fingerprint() const;

private:
    std::vector<Column> columns_;
    std::map<std::string, std::size_t> index_;
    std::size_t n_rows_ = 0;
};

} // namespace tabreg

#endif
