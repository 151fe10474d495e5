#include "tabreg/table.hpp"

#include <algorithm>
#include <cstring>

namespace tabreg {

std::string to_string(ColumnRole role) {
    switch (role) {
        case ColumnRole::identifier: return "identifier";
        case ColumnRole::numeric_feature: return "numeric_feature";
        case ColumnRole::categorical_feature: return "categorical_feature";
        case ColumnRole::date_feature: return "date_feature";
        case ColumnRole::target: return "target";
        case ColumnRole::appraisal_baseline: return "appraisal_baseline";
    }
    return "unknown";
}

ColumnRole role_from_string(const std::string& s) {
    if (s == "identifier") return ColumnRole::identifier;
    if (s == "numeric_feature") return ColumnRole::numeric_feature;
    if (s == "categorical_feature") return ColumnRole::categorical_feature;
    if (s == "date_feature") return ColumnRole::date_feature;
    if (s == "target") return ColumnRole::target;
    if (s == "appraisal_baseline") return ColumnRole::appraisal_baseline;
    throw ConfigError("unknown column role: " + s);
}

Column Column::make_numeric(std::string name, ColumnRole role, std::vector<double> values) {
    Column c;
    c.name = std::move(name);
    c.role = role;
    c.is_numeric = true;
    c.missing.assign(values.size(), 0);
    c.numeric = std::move(values);
    return c;
}

Column Column::make_text(std::string name, ColumnRole role, std::vector<std::string> values) {
    Column c;
    c.name = std::move(name);
    c.role = role;
    c.is_numeric = false;
    c.missing.assign(values.size(), 0);
    c.text = std::move(values);
    return c;
}

Table::Table(std::vector<Column> columns) : columns_(std::move(columns)) {
    n_rows_ = columns_.empty() ? 0 : columns_.front().size();
    std::size_t targets = 0;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        Column& c = columns_[i];
        if (c.size() != n_rows_) {
            throw DataError("column '" + c.name + "' has " + std::to_string(c.size()) +
                            " rows, expected " + std::to_string(n_rows_));
        }
        if (c.missing.size() != n_rows_) {
            throw DataError("column '" + c.name + "' missing-mask size mismatch");
        }
        if (!index_.emplace(c.name, i).second) {
            throw DataError("duplicate column name: " + c.name);
        }
        if (c.role == ColumnRole::target) ++targets;
    }
    if (targets > 1) throw DataError("table has more than one target column");
}

std::optional<std::size_t> Table::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const Column& Table::column(const std::string& name) const {
    auto idx = find(name);
    if (!idx) throw DataError("unknown column: " + name);
    return columns_[*idx];
}

std::optional<std::size_t> Table::target_index() const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].role == ColumnRole::target) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> Table::baseline_index() const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].role == ColumnRole::appraisal_baseline) return i;
    }
    return std::nullopt;
}

Table Table::select_rows(const std::vector<std::size_t>& rows) const {
    std::vector<Column> out;
    out.reserve(columns_.size());
    for (const Column& c : columns_) {
        Column nc;
        nc.name = c.name;
        nc.role = c.role;
        nc.is_numeric = c.is_numeric;
        nc.missing.reserve(rows.size());
        if (c.is_numeric) nc.numeric.reserve(rows.size());
        else nc.text.reserve(rows.size());
        for (std::size_t r : rows) {
            if (r >= n_rows_) throw DataError("row index out of range in select_rows");
            nc.missing.push_back(c.missing[r]);
            if (c.is_numeric) nc.numeric.push_back(c.numeric[r]);
            else nc.text.push_back(c.text[r]);
        }
        out.push_back(std::move(nc));
    }
    return Table(std::move(out));
}

Table Table::select_columns(const std::vector<std::string>& names) const {
    std::vector<Column> out;
    out.reserve(names.size());
    for (const std::string& n : names) out.push_back(column(n));
    return Table(std::move(out));
}

Table Table::with_column(Column column) const {
    std::vector<Column> out = columns_;
    out.push_back(std::move(column));
    return Table(std::move(out));
}

Table Table::replace_column(const std::string& name, std::vector<Column> replacements) const {
    auto idx = find(name);
    if (!idx) throw DataError("unknown column: " + name);
    std::vector<Column> out;
    out.reserve(columns_.size() + replacements.size() - 1);
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i == *idx) {
            for (Column& r : replacements) out.push_back(std::move(r));
        } else {
            out.push_back(columns_[i]);
        }
    }
    return Table(std::move(out));
}

Table Table::drop_columns(const std::vector<std::string>& names) const {
    std::vector<Column> out;
    for (const Column& c : columns_) {
        if (std::find(names.begin(), names.end(), c.name) == names.end()) out.push_back(c);
    }
    return Table(std::move(out));
}

std::vector<std::string> Table::feature_names() const {
    std::vector<std::string> out;
    for (const Column& c : columns_) {
        if (c.role == ColumnRole::numeric_feature || c.role == ColumnRole::categorical_feature ||
            c.role == ColumnRole::date_feature) {
            out.push_back(c.name);
        }
    }
    return out;
}

std::vector<std::string> Table::numeric_feature_names() const {
    std::vector<std::string> out;
    for (const Column& c : columns_) {
        if (c.is_numeric && (c.role == ColumnRole::numeric_feature ||
                             c.role == ColumnRole::categorical_feature ||
                             c.role == ColumnRole::date_feature)) {
            out.push_back(c.name);
        }
    }
    return out;
}

std::string Table::row_key(std::size_t row, const std::vector<std::size_t>& cols) const {
    std::string key;
    for (std::size_t ci : cols) {
        const Column& c = columns_[ci];
        if (c.is_missing(row)) {
            key.push_back('\x01');
        } else if (c.is_numeric) {
            key.push_back('\x02');
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(double));
            std::memcpy(&bits, &c.numeric[row], sizeof(bits));
            key.append(reinterpret_cast<const char*>(&bits), sizeof(bits));
        } else {
            key.push_back('\x03');
            key.append(c.text[row]);
        }
        key.push_back('\x00');
    }
    return key;
}

namespace {
void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}
} // namespace

std::uint64_t Table::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Column& c : columns_) {
        fnv1a(h, c.name.data(), c.name.size());
        const auto role = static_cast<std::uint8_t>(c.role);
        fnv1a(h, &role, 1);
        fnv1a(h, c.missing.data(), c.missing.size());
        if (c.is_numeric) {
            fnv1a(h, c.numeric.data(), c.numeric.size() * sizeof(double));
        } else {
            for (const std::string& s : c.text) fnv1a(h, s.data(), s.size());
        }
    }
    return h;
}

} // namespace tabreg
