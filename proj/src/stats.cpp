#include "tabreg/stats.hpp"

#include <fstream>

#include "tabreg/csv.hpp"

namespace tabreg::stats {

std::vector<ColumnSummary> describe(const Table& table) {
    std::vector<ColumnSummary> out;
    out.reserve(table.n_cols());
    for (const Column& c : table.columns()) {
        ColumnSummary s;
        s.name = c.name;
        if (!c.is_numeric) {
            for (std::size_t r = 0; r < table.n_rows(); ++r) s.missing_count += c.is_missing(r);
            out.push_back(std::move(s));
            continue;
        }
        std::vector<double> present;
        present.reserve(c.numeric.size());
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            if (c.is_missing(r)) ++s.missing_count;
            else present.push_back(c.numeric[r]);
        }
        if (!present.empty()) {
            s.mean = mean(present);
            s.min = *std::min_element(present.begin(), present.end());
            s.max = *std::max_element(present.begin(), present.end());
            if (present.size() >= 2) s.stddev = sample_std(present);
        }
        out.push_back(std::move(s));
    }
    return out;
}

CorrelationMatrix pearson_matrix(const Table& table, const std::vector<std::string>& columns) {
    const std::size_t k = columns.size();
    std::vector<const Column*> cols(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Column& c = table.column(columns[i]);
        if (!c.is_numeric) throw DataError("pearson_matrix: column is not numeric: " + c.name);
        cols[i] = &c;
    }

    CorrelationMatrix m;
    m.names = columns;
    m.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k),
                                         std::numeric_limits<double>::quiet_NaN());
    m.defined_mask.assign(k * k, 0);

    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            std::vector<double> x, y;
            x.reserve(table.n_rows());
            y.reserve(table.n_rows());
            for (std::size_t r = 0; r < table.n_rows(); ++r) {
                if (cols[i]->is_missing(r) || cols[j]->is_missing(r)) continue;
                x.push_back(cols[i]->numeric[r]);
                y.push_back(cols[j]->numeric[r]);
            }
            std::optional<double> r;
            if (i == j) {
                // diagonal: exactly 1 unless the column is constant
                if (pearson(x, x)) r = 1.0;
            } else {
                r = pearson(x, y);
            }
            if (r) {
                m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *r;
                m.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = *r;
                m.defined_mask[i * k + j] = 1;
                m.defined_mask[j * k + i] = 1;
            }
        }
    }
    return m;
}

void CorrelationMatrix::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "column";
    for (const std::string& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << names[i];
        for (std::size_t j = 0; j < names.size(); ++j) {
            out << ',';
            if (defined(i, j)) out << format_number(values(static_cast<Eigen::Index>(i),
                                                           static_cast<Eigen::Index>(j)));
        }
        out << '\n';
    }
}

} // namespace tabreg::stats
