#pragma once

#include <Eigen/SparseCore>
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "psgleco/errors.hpp"
#include "psgleco/objectives.hpp"

namespace psgleco {

// Sparse dataset in compressed-sparse-row layout. Column indices are stored
// 0-based and strictly increasing within each row.
struct Dataset {
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> col_idx;
    std::vector<double> values;
    std::vector<double> labels;
    std::int32_t n_declared = 0;  // max 1-based feature index seen

    std::int64_t rows() const { return static_cast<std::int64_t>(labels.size()); }
    std::int32_t cols() const { return n_declared; }
};

namespace detail {

inline bool parse_double(const std::string& token, double& out) {
    const char* begin = token.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + token.size() && token.size() > 0;
}

} // namespace detail

// Parses LIBSVM text: one `<label> <idx>:<val> ...` record per line, 1-based
// indices, `#` starts a comment, blank lines are skipped. The feature
// dimension is the maximum index seen across the file.
inline Dataset parse_libsvm(std::istream& in) {
    Dataset d;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);

        std::istringstream fields(line);
        std::string token;
        if (!(fields >> token)) continue;  // blank line

        double label = 0.0;
        if (!detail::parse_double(token, label)) {
            throw DataError(DataError::Kind::malformed_line,
                            "line " + std::to_string(line_no) + ": bad label '" +
                                token + "'",
                            line_no, 1);
        }
        d.labels.push_back(label);

        std::int32_t prev_idx = 0;  // indices are 1-based in the file
        while (fields >> token) {
            const auto colon = token.find(':');
            if (colon == std::string::npos || colon == 0 ||
                colon + 1 == token.size()) {
                throw DataError(DataError::Kind::malformed_line,
                                "line " + std::to_string(line_no) +
                                    ": expected <idx>:<val>, got '" + token + "'",
                                line_no,
                                static_cast<std::int64_t>(fields.tellg()));
            }
            double idx_value = 0.0;
            double value = 0.0;
            if (!detail::parse_double(token.substr(0, colon), idx_value) ||
                idx_value != static_cast<std::int32_t>(idx_value) || idx_value < 1 ||
                !detail::parse_double(token.substr(colon + 1), value)) {
                throw DataError(DataError::Kind::malformed_line,
                                "line " + std::to_string(line_no) +
                                    ": bad feature entry '" + token + "'",
                                line_no,
                                static_cast<std::int64_t>(fields.tellg()));
            }
            const auto idx = static_cast<std::int32_t>(idx_value);
            if (idx <= prev_idx) {
                throw DataError(DataError::Kind::nonmonotone_index,
                                "line " + std::to_string(line_no) +
                                    ": feature index " + std::to_string(idx) +
                                    " not increasing",
                                line_no,
                                static_cast<std::int64_t>(fields.tellg()));
            }
            prev_idx = idx;
            d.col_idx.push_back(idx - 1);
            d.values.push_back(value);
            d.n_declared = std::max(d.n_declared, idx);
        }
        d.row_ptr.push_back(static_cast<std::int64_t>(d.values.size()));
    }
    if (d.labels.empty()) {
        throw DataError(DataError::Kind::empty_file, "no records in input");
    }
    return d;
}

inline Dataset parse_libsvm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(DataError::Kind::io, "cannot open '" + path + "'");
    }
    return parse_libsvm(in);
}

// Writes the dataset back in LIBSVM text form, full precision.
inline std::string serialize_libsvm(const Dataset& d) {
    std::string out;
    char buf[64];
    for (std::int64_t i = 0; i < d.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", d.labels[static_cast<std::size_t>(i)]);
        out += buf;
        for (std::int64_t p = d.row_ptr[static_cast<std::size_t>(i)];
             p < d.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
            std::snprintf(buf, sizeof buf, " %d:%.17g",
                          d.col_idx[static_cast<std::size_t>(p)] + 1,
                          d.values[static_cast<std::size_t>(p)]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

// Maps raw labels onto {-1, +1}; every raw label in the data must appear in
// the map (rows are never silently dropped).
inline Dataset remap_labels(Dataset d,
                            const std::vector<std::pair<double, double>>& map) {
    std::map<double, double> lookup(map.begin(), map.end());
    for (auto& label : d.labels) {
        const auto hit = lookup.find(label);
        if (hit == lookup.end()) {
            throw DataError(DataError::Kind::unmapped_label,
                            "label " + std::to_string(label) + " has no mapping");
        }
        label = hit->second;
    }
    return d;
}

// Keeps exactly the rows whose raw label is in `keep`, preserving order.
inline Dataset filter_classes(const Dataset& d, const std::vector<double>& keep) {
    Dataset out;
    out.n_declared = d.n_declared;
    for (std::int64_t i = 0; i < d.rows(); ++i) {
        const double label = d.labels[static_cast<std::size_t>(i)];
        if (std::find(keep.begin(), keep.end(), label) == keep.end()) continue;
        out.labels.push_back(label);
        for (std::int64_t p = d.row_ptr[static_cast<std::size_t>(i)];
             p < d.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
            out.col_idx.push_back(d.col_idx[static_cast<std::size_t>(p)]);
            out.values.push_back(d.values[static_cast<std::size_t>(p)]);
        }
        out.row_ptr.push_back(static_cast<std::int64_t>(out.values.size()));
    }
    if (out.labels.empty()) {
        throw DataError(DataError::Kind::empty_result,
                        "class filter removed every row");
    }
    return out;
}

enum class ScaleRange { unit, symmetric };
enum class ScaleMode { column, global };

// Min-max feature scaling onto [0,1] or [-1,1]. Implicit zeros participate in
// the min/max; columns whose zero no longer maps to zero are materialized.
// Constant columns map to the midpoint of the target range. Global mode uses
// one min/max across all features (the pixels/255 convention).
inline Dataset scale_features(const Dataset& d, ScaleRange range,
                              ScaleMode mode = ScaleMode::column) {
    if (d.rows() == 0) {
        throw DataError(DataError::Kind::empty_result, "cannot scale empty dataset");
    }
    const std::size_t cols = static_cast<std::size_t>(d.n_declared);
    std::vector<double> lo(cols, std::numeric_limits<double>::infinity());
    std::vector<double> hi(cols, -std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> nnz(cols, 0);
    for (std::size_t p = 0; p < d.values.size(); ++p) {
        const auto c = static_cast<std::size_t>(d.col_idx[p]);
        lo[c] = std::min(lo[c], d.values[p]);
        hi[c] = std::max(hi[c], d.values[p]);
        ++nnz[c];
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (nnz[c] < d.rows()) {  // column has implicit zeros
            lo[c] = std::min(lo[c], 0.0);
            hi[c] = std::max(hi[c], 0.0);
        }
    }
    if (mode == ScaleMode::global) {
        double glo = 0.0, ghi = 0.0;
        bool first = true;
        for (std::size_t c = 0; c < cols; ++c) {
            if (nnz[c] == 0 && d.rows() > 0) { lo[c] = 0.0; hi[c] = 0.0; }
            glo = first ? lo[c] : std::min(glo, lo[c]);
            ghi = first ? hi[c] : std::max(ghi, hi[c]);
            first = false;
        }
        std::fill(lo.begin(), lo.end(), glo);
        std::fill(hi.begin(), hi.end(), ghi);
    }

    const double target_lo = range == ScaleRange::unit ? 0.0 : -1.0;
    const double target_hi = 1.0;
    const double midpoint = 0.5 * (target_lo + target_hi);

    auto transform = [&](std::size_t c, double v) {
        if (lo[c] == hi[c]) return midpoint;
        return target_lo + (target_hi - target_lo) * (v - lo[c]) / (hi[c] - lo[c]);
    };

    // Columns whose implicit zero maps to a nonzero value must gain explicit
    // entries in every row.
    std::vector<bool> materialize(cols, false);
    for (std::size_t c = 0; c < cols; ++c) {
        materialize[c] = nnz[c] < d.rows() && transform(c, 0.0) != 0.0;
    }

    Dataset out;
    out.n_declared = d.n_declared;
    out.labels = d.labels;
    std::vector<double> dense_row(cols, 0.0);
    std::vector<bool> present(cols, false);
    for (std::int64_t i = 0; i < d.rows(); ++i) {
        for (std::int64_t p = d.row_ptr[static_cast<std::size_t>(i)];
             p < d.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
            const auto c = static_cast<std::size_t>(d.col_idx[static_cast<std::size_t>(p)]);
            dense_row[c] = d.values[static_cast<std::size_t>(p)];
            present[c] = true;
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!present[c] && !materialize[c]) continue;
            const double scaled = transform(c, dense_row[c]);
            if (present[c] || scaled != 0.0) {
                out.col_idx.push_back(static_cast<std::int32_t>(c));
                out.values.push_back(scaled);
            }
            dense_row[c] = 0.0;
            present[c] = false;
        }
        out.row_ptr.push_back(static_cast<std::int64_t>(out.values.size()));
    }
    return out;
}

// Dense-dimension view of the dataset as an Eigen sparse matrix; n_override
// widens the feature dimension (trailing all-zero columns).
inline SparseRowMatrix to_sparse(const Dataset& d, std::int32_t n_override = 0) {
    const std::int32_t n = std::max(d.n_declared, n_override);
    SparseRowMatrix Z(d.rows(), n);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(d.values.size());
    for (std::int64_t i = 0; i < d.rows(); ++i) {
        for (std::int64_t p = d.row_ptr[static_cast<std::size_t>(i)];
             p < d.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
            entries.emplace_back(static_cast<int>(i),
                                 d.col_idx[static_cast<std::size_t>(p)],
                                 d.values[static_cast<std::size_t>(p)]);
        }
    }
    Z.setFromTriplets(entries.begin(), entries.end());
    return Z;
}

inline Vector labels_vector(const Dataset& d) {
    return Eigen::Map<const Vector>(d.labels.data(),
                                    static_cast<Eigen::Index>(d.labels.size()));
}

} // namespace psgleco
