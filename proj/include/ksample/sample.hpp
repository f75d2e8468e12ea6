#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ksample/errors.hpp"

namespace ksample {

// Sizes n_1..n_k of the stacked sample together with the cumulative offsets
// 0 = v_0 < v_1 < ... < v_k = n. Group j occupies stacked rows
// [offsets[j], offsets[j] + sizes[j]).
struct GroupLayout {
    std::vector<Eigen::Index> sizes;
    std::vector<Eigen::Index> offsets;

    static GroupLayout from_sizes(std::vector<Eigen::Index> group_sizes) {
        GroupLayout layout;
        layout.sizes = std::move(group_sizes);
        layout.offsets.resize(layout.sizes.size() + 1);
        layout.offsets[0] = 0;
        for (std::size_t j = 0; j < layout.sizes.size(); ++j) {
            if (layout.sizes[j] < 1) {
                throw InvalidParameters("group sizes must be >= 1");
            }
            layout.offsets[j + 1] = layout.offsets[j] + layout.sizes[j];
        }
        return layout;
    }

    Eigen::Index group_count() const { return static_cast<Eigen::Index>(sizes.size()); }
    Eigen::Index total() const { return offsets.empty() ? 0 : offsets.back(); }
    Eigen::Index size(Eigen::Index j) const { return sizes[static_cast<std::size_t>(j)]; }
    Eigen::Index offset(Eigen::Index j) const { return offsets[static_cast<std::size_t>(j)]; }
};

// k labeled groups of d-dimensional observations, stored stacked by group.
struct MultiSample {
    std::vector<std::string> labels;
    GroupLayout layout;
    Eigen::MatrixXd data; // n x d, rows stacked in group order

    Eigen::Index group_count() const { return layout.group_count(); }
    Eigen::Index total_size() const { return layout.total(); }
    Eigen::Index dimension() const { return data.cols(); }
    double proportion(Eigen::Index j) const {
        return static_cast<double>(layout.size(j)) / static_cast<double>(total_size());
    }
    Eigen::Block<const Eigen::MatrixXd> group_rows(Eigen::Index j) const {
        return data.middleRows(layout.offset(j), layout.size(j));
    }
};

// First invariant violation found in a sample, with enough context to point
// at the offending group and row. row is 0-based within the group, -1 when
// the violation is not tied to a row.
struct ValidationIssue {
    std::string message;
    std::string group;
    std::ptrdiff_t row = -1;
};

inline std::optional<ValidationIssue> validate(const MultiSample& sample) noexcept {
    const Eigen::Index k = sample.group_count();
    if (k < 2) {
        return ValidationIssue{"need at least 2 groups", "", -1};
    }
    if (sample.labels.size() != static_cast<std::size_t>(k)) {
        return ValidationIssue{"label count does not match group count", "", -1};
    }
    if (sample.layout.offsets.size() != static_cast<std::size_t>(k) + 1 ||
        sample.layout.offsets.front() != 0 || sample.layout.total() != sample.data.rows()) {
        return ValidationIssue{"layout offsets do not partition the data rows", "", -1};
    }
    if (sample.dimension() < 1) {
        return ValidationIssue{"observations need at least one coordinate", "", -1};
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        if (sample.layout.size(j) != sample.layout.offset(j + 1) - sample.layout.offset(j)) {
            return ValidationIssue{"layout offsets are inconsistent with sizes",
                                   sample.labels[static_cast<std::size_t>(j)], -1};
        }
        if (sample.layout.size(j) < 2) {
            return ValidationIssue{"group needs at least 2 observations",
                                   sample.labels[static_cast<std::size_t>(j)], -1};
        }
        const auto block = sample.group_rows(j);
        for (Eigen::Index r = 0; r < block.rows(); ++r) {
            if (!block.row(r).allFinite()) {
                return ValidationIssue{"non-finite coordinate",
                                       sample.labels[static_cast<std::size_t>(j)],
                                       static_cast<std::ptrdiff_t>(r)};
            }
        }
    }
    return std::nullopt;
}

namespace detail {

inline std::string issue_text(const ValidationIssue& issue) {
    std::string text = issue.message;
    if (!issue.group.empty()) {
        text += " (group \"" + issue.group + "\"";
        if (issue.row >= 0) {
            text += ", row " + std::to_string(issue.row);
        }
        text += ")";
    }
    return text;
}

} // namespace detail

inline void validate_or_throw(const MultiSample& sample) {
    if (auto issue = validate(sample)) {
        throw ValidationError(detail::issue_text(*issue));
    }
}

// Stacks per-group observation matrices into a MultiSample and checks all
// invariants. Group order is kept as given.
inline MultiSample
make_multi_sample(const std::vector<std::pair<std::string, Eigen::MatrixXd>>& groups) {
    MultiSample sample;
    std::vector<Eigen::Index> sizes;
    Eigen::Index dim = groups.empty() ? 0 : groups.front().second.cols();
    Eigen::Index total = 0;
    for (const auto& [label, points] : groups) {
        if (points.cols() != dim) {
            throw ValidationError("mixed dimensions: group \"" + label + "\" has " +
                                  std::to_string(points.cols()) + " coordinates, expected " +
                                  std::to_string(dim));
        }
        sizes.push_back(points.rows());
        total += points.rows();
        sample.labels.push_back(label);
    }
    sample.layout = GroupLayout::from_sizes(std::move(sizes));
    sample.data.resize(total, dim);
    for (std::size_t j = 0; j < groups.size(); ++j) {
        sample.data.middleRows(sample.layout.offset(static_cast<Eigen::Index>(j)),
                               sample.layout.size(static_cast<Eigen::Index>(j))) =
            groups[j].second;
    }
    validate_or_throw(sample);
    return sample;
}

// Rebuilds the sample with groups in the order perm[0], perm[1], ...
// perm must be a permutation of 0..k-1.
inline MultiSample permute_groups(const MultiSample& sample,
                                  const std::vector<Eigen::Index>& perm) {
    const Eigen::Index k = sample.group_count();
    if (static_cast<Eigen::Index>(perm.size()) != k) {
        throw InvalidParameters("permutation length does not match group count");
    }
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (Eigen::Index p : perm) {
        if (p < 0 || p >= k || seen[static_cast<std::size_t>(p)]) {
            throw InvalidParameters("not a permutation of the group indices");
        }
        seen[static_cast<std::size_t>(p)] = true;
    }
    std::vector<std::pair<std::string, Eigen::MatrixXd>> groups;
    groups.reserve(perm.size());
    for (Eigen::Index p : perm) {
        groups.emplace_back(sample.labels[static_cast<std::size_t>(p)], sample.group_rows(p));
    }
    return make_multi_sample(groups);
}

namespace detail {

// Splits one CSV line. Handles RFC-4180 quoting ("" escapes a quote inside a
// quoted field); no multi-line fields.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
                continue;
            }
            current += c;
            ++i;
            continue;
        }
        if (c == '"' && current.empty()) {
            quoted = true;
            ++i;
            continue;
        }
        if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
            ++i;
            continue;
        }
        current += c;
        ++i;
    }
    if (quoted) {
        throw ParseError("line " + std::to_string(line_no) + ": unterminated quoted field");
    }
    fields.push_back(std::move(current));
    return fields;
}

inline double parse_coordinate(const std::string& cell, std::size_t line_no) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || cell.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed numeric cell \"" +
                         cell + "\"");
    }
    return value;
}

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    (void)ec;
    return std::string(buffer, ptr);
}

} // namespace detail

// Reads a sample from CSV with header `group,x1[,x2,...,xd]`. Groups are
// ordered by first appearance of each label; rows keep file order within
// their group.
inline MultiSample load_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) {
        throw ParseError("empty input: missing header");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = detail::split_csv_line(line, line_no);
    if (header.size() < 2 || header[0] != "group") {
        throw ParseError("line 1: header must be group,x1[,x2,...]");
    }
    const std::size_t dim = header.size() - 1;

    std::vector<std::string> order;
    std::vector<std::vector<double>> rows_by_group; // parallel to order, flattened coords
    auto group_index = [&](const std::string& label) -> std::size_t {
        for (std::size_t j = 0; j < order.size(); ++j) {
            if (order[j] == label) {
                return j;
            }
        }
        order.push_back(label);
        rows_by_group.emplace_back();
        return order.size() - 1;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = detail::split_csv_line(line, line_no);
        if (fields.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        auto& coords = rows_by_group[group_index(fields[0])];
        for (std::size_t c = 1; c < fields.size(); ++c) {
            coords.push_back(detail::parse_coordinate(fields[c], line_no));
        }
    }

    std::vector<std::pair<std::string, Eigen::MatrixXd>> groups;
    groups.reserve(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
        const std::size_t rows = rows_by_group[j].size() / dim;
        Eigen::MatrixXd points(rows, dim);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    rows_by_group[j][r * dim + c];
            }
        }
        groups.emplace_back(order[j], std::move(points));
    }
    return make_multi_sample(groups);
}

inline MultiSample load_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open \"" + path + "\"");
    }
    return load_csv(in);
}

// Emits the same format load_csv reads, so outputs can be fed back in.
inline void write_csv(const MultiSample& sample, std::ostream& out) {
    out << "group";
    for (Eigen::Index c = 0; c < sample.dimension(); ++c) {
        out << ",x" << (c + 1);
    }
    out << '\n';
    for (Eigen::Index j = 0; j < sample.group_count(); ++j) {
        const auto block = sample.group_rows(j);
        const std::string label = detail::csv_escape(sample.labels[static_cast<std::size_t>(j)]);
        for (Eigen::Index r = 0; r < block.rows(); ++r) {
            out << label;
            for (Eigen::Index c = 0; c < block.cols(); ++c) {
                out << ',' << detail::format_double(block(r, c));
            }
            out << '\n';
        }
    }
}

inline void write_csv_file(const MultiSample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open \"" + path + "\" for writing");
    }
    write_csv(sample, out);
}

} // namespace ksample
