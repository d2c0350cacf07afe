#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "decorr/errors.hpp"

// Labeled datasets and their CSV form. The dialect is deliberately small:
// comma separated, UTF-8, one header row carrying feature names, numbers in
// shortest round-trip decimal form, and an optional final `label` column of
// 0/1 flags. Files are written atomically (temp file + rename).

namespace decorr {

struct LabeledDataset {
    std::string name;
    std::vector<std::string> feature_names;
    Eigen::MatrixXd data;    // rows = samples
    std::vector<int> labels; // empty when unlabeled

    long rows() const { return data.rows(); }
    int dims() const { return static_cast<int>(data.cols()); }
    bool labeled() const { return !labels.empty(); }

    long anomaly_count() const {
        long n = 0;
        for (int v : labels) n += v;
        return n;
    }

    void validate() const {
        if (data.rows() == 0 || data.cols() == 0)
            throw ValidationError("dataset '" + name + "' is empty");
        if (!data.allFinite())
            throw ValidationError("dataset '" + name + "' contains non-finite values");
        if (feature_names.size() != static_cast<std::size_t>(data.cols()))
            throw DimensionError("dataset '" + name + "': feature name count mismatch");
        if (labeled()) {
            if (labels.size() != static_cast<std::size_t>(data.rows()))
                throw DimensionError("dataset '" + name + "': label count mismatch");
            for (int v : labels)
                if (v != 0 && v != 1)
                    throw ValidationError("dataset '" + name + "': labels must be 0 or 1");
        }
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view tok, long line_no) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                         std::string(tok) + "'");
    return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
}

} // namespace detail

/// Replaces `path` with `content` via a temp file in the same directory.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out.flush())
            throw Error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string to_csv(const LabeledDataset& ds) {
    std::string out;
    out.reserve(static_cast<std::size_t>(ds.data.size()) * 20);
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
        if (j) out += ',';
        out += ds.feature_names[j];
    }
    if (ds.labeled())
        out += ",label";
    out += '\n';
    for (long i = 0; i < ds.data.rows(); ++i) {
        for (long j = 0; j < ds.data.cols(); ++j) {
            if (j) out += ',';
            out += detail::format_double(ds.data(i, j));
        }
        if (ds.labeled()) {
            out += ',';
            out += ds.labels[static_cast<std::size_t>(i)] ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

inline void write_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
    atomic_write(path, to_csv(ds));
}

inline LabeledDataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path.string() + "'");
    LabeledDataset ds;
    ds.name = path.stem().string();

    std::string line;
    if (!std::getline(in, line))
        throw ParseError("'" + path.string() + "': empty file");
    detail::strip_cr(line);
    auto header = detail::split_csv(line);
    bool labeled = !header.empty() && header.back() == "label";
    const std::size_t d = header.size() - (labeled ? 1 : 0);
    if (d == 0)
        throw ParseError("'" + path.string() + "': no feature columns");
    for (std::size_t j = 0; j < d; ++j)
        ds.feature_names.emplace_back(header[j]);

    std::vector<double> values;
    long m = 0;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty())
            continue;
        auto tokens = detail::split_csv(line);
        if (tokens.size() != header.size())
            throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) +
                             ": expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(tokens.size()));
        for (std::size_t j = 0; j < d; ++j)
            values.push_back(detail::parse_double(tokens[j], line_no));
        if (labeled) {
            const auto tok = tokens.back();
            if (tok == "0")
                ds.labels.push_back(0);
            else if (tok == "1")
                ds.labels.push_back(1);
            else
                throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) +
                                 ": label must be 0 or 1");
        }
        ++m;
    }
    if (m == 0)
        throw ParseError("'" + path.string() + "': no data rows");
    ds.data.resize(m, static_cast<long>(d));
    for (long i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j)
            ds.data(i, static_cast<long>(j)) = values[static_cast<std::size_t>(i) * d + j];
    return ds;
}

} // namespace decorr
