#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "gapfill/core/types.hpp"

namespace testutil {

inline double NA() { return std::numeric_limits<double>::quiet_NaN(); }

/// Single-sensor dataset from a value list; NaN entries are Missing.
inline gapfill::core::SensorDataset series(const std::vector<double>& values) {
    std::vector<double> ts(values.size());
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = static_cast<double>(i);
    std::vector<std::vector<double>> rows(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) rows[i] = {values[i]};
    return gapfill::core::make_dataset({"A"}, ts, rows);
}

/// Multi-sensor dataset from row-per-timestamp values; NaN entries are Missing.
inline gapfill::core::SensorDataset grid(std::vector<std::string> ids,
                                         const std::vector<std::vector<double>>& rows) {
    std::vector<double> ts(rows.size());
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = static_cast<double>(i);
    return gapfill::core::make_dataset(std::move(ids), ts, rows);
}

/// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / ("gapfill_test_" + tag + "_" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

} // namespace testutil
