#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coevo::stats {

/// Aligned per-segment metric columns for one group. NaN marks a masked entry.
struct MetricSeries {
    std::string group;
    std::vector<std::size_t> segments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  ///< data[column][row]

    std::size_t rows() const noexcept { return segments.size(); }
    std::optional<std::size_t> find(const std::string& column) const;
    /// Throws std::out_of_range for an unknown column.
    std::span<const double> column(const std::string& name) const;
    void add_column(std::string name, std::vector<double> values);
    /// Appends d_<name> = x[t] - x[t-1] for each named column; row 0 is masked.
    void add_first_differences(std::span<const std::string> names);
};

/// Drops masked entries.
std::vector<double> complete(std::span<const double> values);

}  // namespace coevo::stats
