#include "coevo/stats/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coevo::stats {

std::optional<std::size_t> MetricSeries::find(const std::string& column) const {
    auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
}

std::span<const double> MetricSeries::column(const std::string& name) const {
    const auto idx = find(name);
    if (!idx) throw std::out_of_range("unknown column '" + name + "'");
    return data[*idx];
}

void MetricSeries::add_column(std::string name, std::vector<double> values) {
    if (values.size() != rows()) throw std::invalid_argument("column '" + name + "' has the wrong length");
    if (find(name)) throw std::invalid_argument("duplicate column '" + name + "'");
    columns.push_back(std::move(name));
    data.push_back(std::move(values));
}

void MetricSeries::add_first_differences(std::span<const std::string> names) {
    for (const auto& name : names) {
        const auto src = column(name);
        std::vector<double> diff(src.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t t = 1; t < src.size(); ++t) diff[t] = src[t] - src[t - 1];
        add_column("d_" + name, std::move(diff));
    }
}

std::vector<double> complete(std::span<const double> values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values)
        if (!std::isnan(v)) out.push_back(v);
    return out;
}

}  // namespace coevo::stats
