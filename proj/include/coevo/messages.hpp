#pragma once

#include <optional>
#include <span>

namespace coevo::sim {

/// How the distance between two segments' message values is aggregated.
enum class DistanceMode {
    CrossPairMean,  ///< mean of |m_i - m_j| over all cross pairs
    CrossPairSum,   ///< literal sum over all cross pairs
};

/// nullopt when either segment is empty.
std::optional<double> message_distance(std::span<const double> current, std::span<const double> previous,
                                       DistanceMode mode = DistanceMode::CrossPairMean);

/// Shannon entropy (bits) of the empirical distribution of integer-rounded values.
double message_entropy(std::span<const double> values);

/// Population standard deviation.
double message_sd(std::span<const double> values);

/// Jaccard overlap of the two segments' distinct-value sets; nullopt when both are empty.
std::optional<double> message_jaccard(std::span<const double> current, std::span<const double> previous);

}  // namespace coevo::sim
