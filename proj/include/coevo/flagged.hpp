#pragma once

namespace coevo {

/// A value paired with a flag marking it as a degenerate-case convention (e.g. 0 for an
/// undefined ratio) rather than a measurement.
template <class T>
struct Flagged {
    T value{};
    bool degenerate = false;
};

}  // namespace coevo
