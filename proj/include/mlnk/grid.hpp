#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mlnk {

// Uniform periodic grid on [-L, L)^d with n points per axis (n a power of
// two). Row-major flattening, axis 0 slowest.
struct GridSpec {
    int d = 1;
    int n = 256;
    double L = 1.0;

    void validate(std::size_t max_points = std::size_t(1) << 24) const;

    std::size_t total_points() const;
    double dx() const { return 2.0 * L / double(n); }
    double cell_volume() const;

    // coordinate of index j along one axis: x_j = -L + j * dx
    double coord(int j) const { return -L + double(j) * dx(); }
    // signed frequency index for storage index k
    int freq_index(int k) const { return k < n / 2 ? k : k - n; }
    // angular frequency of storage index k: pi * k_signed / L
    double freq(int k) const;

    std::array<int, 3> unflatten(std::size_t idx) const;
    std::size_t flatten(const std::array<int, 3>& j) const;

    bool operator==(const GridSpec&) const = default;
};

struct GridField {
    GridSpec grid;
    std::vector<double> values;

    GridField() = default;
    explicit GridField(const GridSpec& g);

    double sup_norm() const;   // max |u|
    double min_value() const;
    double l1_mass() const;    // cell_volume * sum |u|
    double mean() const;       // plain average of the samples
};

} // namespace mlnk
