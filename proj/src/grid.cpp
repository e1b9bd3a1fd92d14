#include "mlnk/grid.hpp"
#include "mlnk/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mlnk {

void GridSpec::validate(std::size_t max_points) const {
    if (d < 1 || d > 3)
        throw ValidationError("grid dimension must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0)
        throw ValidationError("grid size n must be a power of two, n >= 8");
    if (!(L > 0.0) || !std::isfinite(L))
        throw ValidationError("grid half-width L must be positive and finite");
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        if (total > max_points / std::size_t(n)) {
            std::ostringstream os;
            os << "grid of " << n << "^" << d << " points exceeds the cap of "
               << max_points << " points";
            throw CapacityError(os.str());
        }
        total *= std::size_t(n);
    }
}

std::size_t GridSpec::total_points() const {
    std::size_t total = 1;
    for (int a = 0; a < d; ++a)
        total *= std::size_t(n);
    return total;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < d; ++a)
        v *= dx();
    return v;
}

double GridSpec::freq(int k) const {
    return std::numbers::pi * double(freq_index(k)) / L;
}

std::array<int, 3> GridSpec::unflatten(std::size_t idx) const {
    std::array<int, 3> j = {0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
        j[a] = int(idx % std::size_t(n));
        idx /= std::size_t(n);
    }
    return j;
}

std::size_t GridSpec::flatten(const std::array<int, 3>& j) const {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a)
        idx = idx * std::size_t(n) + std::size_t(j[a]);
    return idx;
}

GridField::GridField(const GridSpec& g) : grid(g), values(g.total_points(), 0.0) {}

double GridField::sup_norm() const {
    double m = 0.0;
    for (double v : values)
        m = std::max(m, std::abs(v));
    return m;
}

double GridField::min_value() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values)
        m = std::min(m, v);
    return m;
}

double GridField::l1_mass() const {
    double s = 0.0;
    for (double v : values)
        s += std::abs(v);
    return s * grid.cell_volume();
}

double GridField::mean() const {
    double s = 0.0;
    for (double v : values)
        s += v;
    return values.empty() ? 0.0 : s / double(values.size());
}

} // namespace mlnk
