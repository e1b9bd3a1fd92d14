#pragma once

#include "mlnk/grid.hpp"

#include <array>
#include <complex>
#include <vector>

namespace mlnk {

// Fourier symbol of the mixed diffusion operator: m(xi) = |xi|^2 + |xi|^(2 sigma),
// sampled on the grid's frequency lattice in FFT storage order.
struct SpectralSymbol {
    GridSpec grid;
    double sigma = 0.5;
    std::vector<double> values;

    // symbol at a signed integer frequency vector (lattice units)
    double value_at(const std::array<int, 3>& k_signed) const;
};

SpectralSymbol build_symbol(const GridSpec& grid, double sigma);

// exp(-t * m(xi)) clipped below at 0 to avoid spurious denormals
std::vector<double> symbol_multiplier(const SpectralSymbol& s, double t);

// Reusable c2c FFT plans and buffers for one grid shape. One instance per
// thread of control; do not share across threads.
class TransformWorkspace {
  public:
    explicit TransformWorkspace(const GridSpec& grid);
    ~TransformWorkspace();
    TransformWorkspace(const TransformWorkspace&) = delete;
    TransformWorkspace& operator=(const TransformWorkspace&) = delete;

    const GridSpec& grid() const { return grid_; }

    // unnormalized forward DFT of a real field
    void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out);
    // unnormalized backward DFT, real part; divide by n^d yourself if needed
    void backward(const std::vector<std::complex<double>>& in, std::vector<double>& out);

    // workspace cache for the calling thread, keyed by grid shape
    static TransformWorkspace& local(const GridSpec& grid);

  private:
    GridSpec grid_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
    void* buf_ = nullptr; // fftw_complex[n^d], in-place transforms
};

} // namespace mlnk
