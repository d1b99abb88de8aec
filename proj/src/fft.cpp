#include "mazya/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace mazya::detail {

Index next_power_of_two(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_nd(std::vector<std::complex<double>>& data, int d, Index length, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> line(static_cast<std::size_t>(length));
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(length));
  const Index total = static_cast<Index>(data.size());

  Index stride = 1;
  for (int axis = d - 1; axis >= 0; --axis) {
    const Index block = stride * length;
    for (Index outer = 0; outer < total; outer += block) {
      for (Index inner = 0; inner < stride; ++inner) {
        const Index base = outer + inner;
        for (Index k = 0; k < length; ++k) line[static_cast<std::size_t>(k)] = data[static_cast<std::size_t>(base + k * stride)];
        if (inverse)
          fft.inv(spectrum, line);
        else
          fft.fwd(spectrum, line);
        for (Index k = 0; k < length; ++k) data[static_cast<std::size_t>(base + k * stride)] = spectrum[static_cast<std::size_t>(k)];
      }
    }
    stride = block;
  }
}

}  // namespace mazya::detail
