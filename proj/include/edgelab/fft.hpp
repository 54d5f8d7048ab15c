#pragma once

#include <vector>

#include "edgelab/common.hpp"

namespace edgelab::detail {

// In-place DFT, out_k = sum_j in_j exp(sign * 2 pi i jk/n). Radix-2 when n is a
// power of two, direct summation otherwise.
void dft(std::vector<Complex>& data, int sign);

}  // namespace edgelab::detail
