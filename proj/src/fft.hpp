#pragma once

#include <Eigen/Core>

namespace lattice_dirac::detail {

/// In-place unscaled FFT over centered indices on an N^d block (axis 0
/// fastest): out_k = sum_n in_n e^{-+ 2 pi i n k / N}, sign + when `inverse`.
void centered_fft(Eigen::Ref<Eigen::VectorXcd> data, int dim, int n, bool inverse);

}  // namespace lattice_dirac::detail
