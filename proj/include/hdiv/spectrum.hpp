#pragma once

// Shell-summed kinetic energy spectrum of a velocity sampled on a uniform
// grid of a periodic box.

#include "hdiv/diagnostics.hpp"

#include <vector>

namespace hdiv {

/// Energy in integer wavenumber shells. Mode n = (n_1, .., n_d) has physical
/// wavenumber 2 pi n_a / L_a; shell j collects the modes with j <= |n| < j+1.
struct SpectrumRecord
{
   double t = 0.0;
   std::array<int, 3> samples{1, 1, 1};
   std::vector<double> kappa;   ///< shell index j
   std::vector<double> energy;  ///< E(j) = 1/2 |Omega| sum_{shell} |u_hat|^2
   double grid_ke = 0.0;        ///< 1/2 |Omega| mean of |u|^2 over the samples
   double total() const;
};

/// Spectrum of samples given row-major on `grid` (component-major: u_c at
/// values[c][flat]). Throws std::invalid_argument on size mismatches.
SpectrumRecord spectrum_from_samples(const SampleGrid& grid, const std::vector<std::vector<double>>& values,
                                     double t = 0.0);

/// Samples u_h on default_sample_grid(space, samples_per_axis) and transforms.
/// Throws std::domain_error on non-periodic meshes.
SpectrumRecord spectrum(const VelocitySpace& space, const Eigen::VectorXd& u, double t = 0.0,
                        int samples_per_axis = 0);

} // namespace hdiv
