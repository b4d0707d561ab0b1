#include "hdiv/spectrum.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>

namespace hdiv {

namespace {

struct FftwBuffer
{
   fftw_complex* data = nullptr;
   explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n))
   {
      if (data == nullptr) { throw std::bad_alloc(); }
   }
   ~FftwBuffer() { fftw_free(data); }
   FftwBuffer(const FftwBuffer&) = delete;
   FftwBuffer& operator=(const FftwBuffer&) = delete;
};

int signed_mode(int i, int m) { return i <= m / 2 ? i : i - m; }

} // namespace

double SpectrumRecord::total() const
{
   double s = 0.0;
   for (double e : energy) { s += e; }
   return s;
}

SpectrumRecord spectrum_from_samples(const SampleGrid& grid, const std::vector<std::vector<double>>& values, double t)
{
   const int d = grid.dim;
   const int n = grid.size();
   if (values.empty()) { throw std::invalid_argument("spectrum needs at least one component"); }
   for (const auto& v : values)
   {
      if (static_cast<int>(v.size()) != n) { throw std::invalid_argument("sample count does not match the grid"); }
   }
   double volume = 1.0;
   for (int a = 0; a < d; ++a) { volume *= grid.upper[a] - grid.lower[a]; }

   SpectrumRecord rec;
   rec.t = t;
   rec.samples = grid.m;
   std::array<int, 3> dims{grid.m[0], grid.m[1], grid.m[2]};

   FftwBuffer in(n);
   FftwBuffer out(n);
   fftw_plan plan = fftw_plan_dft(d, dims.data(), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
   if (plan == nullptr) { throw std::runtime_error("FFTW plan creation failed"); }

   double max_norm = 0.0;
   for (int a = 0; a < d; ++a) { max_norm += 0.25 * grid.m[a] * grid.m[a]; }
   const int shells = static_cast<int>(std::sqrt(max_norm)) + 1;
   rec.energy.assign(shells, 0.0);
   double sum_sq = 0.0;
   const double inv_n = 1.0 / n;

   for (const auto& comp : values)
   {
      for (int i = 0; i < n; ++i)
      {
         in.data[i][0] = comp[i];
         in.data[i][1] = 0.0;
         sum_sq += comp[i] * comp[i];
      }
      fftw_execute(plan);
      for (int i = 0; i < n; ++i)
      {
         int rest = i;
         double norm2 = 0.0;
         for (int a = d - 1; a >= 0; --a)
         {
            const int idx = rest % grid.m[a];
            rest /= grid.m[a];
            const double mode = signed_mode(idx, grid.m[a]);
            norm2 += mode * mode;
         }
         const double re = out.data[i][0] * inv_n;
         const double im = out.data[i][1] * inv_n;
         const int shell = static_cast<int>(std::floor(std::sqrt(norm2) + 1e-12));
         rec.energy[shell] += 0.5 * volume * (re * re + im * im);
      }
   }
   fftw_destroy_plan(plan);

   rec.kappa.resize(shells);
   for (int j = 0; j < shells; ++j) { rec.kappa[j] = j; }
   rec.grid_ke = 0.5 * volume * sum_sq * inv_n;
   return rec;
}

SpectrumRecord spectrum(const VelocitySpace& space, const Eigen::VectorXd& u, double t, int samples_per_axis)
{
   if (!space.mesh().fully_periodic()) { throw std::domain_error("spectrum requires a fully periodic domain"); }
   const SampleGrid grid = default_sample_grid(space, samples_per_axis);
   const std::vector<FieldJet> jets = sample_field(space, u, grid);
   std::vector<std::vector<double>> values(space.dim(), std::vector<double>(jets.size()));
   for (std::size_t i = 0; i < jets.size(); ++i)
   {
      for (int c = 0; c < space.dim(); ++c) { values[c][i] = jets[i].value[c]; }
   }
   return spectrum_from_samples(grid, values, t);
}

} // namespace hdiv
