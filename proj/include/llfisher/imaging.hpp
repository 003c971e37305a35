#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llfisher/fisher.hpp"

namespace llfisher {

// Pixels j = 1..N_p cover [a_{j-1}, a_j] with a_j = a0 + j dx; bins 0 and
// N_p + 1 are the outer regions.
struct PixelGrid {
  double a0 = 0.0;
  double dx = 1.0;
  int n_pixels = 1;

  double edge(int j) const { return a0 + j * dx; }
  bool covers(double length) const { return a0 <= 0.0 && edge(n_pixels) >= length; }
  static PixelGrid tiling(double length, int n_pixels);  // a0 = 0, dx = L / N_p
};

void validate(const PixelGrid& grid);

struct AbsorptionImage {
  std::vector<int> counts;  // n_0, ..., n_{N_p+1}

  int particles() const;
  std::string json() const;  // e.g. "[0,1,1,0]"
  auto operator<=>(const AbsorptionImage&) const = default;
};

inline constexpr std::size_t kMaxImages = 5'000'000;

// All weak compositions of N into N_p + 2 bins, lexicographically descending.
std::vector<AbsorptionImage> enumerate_images(int n, int n_pixels, std::size_t cap = kMaxImages);
std::uint64_t image_count(int n, int n_pixels);

// N! / prod n_j!
std::uint64_t multiplicity(const AbsorptionImage& image);

struct ImageEntry {
  AbsorptionImage image;
  double probability = 0.0;
  double dprobability_dc = 0.0;
};

struct ImageDistribution {
  PixelGrid grid;
  StateSpec state;
  ModelParams params;
  int quadrature_order = 0;
  std::vector<ImageEntry> entries;

  double total_probability() const;
  double total_derivative() const;
};

struct ImagingOptions {
  FisherOptions fisher;
  int quadrature_order = 0;  // per pixel; 0 picks max(12, ceil(order(N) / N_p) + 8)
  std::size_t max_images = kMaxImages;
};

int default_pixel_order(int n, int n_pixels);

// Throws ConsistencyError when the probabilities drift from 1 by more than 1e-6.
ImageDistribution image_distribution(const StateSpec& spec, const ModelParams& params, const PixelGrid& grid,
                                     const ImagingOptions& options = {});

inline constexpr double kProbabilityFloor = 1e-300;

double imaging_cfi(const ImageDistribution& dist);

// Inverse-CDF draws from a 64-bit Mersenne Twister; the returned values are
// entry indices into dist.entries.
std::vector<std::size_t> sample_indices(const ImageDistribution& dist, std::size_t shots, std::uint64_t seed);
std::vector<AbsorptionImage> sample_images(const ImageDistribution& dist, std::size_t shots, std::uint64_t seed);

struct MleResult {
  double c_hat = 0.0;
  std::vector<double> c_grid;
  std::vector<double> loglik;
  std::size_t best_index = 0;
  bool at_edge = false;  // maximum on the grid boundary; no refinement
};

// Log-likelihood over c_grid with a 3-point parabolic refinement around the
// best grid point. distributions[j] must be computed at c_grid[j] with a
// common grid and enumeration.
MleResult mle_estimate(const std::vector<std::size_t>& indices, const std::vector<ImageDistribution>& distributions,
                       const std::vector<double>& c_grid);
MleResult mle_estimate(const std::vector<AbsorptionImage>& images, const StateSpec& spec, const PixelGrid& grid,
                       const std::vector<double>& c_grid, double length, const ImagingOptions& options = {});

}  // namespace llfisher
