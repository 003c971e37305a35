#include "llfisher/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "llfisher/detail/parallel.hpp"
#include "llfisher/detail/summation.hpp"

namespace llfisher {

namespace {

// Probability and derivative integrands accumulated together.
struct Pair {
  double p = 0.0, d = 0.0;
  Pair& operator+=(const Pair& o) {
    p += o.p;
    d += o.d;
    return *this;
  }
  friend Pair operator*(double w, const Pair& a) { return {w * a.p, w * a.d}; }
};

}  // namespace

PixelGrid PixelGrid::tiling(double length, int n_pixels) {
  if (!(length > 0.0)) throw InvalidArgument("PixelGrid: length must be positive");
  if (n_pixels < 1) throw InvalidArgument("PixelGrid: N_p must be >= 1");
  return {0.0, length / n_pixels, n_pixels};
}

void validate(const PixelGrid& grid) {
  if (grid.n_pixels < 1) throw InvalidArgument("PixelGrid: N_p must be >= 1");
  if (!(grid.dx > 0.0) || !std::isfinite(grid.dx)) throw InvalidArgument("PixelGrid: dx must be positive");
  if (!std::isfinite(grid.a0)) throw InvalidArgument("PixelGrid: a0 must be finite");
}

int AbsorptionImage::particles() const {
  int n = 0;
  for (int c : counts) n += c;
  return n;
}

std::string AbsorptionImage::json() const {
  std::string s = "[";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(counts[i]);
  }
  return s + "]";
}

std::uint64_t image_count(int n, int n_pixels) {
  // C(N + N_p + 1, N), exact while it fits.
  const std::uint64_t top = static_cast<std::uint64_t>(n) + n_pixels + 1;
  std::uint64_t k = std::min<std::uint64_t>(n, n_pixels + 1);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = top - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

std::vector<AbsorptionImage> enumerate_images(int n, int n_pixels, std::size_t cap) {
  if (n < 1) throw InvalidArgument("enumerate_images: N must be >= 1");
  if (n_pixels < 1) throw InvalidArgument("enumerate_images: N_p must be >= 1");
  const std::uint64_t count = image_count(n, n_pixels);
  if (count > cap)
    throw ResourceLimit("enumerate_images: " + std::to_string(count) + " images exceed the cap of " +
                        std::to_string(cap));
  const int bins = n_pixels + 2;
  std::vector<AbsorptionImage> out;
  out.reserve(count);
  std::vector<int> c(bins, 0);
  auto fill = [&](auto&& self, int bin, int left) -> void {
    if (bin == bins - 1) {
      c[bin] = left;
      out.push_back({c});
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[bin] = v;
      self(self, bin + 1, left - v);
    }
  };
  fill(fill, 0, n);
  return out;
}

std::uint64_t multiplicity(const AbsorptionImage& image) {
  // Product of binomials keeps intermediates exact.
  std::uint64_t r = 1;
  int placed = 0;
  for (int c : image.counts) {
    if (c < 0) throw InvalidArgument("multiplicity: negative count");
    for (int i = 1; i <= c; ++i) {
      const std::uint64_t num = static_cast<std::uint64_t>(placed) + i;
      if (r > std::numeric_limits<std::uint64_t>::max() / num) throw ResourceLimit("multiplicity: overflow");
      r = r * num / i;
    }
    placed += c;
  }
  return r;
}

double ImageDistribution::total_probability() const {
  detail::CompensatedSum<double> s;
  for (const auto& e : entries) s.add(e.probability);
  return s.value();
}

double ImageDistribution::total_derivative() const {
  detail::CompensatedSum<double> s;
  for (const auto& e : entries) s.add(e.dprobability_dc);
  return s.value();
}

int default_pixel_order(int n, int n_pixels) {
  const int base = default_quadrature_order(n);
  return std::max(12, (base + n_pixels - 1) / n_pixels + 8);
}

ImageDistribution image_distribution(const StateSpec& spec, const ModelParams& params, const PixelGrid& grid,
                                     const ImagingOptions& options) {
  validate(spec);
  validate(params);
  validate(grid);
  const int n = spec.n();
  const double length = params.length;

  const BetheSolution sol = solve_bethe(spec, params, options.fisher.solver);
  const AmplitudeTable table = amplitudes(sol, params, spec.bc, options.fisher.wavefunction);
  const double n2 = norm_sq(sol.k, params, spec.bc).norm_sq;
  const double dn2 = params.c > 0.0 ? dnorm_sq_dc(spec, params, options.fisher.solver) : 0.0;
  double nfact = 1.0;
  for (int i = 2; i <= n; ++i) nfact *= i;

  ImageDistribution dist;
  dist.grid = grid;
  dist.state = spec;
  dist.params = params;
  dist.quadrature_order = options.quadrature_order > 0 ? options.quadrature_order : default_pixel_order(n, grid.n_pixels);
  const auto images = enumerate_images(n, grid.n_pixels, options.max_images);
  dist.entries.resize(images.size());

  // Bin intervals clipped to the support [0, L].
  const int bins = grid.n_pixels + 2;
  std::vector<Interval> bin_interval(bins);
  const double inf = std::numeric_limits<double>::infinity();
  for (int b = 0; b < bins; ++b) {
    const double lo = b == 0 ? -inf : grid.edge(b - 1);
    const double hi = b == bins - 1 ? inf : grid.edge(b);
    bin_interval[b] = {std::clamp(lo, 0.0, length), std::clamp(hi, 0.0, length)};
  }

  const double scale_p = 1.0 / (nfact * n2);
  const double scale_d = dn2 / (nfact * n2 * n2);
  detail::parallel_for(images.size(), detail::resolve_threads(options.fisher.threads), [&](std::size_t i) {
    ImageEntry& e = dist.entries[i];
    e.image = images[i];
    std::vector<Interval> box;
    box.reserve(n);
    for (int b = 0; b < bins; ++b)
      for (int r = 0; r < images[i].counts[b]; ++r) box.push_back(bin_interval[b]);
    const Pair integral = box_quadrature(
        [&](std::span<const double> x) {
          const auto [v, dv] = table.evaluate(x);
          const double m2 = std::norm(v);
          return Pair{m2, 2.0 * (std::conj(v) * dv).real()};
        },
        std::span<const Interval>(box), dist.quadrature_order);
    const double zeta = static_cast<double>(multiplicity(images[i]));
    e.probability = zeta * integral.p * scale_p;
    e.dprobability_dc = zeta * (integral.d * scale_p - integral.p * scale_d);
  });

  const double total = dist.total_probability();
  if (std::abs(total - 1.0) > 1e-6)
    throw ConsistencyError("image_distribution: probabilities sum to " + std::to_string(total));
  return dist;
}

double imaging_cfi(const ImageDistribution& dist) {
  detail::CompensatedSum<double> s;
  for (const auto& e : dist.entries)
    if (e.probability > kProbabilityFloor) s.add(e.dprobability_dc * e.dprobability_dc / e.probability);
  return s.value();
}

std::vector<std::size_t> sample_indices(const ImageDistribution& dist, std::size_t shots, std::uint64_t seed) {
  if (shots < 1) throw InvalidArgument("sample_images: shots must be >= 1");
  std::vector<double> cdf(dist.entries.size());
  double run = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    run += std::max(dist.entries[i].probability, 0.0);
    cdf[i] = run;
  }
  if (!(run > 0.0)) throw InvalidArgument("sample_images: distribution has no mass");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out(shots);
  for (auto& o : out) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * run;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    // Skip zero-probability entries sharing the same cumulative value.
    while (dist.entries[it - cdf.begin()].probability <= 0.0 && it + 1 != cdf.end()) ++it;
    o = static_cast<std::size_t>(it - cdf.begin());
  }
  return out;
}

std::vector<AbsorptionImage> sample_images(const ImageDistribution& dist, std::size_t shots, std::uint64_t seed) {
  std::vector<AbsorptionImage> out;
  out.reserve(shots);
  for (std::size_t i : sample_indices(dist, shots, seed)) out.push_back(dist.entries[i].image);
  return out;
}

MleResult mle_estimate(const std::vector<std::size_t>& indices, const std::vector<ImageDistribution>& distributions,
                       const std::vector<double>& c_grid) {
  if (c_grid.empty()) throw InvalidArgument("mle_estimate: c grid is empty");
  if (distributions.size() != c_grid.size()) throw InvalidArgument("mle_estimate: one distribution per grid point");
  for (std::size_t j = 1; j < c_grid.size(); ++j)
    if (!(c_grid[j] > c_grid[j - 1])) throw InvalidArgument("mle_estimate: c grid must be strictly increasing");
  const std::size_t nimg = distributions.front().entries.size();
  for (const auto& d : distributions)
    if (d.entries.size() != nimg) throw InvalidArgument("mle_estimate: distributions use different grids");

  std::vector<std::size_t> hist(nimg, 0);
  for (std::size_t i : indices) {
    if (i >= nimg) throw InvalidArgument("mle_estimate: image index out of range");
    ++hist[i];
  }

  MleResult out;
  out.c_grid = c_grid;
  out.loglik.resize(c_grid.size());
  for (std::size_t j = 0; j < c_grid.size(); ++j) {
    detail::CompensatedSum<double> s;
    bool impossible = false;
    for (std::size_t i = 0; i < nimg && !impossible; ++i) {
      if (!hist[i]) continue;
      const double p = distributions[j].entries[i].probability;
      if (p > kProbabilityFloor) {
        s.add(static_cast<double>(hist[i]) * std::log(p));
      } else {
        impossible = true;
      }
    }
    out.loglik[j] = impossible ? -std::numeric_limits<double>::infinity() : s.value();
  }
  out.best_index = static_cast<std::size_t>(std::max_element(out.loglik.begin(), out.loglik.end()) - out.loglik.begin());
  out.c_hat = c_grid[out.best_index];
  const std::size_t b = out.best_index;
  if (b == 0 || b + 1 == c_grid.size()) {
    out.at_edge = true;
    return out;
  }
  const double x0 = c_grid[b - 1], x1 = c_grid[b], x2 = c_grid[b + 1];
  const double y0 = out.loglik[b - 1], y1 = out.loglik[b], y2 = out.loglik[b + 1];
  if (!std::isfinite(y0) || !std::isfinite(y2)) return out;
  const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
  const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
  if (den != 0.0) {
    const double v = x1 - 0.5 * num / den;
    if (v > x0 && v < x2) out.c_hat = v;
  }
  return out;
}

MleResult mle_estimate(const std::vector<AbsorptionImage>& images, const StateSpec& spec, const PixelGrid& grid,
                       const std::vector<double>& c_grid, double length, const ImagingOptions& options) {
  if (c_grid.empty()) throw InvalidArgument("mle_estimate: c grid is empty");
  std::vector<ImageDistribution> dists;
  dists.reserve(c_grid.size());
  for (double c : c_grid) dists.push_back(image_distribution(spec, {c, length}, grid, options));
  std::map<AbsorptionImage, std::size_t> lookup;
  for (std::size_t i = 0; i < dists.front().entries.size(); ++i) lookup.emplace(dists.front().entries[i].image, i);
  std::vector<std::size_t> indices;
  indices.reserve(images.size());
  for (const auto& img : images) {
    auto it = lookup.find(img);
    if (it == lookup.end()) throw InvalidArgument("mle_estimate: image " + img.json() + " is not consistent with N");
    indices.push_back(it->second);
  }
  return mle_estimate(indices, dists, c_grid);
}

}  // namespace llfisher
