#include "twk/watermark.hpp"

#include <stdexcept>

#include "twk/gaussian.hpp"

namespace twk {

void EmbedParams::validate() const {
  if (bit_levels < 2) {
    throw std::invalid_argument("EmbedParams: bit_levels must be >= 2");
  }
  if (window < 1 || features < 1) {
    throw std::invalid_argument("EmbedParams: window and features must be >= 1");
  }
  if (interval < 1 || interval > window) {
    throw std::invalid_argument("EmbedParams: need 1 <= interval <= window");
  }
}

SeedMatrix::SeedMatrix(std::size_t window, std::size_t features,
                       std::size_t bit_levels, std::size_t interval)
    : window_(window),
      features_(features),
      bit_levels_(bit_levels),
      interval_(interval),
      seeds_(window * features, 0) {
  if (window < 1 || features < 1 || bit_levels < 2 || interval < 1) {
    throw std::invalid_argument("SeedMatrix: invalid dimensions");
  }
}

bool SeedMatrix::isIntervalStart(std::size_t w1) const {
  if (w1 < 1 || w1 > window_) {
    return false;
  }
  const std::size_t k = (w1 - 1) / interval_;
  return w1 == k * interval_ + 1 && k < intervals();
}

std::vector<std::size_t> SeedMatrix::validTimesteps() const {
  std::vector<std::size_t> out;
  out.reserve(window_);
  for (std::size_t w = 1; w <= window_; ++w) {
    if (!isIntervalStart(w)) {
      out.push_back(w);
    }
  }
  return out;
}

std::vector<std::uint32_t> chain_hash(const WatermarkKey& key, std::size_t w,
                                      std::span<const std::uint32_t> prev) {
  const Prf prf = key.subKey("chain-hash");
  const auto sigma = keyed_permutation(prf, prev.size(), {std::uint64_t{w}});
  std::vector<std::uint32_t> out(prev.size());
  for (std::size_t f = 0; f < prev.size(); ++f) {
    out[f] = prev[sigma[f]];
  }
  return out;
}

SeedMatrix generate_seeds(const EmbedParams& params) {
  params.validate();
  SeedMatrix s(params.window, params.features, params.bit_levels, params.interval);
  const Prf seed_prf = params.key.subKey("seed-sample");
  for (std::size_t w = 1; w <= params.window; ++w) {
    if (s.isIntervalStart(w)) {
      const std::uint64_t k = (w - 1) / params.interval;
      for (std::size_t f = 0; f < params.features; ++f) {
        s.at(w - 1, f) = static_cast<std::uint32_t>(
            seed_prf.below(params.bit_levels, {k, std::uint64_t{f}}));
      }
    } else {
      const auto hashed = chain_hash(params.key, w, s.row(w - 2));
      auto dst = s.row(w - 1);
      std::copy(hashed.begin(), hashed.end(), dst.begin());
    }
  }
  return s;
}

SeedMatrix temporal_shuffle(const SeedMatrix& seeds, const WatermarkKey& key) {
  const Prf prf = key.subKey("temporal-shuffle");
  SeedMatrix out(seeds.window(), seeds.features(), seeds.bitLevels(),
                 seeds.interval());
  for (std::size_t f = 0; f < seeds.features(); ++f) {
    const auto perm = keyed_permutation(prf, seeds.window(), {std::uint64_t{f}});
    for (std::size_t w = 0; w < seeds.window(); ++w) {
      out.at(w, f) = seeds.at(perm[w], f);
    }
  }
  return out;
}

SeriesTensor construct_noise(const SeedMatrix& seeds, const WatermarkKey& key,
                             std::uint64_t batch_tag) {
  const Prf u_prf = key.subKey("noise-u");
  const auto L = static_cast<double>(seeds.bitLevels());
  SeriesTensor noise(1, seeds.window(), seeds.features());
  for (std::size_t w = 0; w < seeds.window(); ++w) {
    for (std::size_t f = 0; f < seeds.features(); ++f) {
      const double u =
          u_prf.unitOpen({batch_tag, std::uint64_t{w}, std::uint64_t{f}});
      noise.at(0, w, f) = gaussian_ppf((u + seeds.at(w, f)) / L);
    }
  }
  return noise;
}

std::pair<SeriesTensor, SeedMatrix> embed(const EmbedParams& params,
                                          std::size_t batch) {
  params.validate();
  if (batch < 1) {
    throw std::invalid_argument("embed: batch must be >= 1");
  }
  const SeedMatrix seeds = generate_seeds(params);
  const SeedMatrix shuffled = temporal_shuffle(seeds, params.key);
  SeriesTensor out(batch, params.window, params.features);
  for (std::size_t b = 0; b < batch; ++b) {
    const SeriesTensor one = construct_noise(shuffled, params.key, b);
    auto dst = out.sample(b);
    auto src = one.sample(0);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  out.requireFinite("embed");
  return {std::move(out), seeds};
}

}  // namespace twk
