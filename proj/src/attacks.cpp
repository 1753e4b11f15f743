#include "twk/attacks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace twk {

AttackSpec AttackSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  AttackSpec spec;
  if (name == "offset") {
    spec.kind = AttackKind::offset;
  } else if (name == "crop") {
    spec.kind = AttackKind::random_crop;
  } else if (name == "minmax") {
    spec.kind = AttackKind::minmax_insert;
  } else if (name == "reconstruct") {
    spec.kind = AttackKind::reconstruct;
  } else {
    throw std::invalid_argument("AttackSpec: unknown kind '" + std::string(name) + "'");
  }
  if (colon != std::string_view::npos) {
    const std::string_view num = text.substr(colon + 1);
    const auto rc = std::from_chars(num.data(), num.data() + num.size(), spec.strength);
    if (rc.ec != std::errc{} || rc.ptr != num.data() + num.size()) {
      throw std::invalid_argument("AttackSpec: bad strength in '" + std::string(text) + "'");
    }
  } else if (spec.kind != AttackKind::reconstruct) {
    throw std::invalid_argument("AttackSpec: missing ':strength'");
  }
  if (spec.strength < 0.0 || spec.strength > 1.0) {
    throw std::invalid_argument("AttackSpec: strength must be in [0,1]");
  }
  return spec;
}

std::string AttackSpec::toString() const {
  const char* name = nullptr;
  switch (kind) {
    case AttackKind::offset: name = "offset"; break;
    case AttackKind::random_crop: name = "crop"; break;
    case AttackKind::minmax_insert: name = "minmax"; break;
    case AttackKind::reconstruct: return "reconstruct";
  }
  return std::string(name) + ":" + std::to_string(strength);
}

namespace {

void checkStrength(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("attack: strength must be in [0,1]");
  }
}

}  // namespace

SeriesTensor offset_attack(const SeriesTensor& x, double p) {
  checkStrength(p);
  SeriesTensor out = x;
  const auto W = x.window();
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t f = 0; f < x.features(); ++f) {
      double mag = 0.0;
      for (std::size_t w = 0; w < W; ++w) {
        mag += std::fabs(x.at(b, w, f));
      }
      const double c = p * mag / static_cast<double>(W);
      for (std::size_t w = 0; w < W; ++w) {
        out.at(b, w, f) += c;
      }
    }
  }
  out.requireFinite("offset_attack");
  return out;
}

SeriesTensor crop_attack(const SeriesTensor& x, double p, const WatermarkKey& key,
                         std::uint64_t rng_tag) {
  checkStrength(p);
  const Prf prf = key.subKey("attack-crop");
  SeriesTensor out = x;
  const auto W = x.window();
  const auto F = x.features();
  const auto hw = static_cast<std::size_t>(std::ceil(p * double(W)));
  const auto hf = static_cast<std::size_t>(std::ceil(p * double(F)));
  if (hw == 0 || hf == 0) {
    return out;
  }
  for (std::size_t b = 0; b < x.batch(); ++b) {
    const auto ow = prf.below(W - hw + 1, {rng_tag, std::uint64_t{b}, 0});
    const auto of = prf.below(F - hf + 1, {rng_tag, std::uint64_t{b}, 1});
    for (std::size_t w = ow; w < ow + hw; ++w) {
      for (std::size_t f = of; f < of + hf; ++f) {
        out.at(b, w, f) = 0.0;
      }
    }
  }
  return out;
}

SeriesTensor minmax_insert_attack(const SeriesTensor& x, double p,
                                  const WatermarkKey& key, std::uint64_t rng_tag) {
  checkStrength(p);
  const Prf prf = key.subKey("attack-minmax");
  SeriesTensor out = x;
  const auto W = x.window();
  const auto k = static_cast<std::size_t>(std::floor(p * double(W)));
  if (k == 0) {
    return out;
  }
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t f = 0; f < x.features(); ++f) {
      double lo = x.at(b, 0, f);
      double hi = lo;
      for (std::size_t w = 1; w < W; ++w) {
        lo = std::min(lo, x.at(b, w, f));
        hi = std::max(hi, x.at(b, w, f));
      }
      const auto order =
          keyed_permutation(prf, W, {rng_tag, std::uint64_t{b}, std::uint64_t{f}});
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t w = order[i];
        const double u = prf.unitOpen(
            {rng_tag, std::uint64_t{b}, std::uint64_t{f}, std::uint64_t{w}});
        out.at(b, w, f) = lo + u * (hi - lo);
      }
    }
  }
  out.requireFinite("minmax_insert_attack");
  return out;
}

SeriesTensor reconstruction_attack(const SeriesTensor& x, const NoiseEstimator& est,
                                   const NoiseSchedule& sched,
                                   const WatermarkKey& key, std::uint64_t rng_tag) {
  const std::size_t t_mid = std::max<std::size_t>(1, sched.steps / 2);
  const SeriesTensor noise = standard_normal_tensor(
      x.batch(), x.window(), x.features(), key.subKey("attack-reconstruct"), rng_tag);
  const SeriesTensor noised = q_sample(x, t_mid, noise, sched);
  SeriesTensor out = ddim_generate(noised, t_mid, est, sched);
  out.requireFinite("reconstruction_attack");
  return out;
}

SeriesTensor apply_attack(const SeriesTensor& x, const AttackSpec& spec,
                          const WatermarkKey& key, const NoiseEstimator* est,
                          const NoiseSchedule* sched) {
  switch (spec.kind) {
    case AttackKind::offset:
      return offset_attack(x, spec.strength);
    case AttackKind::random_crop:
      return crop_attack(x, spec.strength, key, spec.rng_tag);
    case AttackKind::minmax_insert:
      return minmax_insert_attack(x, spec.strength, key, spec.rng_tag);
    case AttackKind::reconstruct:
      if (est == nullptr || sched == nullptr) {
        throw std::invalid_argument("apply_attack: reconstruct needs estimator and schedule");
      }
      return reconstruction_attack(x, *est, *sched, key, spec.rng_tag);
  }
  throw std::logic_error("apply_attack: unreachable");
}

}  // namespace twk
