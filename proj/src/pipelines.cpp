#include "fpc/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fpc/problems.hpp"
#include "fpc/rng.hpp"

namespace fpc {

namespace {

void validate_masked_image(const MaskedImage& mi) {
  if (mi.width < 1 || mi.height < 1) {
    throw std::invalid_argument("masked image: empty shape");
  }
  const std::size_t count =
      static_cast<std::size_t>(mi.width) * static_cast<std::size_t>(mi.height);
  if (mi.pixels.size() != count || mi.mask.size() != count) {
    throw std::invalid_argument("masked image: inconsistent buffer sizes");
  }
  if (mi.observed_count() == 0) {
    throw std::invalid_argument("masked image: no observed pixels");
  }
}

MaskedImage base_from(const GrayImage& img) {
  MaskedImage mi;
  mi.width = img.width;
  mi.height = img.height;
  mi.maxval = img.maxval;
  mi.binary = img.binary;
  mi.pixels = img.pixels;
  mi.mask.assign(img.pixels.size(), 1);
  return mi;
}

}  // namespace

int MaskedImage::observed_count() const {
  int n = 0;
  for (char c : mask) n += c != 0;
  return n;
}

MaskedImage random_image_mask(const GrayImage& img, double masked_fraction,
                              std::uint64_t seed) {
  if (!(masked_fraction >= 0.0) || masked_fraction > 1.0) {
    throw std::invalid_argument("random_image_mask: fraction outside [0,1]");
  }
  MaskedImage mi = base_from(img);
  const std::size_t count = mi.pixels.size();
  const long long wanted =
      std::llround(masked_fraction * static_cast<double>(count));
  if (wanted >= static_cast<long long>(count)) {
    throw std::invalid_argument("random_image_mask: no pixel would stay observed");
  }
  // choose `wanted` distinct pixels to hide
  std::vector<int> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (long long t = 0; t < wanted; ++t) {
    const std::size_t pick =
        static_cast<std::size_t>(t) +
        static_cast<std::size_t>(
            rng.uniform_below(static_cast<std::uint64_t>(count) -
                              static_cast<std::uint64_t>(t)));
    std::swap(idx[static_cast<std::size_t>(t)], idx[pick]);
    mi.mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])] = 0;
  }
  return mi;
}

MaskedImage image_mask_from_file(const GrayImage& img, const GrayImage& mask) {
  if (img.width != mask.width || img.height != mask.height) {
    throw std::invalid_argument("image_mask_from_file: shapes differ");
  }
  MaskedImage mi = base_from(img);
  for (std::size_t t = 0; t < mi.mask.size(); ++t) {
    mi.mask[t] = mask.pixels[t] != 0.0;
  }
  if (mi.observed_count() == 0) {
    throw std::invalid_argument("image_mask_from_file: mask hides every pixel");
  }
  return mi;
}

InpaintResult inpaint(const MaskedImage& masked, const std::string& profile,
                      const SolverConfig& cfg, const GrayImage* truth) {
  validate_masked_image(masked);
  if (truth != nullptr &&
      (truth->width != masked.width || truth->height != masked.height)) {
    throw std::invalid_argument("inpaint: truth image shape differs");
  }

  InpaintResult result;
  result.output.width = masked.width;
  result.output.height = masked.height;
  result.output.maxval = masked.maxval;
  result.output.binary = masked.binary;

  const std::size_t count = masked.pixels.size();
  if (masked.observed_count() == static_cast<int>(count)) {
    result.output.pixels = masked.pixels;  // nothing to complete
  } else {
    std::vector<Entry> omega;
    std::vector<double> b;
    for (int i = 0; i < masked.height; ++i) {
      for (int j = 0; j < masked.width; ++j) {
        const std::size_t flat = static_cast<std::size_t>(i) *
                                     static_cast<std::size_t>(masked.width) +
                                 static_cast<std::size_t>(j);
        if (masked.mask[flat]) {
          omega.push_back({i, j});
          b.push_back(masked.pixels[flat]);
        }
      }
    }
    const MeasurementMap map =
        MeasurementMap::entry_mask(masked.height, masked.width, omega);
    result.report = solve_with_profile(profile, map, b, cfg);
    result.output.pixels.resize(count);
    for (int i = 0; i < masked.height; ++i) {
      for (int j = 0; j < masked.width; ++j) {
        result.output.pixels[static_cast<std::size_t>(i) *
                                 static_cast<std::size_t>(masked.width) +
                             static_cast<std::size_t>(j)] =
            result.report.X_opt(i, j);
      }
    }
  }

  if (truth != nullptr) {
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
      const double d = result.output.pixels[t] - truth->pixels[t];
      num += d * d;
      den += truth->pixels[t] * truth->pixels[t];
    }
    if (den == 0.0) throw std::invalid_argument("inpaint: truth image is zero");
    result.rel_err = std::sqrt(num / den);
  }
  return result;
}

NmaeReport eval_nmae(const RatingsData& ratings, double r_min, double r_max,
                     const std::string& profile, const SolverConfig& cfg,
                     std::uint64_t seed, int holdout) {
  if (!(r_max > r_min)) throw std::invalid_argument("eval_nmae: empty rating range");
  if (holdout < 1) throw std::invalid_argument("eval_nmae: holdout must be positive");
  for (const RatingsTriple& t : ratings.entries) {
    if (t.rating < r_min || t.rating > r_max) {
      throw std::invalid_argument("eval_nmae: rating outside the declared range");
    }
  }

  // per-user ratings, ordered by item id for seed-stable holdout draws
  std::vector<std::vector<std::pair<int, double>>> by_user(
      static_cast<std::size_t>(ratings.users));
  for (const RatingsTriple& t : ratings.entries) {
    by_user[static_cast<std::size_t>(t.user)].push_back({t.item, t.rating});
  }
  for (auto& list : by_user) std::sort(list.begin(), list.end());

  NmaeReport rep;
  std::vector<Entry> omega;
  std::vector<double> b;
  struct Held {
    int user;
    std::vector<std::pair<int, double>> samples;  // (item, true rating)
  };
  std::vector<Held> held;

  for (int u = 0; u < ratings.users; ++u) {
    auto& list = by_user[static_cast<std::size_t>(u)];
    if (static_cast<int>(list.size()) < holdout + 1) {
      for (const auto& [item, value] : list) {
        omega.push_back({u, item});
        b.push_back(value);
      }
      if (!list.empty()) {
        rep.log.push_back("user " + std::to_string(u) + " skipped (only " +
                          std::to_string(list.size()) + " ratings)");
      }
      continue;
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(u), 0));
    for (int t = 0; t < holdout; ++t) {
      const std::size_t pick =
          static_cast<std::size_t>(t) +
          static_cast<std::size_t>(rng.uniform_below(
              static_cast<std::uint64_t>(list.size()) -
              static_cast<std::uint64_t>(t)));
      std::swap(list[static_cast<std::size_t>(t)], list[pick]);
    }
    Held h;
    h.user = u;
    for (int t = 0; t < holdout; ++t) {
      h.samples.push_back(list[static_cast<std::size_t>(t)]);
    }
    std::sort(h.samples.begin(), h.samples.end());
    held.push_back(std::move(h));
    for (std::size_t t = static_cast<std::size_t>(holdout); t < list.size(); ++t) {
      omega.push_back({u, list[t].first});
      b.push_back(list[t].second);
    }
  }
  if (held.empty()) {
    throw std::runtime_error("eval_nmae: no user has enough ratings to hold out");
  }

  const MeasurementMap map =
      MeasurementMap::entry_mask(ratings.users, ratings.items, omega);
  rep.report = solve_with_profile(profile, map, b, cfg);
  rep.users_evaluated = static_cast<int>(held.size());

  if (holdout == 2) {
    std::vector<std::pair<double, double>> predicted, withheld;
    for (const Held& h : held) {
      predicted.push_back({rep.report.X_opt(h.user, h.samples[0].first),
                           rep.report.X_opt(h.user, h.samples[1].first)});
      withheld.push_back({h.samples[0].second, h.samples[1].second});
    }
    rep.value = nmae(predicted, withheld, r_min, r_max);
  } else {
    double sum = 0.0;
    std::size_t n = 0;
    for (const Held& h : held) {
      for (const auto& [item, value] : h.samples) {
        sum += std::abs(rep.report.X_opt(h.user, item) - value);
        ++n;
      }
    }
    rep.value = sum / static_cast<double>(n) / (r_max - r_min);
  }
  return rep;
}

}  // namespace fpc
