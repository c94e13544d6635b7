#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpc/io.hpp"
#include "fpc/solvers.hpp"

namespace fpc {

/// Image with a per-pixel observation mask. Carries the source encoding so
/// the completed image can be written back in the same format.
struct MaskedImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  bool binary = true;
  std::vector<double> pixels;  // [0,1], row-major; masked entries ignored
  std::vector<char> mask;      // 1 = observed

  int observed_count() const;
};

/// Masks round(masked_fraction * pixels) pixels uniformly at random
/// (seeded). masked_fraction must leave at least one pixel observed.
MaskedImage random_image_mask(const GrayImage& img, double masked_fraction,
                              std::uint64_t seed);

/// Reads the mask from a second image of the same shape: pixel value 0 means
/// masked, anything else observed.
MaskedImage image_mask_from_file(const GrayImage& img, const GrayImage& mask);

struct InpaintResult {
  GrayImage output;       // completed image, same encoding as the input
  double rel_err = -1.0;  // vs truth, pre-quantization; -1 when truth unknown
  SolveReport report;
};

/// Completes the masked pixels with the chosen solver profile. A fully
/// observed image passes through untouched (no solve). `truth`, when given,
/// supplies the clean image for the error report.
InpaintResult inpaint(const MaskedImage& masked, const std::string& profile,
                      const SolverConfig& cfg, const GrayImage* truth = nullptr);

struct NmaeReport {
  double value = 0.0;
  int users_evaluated = 0;
  std::vector<std::string> log;  // one line per user skipped over
  SolveReport report;
};

/// Withholds `holdout` ratings per user (uniformly, seeded), completes the
/// remaining ratings matrix with the chosen profile, and scores predictions
/// of the withheld ratings against the declared range. Users with fewer
/// than holdout+1 ratings keep all their ratings as training data and are
/// logged as skipped.
NmaeReport eval_nmae(const RatingsData& ratings, double r_min, double r_max,
                     const std::string& profile, const SolverConfig& cfg,
                     std::uint64_t seed, int holdout = 2);

}  // namespace fpc
