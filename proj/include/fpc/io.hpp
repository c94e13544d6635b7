#pragma once

#include <string>
#include <vector>

#include "fpc/dense_matrix.hpp"
#include "fpc/operators.hpp"

namespace fpc {

/// Partially observed matrix data: shape plus (index, value) samples.
struct MaskedData {
  int rows = 0;
  int cols = 0;
  std::vector<Entry> omega;
  std::vector<double> b;
};

/// Coordinate text format: a header line "rows cols", then one "i j value"
/// line per sample with 0-based indices. Values are written with 17
/// significant digits, so a write/read round trip is exact. Malformed lines,
/// out-of-range indices, and duplicate entries are rejected with the
/// offending line number.
MaskedData read_masked_data(const std::string& path);
void write_masked_data(const std::string& path, const MaskedData& data);

/// Dense matrices in the same coordinate format (every entry listed;
/// unlisted entries read as zero).
DenseMatrix read_coordinate_matrix(const std::string& path);
void write_coordinate_matrix(const std::string& path, const DenseMatrix& A);

/// Dense CSV: one row per line, comma-separated, 17 significant digits.
DenseMatrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const DenseMatrix& A);

/// Reads either dense format, deciding by the first line: a comma means CSV,
/// otherwise coordinate text.
DenseMatrix read_matrix_auto(const std::string& path);

/// Ratings triples for the collaborative-filtering pipeline. Rows are
/// "user,item,rating" with 0-based ids; an optional literal header line
/// "user,item,rating" is skipped. Duplicate (user, item) pairs are rejected.
struct RatingsTriple {
  int user = 0;
  int item = 0;
  double rating = 0.0;
};
struct RatingsData {
  int users = 0;  // max user id + 1
  int items = 0;  // max item id + 1
  std::vector<RatingsTriple> entries;
};
RatingsData read_ratings_csv(const std::string& path);

/// Grayscale image with pixels scaled to [0,1]. `maxval` and `binary`
/// remember the source encoding so a read/write round trip reproduces the
/// file byte for byte (for canonically formatted input).
struct GrayImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  bool binary = true;  // binary P5 vs ASCII P2
  std::vector<double> pixels;  // row-major
};

/// Portable graymap reader/writer (P2 and P5, 8- or 16-bit). The writer
/// clamps pixels to [0,1] and quantizes to maxval levels.
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& img);

}  // namespace fpc
