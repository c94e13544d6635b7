#include "fpc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace fpc {

namespace {

constexpr long long kMaxCells = 100000000;  // guards absurd headers

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

[[noreturn]] void fail_line(const std::string& path, int lineno,
                            const std::string& what) {
  fail(path, "line " + std::to_string(lineno) + ": " + what);
}

bool blank(const std::string& line) {
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  return in;
}

std::ofstream create_text(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot create file");
  return out;
}

void format_value(char* buf, std::size_t cap, double v) {
  std::snprintf(buf, cap, "%.17g", v);
}

}  // namespace

MaskedData read_masked_data(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string line;
  int lineno = 0;

  MaskedData data;
  bool have_header = false;
  std::vector<char> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (!have_header) {
      int used = 0;
      if (std::sscanf(line.c_str(), "%d %d %n", &data.rows, &data.cols, &used) != 2 ||
          !blank(line.substr(static_cast<std::size_t>(used)))) {
        fail_line(path, lineno, "expected header \"rows cols\"");
      }
      if (data.rows < 1 || data.cols < 1 ||
          static_cast<long long>(data.rows) * data.cols > kMaxCells) {
        fail_line(path, lineno, "unreasonable matrix shape");
      }
      seen.assign(static_cast<std::size_t>(data.rows) *
                      static_cast<std::size_t>(data.cols),
                  0);
      have_header = true;
      continue;
    }
    int i = 0, j = 0, used = 0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%d %d %lg %n", &i, &j, &v, &used) != 3 ||
        !blank(line.substr(static_cast<std::size_t>(used)))) {
      fail_line(path, lineno, "expected \"i j value\"");
    }
    if (i < 0 || i >= data.rows || j < 0 || j >= data.cols) {
      fail_line(path, lineno, "index out of range");
    }
    if (!std::isfinite(v)) fail_line(path, lineno, "non-finite value");
    const std::size_t flat = static_cast<std::size_t>(i) *
                                 static_cast<std::size_t>(data.cols) +
                             static_cast<std::size_t>(j);
    if (seen[flat]) fail_line(path, lineno, "duplicate entry");
    seen[flat] = 1;
    data.omega.push_back({i, j});
    data.b.push_back(v);
  }
  if (!have_header) fail(path, "empty file");
  return data;
}

void write_masked_data(const std::string& path, const MaskedData& data) {
  if (data.rows < 1 || data.cols < 1 || data.omega.size() != data.b.size()) {
    throw std::invalid_argument("write_masked_data: inconsistent data");
  }
  std::ofstream out = create_text(path);
  out << data.rows << ' ' << data.cols << '\n';
  char buf[64];
  for (std::size_t t = 0; t < data.omega.size(); ++t) {
    format_value(buf, sizeof(buf), data.b[t]);
    out << data.omega[t].row << ' ' << data.omega[t].col << ' ' << buf << '\n';
  }
  if (!out) fail(path, "write failed");
}

DenseMatrix read_coordinate_matrix(const std::string& path) {
  const MaskedData data = read_masked_data(path);
  DenseMatrix A(data.rows, data.cols);
  for (std::size_t t = 0; t < data.omega.size(); ++t) {
    A(data.omega[t].row, data.omega[t].col) = data.b[t];
  }
  return A;
}

void write_coordinate_matrix(const std::string& path, const DenseMatrix& A) {
  MaskedData data;
  data.rows = A.rows();
  data.cols = A.cols();
  data.omega.reserve(A.size());
  data.b.reserve(A.size());
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      data.omega.push_back({i, j});
      data.b.push_back(A(i, j));
    }
  }
  write_masked_data(path, data);
}

DenseMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string line;
  int lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() &&
               std::isspace(static_cast<unsigned char>(cell[used]))) {
          ++used;
        }
        if (used != cell.size()) throw std::invalid_argument("");
        if (!std::isfinite(v)) fail_line(path, lineno, "non-finite value");
        row.push_back(v);
      } catch (const std::logic_error&) {
        fail_line(path, lineno, "malformed number \"" + cell + "\"");
      }
    }
    if (row.empty()) fail_line(path, lineno, "empty row");
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail_line(path, lineno, "row width differs from the first row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(path, "empty file");
  DenseMatrix A(static_cast<int>(rows.size()),
                static_cast<int>(rows.front().size()));
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return A;
}

void write_csv_matrix(const std::string& path, const DenseMatrix& A) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw std::invalid_argument("write_csv_matrix: empty matrix");
  }
  std::ofstream out = create_text(path);
  char buf[64];
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      format_value(buf, sizeof(buf), A(i, j));
      out << buf << (j + 1 == A.cols() ? '\n' : ',');
    }
  }
  if (!out) fail(path, "write failed");
}

DenseMatrix read_matrix_auto(const std::string& path) {
  {
    std::ifstream in = open_text(path);
    std::string line;
    while (std::getline(in, line)) {
      if (blank(line)) continue;
      if (line.find(',') != std::string::npos) return read_csv_matrix(path);
      break;
    }
  }
  return read_coordinate_matrix(path);
}

RatingsData read_ratings_csv(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string line;
  int lineno = 0;
  RatingsData data;
  std::vector<std::pair<int, int>> pairs;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (lineno == 1 && line.rfind("user,item,rating", 0) == 0) continue;
    RatingsTriple t;
    int used = 0;
    if (std::sscanf(line.c_str(), "%d ,%d ,%lg %n", &t.user, &t.item, &t.rating,
                    &used) != 3 ||
        !blank(line.substr(static_cast<std::size_t>(used)))) {
      fail_line(path, lineno, "expected \"user,item,rating\"");
    }
    if (t.user < 0 || t.item < 0) fail_line(path, lineno, "negative id");
    if (!std::isfinite(t.rating)) fail_line(path, lineno, "non-finite rating");
    data.users = std::max(data.users, t.user + 1);
    data.items = std::max(data.items, t.item + 1);
    pairs.push_back({t.user, t.item});
    data.entries.push_back(t);
  }
  if (data.entries.empty()) fail(path, "no ratings");
  if (static_cast<long long>(data.users) * data.items > kMaxCells) {
    fail(path, "unreasonable user/item id range");
  }
  std::sort(pairs.begin(), pairs.end());
  if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) {
    fail(path, "duplicate (user,item) rating");
  }
  return data;
}

namespace {

// Reads one whitespace/comment-delimited header token of a graymap.
int pgm_header_int(std::istream& in, const std::string& path,
                   const std::string& what) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {  // comment runs to end of line
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) fail(path, "malformed header: " + what);
  long long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1000000000) fail(path, what + " out of range");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return static_cast<int>(value);
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5')) {
    fail(path, "not a P2/P5 graymap");
  }
  GrayImage img;
  img.binary = magic[1] == '5';
  img.width = pgm_header_int(in, path, "width");
  img.height = pgm_header_int(in, path, "height");
  img.maxval = pgm_header_int(in, path, "maxval");
  if (img.width < 1 || img.height < 1 ||
      static_cast<long long>(img.width) * img.height > kMaxCells) {
    fail(path, "unreasonable image shape");
  }
  if (img.maxval < 1 || img.maxval > 65535) fail(path, "maxval out of range");

  const std::size_t count =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.pixels.resize(count);

  if (img.binary) {
    const int c = in.get();  // single whitespace byte after maxval
    if (c == EOF || !std::isspace(c)) fail(path, "malformed raster separator");
    const int bytes_per = img.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * static_cast<std::size_t>(bytes_per));
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
      fail(path, "truncated raster");
    }
    for (std::size_t t = 0; t < count; ++t) {
      const int v = bytes_per == 1
                        ? raw[t]
                        : (raw[2 * t] << 8) | raw[2 * t + 1];  // big-endian
      if (v > img.maxval) fail(path, "pixel above maxval");
      img.pixels[t] = static_cast<double>(v) / img.maxval;
    }
  } else {
    for (std::size_t t = 0; t < count; ++t) {
      const int v = pgm_header_int(in, path, "pixel");
      if (v > img.maxval) fail(path, "pixel above maxval");
      img.pixels[t] = static_cast<double>(v) / img.maxval;
    }
  }
  return img;
}

void write_pgm(const std::string& path, const GrayImage& img) {
  if (img.width < 1 || img.height < 1 ||
      img.pixels.size() != static_cast<std::size_t>(img.width) *
                               static_cast<std::size_t>(img.height)) {
    throw std::invalid_argument("write_pgm: inconsistent image");
  }
  if (img.maxval < 1 || img.maxval > 65535) {
    throw std::invalid_argument("write_pgm: maxval out of range");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot create file");
  out << (img.binary ? "P5" : "P2") << '\n'
      << img.width << ' ' << img.height << '\n'
      << img.maxval << '\n';

  const std::size_t count = img.pixels.size();
  auto quantize = [&](double p) -> int {
    const double c = std::min(1.0, std::max(0.0, p));
    return static_cast<int>(std::lround(c * img.maxval));
  };
  if (img.binary) {
    const int bytes_per = img.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * static_cast<std::size_t>(bytes_per));
    for (std::size_t t = 0; t < count; ++t) {
      const int v = quantize(img.pixels[t]);
      if (bytes_per == 1) {
        raw[t] = static_cast<unsigned char>(v);
      } else {
        raw[2 * t] = static_cast<unsigned char>(v >> 8);
        raw[2 * t + 1] = static_cast<unsigned char>(v & 0xff);
      }
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
  } else {
    for (int i = 0; i < img.height; ++i) {
      for (int j = 0; j < img.width; ++j) {
        out << quantize(img.pixels[static_cast<std::size_t>(i) *
                                       static_cast<std::size_t>(img.width) +
                                   static_cast<std::size_t>(j)])
            << (j + 1 == img.width ? '\n' : ' ');
      }
    }
  }
  if (!out) fail(path, "write failed");
}

}  // namespace fpc
