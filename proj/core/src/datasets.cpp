#include "kgan/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "kgan/error.hpp"
#include "kgan/random.hpp"

namespace kgan::datasets {

void MogSpec::validate() const {
  if (modes < 1) throw InvalidArgument("mog: need at least one mode");
  if (!(radius >= 0.0)) throw InvalidArgument("mog: radius must be >= 0");
  if (!(stddev > 0.0)) throw InvalidArgument("mog: stddev must be > 0");
  if (!weights.empty()) {
    if (weights.size() != modes) {
      throw InvalidArgument("mog: " + std::to_string(weights.size()) + " weights for " + std::to_string(modes) +
                            " modes");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw InvalidArgument("mog: weights must be >= 0");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mog: weights must sum to 1");
  }
}

std::vector<double> MogSpec::mixture_weights() const {
  if (!weights.empty()) return weights;
  return std::vector<double>(modes, 1.0 / static_cast<double>(modes));
}

Tensor MogSpec::means() const {
  Tensor out = Tensor::matrix(modes, 2);
  for (std::size_t c = 0; c < modes; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(modes);
    out.at(c, 0) = radius * std::cos(angle);
    out.at(c, 1) = radius * std::sin(angle);
  }
  return out;
}

LabeledPoints mog_sample(const MogSpec& spec, std::size_t n, std::uint64_t counter) {
  spec.validate();
  if (n < 1) throw InvalidArgument("mog_sample: n must be >= 1");
  const Tensor mu = spec.means();
  const std::vector<double> w = spec.mixture_weights();
  Rng rng = make_rng(spec.seed, {0x3065, counter});
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> normal(0.0, 1.0);

  LabeledPoints out{Tensor::matrix(n, 2), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = pick(rng);
    out.labels[i] = c;
    out.points.at(i, 0) = mu.at(c, 0) + spec.stddev * normal(rng);
    out.points.at(i, 1) = mu.at(c, 1) + spec.stddev * normal(rng);
  }
  return out;
}

Split split(const Tensor& points, double fraction, std::uint64_t seed) {
  if (points.rank() != 2) throw ShapeError("split: expected a matrix of points");
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split: fraction must lie in (0, 1)");
  const std::size_t n = points.rows();
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw InvalidArgument("split: fraction " + std::to_string(fraction) + " leaves an empty part of " +
                          std::to_string(n) + " points");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, {0x5b17});
  std::shuffle(order.begin(), order.end(), rng);
  return {diff::gather_rows(points, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train)}),
          diff::gather_rows(points, {order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end()})};
}

namespace {

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Tensor load_csv(const std::filesystem::path& path, bool header) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (rows == 0) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      throw FormatError(path.string() + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string_view cell = trim(cells[c]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw FormatError(path.string() + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                          " is not a number: '" + std::string(cell) + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw FormatError(path.string() + ": no data rows");
  return Tensor::matrix(rows, cols, std::move(values));
}

void save_csv(const Tensor& points, const std::filesystem::path& path, const std::vector<std::string>& header) {
  if (points.rank() != 2) throw ShapeError("save_csv: expected a matrix");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  if (!header.empty()) {
    if (header.size() != points.cols()) throw ShapeError("save_csv: header width does not match the matrix");
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  char buf[32];
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t c = 0; c < points.cols(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, points.at(r, c));
      if (c) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

DataScaler DataScaler::identity(std::size_t dim) { return {std::vector<double>(dim, 0.0), 1.0}; }

DataScaler DataScaler::fit(const Tensor& points) {
  if (points.rank() != 2 || points.rows() == 0) throw ShapeError("DataScaler::fit: expected a nonempty matrix");
  const std::size_t k = points.cols();
  std::vector<double> lo(k, INFINITY), hi(k, -INFINITY);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      lo[c] = std::min(lo[c], points.at(r, c));
      hi[c] = std::max(hi[c], points.at(r, c));
    }
  }
  DataScaler s;
  s.center.resize(k);
  double half = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    s.center[c] = 0.5 * (lo[c] + hi[c]);
    half = std::max(half, 0.5 * (hi[c] - lo[c]));
  }
  s.scale = half > 0.0 ? 1.1 * half : 1.0;
  return s;
}

Tensor DataScaler::forward(const Tensor& points) const {
  if (points.rank() != 2 || points.cols() != center.size()) throw ShapeError("DataScaler: dimension mismatch");
  Tensor out = points;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) = (out.at(r, c) - center[c]) / scale;
  }
  return out;
}

Tensor DataScaler::inverse(const Tensor& points) const {
  if (points.rank() != 2 || points.cols() != center.size()) throw ShapeError("DataScaler: dimension mismatch");
  Tensor out = points;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) = out.at(r, c) * scale + center[c];
  }
  return out;
}

}  // namespace kgan::datasets
