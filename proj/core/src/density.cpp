#include "kgan/density.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "kgan/error.hpp"

namespace kgan::density {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;

constexpr std::size_t kBlockRows = 256;

ConstMap rows_of(const Tensor& t, std::size_t first, std::size_t count) {
  return ConstMap(t.data().data() + first * t.cols(), static_cast<Eigen::Index>(count),
                  static_cast<Eigen::Index>(t.cols()));
}

void check_points(const Tensor& points, const char* what) {
  if (points.rank() != 2) {
    throw ShapeError(std::string(what) + " must be an n x k matrix, got " + diff::shape_string(points.shape()));
  }
}

void check_spec(const Tensor& points, const KernelSpec& spec) {
  spec.validate();
  if (spec.dim != points.cols()) {
    throw ShapeError("kernel dimension " + std::to_string(spec.dim) + " does not match point dimension " +
                     std::to_string(points.cols()));
  }
}

// Per-bandwidth coefficients so that K(d2) = sum_j scale_j * exp(rate_j * d2).
struct MixtureTerms {
  std::vector<double> scale;
  std::vector<double> rate;

  explicit MixtureTerms(const KernelSpec& spec) {
    const double inv = 1.0 / static_cast<double>(spec.bandwidths.size());
    for (double s : spec.bandwidths) {
      scale.push_back(kernels::normalization(s, spec.normalize, spec.dim) * inv);
      rate.push_back(-1.0 / (2.0 * s * s));
    }
  }

  double operator()(double d2) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < scale.size(); ++j) acc += scale[j] * std::exp(rate[j] * d2);
    return acc;
  }
};

// Walks the kernel matrix K(queries, refs) in row blocks, handing each
// (query row, ref col, value) block to the visitor.
template <class Visit>
void for_each_kernel_block(const Tensor& queries, const Tensor& refs, const MixtureTerms& kernel, Visit visit) {
  const ConstMap rm = rows_of(refs, 0, refs.rows());
  const Eigen::VectorXd rn = rm.rowwise().squaredNorm();
  RowMatrix block;
  for (std::size_t first = 0; first < queries.rows(); first += kBlockRows) {
    const std::size_t count = std::min(kBlockRows, queries.rows() - first);
    const ConstMap qm = rows_of(queries, first, count);
    const Eigen::VectorXd qn = qm.rowwise().squaredNorm();
    block.noalias() = -2.0 * qm * rm.transpose();
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      for (Eigen::Index j = 0; j < block.cols(); ++j) {
        const double d2 = std::max(0.0, qn[i] + rn[j] + block(i, j));
        block(i, j) = kernel(d2);
      }
    }
    visit(first, block);
  }
}

std::vector<double> row_means(const Tensor& queries, const Tensor& refs, const MixtureTerms& kernel) {
  std::vector<double> out(queries.rows());
  const double inv = 1.0 / static_cast<double>(refs.rows());
  for_each_kernel_block(queries, refs, kernel, [&](std::size_t first, const RowMatrix& block) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) out[first + static_cast<std::size_t>(i)] = block.row(i).sum() * inv;
  });
  return out;
}

}  // namespace

Tensor squared_distances(const Tensor& a, const Tensor& b) {
  check_points(a, "first point set");
  check_points(b, "second point set");
  if (a.cols() != b.cols()) {
    throw ShapeError("point dimensions differ: " + diff::shape_string(a.shape()) + " vs " +
                     diff::shape_string(b.shape()));
  }
  const ConstMap am = rows_of(a, 0, a.rows());
  const ConstMap bm = rows_of(b, 0, b.rows());
  const Eigen::VectorXd an = am.rowwise().squaredNorm();
  const Eigen::VectorXd bn = bm.rowwise().squaredNorm();
  RowMatrix cross = am * bm.transpose();
  Tensor out = Tensor::matrix(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      out.at(i, j) = std::max(0.0, an[ii] + bn[jj] - 2.0 * cross(ii, jj));
    }
  }
  return out;
}

std::vector<double> kde(const Tensor& queries, const Tensor& references, const KernelSpec& spec) {
  check_points(queries, "queries");
  check_points(references, "references");
  if (queries.cols() != references.cols()) {
    throw ShapeError("kde: query dimension " + std::to_string(queries.cols()) + " differs from reference dimension " +
                     std::to_string(references.cols()));
  }
  check_spec(queries, spec);
  return row_means(queries, references, MixtureTerms(spec));
}

KdeBatch kde_batch(const Tensor& data, const Tensor& gen, const KernelSpec& spec) {
  check_points(data, "data batch");
  check_points(gen, "generated batch");
  if (data.rows() != gen.rows()) {
    throw ShapeError("kde_batch: batch sizes differ (" + std::to_string(data.rows()) + " data vs " +
                     std::to_string(gen.rows()) + " generated)");
  }
  if (data.cols() != gen.cols()) throw ShapeError("kde_batch: data and generated points differ in dimension");
  check_spec(data, spec);

  const MixtureTerms kernel(spec);
  const std::size_t n = data.rows();
  const double inv = 1.0 / static_cast<double>(n);
  KdeBatch out;
  out.p_hat_at_data = row_means(data, data, kernel);
  out.p_theta_at_gen = row_means(gen, gen, kernel);

  // Data-gen block: row means give the generator KDE at data points,
  // column means the data KDE at generated points.
  out.p_theta_at_data.assign(n, 0.0);
  Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for_each_kernel_block(data, gen, kernel, [&](std::size_t first, const RowMatrix& block) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      out.p_theta_at_data[first + static_cast<std::size_t>(i)] = block.row(i).sum() * inv;
    }
    col_sums += block.colwise().sum().transpose();
  });
  out.p_hat_at_gen.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.p_hat_at_gen[j] = col_sums[static_cast<Eigen::Index>(j)] * inv;
  return out;
}

KdeBatch feature_kde_batch(const Tensor& data, const Tensor& gen, const generator::MlpParams& encoder,
                           const KernelSpec& spec) {
  if (encoder.spec.output_dim() != spec.dim) {
    throw ShapeError("feature_kde_batch: encoder output width " + std::to_string(encoder.spec.output_dim()) +
                     " does not match kernel dimension " + std::to_string(spec.dim));
  }
  return kde_batch(generator::generate(encoder, data), generator::generate(encoder, gen), spec);
}

diff::NodeId kernel_node(diff::Graph& graph, diff::NodeId squared_distance, const KernelSpec& spec) {
  spec.validate();
  const double inv = 1.0 / static_cast<double>(spec.bandwidths.size());
  diff::NodeId acc = 0;
  bool first = true;
  for (double s : spec.bandwidths) {
    diff::NodeId k = graph.exp(graph.scale(squared_distance, -1.0 / (2.0 * s * s)));
    const double c = kernels::normalization(s, spec.normalize, spec.dim) * inv;
    if (c != 1.0) k = graph.scale(k, c);
    acc = first ? k : graph.add(acc, k);
    first = false;
  }
  return acc;
}

KdeNodes build_kde_batch(diff::Graph& g, const KdeInputs& in, const KernelSpec& spec) {
  KdeNodes out{};
  const diff::NodeId k_xx = kernel_node(g, g.squared_distance(in.data, in.data), spec);
  out.p_hat_at_data = g.mean_rows(k_xx);
  g.name(out.p_hat_at_data, "p_hat_at_data");

  const diff::NodeId k_xg = kernel_node(g, g.squared_distance(in.data, in.gen_ref_for_data), spec);
  out.p_theta_at_data = g.mean_rows(k_xg);
  g.name(out.p_theta_at_data, "p_theta_at_data");

  if (in.gen_query == in.gen_ref_for_data) {
    out.p_hat_at_gen = g.mean_cols(k_xg);
  } else {
    out.p_hat_at_gen = g.mean_rows(kernel_node(g, g.squared_distance(in.gen_query, in.data), spec));
  }
  g.name(out.p_hat_at_gen, "p_hat_at_gen");

  const diff::NodeId k_gg = kernel_node(g, g.squared_distance(in.gen_query, in.gen_ref_for_gen), spec);
  out.p_theta_at_gen = g.mean_rows(k_gg);
  g.name(out.p_theta_at_gen, "p_theta_at_gen");
  return out;
}

}  // namespace kgan::density
