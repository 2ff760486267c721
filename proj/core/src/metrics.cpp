#include "kgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "kgan/density.hpp"
#include "kgan/error.hpp"

namespace kgan::metrics {

Classifier::Classifier(std::size_t classes, Fn fn) : classes_(classes), fn_(std::move(fn)) {
  if (classes_ == 0) throw InvalidArgument("classifier: need at least one class");
  if (!fn_) throw InvalidArgument("classifier: empty probability function");
}

std::vector<double> Classifier::probabilities(std::span<const double> x) const {
  std::vector<double> p = fn_(x);
  if (p.size() != classes_) {
    throw ShapeError("classifier returned " + std::to_string(p.size()) + " probabilities for " +
                     std::to_string(classes_) + " classes");
  }
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw NonFiniteError("classifier returned a negative or NaN probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("classifier probabilities do not sum to 1");
  return p;
}

Classifier Classifier::constant(std::vector<double> probabilities) {
  const std::size_t c = probabilities.size();
  return Classifier(c, [p = std::move(probabilities)](std::span<const double>) { return p; });
}

Classifier Classifier::mog_posterior(const Tensor& means, double stddev, std::vector<double> prior) {
  if (means.rank() != 2) throw ShapeError("mog_posterior: means must be a matrix");
  if (!(stddev > 0.0)) throw InvalidArgument("mog_posterior: stddev must be > 0");
  if (prior.size() != means.rows()) throw ShapeError("mog_posterior: one prior weight per mode");
  std::vector<double> log_prior(prior.size());
  for (std::size_t c = 0; c < prior.size(); ++c) {
    log_prior[c] = prior[c] > 0.0 ? std::log(prior[c]) : -std::numeric_limits<double>::infinity();
  }
  const double inv_two_var = 1.0 / (2.0 * stddev * stddev);
  return Classifier(means.rows(), [means, log_prior, inv_two_var](std::span<const double> x) {
    if (x.size() != means.cols()) throw ShapeError("mog_posterior: point dimension mismatch");
    std::vector<double> logits(means.rows());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < means.rows(); ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - means.at(c, j);
        d2 += d * d;
      }
      logits[c] = log_prior[c] - d2 * inv_two_var;
      top = std::max(top, logits[c]);
    }
    double total = 0.0;
    for (double& l : logits) {
      l = std::exp(l - top);
      total += l;
    }
    for (double& l : logits) l /= total;
    return logits;
  });
}

Classifier Classifier::mog_posterior(const datasets::MogSpec& spec) {
  spec.validate();
  return mog_posterior(spec.means(), spec.stddev, spec.mixture_weights());
}

double enn(const Tensor& gen_samples, const Tensor& train_set) {
  if (gen_samples.rank() != 2 || train_set.rank() != 2 || gen_samples.rows() == 0 || train_set.rows() == 0) {
    throw ShapeError("enn: both sets must be nonempty matrices");
  }
  if (gen_samples.cols() != train_set.cols()) {
    throw ShapeError("enn: dimension mismatch " + std::to_string(gen_samples.cols()) + " vs " +
                     std::to_string(train_set.cols()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < gen_samples.rows(); ++i) {
    const auto g = gen_samples.row(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < train_set.rows(); ++j) {
      const auto t = train_set.row(j);
      double d2 = 0.0;
      for (std::size_t c = 0; c < g.size(); ++c) {
        const double d = g[c] - t[c];
        d2 += d * d;
      }
      best = std::min(best, d2);
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(gen_samples.rows());
}

double mmd(const Tensor& x, const Tensor& y, const kernels::KernelSpec& spec) {
  if (x.rank() != 2 || y.rank() != 2 || x.cols() != y.cols()) throw ShapeError("mmd: dimension mismatch");
  if (x.rows() < 2 || y.rows() < 2) throw InvalidArgument("mmd: both samples need at least 2 points");
  kernels::KernelSpec k = spec;
  k.normalize = false;
  k.dim = x.cols();
  auto block_sum = [&](const Tensor& a, const Tensor& b, bool skip_diagonal) {
    const Tensor d = density::squared_distances(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < b.rows(); ++j) {
        if (skip_diagonal && i == j) continue;
        s += kernels::mixture_from_squared_norm(d.at(i, j), k);
      }
    }
    return s;
  };
  const auto n = static_cast<double>(x.rows());
  const auto m = static_cast<double>(y.rows());
  return block_sum(x, x, true) / (n * (n - 1.0)) + block_sum(y, y, true) / (m * (m - 1.0)) -
         2.0 * block_sum(x, y, false) / (n * m);
}

objective::ObjectiveReport jsd_estimate(const Tensor& held_out, const Tensor& gen_samples,
                                        const kernels::KernelSpec& spec, double phi) {
  return objective::kn_objective(held_out, gen_samples, spec, phi);
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  // exact bound; summation can overshoot log C by an ulp
  return std::clamp(h, 0.0, std::log(static_cast<double>(p.size())));
}

double expected_entropy(const Tensor& gen_samples, const Classifier& clf) {
  if (gen_samples.rank() != 2 || gen_samples.rows() == 0) throw ShapeError("expected_entropy: no samples");
  double total = 0.0;
  for (std::size_t i = 0; i < gen_samples.rows(); ++i) total += entropy(clf.probabilities(gen_samples.row(i)));
  return total / static_cast<double>(gen_samples.rows());
}

double classifier_score(const Tensor& gen_samples, const Classifier& clf, const std::vector<double>& prior) {
  if (gen_samples.rank() != 2 || gen_samples.rows() == 0) throw ShapeError("classifier_score: no samples");
  if (prior.size() != clf.classes()) throw ShapeError("classifier_score: prior length does not match the classes");
  double total = 0.0;
  for (std::size_t c = 0; c < prior.size(); ++c) {
    if (!(prior[c] > 0.0)) throw InvalidArgument("classifier_score: prior entry " + std::to_string(c) + " is not > 0");
    total += prior[c];
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("classifier_score: prior does not sum to 1");
  double kl_sum = 0.0;
  for (std::size_t i = 0; i < gen_samples.rows(); ++i) {
    const std::vector<double> p = clf.probabilities(gen_samples.row(i));
    double kl = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p[c] > 0.0) kl += p[c] * std::log(p[c] / prior[c]);
    }
    kl_sum += kl;
  }
  return std::exp(kl_sum / static_cast<double>(gen_samples.rows()));
}

CarpetGrid entropy_carpet(const generator::MlpParams& params, const std::vector<std::vector<double>>& corners,
                          std::size_t resolution, const Classifier& clf,
                          const std::function<Tensor(const Tensor&)>& to_data) {
  if (resolution < 2) throw InvalidArgument("entropy_carpet: resolution must be >= 2");
  if (corners.size() != 4) throw InvalidArgument("entropy_carpet: need exactly four corner latents");
  const std::size_t l = params.spec.input_dim();
  for (const auto& z : corners) {
    if (z.size() != l) {
      throw ShapeError("entropy_carpet: corner latent has dimension " + std::to_string(z.size()) +
                       ", generator expects " + std::to_string(l));
    }
  }
  const std::size_t r = resolution;
  Tensor latents = Tensor::matrix(r * r, l);
  for (std::size_t i = 0; i < r; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(r - 1);
    for (std::size_t j = 0; j < r; ++j) {
      const double y = static_cast<double>(j) / static_cast<double>(r - 1);
      const double w[4] = {x * y, (1.0 - x) * y, x * (1.0 - y), (1.0 - x) * (1.0 - y)};
      auto row = latents.row(i * r + j);
      for (std::size_t c = 0; c < l; ++c) {
        row[c] = w[0] * corners[0][c] + w[1] * corners[1][c] + w[2] * corners[2][c] + w[3] * corners[3][c];
      }
    }
  }
  Tensor out = generator::generate(params, latents);
  if (to_data) out = to_data(out);

  CarpetGrid grid{corners, r, std::vector<std::vector<double>>(r, std::vector<double>(r))};
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) grid.entropy[i][j] = entropy(clf.probabilities(out.row(i * r + j)));
  }
  return grid;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "name,value,n_samples,seed\n";
  char buf[64];
  for (const MetricRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << r.name << ',' << buf << ',' << r.n_samples << ',' << r.seed << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

void write_carpet_csv(const CarpetGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  char buf[64];
  for (const auto& row : grid.entropy) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

std::size_t mode_coverage(const Tensor& samples, const datasets::MogSpec& spec, double min_fraction,
                          double radius_in_stddevs) {
  if (samples.rank() != 2 || samples.cols() != 2) throw ShapeError("mode_coverage: expected 2-D samples");
  if (samples.rows() == 0) return 0;
  const Tensor mu = spec.means();
  const double r2 = std::pow(radius_in_stddevs * spec.stddev, 2);
  std::size_t covered = 0;
  for (std::size_t c = 0; c < spec.modes; ++c) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples.rows(); ++i) {
      const double dx = samples.at(i, 0) - mu.at(c, 0);
      const double dy = samples.at(i, 1) - mu.at(c, 1);
      if (dx * dx + dy * dy <= r2) ++hits;
    }
    if (static_cast<double>(hits) >= min_fraction * static_cast<double>(samples.rows())) ++covered;
  }
  return covered;
}

}  // namespace kgan::metrics
