#include "kgan/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kgan/error.hpp"

namespace kgan::objective {
namespace {

void check_phi(double phi) {
  if (!(phi >= 0.0) || !std::isfinite(phi)) throw InvalidArgument("phi must be a finite value >= 0");
}

double mean_log_ratio(const std::vector<double>& top, const std::vector<double>& other, double phi,
                      const char* where) {
  double acc = 0.0;
  for (std::size_t i = 0; i < top.size(); ++i) {
    const double num = top[i] + phi;
    const double den = top[i] + other[i] + 2.0 * phi;
    const double ratio = num / den;
    if (!(ratio > 0.0) || !std::isfinite(ratio)) throw_underflow(std::string(where) + ", entry " + std::to_string(i), phi);
    acc += std::log(ratio);
  }
  return acc / static_cast<double>(top.size());
}

}  // namespace

void throw_underflow(const std::string& where, double phi) {
  std::ostringstream os;
  os << "objective underflow in " << where << " (phi = " << phi
     << "): a density ratio is not positive; raise phi above zero or increase the kernel bandwidth";
  throw UnderflowError(os.str());
}

ObjectiveReport report_from_kdes(const density::KdeBatch& kdes, const KernelSpec& spec, double phi) {
  check_phi(phi);
  ObjectiveReport r;
  r.phi = phi;
  r.spec = spec;
  r.term1 = mean_log_ratio(kdes.p_hat_at_data, kdes.p_theta_at_data, phi, "first term");
  r.term2 = mean_log_ratio(kdes.p_theta_at_gen, kdes.p_hat_at_gen, phi, "second term");
  r.total = r.term1 + r.term2;
  return r;
}

ObjectiveReport kn_objective(const Tensor& data, const Tensor& gen, const KernelSpec& spec, double phi) {
  check_phi(phi);
  if (data.rank() != 2 || data.rows() < 1) throw ShapeError("kn_objective: data must be a nonempty n x k matrix");
  return report_from_kdes(density::kde_batch(data, gen, spec), spec, phi);
}

ObjectiveNodes build_objective(diff::Graph& g, const density::KdeInputs& inputs, const KernelSpec& spec, double phi) {
  check_phi(phi);
  const density::KdeNodes k = density::build_kde_batch(g, inputs, spec);
  auto log_ratio_mean = [&](diff::NodeId top, diff::NodeId other, const char* label) {
    diff::NodeId num = phi > 0.0 ? g.shift(top, phi) : top;
    diff::NodeId den = g.add(top, other);
    if (phi > 0.0) den = g.shift(den, 2.0 * phi);
    const diff::NodeId ratio = g.div(num, den);
    const diff::NodeId logs = g.log(ratio);
    g.name(logs, std::string(label) + " log-ratio");
    const diff::NodeId m = g.mean(logs);
    g.name(m, label);
    return m;
  };
  ObjectiveNodes out{};
  out.term1 = log_ratio_mean(k.p_hat_at_data, k.p_theta_at_data, "term1");
  out.term2 = log_ratio_mean(k.p_theta_at_gen, k.p_hat_at_gen, "term2");
  out.total = g.add(out.term1, out.term2);
  g.name(out.total, "objective");
  return out;
}

ObjectiveReport read_report(const diff::Evaluation& ev, const ObjectiveNodes& nodes, const KernelSpec& spec,
                            double phi) {
  ObjectiveReport r;
  r.phi = phi;
  r.spec = spec;
  r.term1 = ev.value(nodes.term1).item();
  r.term2 = ev.value(nodes.term2).item();
  r.total = ev.value(nodes.total).item();
  return r;
}

double optimal_discriminator(std::span<const double> x, const Tensor& data, const Tensor& gen,
                             const KernelSpec& spec) {
  if (data.rank() != 2 || gen.rank() != 2) throw ShapeError("optimal_discriminator: point sets must be matrices");
  if (data.rows() != gen.rows()) throw ShapeError("optimal_discriminator: data and generated sets differ in size");
  const Tensor q = Tensor::matrix(1, x.size(), std::vector<double>(x.begin(), x.end()));
  const double pd = density::kde(q, data, spec)[0];
  const double pg = density::kde(q, gen, spec)[0];
  if (!(pd + pg > 0.0)) throw UnderflowError("optimal_discriminator: both kernel sums underflow at the query point");
  return pd / (pd + pg);
}

std::optional<double> discrete_discriminator(std::span<const double> x, const Tensor& data, const Tensor& gen) {
  auto count = [&](const Tensor& set) {
    if (set.rank() != 2 || set.cols() != x.size()) throw ShapeError("discrete_discriminator: dimension mismatch");
    std::size_t c = 0;
    for (std::size_t i = 0; i < set.rows(); ++i) {
      const auto row = set.row(i);
      if (std::equal(row.begin(), row.end(), x.begin())) ++c;
    }
    return c;
  };
  const std::size_t in_data = count(data);
  const std::size_t in_gen = count(gen);
  if (in_data + in_gen == 0) return std::nullopt;
  return static_cast<double>(in_data) / static_cast<double>(in_data + in_gen);
}

CorrectionTerms correction_terms(const Tensor& mu_samples, const Tensor& data, const Tensor& gen,
                                 const KernelSpec& spec, double phi, double mu_volume) {
  if (!(phi > 0.0)) throw InvalidArgument("correction_terms: phi must be > 0");
  if (!(mu_volume > 0.0) || !std::isfinite(mu_volume)) {
    throw InvalidArgument("correction_terms: mu_volume must be positive and finite");
  }
  const std::vector<double> p = density::kde(mu_samples, data, spec);
  const std::vector<double> pg = density::kde(mu_samples, gen, spec);
  CorrectionTerms t;
  t.k1 = mu_volume * mean_log_ratio(p, pg, phi, "first correction term");
  t.k2 = mu_volume * mean_log_ratio(pg, p, phi, "second correction term");
  return t;
}

double augmented_objective(const ObjectiveReport& report, const CorrectionTerms& terms) {
  return report.total + terms.k1 + terms.k2;
}

}  // namespace kgan::objective
