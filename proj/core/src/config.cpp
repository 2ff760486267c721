#include "kgan/config.hpp"

#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "kgan/random.hpp"

namespace kgan::config {

using detail::Fields;
using detail::json;
using generator::Activation;

namespace {

// Runs `fn` and relabels library validation errors with the field path.
template <class Fn>
void checked(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(field, e.what());
  }
}

generator::MlpSpec read_mlp(Fields f) {
  generator::MlpSpec spec;
  spec.widths = f.get<std::vector<std::size_t>>("widths");
  for (const auto& name : f.get<std::vector<std::string>>("activations")) {
    checked(f.where("activations"), [&] { spec.activations.push_back(generator::parse_activation(name)); });
  }
  f.finish();
  checked(f.where(), [&] { spec.validate(); });
  return spec;
}

json write_mlp(const generator::MlpSpec& spec) {
  json acts = json::array();
  for (Activation a : spec.activations) acts.push_back(generator::activation_name(a));
  return {{"widths", spec.widths}, {"activations", acts}};
}

kernels::BandwidthSchedule read_schedule(Fields f) {
  const auto kind = f.get<std::string>("kind");
  kernels::BandwidthSchedule out = kernels::BandwidthSchedule::constant(1.0);
  checked(f.where(), [&] {
    if (kind == "constant") {
      out = kernels::BandwidthSchedule::constant(f.get<double>("sigma"));
    } else if (kind == "ladder") {
      std::vector<kernels::BandwidthSchedule::Phase> phases;
      const json& list = f.raw("phases");
      if (!list.is_array()) throw ConfigError(f.where("phases"), "expected an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        Fields p(list[i], f.where("phases") + "[" + std::to_string(i) + "]");
        phases.push_back({p.get<double>("sigma"), p.get<std::size_t>("iterations")});
        p.finish();
      }
      out = kernels::BandwidthSchedule::ladder(std::move(phases));
    } else if (kind == "geometric") {
      out = kernels::BandwidthSchedule::geometric(f.get<double>("initial"), f.get<double>("decay"),
                                                  f.get<double>("floor"));
    } else {
      throw ConfigError(f.where("kind"), "unknown schedule kind '" + kind + "' (constant, ladder, geometric)");
    }
  });
  f.finish();
  return out;
}

json write_schedule(const kernels::BandwidthSchedule& s) {
  using Kind = kernels::BandwidthSchedule::Kind;
  switch (s.kind()) {
    case Kind::Constant: return {{"kind", "constant"}, {"sigma", s.initial()}};
    case Kind::Geometric:
      return {{"kind", "geometric"}, {"initial", s.initial()}, {"decay", s.decay()}, {"floor", s.floor()}};
    case Kind::Ladder: {
      json phases = json::array();
      for (const auto& p : s.phases()) phases.push_back({{"sigma", p.sigma}, {"iterations", p.iterations}});
      return {{"kind", "ladder"}, {"phases", phases}};
    }
  }
  return {};
}

training::OptimizerConfig read_optimizer(Fields f) {
  const auto kind = f.get<std::string>("kind", "rmsprop");
  training::OptimizerConfig out;
  if (kind == "rmsprop") {
    training::RmspropConfig c;
    c.lr = f.get("lr", c.lr);
    c.decay = f.get("decay", c.decay);
    c.eps = f.get("eps", c.eps);
    out = c;
  } else if (kind == "adam") {
    training::AdamConfig c;
    c.lr = f.get("lr", c.lr);
    c.beta1 = f.get("beta1", c.beta1);
    c.beta2 = f.get("beta2", c.beta2);
    c.eps = f.get("eps", c.eps);
    out = c;
  } else {
    throw ConfigError(f.where("kind"), "unknown optimizer '" + kind + "' (rmsprop, adam)");
  }
  f.finish();
  checked(f.where(), [&] { training::validate(out); });
  if (std::visit([](const auto& c) { return !(c.lr > 0.0); }, out)) throw ConfigError(f.where("lr"), "must be > 0");
  return out;
}

json write_optimizer(const training::OptimizerConfig& o) {
  if (const auto* r = std::get_if<training::RmspropConfig>(&o)) {
    return {{"kind", "rmsprop"}, {"lr", r->lr}, {"decay", r->decay}, {"eps", r->eps}};
  }
  const auto& a = std::get<training::AdamConfig>(o);
  return {{"kind", "adam"}, {"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

generator::LatentSpec read_latent(Fields f) {
  generator::LatentSpec spec;
  spec.dim = f.get<std::size_t>("dim");
  const auto family = f.get<std::string>("family", "normal");
  if (family == "normal") {
    spec.family = generator::LatentFamily::StandardNormal;
  } else if (family == "uniform") {
    spec.family = generator::LatentFamily::Uniform;
    spec.low = f.get("low", spec.low);
    spec.high = f.get("high", spec.high);
  } else {
    throw ConfigError(f.where("family"), "unknown latent family '" + family + "' (normal, uniform)");
  }
  f.finish();
  checked(f.where(), [&] { spec.validate(); });
  return spec;
}

json write_latent(const generator::LatentSpec& spec) {
  if (spec.family == generator::LatentFamily::Uniform) {
    return {{"dim", spec.dim}, {"family", "uniform"}, {"low", spec.low}, {"high", spec.high}};
  }
  return {{"dim", spec.dim}, {"family", "normal"}};
}

training::FeatureConfig read_feature(Fields f) {
  training::FeatureConfig c;
  c.enabled = f.get("enabled", c.enabled);
  if (c.enabled || f.has("encoder")) c.encoder = read_mlp(f.object("encoder"));
  if (c.enabled || f.has("decoder")) c.decoder = read_mlp(f.object("decoder"));
  c.identity_encoder = f.get("identity_encoder", c.identity_encoder);
  c.reconstruction_weight = f.get("reconstruction_weight", c.reconstruction_weight);
  c.clip = f.get("clip", c.clip);
  c.psi_steps = f.get("psi_steps", c.psi_steps);
  f.finish();
  if (c.enabled && !(c.clip > 0.0)) throw ConfigError(f.where("clip"), "must be > 0");
  if (!(c.reconstruction_weight >= 0.0)) throw ConfigError(f.where("reconstruction_weight"), "must be >= 0");
  return c;
}

json write_feature(const training::FeatureConfig& c) {
  json out = {{"enabled", c.enabled},
              {"identity_encoder", c.identity_encoder},
              {"reconstruction_weight", c.reconstruction_weight},
              {"clip", c.clip},
              {"psi_steps", c.psi_steps}};
  if (!c.encoder.widths.empty()) out["encoder"] = write_mlp(c.encoder);
  if (!c.decoder.widths.empty()) out["decoder"] = write_mlp(c.decoder);
  return out;
}

DataConfig read_data(Fields f) {
  DataConfig d;
  const auto source = f.get<std::string>("source", "mog");
  if (source == "mog") {
    d.source = DataConfig::Source::Mog;
    d.mog.modes = f.get("modes", d.mog.modes);
    d.mog.radius = f.get("radius", d.mog.radius);
    d.mog.stddev = f.get("stddev", d.mog.stddev);
    d.mog.weights = f.get("weights", d.mog.weights);
    d.samples = f.get("samples", d.samples);
    checked(f.where(), [&] { d.mog.validate(); });
    if (d.samples < 2) throw ConfigError(f.where("samples"), "must be >= 2");
  } else if (source == "csv") {
    d.source = DataConfig::Source::Csv;
    d.csv = f.get<std::string>("path");
    d.header = f.get("header", d.header);
  } else {
    throw ConfigError(f.where("source"), "unknown data source '" + source + "' (mog, csv)");
  }
  d.scale = f.get("scale", d.scale);
  d.train_fraction = f.get("train_fraction", d.train_fraction);
  if (!(d.train_fraction > 0.0 && d.train_fraction < 1.0)) {
    throw ConfigError(f.where("train_fraction"), "must lie in (0, 1)");
  }
  f.finish();
  return d;
}

json write_data(const DataConfig& d) {
  json out;
  if (d.source == DataConfig::Source::Mog) {
    out = {{"source", "mog"},        {"modes", d.mog.modes},     {"radius", d.mog.radius},
           {"stddev", d.mog.stddev}, {"weights", d.mog.weights}, {"samples", d.samples}};
  } else {
    out = {{"source", "csv"}, {"path", d.csv.string()}, {"header", d.header}};
  }
  out["scale"] = d.scale;
  out["train_fraction"] = d.train_fraction;
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin, std::string("not valid JSON: ") + e.what());
  }
  Fields f(root, "");
  RunConfig cfg;
  training::TrainConfig& t = cfg.train;
  t.seed = f.get<std::uint64_t>("seed", 0);
  t.generator = read_mlp(f.object("generator"));
  t.zero_output_layer = f.get("zero_output_layer", false);
  t.latent = read_latent(f.object("latent"));
  {
    Fields k = f.object("kernel");
    t.kernel.bandwidths = k.get("bandwidths", t.kernel.bandwidths);
    t.kernel.normalize = k.get("normalize", t.kernel.normalize);
    k.finish();
    t.kernel.dim = t.generator.output_dim();
    checked("kernel", [&] { t.kernel.validate(); });
  }
  if (f.has("schedule")) t.schedule = read_schedule(f.object("schedule"));
  t.phi = f.get("phi", t.phi);
  t.batch_size = f.get("batch_size", t.batch_size);
  t.optimizer = f.has("optimizer") ? read_optimizer(f.object("optimizer")) : training::RmspropConfig{};
  if (f.has("iterations")) {
    t.iterations = f.get<std::size_t>("iterations");
  } else if (t.schedule && t.schedule->kind() == kernels::BandwidthSchedule::Kind::Ladder) {
    t.iterations = t.schedule->total_iterations();
  } else {
    throw ConfigError("iterations", "missing required field (only a ladder schedule implies it)");
  }
  t.eval_every = f.get("eval_every", t.eval_every);
  t.record_wall_time = f.get("record_wall_time", t.record_wall_time);
  if (f.has("feature")) t.feature = read_feature(f.object("feature"));
  if (f.has("data")) cfg.data = read_data(f.object("data"));
  f.finish();

  if (t.latent.dim != t.generator.input_dim()) {
    throw ConfigError("latent.dim", "must equal the generator input width " + std::to_string(t.generator.input_dim()));
  }
  if (t.batch_size < 2) throw ConfigError("batch_size", "must be >= 2");
  if (!(t.phi >= 0.0)) throw ConfigError("phi", "must be >= 0");
  if (t.eval_every < 1) throw ConfigError("eval_every", "must be >= 1");
  checked("feature", [&] { t.validate(); });
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string to_json(const RunConfig& config) {
  const training::TrainConfig& t = config.train;
  json out = {{"seed", t.seed},
              {"generator", write_mlp(t.generator)},
              {"zero_output_layer", t.zero_output_layer},
              {"latent", write_latent(t.latent)},
              {"kernel", {{"bandwidths", t.kernel.bandwidths}, {"normalize", t.kernel.normalize}}},
              {"phi", t.phi},
              {"batch_size", t.batch_size},
              {"optimizer", write_optimizer(t.optimizer)},
              {"iterations", t.iterations},
              {"eval_every", t.eval_every},
              {"record_wall_time", t.record_wall_time},
              {"feature", write_feature(t.feature)},
              {"data", write_data(config.data)}};
  if (t.schedule) out["schedule"] = write_schedule(*t.schedule);
  return out.dump(2) + "\n";
}

Dataset materialize(const DataConfig& data, std::uint64_t seed) {
  datasets::Tensor points;
  if (data.source == DataConfig::Source::Mog) {
    datasets::MogSpec spec = data.mog;
    spec.seed = stream_seed(seed, {0xda7a});
    points = datasets::mog_sample(spec, data.samples).points;
  } else {
    points = datasets::load_csv(data.csv, data.header);
  }
  datasets::Split parts = datasets::split(points, data.train_fraction, stream_seed(seed, {0x5a11}));
  Dataset out{std::move(parts.train), std::move(parts.held_out), datasets::DataScaler::identity(points.cols())};
  if (data.scale) out.scaler = datasets::DataScaler::fit(out.train);
  return out;
}

}  // namespace kgan::config
