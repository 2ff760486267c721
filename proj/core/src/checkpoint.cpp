#include "kgan/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "kgan/error.hpp"

namespace kgan::checkpoint {

using detail::Fields;
using detail::json;

namespace {

json write_params(const generator::MlpParams& p) {
  json acts = json::array();
  for (auto a : p.spec.activations) acts.push_back(generator::activation_name(a));
  return {{"widths", p.spec.widths}, {"activations", acts}, {"values", p.flatten()}};
}

generator::MlpParams read_params(Fields f) {
  generator::MlpSpec spec;
  spec.widths = f.get<std::vector<std::size_t>>("widths");
  for (const auto& name : f.get<std::vector<std::string>>("activations")) {
    spec.activations.push_back(generator::parse_activation(name));
  }
  const auto values = f.get<std::vector<double>>("values");
  f.finish();
  return generator::MlpParams::unflatten(spec, values);
}

}  // namespace

diff::Tensor Checkpoint::sample(std::size_t n, std::uint64_t sample_seed, std::uint64_t counter) const {
  generator::LatentSpec spec = latent;
  spec.seed = sample_seed;
  return scaler.inverse(generator::generate(generator, generator::sample_latent(spec, n, counter)));
}

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void save(const Checkpoint& ckpt, const std::filesystem::path& path) {
  json latent = {{"dim", ckpt.latent.dim},
                 {"family", ckpt.latent.family == generator::LatentFamily::Uniform ? "uniform" : "normal"},
                 {"low", ckpt.latent.low},
                 {"high", ckpt.latent.high}};
  json out = {{"format", "kgan-checkpoint"},
              {"version", kFormatVersion},
              {"seed", ckpt.seed},
              {"iteration", ckpt.iteration},
              {"generator", write_params(ckpt.generator)},
              {"latent", latent},
              {"scaler", {{"center", ckpt.scaler.center}, {"scale", ckpt.scaler.scale}}}};
  if (ckpt.encoder) out["encoder"] = write_params(*ckpt.encoder);
  if (ckpt.decoder) out["decoder"] = write_params(*ckpt.decoder);
  // doubles are printed in shortest round-trip form, so values reload exactly
  write_atomically(path, out.dump(1) + "\n");
}

Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": not valid JSON: " + e.what());
  }
  try {
    Fields f(root, "");
    if (f.get<std::string>("format") != "kgan-checkpoint") throw FormatError(path.string() + ": not a checkpoint");
    if (const int v = f.get<int>("version"); v != kFormatVersion) {
      throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(v));
    }
    Checkpoint c;
    c.seed = f.get<std::uint64_t>("seed");
    c.iteration = f.get<std::size_t>("iteration");
    c.generator = read_params(f.object("generator"));
    {
      Fields l = f.object("latent");
      c.latent.dim = l.get<std::size_t>("dim");
      c.latent.family =
          l.get<std::string>("family") == "uniform" ? generator::LatentFamily::Uniform : generator::LatentFamily::StandardNormal;
      c.latent.low = l.get<double>("low");
      c.latent.high = l.get<double>("high");
      l.finish();
    }
    {
      Fields s = f.object("scaler");
      c.scaler.center = s.get<std::vector<double>>("center");
      c.scaler.scale = s.get<double>("scale");
      s.finish();
    }
    if (f.has("encoder")) c.encoder = read_params(f.object("encoder"));
    if (f.has("decoder")) c.decoder = read_params(f.object("decoder"));
    f.finish();
    return c;
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace kgan::checkpoint
