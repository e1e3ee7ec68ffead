#include "sideslip/io/model_file.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "sideslip/io/csv.hpp"

namespace sideslip::io {

namespace {

constexpr const char* kMagic = "sideslip-model";

std::uint64_t parse_u64(std::string_view text, const char* context) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw SchemaError(std::string(context) + ": bad integer '" +
                      std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next(const char* expected_key) {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto toks = tokens_of(line);
      if (toks.empty()) continue;
      if (expected_key && toks[0] != expected_key) {
        throw SchemaError("model: expected '" + std::string(expected_key) +
                          "', found '" + toks[0] + "'");
      }
      return toks;
    }
    throw SchemaError(std::string("model: unexpected end of file, wanted '") +
                      (expected_key ? expected_key : "?") + "'");
  }

 private:
  std::istream& in_;
};

std::vector<double> params_to_fields(const vehicle::VehicleParams& p) {
  return {p.mass,
          p.cog_to_front,
          p.cog_to_rear,
          p.track_width,
          p.yaw_inertia,
          p.cornering_stiffness_front,
          p.cornering_stiffness_rear,
          p.wheel_radius,
          p.pacejka_front.stiffness_b,
          p.pacejka_front.shape_c,
          p.pacejka_front.peak_d,
          p.pacejka_front.curvature_e,
          p.pacejka_rear.stiffness_b,
          p.pacejka_rear.shape_c,
          p.pacejka_rear.peak_d,
          p.pacejka_rear.curvature_e};
}

vehicle::VehicleParams params_from_fields(const std::vector<double>& f) {
  vehicle::VehicleParams p{};
  p.mass = f[0];
  p.cog_to_front = f[1];
  p.cog_to_rear = f[2];
  p.track_width = f[3];
  p.yaw_inertia = f[4];
  p.cornering_stiffness_front = f[5];
  p.cornering_stiffness_rear = f[6];
  p.wheel_radius = f[7];
  p.pacejka_front = {f[8], f[9], f[10], f[11]};
  p.pacejka_rear = {f[12], f[13], f[14], f[15]};
  return p;
}

}  // namespace

std::string fingerprint_training_set(const mlp::TrainingSet& set) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(set.features.data(), set.features.size() * sizeof(double));
  mix(set.prior.data(), set.prior.size() * sizeof(double));
  mix(set.target.data(), set.target.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_model(const std::string& path, const ModelFile& model) {
  model.topology.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("model: cannot open '" + path + "'");

  out << kMagic << ' ' << model.format_version << '\n';
  out << "concat_point " << mlp::to_string(model.topology.concat_point)
      << '\n';
  out << "stage1_sizes";
  for (auto v : model.topology.stage1_sizes) out << ' ' << v;
  out << '\n';
  out << "stage2_sizes";
  for (auto v : model.topology.stage2_sizes) out << ' ' << v;
  out << '\n';
  out << "channels";
  for (const auto& c : model.channel_order) out << ' ' << c;
  out << '\n';
  out << "standardizer_mean";
  for (double v : model.standardizer.mean) out << ' ' << format_double(v);
  out << '\n';
  out << "standardizer_std";
  for (double v : model.standardizer.stddev) out << ' ' << format_double(v);
  out << '\n';
  out << "vehicle_params";
  for (double v : params_to_fields(model.params)) {
    out << ' ' << format_double(v);
  }
  out << '\n';
  const auto& tc = model.train_config;
  out << "train_config " << format_double(tc.learning_rate) << ' '
      << format_double(tc.adam_beta1) << ' ' << format_double(tc.adam_beta2)
      << ' ' << format_double(tc.adam_eps) << ' ' << format_double(tc.l2_rate)
      << ' ' << tc.batch_size << ' ' << tc.epochs << ' ' << tc.seed << ' '
      << (tc.shuffle_each_epoch ? 1 : 0) << '\n';
  out << "train_fingerprint "
      << (model.train_fingerprint.empty() ? "-" : model.train_fingerprint)
      << '\n';

  const auto shapes = model.topology.layers();
  if (model.weights.layers.size() != shapes.size()) {
    throw ShapeError("model: weight layer count does not match topology");
  }
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& layer = model.weights.layers[l];
    if (layer.w.size() != shapes[l].out * shapes[l].in ||
        layer.b.size() != shapes[l].out) {
      throw ShapeError("model: layer " + std::to_string(l) + " shape mismatch");
    }
    out << "layer " << l << ' ' << shapes[l].out << ' ' << shapes[l].in
        << '\n';
    for (std::size_t o = 0; o < shapes[l].out; ++o) {
      for (std::size_t i = 0; i < shapes[l].in; ++i) {
        out << (i ? " " : "") << format_double(layer.w[o * shapes[l].in + i]);
      }
      out << '\n';
    }
    out << "bias";
    for (double v : layer.b) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "end\n";
  if (!out) throw SchemaError("model: write failed for '" + path + "'");
}

ModelFile read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("model: cannot open '" + path + "'");
  LineReader reader(in);

  ModelFile model;
  {
    const auto toks = reader.next(kMagic);
    if (toks.size() != 2) throw SchemaError("model: malformed magic line");
    model.format_version =
        static_cast<int>(parse_u64(toks[1], "model version"));
    if (model.format_version != 1) {
      throw SchemaError("model: unsupported format_version " + toks[1]);
    }
  }
  {
    const auto toks = reader.next("concat_point");
    if (toks.size() != 2) throw SchemaError("model: malformed concat_point");
    model.topology.concat_point = mlp::concat_point_from_string(toks[1]);
  }
  {
    const auto toks = reader.next("stage1_sizes");
    for (std::size_t i = 1; i < toks.size(); ++i) {
      model.topology.stage1_sizes.push_back(parse_u64(toks[i], "stage1"));
    }
  }
  {
    const auto toks = reader.next("stage2_sizes");
    for (std::size_t i = 1; i < toks.size(); ++i) {
      model.topology.stage2_sizes.push_back(parse_u64(toks[i], "stage2"));
    }
  }
  model.topology.validate();
  {
    const auto toks = reader.next("channels");
    model.channel_order.assign(toks.begin() + 1, toks.end());
  }
  auto read_doubles = [&](const char* key, std::size_t count) {
    const auto toks = reader.next(key);
    if (toks.size() != count + 1) {
      throw SchemaError(std::string("model: '") + key + "' needs " +
                        std::to_string(count) + " values");
    }
    std::vector<double> values;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      values.push_back(parse_double(toks[i], key));
    }
    return values;
  };
  {
    const auto mean = read_doubles("standardizer_mean", hybrid::kFeatureCount);
    const auto stdv = read_doubles("standardizer_std", hybrid::kFeatureCount);
    for (std::size_t c = 0; c < hybrid::kFeatureCount; ++c) {
      model.standardizer.mean[c] = mean[c];
      model.standardizer.stddev[c] = stdv[c];
    }
  }
  model.params = params_from_fields(read_doubles("vehicle_params", 16));
  {
    const auto toks = reader.next("train_config");
    if (toks.size() != 10) throw SchemaError("model: malformed train_config");
    model.train_config.learning_rate = parse_double(toks[1], "train_config");
    model.train_config.adam_beta1 = parse_double(toks[2], "train_config");
    model.train_config.adam_beta2 = parse_double(toks[3], "train_config");
    model.train_config.adam_eps = parse_double(toks[4], "train_config");
    model.train_config.l2_rate = parse_double(toks[5], "train_config");
    model.train_config.batch_size = parse_u64(toks[6], "train_config");
    model.train_config.epochs = parse_u64(toks[7], "train_config");
    model.train_config.seed = parse_u64(toks[8], "train_config");
    model.train_config.shuffle_each_epoch =
        parse_u64(toks[9], "train_config") != 0;
  }
  {
    const auto toks = reader.next("train_fingerprint");
    if (toks.size() != 2) {
      throw SchemaError("model: malformed train_fingerprint");
    }
    model.train_fingerprint = toks[1] == "-" ? "" : toks[1];
  }

  const auto shapes = model.topology.layers();
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto head = reader.next("layer");
    if (head.size() != 4) throw SchemaError("model: malformed layer header");
    if (parse_u64(head[1], "layer index") != l) {
      throw ShapeError("model: layer " + std::to_string(l) +
                       " out of order");
    }
    const std::size_t out = parse_u64(head[2], "layer rows");
    const std::size_t in = parse_u64(head[3], "layer cols");
    if (out != shapes[l].out || in != shapes[l].in) {
      throw ShapeError("model: layer " + std::to_string(l) +
                       " declares shape " + std::to_string(out) + "x" +
                       std::to_string(in) + ", topology requires " +
                       std::to_string(shapes[l].out) + "x" +
                       std::to_string(shapes[l].in));
    }
    mlp::LayerWeights layer;
    layer.w.reserve(out * in);
    for (std::size_t o = 0; o < out; ++o) {
      const auto row = reader.next(nullptr);
      if (row.size() != in) {
        throw ShapeError("model: layer " + std::to_string(l) + " row " +
                         std::to_string(o) + " has " +
                         std::to_string(row.size()) + " values, expected " +
                         std::to_string(in));
      }
      for (const auto& tok : row) {
        layer.w.push_back(parse_double(tok, "layer weights"));
      }
    }
    const auto bias = reader.next("bias");
    if (bias.size() != out + 1) {
      throw ShapeError("model: layer " + std::to_string(l) + " bias has " +
                       std::to_string(bias.size() - 1) +
                       " values, expected " + std::to_string(out));
    }
    for (std::size_t i = 1; i < bias.size(); ++i) {
      layer.b.push_back(parse_double(bias[i], "layer bias"));
    }
    model.weights.layers.push_back(std::move(layer));
  }
  reader.next("end");
  return model;
}

}  // namespace sideslip::io
