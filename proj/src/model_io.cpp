#include "socdfn/model_io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace socdfn {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    unsigned v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text, const std::string& field) {
  auto value = [&](char c) -> unsigned {
    if (c >= 'A' && c <= 'Z') return static_cast<unsigned>(c - 'A');
    if (c >= 'a' && c <= 'z') return static_cast<unsigned>(c - 'a' + 26);
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0' + 52);
    if (c == '+') return 62;
    if (c == '/') return 63;
    throw ParseError("model file: invalid base64 in '" + field + "'");
  };
  if (text.size() % 4 != 0) throw ParseError("model file: truncated base64 in '" + field + "'");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool pad2 = text[i + 2] == '=';
    const bool pad3 = text[i + 3] == '=';
    if ((pad2 && !pad3) || ((pad2 || pad3) && i + 4 != text.size()))
      throw ParseError("model file: misplaced base64 padding in '" + field + "'");
    const unsigned v = (value(text[i]) << 18) | (value(text[i + 1]) << 12) | (pad2 ? 0 : value(text[i + 2]) << 6) |
                       (pad3 ? 0 : value(text[i + 3]));
    out.push_back(static_cast<unsigned char>(v >> 16));
    if (!pad2) out.push_back(static_cast<unsigned char>(v >> 8));
    if (!pad3) out.push_back(static_cast<unsigned char>(v));
  }
  return out;
}

std::string encode_doubles(std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

std::vector<double> decode_doubles(const json& node, const std::string& field, std::size_t expected) {
  if (!node.is_string()) throw ParseError("model file: '" + field + "' must be a base64 string");
  const auto bytes = base64_decode(node.get<std::string>(), field);
  if (bytes.size() != expected * 8)
    throw ParseError("model file: '" + field + "' holds " + std::to_string(bytes.size() / 8) + " values, expected " +
                     std::to_string(expected));
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(std::string("model file: missing '") + key + "'");
  return obj.at(key);
}

json train_to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"loss", to_string(t.loss)},
          {"shuffle", t.shuffle},
          {"shuffle_seed", t.shuffle_seed},
          {"l1", t.reg.l1},
          {"l2", t.reg.l2},
          {"optimizer",
           {{"kind", to_string(t.optimizer.kind)},
            {"learning_rate", t.optimizer.learning_rate},
            {"beta1", t.optimizer.beta1},
            {"beta2", t.optimizer.beta2},
            {"rho", t.optimizer.rho},
            {"epsilon", t.optimizer.epsilon}}}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.epochs = require(j, "epochs").get<std::size_t>();
  t.batch_size = require(j, "batch_size").get<std::size_t>();
  const auto loss = require(j, "loss").get<std::string>();
  if (loss != "mse" && loss != "mae") throw ParseError("model file: unknown loss '" + loss + "'");
  t.loss = loss == "mse" ? LossKind::mse : LossKind::mae;
  t.shuffle = require(j, "shuffle").get<bool>();
  t.shuffle_seed = require(j, "shuffle_seed").get<std::uint64_t>();
  t.reg.l1 = require(j, "l1").get<double>();
  t.reg.l2 = require(j, "l2").get<double>();
  const auto& o = require(j, "optimizer");
  try {
    t.optimizer.kind = optimizer_from_string(require(o, "kind").get<std::string>());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  t.optimizer.learning_rate = require(o, "learning_rate").get<double>();
  t.optimizer.beta1 = require(o, "beta1").get<double>();
  t.optimizer.beta2 = require(o, "beta2").get<double>();
  t.optimizer.rho = require(o, "rho").get<double>();
  t.optimizer.epsilon = require(o, "epsilon").get<double>();
  return t;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string serialize_model(const Network& net, const Normalizer& norm, const ModelMetadata& meta) {
  if (!norm.fitted) throw ContractError("refusing to save an unfitted normalizer");
  json layers = json::array();
  json params = json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& s = net.specs()[l];
    layers.push_back({{"in_dim", s.in_dim},
                      {"out_dim", s.out_dim},
                      {"activation", to_string(s.activation)},
                      {"dropout_after", s.dropout_after}});
    params.push_back({{"weights", encode_doubles(net.params(l).weights.data())},
                      {"biases", encode_doubles(net.params(l).biases.data())}});
  }
  json doc = {{"format", "socdfn-model"},
              {"format_version", kModelFormatVersion},
              {"layers", layers},
              {"parameters", params},
              {"normalizer",
               {{"features", {"voltage", "current", "temperature"}},
                {"mean", encode_doubles(norm.mean)},
                {"std", encode_doubles(norm.std)}}},
              {"preset", meta.preset},
              {"seeds", {{"init", meta.init_seed}, {"data", meta.data_seed}}}};
  if (meta.train) doc["training"] = train_to_json(*meta.train);
  return doc.dump(2) + "\n";
}

LoadedModel parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("model file: parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    if (require(doc, "format").get<std::string>() != "socdfn-model")
      throw ParseError("model file: not a socdfn model document");
    const int version = require(doc, "format_version").get<int>();
    if (version != kModelFormatVersion)
      throw VersionError("model file format_version " + std::to_string(version) + " is not supported (this build reads " +
                         std::to_string(kModelFormatVersion) + "); re-export the model with a matching build");

    std::vector<LayerSpec> specs;
    for (const auto& l : require(doc, "layers")) {
      specs.push_back({require(l, "in_dim").get<std::size_t>(), require(l, "out_dim").get<std::size_t>(),
                       activation_from_string(require(l, "activation").get<std::string>()),
                       require(l, "dropout_after").get<double>()});
    }
    const auto& pj = require(doc, "parameters");
    if (!pj.is_array() || pj.size() != specs.size()) throw ParseError("model file: parameter/layer count mismatch");
    try {
      validate_specs(specs);
    } catch (const ShapeError& e) {
      throw ParseError(std::string("model file: ") + e.what());
    }
    std::vector<LayerParams> params;
    for (std::size_t l = 0; l < specs.size(); ++l) {
      const std::string prefix = "parameters[" + std::to_string(l) + "].";
      auto w = decode_doubles(require(pj[l], "weights"), prefix + "weights", specs[l].in_dim * specs[l].out_dim);
      auto b = decode_doubles(require(pj[l], "biases"), prefix + "biases", specs[l].out_dim);
      params.push_back({Matrix(specs[l].in_dim, specs[l].out_dim, std::move(w)), Vector(std::move(b))});
    }

    Normalizer norm;
    const auto& nj = require(doc, "normalizer");
    const auto mean = decode_doubles(require(nj, "mean"), "normalizer.mean", kFeatureCount);
    const auto sd = decode_doubles(require(nj, "std"), "normalizer.std", kFeatureCount);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (!(sd[f] > 0.0)) throw ParseError("model file: normalizer std must be positive");
      norm.mean[f] = mean[f];
      norm.std[f] = sd[f];
    }
    norm.fitted = true;

    ModelMetadata meta;
    meta.preset = require(doc, "preset").get<std::string>();
    const auto& seeds = require(doc, "seeds");
    meta.init_seed = require(seeds, "init").get<std::uint64_t>();
    meta.data_seed = require(seeds, "data").get<std::uint64_t>();
    if (doc.contains("training")) meta.train = train_from_json(doc.at("training"));

    return {Network(std::move(specs), std::move(params)), norm, std::move(meta)};
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

void save_model(const Network& net, const Normalizer& norm, const std::filesystem::path& path,
                const ModelMetadata& meta) {
  write_text(path, serialize_model(net, norm, meta));
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return parse_model(text);
}

void write_history_csv(const RunHistory& history, const std::filesystem::path& path) {
  std::string text = "epoch,train_loss,train_mae,val_loss,val_mae\n";
  for (const auto& e : history.epochs) {
    text += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," + format_double(e.train_mae) + "," +
            format_double(e.val_loss) + "," + format_double(e.val_mae) + "\n";
  }
  write_text(path, text);
}

void write_cv_report_csv(const CVReport& report, const std::filesystem::path& path) {
  std::string text = "fold,final_val_mae,best_val_mae\n";
  for (std::size_t f = 0; f < report.k; ++f)
    text += std::to_string(f) + "," + format_double(report.final_val_mae[f]) + "," +
            format_double(report.best_val_mae[f]) + "\n";
  text += "mean," + format_double(report.mean_val_mae) + "," + format_double(report.mean_best_val_mae) + "\n";
  text += "std," + format_double(report.std_val_mae) + "," + format_double(report.std_best_val_mae) + "\n";
  write_text(path, text);
}

void write_gnuplot_script(const std::filesystem::path& history_csv, const std::filesystem::path& script_path) {
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set key top right\n"
    << "set xlabel 'epoch'\n"
    << "set ylabel 'MAE (SOC %)'\n"
    << "set terminal pngcairo size 900,600\n"
    << "set output '" << history_csv.stem().string() << ".png'\n"
    << "plot '" << history_csv.string() << "' every ::1 using 1:3 with lines title 'train MAE', \\\n"
    << "     '' every ::1 using 1:5 with lines title 'validation MAE'\n";
  write_text(script_path, s.str());
}

}  // namespace socdfn
