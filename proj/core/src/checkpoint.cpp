#include "coldoc/checkpoint.hpp"

#include <cstring>

#include "coldoc/errors.hpp"
#include "coldoc/io.hpp"
#include "json.hpp"

namespace coldoc {

namespace {

using nlohmann::json;

json config_to_json_obj(const TrainConfig& c) {
  json j;
  j["variant"] = variant_name(c.variant);
  j["batch_size"] = c.batch_size;
  j["sections"] = c.sections;
  j["chunk_len"] = c.chunk_len;
  j["d_model"] = c.d_model;
  j["layers"] = c.layers;
  j["enc_heads"] = c.enc_heads;
  j["d_ff"] = c.d_ff;
  j["cw_heads"] = c.cw_heads;
  j["cw_head_dim"] = c.cw_head_dim;
  j["d_lstm"] = c.d_lstm;
  j["d_proj"] = c.d_proj;
  j["max_sections"] = c.max_sections;
  j["max_chunks"] = c.max_chunks;
  j["tau"] = c.tau;
  j["lr"] = c.lr;
  j["weight_decay"] = c.weight_decay;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["normalize_projection"] = c.normalize_projection;
  j["max_section_tokens"] = c.max_section_tokens;
  j["vocab_min_freq"] = c.vocab_min_freq;
  j["pairs_per_doc"] = c.pairs_per_doc;
  j["corpus_path"] = c.corpus_path;
  // published reference shape for this architecture at full scale; the
  // fields above hold the desk-scale dimensions actually trained
  j["reference_dims"] = {{"d_model", 768},    {"layers", 12},    {"enc_heads", 12},
                         {"bilstm_out", 512}, {"d_proj", 256},   {"cw_heads", 4},
                         {"chunk_len", 512},  {"lr", 5e-5},      {"tau", 0.5},
                         {"weight_decay", 0.01}};
  return j;
}

TrainConfig config_from_json_obj(const json& j) {
  TrainConfig c;
  c.variant = variant_from_name(j.at("variant").get<std::string>());
  c.batch_size = j.at("batch_size").get<int>();
  c.sections = j.at("sections").get<int>();
  c.chunk_len = j.at("chunk_len").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.layers = j.at("layers").get<int>();
  c.enc_heads = j.at("enc_heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.cw_heads = j.at("cw_heads").get<int>();
  c.cw_head_dim = j.at("cw_head_dim").get<int>();
  c.d_lstm = j.at("d_lstm").get<int>();
  c.d_proj = j.at("d_proj").get<int>();
  c.max_sections = j.at("max_sections").get<int>();
  c.max_chunks = j.at("max_chunks").get<int>();
  c.tau = j.at("tau").get<double>();
  c.lr = j.at("lr").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.normalize_projection = j.at("normalize_projection").get<bool>();
  c.max_section_tokens = j.at("max_section_tokens").get<int>();
  c.vocab_min_freq = j.at("vocab_min_freq").get<int>();
  c.pairs_per_doc = j.at("pairs_per_doc").get<int>();
  c.corpus_path = j.at("corpus_path").get<std::string>();
  return c;
}

template <class T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T read_le(const std::string& data, std::size_t& pos) {
  if (pos + sizeof(T) > data.size()) throw data_error("checkpoint: truncated file");
  T v;
  std::memcpy(&v, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string train_config_to_json(const TrainConfig& cfg) {
  return config_to_json_obj(cfg).dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  try {
    return config_from_json_obj(json::parse(text));
  } catch (const json::exception& e) {
    throw data_error(std::string("bad config JSON: ") + e.what());
  }
}

void save_checkpoint(const Model& model, double threshold, const std::string& path) {
  json manifest;
  manifest["config"] = config_to_json_obj(model.config);
  manifest["threshold"] = threshold;
  // vocabulary without the PAD/UNK sentinels; ids are implied by order
  const auto& toks = model.vocab.tokens();
  manifest["vocab"] = std::vector<std::string>(toks.begin() + 2, toks.end());

  json params = json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : model.params.items()) {
    params.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size() * sizeof(double);
  }
  manifest["params"] = params;

  std::string manifest_str = manifest.dump();
  std::string out;
  out.reserve(8 + 4 + 8 + manifest_str.size() + offset);
  out.append(kCheckpointMagic, 8);
  append_le<std::uint32_t>(out, kCheckpointVersion);
  append_le<std::uint64_t>(out, manifest_str.size());
  out += manifest_str;
  for (const auto& [name, t] : model.params.items()) {
    const auto& data = t.values();
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
  }
  atomic_write_file(path, out);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::string data = read_file(path);
  if (data.size() < 20 || std::memcmp(data.data(), kCheckpointMagic, 8) != 0) {
    throw data_error("checkpoint: bad magic in " + path);
  }
  std::size_t pos = 8;
  std::uint32_t version = read_le<std::uint32_t>(data, pos);
  if (version != kCheckpointVersion) {
    throw data_error("checkpoint: unsupported format version " + std::to_string(version) +
                     " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  std::uint64_t mlen = read_le<std::uint64_t>(data, pos);
  if (pos + mlen > data.size()) throw data_error("checkpoint: truncated manifest");
  json manifest;
  try {
    manifest = json::parse(data.substr(pos, mlen));
  } catch (const json::exception& e) {
    throw data_error(std::string("checkpoint: bad manifest JSON: ") + e.what());
  }
  pos += mlen;
  std::size_t payload_bytes = data.size() - pos;

  TrainConfig cfg = config_from_json_obj(manifest.at("config"));
  Vocabulary vocab =
      Vocabulary::from_tokens(manifest.at("vocab").get<std::vector<std::string>>());
  LoadedCheckpoint out{build_model(cfg, std::move(vocab)),
                       manifest.at("threshold").get<double>()};

  std::size_t expected_offset = 0;
  for (const auto& p : manifest.at("params")) {
    std::string name = p.at("name").get<std::string>();
    auto shape = p.at("shape").get<std::vector<std::size_t>>();
    std::size_t offset = p.at("offset").get<std::size_t>();
    if (offset != expected_offset) {
      throw data_error("checkpoint: non-contiguous parameter offsets at " + name);
    }
    Tensor t = out.model.params.find(name);
    if (!t.defined()) {
      throw data_error("checkpoint: parameter '" + name + "' not present in rebuilt model");
    }
    if (t.shape() != shape) {
      throw data_error("checkpoint: shape mismatch for '" + name + "': file has " +
                       shape_str(shape) + ", model has " + shape_str(t.shape()));
    }
    std::size_t bytes = t.size() * sizeof(double);
    if (pos + offset + bytes > data.size()) {
      throw data_error("checkpoint: payload truncated at parameter '" + name + "'");
    }
    std::memcpy(t.raw_data().data(), data.data() + pos + offset, bytes);
    expected_offset = offset + bytes;
  }
  if (expected_offset != payload_bytes) {
    throw data_error("checkpoint: payload size " + std::to_string(payload_bytes) +
                     " does not match manifest total " + std::to_string(expected_offset));
  }
  return out;
}

}  // namespace coldoc
