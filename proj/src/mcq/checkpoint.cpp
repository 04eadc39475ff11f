#include "lateralbench/mcq/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace lateral::mcq {

using nlohmann::json;

namespace {

json config_to_json(const EncoderConfig& c) {
  json doc;
  doc["d_model"] = c.d_model;
  doc["n_heads"] = c.n_heads;
  doc["n_layers"] = c.n_layers;
  doc["d_ff"] = c.d_ff;
  doc["max_len"] = c.max_len;
  doc["vocab_size"] = c.vocab_size;
  doc["seed"] = c.seed;
  return doc;
}

EncoderConfig config_from_json(const json& doc) {
  EncoderConfig c;
  c.d_model = doc.at("d_model").get<int>();
  c.n_heads = doc.at("n_heads").get<int>();
  c.n_layers = doc.at("n_layers").get<int>();
  c.d_ff = doc.at("d_ff").get<int>();
  c.max_len = doc.at("max_len").get<int>();
  c.vocab_size = doc.at("vocab_size").get<int>();
  c.seed = doc.at("seed").get<uint64_t>();
  return c;
}

void write_u64(std::ofstream& out, uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

uint64_t read_u64(std::ifstream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     const std::string& path) {
  json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["config"] = config_to_json(params.config);
  header["vocab"] = vocab.regular_tokens();
  header["param_count"] = params.num_params();
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(errc::io_error, "cannot write " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u64(out, header_text.size());
  out.write(header_text.data(),
            static_cast<std::streamsize>(header_text.size()));
  // Raw little-endian IEEE-754 doubles, visit order: round-trips bitwise.
  params.visit([&](const char*, const Mat& m) {
    out.write(reinterpret_cast<const char*>(m.a.data()),
              static_cast<std::streamsize>(m.a.size() * sizeof(double)));
  });
  if (!out) throw Error(errc::io_error, "short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot read " + path);

  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error(errc::malformed_file,
                path + ": not a checkpoint (bad magic/version tag)");
  }
  const uint64_t header_len = read_u64(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw Error(errc::malformed_file, path + ": truncated header");

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::parse_error& e) {
    throw Error(errc::malformed_file, path + ": bad header: " + e.what());
  }
  if (header.at("format_version").get<int>() != kCheckpointFormatVersion) {
    throw Error(errc::malformed_file,
                path + ": unsupported format version " +
                    header.at("format_version").dump());
  }

  Checkpoint ckpt;
  const EncoderConfig config = config_from_json(header.at("config"));
  for (const auto& token : header.at("vocab")) {
    ckpt.vocab.add_token(token.get<std::string>());
  }
  if (ckpt.vocab.size() != config.vocab_size) {
    throw Error(errc::malformed_file,
                path + ": vocabulary size " + std::to_string(ckpt.vocab.size()) +
                    " does not match config " + std::to_string(config.vocab_size));
  }

  ckpt.params = ModelParams::zeros(config);
  if (header.at("param_count").get<size_t>() != ckpt.params.num_params()) {
    throw Error(errc::malformed_file, path + ": parameter count mismatch");
  }
  ckpt.params.visit([&](const char* name, Mat& m) {
    in.read(reinterpret_cast<char*>(m.a.data()),
            static_cast<std::streamsize>(m.a.size() * sizeof(double)));
    if (!in) {
      throw Error(errc::malformed_file,
                  path + ": truncated tensor " + std::string(name));
    }
  });
  return ckpt;
}

}  // namespace lateral::mcq
