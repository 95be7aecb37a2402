#include "racap/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace racap {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t read_u64(std::istream& in) {
  char bytes[8];
  in.read(bytes, 8);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const std::uint64_t len = read_u64(in);
  if (len > (1u << 30)) throw std::runtime_error("checkpoint: implausible string length");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const TrainConfig& config, const Vocab& vocab,
                     const std::vector<std::string>& relation_names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  write_string(out, config.to_json_text());

  write_u64(out, static_cast<std::uint64_t>(vocab.size()));
  for (const std::string& tok : vocab.tokens()) write_string(out, tok);

  write_u64(out, relation_names.size());
  for (const std::string& name : relation_names) write_string(out, name);

  const auto params = model.named_params();
  write_u64(out, params.size());
  for (const auto& [name, tensor] : params) {
    write_string(out, name);
    const auto& shape = tensor.shape();
    write_u64(out, shape.size());
    for (int dim : shape) write_u64(out, static_cast<std::uint64_t>(dim));
    for (double v : tensor.data()) write_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8)) {
    throw std::runtime_error("checkpoint: bad magic, not a RACKPT01 file: " + path);
  }

  Checkpoint ckpt;
  ckpt.config = TrainConfig::from_json_text(read_string(in));

  const std::uint64_t vocab_size = read_u64(in);
  if (vocab_size < 2) throw std::runtime_error("checkpoint: vocabulary is missing its reserved entries");
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    const std::string tok = read_string(in);
    if (i < 2) {
      if (tok != ckpt.vocab.token(static_cast<int>(i)))
        throw std::runtime_error("checkpoint: reserved vocabulary entry mismatch: " + tok);
    } else {
      ckpt.vocab.add(tok);
    }
  }
  if (ckpt.vocab.size() != static_cast<int>(vocab_size))
    throw std::runtime_error("checkpoint: duplicate vocabulary entries");

  const std::uint64_t rel_count = read_u64(in);
  for (std::uint64_t i = 0; i < rel_count; ++i) ckpt.relation_names.push_back(read_string(in));
  if (ckpt.relation_names.empty() || ckpt.relation_names[0] != "NA")
    throw std::runtime_error("checkpoint: relation list must start with NA");

  Rng rng(0);  // structure only; every value is overwritten below
  ckpt.model = Model::init(ckpt.config.model, static_cast<int>(vocab_size),
                           static_cast<int>(ckpt.relation_names.size()), ckpt.config.loss.s_init, rng);

  std::map<std::string, Tensor> inventory;
  for (const auto& [name, tensor] : ckpt.model.named_params()) inventory.emplace(name, tensor);

  const std::uint64_t param_count = read_u64(in);
  if (param_count != inventory.size()) {
    throw std::runtime_error("checkpoint: holds " + std::to_string(param_count) + " parameters, architecture has " +
                             std::to_string(inventory.size()));
  }
  std::set<std::string> seen;
  for (std::uint64_t p = 0; p < param_count; ++p) {
    const std::string name = read_string(in);
    auto it = inventory.find(name);
    if (it == inventory.end()) throw std::runtime_error("checkpoint: unexpected parameter '" + name + "'");
    if (!seen.insert(name).second) throw std::runtime_error("checkpoint: duplicate parameter '" + name + "'");

    const std::uint64_t ndims = read_u64(in);
    std::vector<int> shape;
    for (std::uint64_t d = 0; d < ndims; ++d) shape.push_back(static_cast<int>(read_u64(in)));
    if (shape != it->second.shape()) {
      throw std::runtime_error("checkpoint: parameter '" + name + "' has shape " + shape_str(shape) +
                               ", architecture expects " + shape_str(it->second.shape()));
    }
    auto data = it->second.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::bit_cast<double>(read_u64(in));
  }
  return ckpt;
}

}  // namespace racap
