#include "satkgc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "satkgc/types.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace satkgc {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'T', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError("truncated checkpoint: " + path);
  }
  return v;
}

void write_f32_matrix(std::ofstream& out,
                      const EncoderParams<double>::Mat& m) {
  std::vector<float> buf(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      buf[k++] = static_cast<float>(m(i, j));
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void read_f32_matrix(std::ifstream& in, EncoderParams<double>::Mat& m,
                     const std::string& path) {
  std::vector<float> buf(static_cast<std::size_t>(m.size()));
  if (!in.read(reinterpret_cast<char*>(buf.data()),
               static_cast<std::streamsize>(buf.size() * sizeof(float)))) {
    throw DataError("truncated checkpoint: " + path);
  }
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = static_cast<double>(buf[k++]);
    }
  }
}

}  // namespace

void save_checkpoint(const EncoderParams<double>& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(params.dim()));
  write_u32(out, static_cast<std::uint32_t>(params.num_entities()));
  write_u32(out, static_cast<std::uint32_t>(params.num_relations()));
  write_f32_matrix(out, params.entity_head);
  write_f32_matrix(out, params.relation);
  write_f32_matrix(out, params.entity_tail);
  const float beta = static_cast<float>(params.beta);
  const float theta = static_cast<float>(params.log_inv_temperature);
  out.write(reinterpret_cast<const char*>(&beta), sizeof(beta));
  out.write(reinterpret_cast<const char*>(&theta), sizeof(theta));
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

EncoderParams<double> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  const std::uint32_t version = read_u32(in, path);
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t dim = read_u32(in, path);
  const std::uint32_t entities = read_u32(in, path);
  const std::uint32_t relations = read_u32(in, path);
  EncoderParams<double> params;
  params.entity_head.resize(entities, dim);
  params.relation.resize(relations, dim);
  params.entity_tail.resize(entities, dim);
  read_f32_matrix(in, params.entity_head, path);
  read_f32_matrix(in, params.relation, path);
  read_f32_matrix(in, params.entity_tail, path);
  float beta = 0.0f;
  float theta = 0.0f;
  if (!in.read(reinterpret_cast<char*>(&beta), sizeof(beta)) ||
      !in.read(reinterpret_cast<char*>(&theta), sizeof(theta))) {
    throw DataError("truncated checkpoint: " + path);
  }
  params.beta = beta;
  params.log_inv_temperature = theta;
  return params;
}

}  // namespace satkgc
