#include "advkit/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace advkit {

namespace {

constexpr uint32_t kMagic = 0x4144564Bu;  // "ADVK"
constexpr uint32_t kVersion = 1;
constexpr uint8_t kKindClassifier = 0;
constexpr uint8_t kKindSegmenter = 1;

void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u8(std::ostream& os, uint8_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_doubles(std::ostream& os, const std::vector<double>& v) {
  write_u32(os, static_cast<uint32_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

uint32_t read_u32(std::istream& is) {
  uint32_t v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
uint8_t read_u8(std::istream& is) {
  uint8_t v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::string read_string(std::istream& is) {
  uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}
std::vector<double> read_doubles(std::istream& is, size_t expected) {
  uint32_t n = read_u32(is);
  if (n != expected) throw std::runtime_error("model file: tensor size mismatch");
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

void write_conv(std::ostream& os, const ConvLayer& l) {
  write_u32(os, static_cast<uint32_t>(l.in_c));
  write_u32(os, static_cast<uint32_t>(l.out_c));
  write_u32(os, static_cast<uint32_t>(l.k));
  write_doubles(os, l.w);
  write_doubles(os, l.b);
}

void read_conv(std::istream& is, ConvLayer& l) {
  uint32_t in_c = read_u32(is), out_c = read_u32(is), k = read_u32(is);
  if (in_c != static_cast<uint32_t>(l.in_c) ||
      out_c != static_cast<uint32_t>(l.out_c) || k != static_cast<uint32_t>(l.k))
    throw std::runtime_error("model file: conv shape mismatch");
  l.w = read_doubles(is, l.w.size());
  l.b = read_doubles(is, l.b.size());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write model file: " + path.string());
  return os;
}

}  // namespace

void save_model(const fs::path& path, const ToyClassifier& model) {
  std::ofstream os = open_out(path);
  write_u32(os, kMagic);
  write_u32(os, kVersion);
  write_u8(os, kKindClassifier);
  write_string(os, model.id());
  write_u32(os, static_cast<uint32_t>(model.width()));
  write_u32(os, static_cast<uint32_t>(model.num_classes()));
  write_conv(os, model.conv1());
  write_conv(os, model.conv2());
  const DenseLayer& fc = model.dense();
  write_u32(os, static_cast<uint32_t>(fc.in_dim));
  write_u32(os, static_cast<uint32_t>(fc.out_dim));
  write_doubles(os, fc.w);
  write_doubles(os, fc.b);
}

void save_model(const fs::path& path, const ToySegmenter& model) {
  std::ofstream os = open_out(path);
  write_u32(os, kMagic);
  write_u32(os, kVersion);
  write_u8(os, kKindSegmenter);
  write_string(os, model.id());
  write_u32(os, static_cast<uint32_t>(model.width()));
  write_u32(os, static_cast<uint32_t>(model.num_classes()));
  write_conv(os, model.conv1());
  write_conv(os, model.conv2());
  write_conv(os, model.head());
}

std::shared_ptr<Model> load_model(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("model file not found: " + path.string());
  if (read_u32(is) != kMagic) throw std::runtime_error("not a model file: " + path.string());
  if (read_u32(is) != kVersion)
    throw std::runtime_error("unsupported model file version");
  uint8_t kind = read_u8(is);
  std::string id = read_string(is);
  uint32_t width = read_u32(is);
  uint32_t n_classes = read_u32(is);

  if (kind == kKindClassifier) {
    auto m = std::make_shared<ToyClassifier>(0, width, n_classes);
    m->set_id(id);
    read_conv(is, m->conv1());
    read_conv(is, m->conv2());
    DenseLayer& fc = m->dense();
    uint32_t in_dim = read_u32(is), out_dim = read_u32(is);
    if (in_dim != static_cast<uint32_t>(fc.in_dim) ||
        out_dim != static_cast<uint32_t>(fc.out_dim))
      throw std::runtime_error("model file: dense shape mismatch");
    fc.w = read_doubles(is, fc.w.size());
    fc.b = read_doubles(is, fc.b.size());
    return m;
  }
  if (kind == kKindSegmenter) {
    auto m = std::make_shared<ToySegmenter>(0, width, n_classes);
    m->set_id(id);
    read_conv(is, m->conv1());
    read_conv(is, m->conv2());
    read_conv(is, m->head());
    return m;
  }
  throw std::runtime_error("model file: unknown kind");
}

}  // namespace advkit
