#include "mdhar/nnet/checkpoint.hpp"

#include <fstream>

#include "../binary_io.hpp"

namespace mdhar::nnet {

void save_checkpoint(const CnnModel<float>& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
  io::put_magic(os, "MDN1");
  io::put_u32(os, kCheckpointVersion);
  const auto& a = model.arch();
  for (std::size_t v : {a.branches, a.input_size, a.channels, a.filters, a.conv_layers, a.hidden,
                        a.classes}) {
    io::put_u32(os, static_cast<std::uint32_t>(v));
  }
  io::put_u32(os, static_cast<std::uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    io::put_u32(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    io::put_u32(os, static_cast<std::uint32_t>(p.shape.size()));
    for (std::size_t d : p.shape) io::put_u32(os, static_cast<std::uint32_t>(d));
    for (float v : p.value) io::put_f32(os, v);
  }
  if (!os) throw DataError("failed writing checkpoint " + path.string());
}

CnnModel<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  const std::string what = "checkpoint " + path.string();
  if (!is) throw DataError("cannot open " + what);
  io::expect_magic(is, "MDN1", what);
  const std::uint32_t version = io::get_u32(is, what);
  if (version != kCheckpointVersion) {
    throw DataError(what + ": unsupported version " + std::to_string(version));
  }
  Architecture a;
  a.branches = io::get_u32(is, what);
  a.input_size = io::get_u32(is, what);
  a.channels = io::get_u32(is, what);
  a.filters = io::get_u32(is, what);
  a.conv_layers = io::get_u32(is, what);
  a.hidden = io::get_u32(is, what);
  a.classes = io::get_u32(is, what);
  CnnModel<float> model = [&] {
    try {
      return CnnModel<float>(a);
    } catch (const std::invalid_argument& e) {
      throw DataError(what + ": " + e.what());
    }
  }();
  const std::uint32_t count = io::get_u32(is, what);
  if (count != model.params().size()) throw DataError(what + ": tensor count mismatch");
  for (auto& p : model.params()) {
    const std::uint32_t name_len = io::get_u32(is, what);
    if (name_len > 4096) throw DataError(what + ": implausible tensor name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    io::need(is, what);
    if (name != p.name) throw DataError(what + ": expected tensor " + p.name + ", found " + name);
    const std::uint32_t rank = io::get_u32(is, what);
    if (rank != p.shape.size()) throw DataError(what + ": rank mismatch for " + name);
    for (std::size_t d : p.shape) {
      if (io::get_u32(is, what) != d) throw DataError(what + ": shape mismatch for " + name);
    }
    for (auto& v : p.value) v = io::get_f32(is, what);
  }
  return model;
}

}  // namespace mdhar::nnet
