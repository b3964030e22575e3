#include "gansemble/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "gansemble/errors.hpp"

namespace gansemble {

namespace {

constexpr char kMagic[8] = {'G', 'S', 'M', 'B', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

// Entry kinds.
constexpr std::uint8_t kParam = 0;
constexpr std::uint8_t kBuffer = 1;
constexpr std::uint8_t kAdamM = 2;
constexpr std::uint8_t kAdamV = 3;

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ofstream& out, T v) {
  write_bytes(out, &v, sizeof(T));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw MissingArtifactError("checkpoint: truncated file");
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v;
  read_bytes(in, &v, sizeof(T));
  return v;
}

void write_entry(std::ofstream& out, std::uint8_t kind, const std::string& name,
                 const Tensor& t) {
  write_pod(out, kind);
  write_pod(out, static_cast<std::uint32_t>(name.size()));
  write_bytes(out, name.data(), name.size());
  write_pod(out, static_cast<std::uint32_t>(t.shape.size()));
  for (std::size_t e : t.shape) write_pod(out, static_cast<std::uint64_t>(e));
  write_bytes(out, t.data.data(), t.data.size() * sizeof(double));
}

struct Entry {
  std::uint8_t kind;
  std::string name;
  Tensor tensor;
};

Entry read_entry(std::ifstream& in) {
  Entry e;
  e.kind = read_pod<std::uint8_t>(in);
  const auto name_len = read_pod<std::uint32_t>(in);
  e.name.resize(name_len);
  read_bytes(in, e.name.data(), name_len);
  const auto ndim = read_pod<std::uint32_t>(in);
  e.tensor.shape.resize(ndim);
  for (std::uint32_t i = 0; i < ndim; ++i) {
    e.tensor.shape[i] = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
  }
  e.tensor.data.resize(shape_numel(e.tensor.shape));
  read_bytes(in, e.tensor.data.data(), e.tensor.data.size() * sizeof(double));
  return e;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, MlpModel& model,
                     const AdamState* optimizer, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MissingArtifactError("checkpoint: cannot open " + path.string());
  write_bytes(out, kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, meta.rng_seed);
  write_pod(out, meta.step_count);

  std::vector<ParamRef> params = model.params();
  std::vector<BufferRef> buffers = model.buffers();
  std::uint32_t count = static_cast<std::uint32_t>(params.size() + buffers.size());
  if (optimizer) count += static_cast<std::uint32_t>(2 * params.size());
  write_pod(out, count);
  if (optimizer) {
    write_pod(out, std::uint8_t{1});
    write_pod(out, optimizer->config().learning_rate);
    write_pod(out, optimizer->config().beta1);
    write_pod(out, optimizer->config().beta2);
    write_pod(out, optimizer->config().epsilon);
    write_pod(out, optimizer->step_count());
  } else {
    write_pod(out, std::uint8_t{0});
  }

  for (ParamRef& p : params) write_entry(out, kParam, p.name, *p.value);
  for (BufferRef& b : buffers) write_entry(out, kBuffer, b.name, *b.value);
  if (optimizer) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      write_entry(out, kAdamM, params[i].name, optimizer->first_moments()[i]);
      write_entry(out, kAdamV, params[i].name, optimizer->second_moments()[i]);
    }
  }
  out.flush();
  if (!out) throw MissingArtifactError("checkpoint: write failed for " + path.string());
}

CheckpointMeta load_checkpoint(const std::filesystem::path& path,
                               MlpModel& model, AdamState* optimizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("checkpoint: cannot open " + path.string());
  char magic[8];
  read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw MissingArtifactError("checkpoint: bad magic in " + path.string());
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw MissingArtifactError("checkpoint: unsupported version " +
                               std::to_string(version));
  }
  CheckpointMeta meta;
  meta.rng_seed = read_pod<std::uint64_t>(in);
  meta.step_count = read_pod<std::uint64_t>(in);
  const auto count = read_pod<std::uint32_t>(in);
  const auto has_opt = read_pod<std::uint8_t>(in);
  AdamConfig opt_config;
  std::uint64_t opt_steps = 0;
  if (has_opt) {
    opt_config.learning_rate = read_pod<double>(in);
    opt_config.beta1 = read_pod<double>(in);
    opt_config.beta2 = read_pod<double>(in);
    opt_config.epsilon = read_pod<double>(in);
    opt_steps = read_pod<std::uint64_t>(in);
  }
  if (optimizer && !has_opt) {
    throw MissingArtifactError("checkpoint: no optimizer state in " +
                               path.string());
  }

  std::map<std::pair<std::uint8_t, std::string>, Tensor> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e = read_entry(in);
    entries[{e.kind, e.name}] = std::move(e.tensor);
  }

  auto take = [&](std::uint8_t kind, const std::string& name, Tensor& dst) {
    auto it = entries.find({kind, name});
    if (it == entries.end()) {
      throw MissingArtifactError("checkpoint: missing entry " + name);
    }
    if (it->second.shape != dst.shape) {
      throw MissingArtifactError("checkpoint: shape mismatch on " + name +
                                 ": file has " + it->second.shape_str() +
                                 ", model has " + dst.shape_str());
    }
    dst = std::move(it->second);
  };

  std::vector<ParamRef> params = model.params();
  for (ParamRef& p : params) take(kParam, p.name, *p.value);
  for (BufferRef& b : model.buffers()) take(kBuffer, b.name, *b.value);
  if (optimizer) {
    *optimizer = AdamState(model, opt_config);
    for (std::size_t i = 0; i < params.size(); ++i) {
      take(kAdamM, params[i].name, optimizer->first_moments()[i]);
      take(kAdamV, params[i].name, optimizer->second_moments()[i]);
    }
    optimizer->set_step_count(opt_steps);
  }
  return meta;
}

}  // namespace gansemble
