#include "dppce/model_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "dppce/errors.hpp"

namespace dppce {

namespace {

constexpr char kMagic[4] = {'D', 'P', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t x) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(x >> (8 * i));
  out.write(bytes, 8);
}

void put_u32(std::ostream& out, std::uint32_t x) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>(x >> (8 * i));
  out.write(bytes, 4);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8))
    throw IoError(path + ": truncated model file");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return x;
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4))
    throw IoError(path + ": truncated model file");
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return x;
}

}  // namespace

void save_model(const std::string& path, const KernelFactor& factor,
                std::span<const std::int64_t> catalog,
                std::uint64_t config_digest, std::uint64_t seed) {
  if (catalog.size() != static_cast<std::size_t>(factor.num_items()))
    throw InputError("save_model: catalog size does not match factor");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, static_cast<std::uint64_t>(factor.num_items()));
  put_u64(out, static_cast<std::uint64_t>(factor.rank()));
  put_u64(out, seed);
  put_u64(out, config_digest);
  for (std::int64_t id : catalog)
    put_u64(out, static_cast<std::uint64_t>(id));
  const Matrix& v = factor.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index k = 0; k < v.cols(); ++k)
      put_u64(out, std::bit_cast<std::uint64_t>(v(i, k)));
  if (!out) throw IoError("write failed: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
    throw IoError(path + ": not a model file");
  const std::uint32_t version = get_u32(in, path);
  if (version != kVersion)
    throw IoError(path + ": unsupported model format version " +
                  std::to_string(version));
  const auto m = static_cast<Eigen::Index>(get_u64(in, path));
  const auto k = static_cast<Eigen::Index>(get_u64(in, path));
  const std::uint64_t seed = get_u64(in, path);
  const std::uint64_t digest = get_u64(in, path);
  if (m < 1 || k < 1 || k > m) throw IoError(path + ": bad dimensions");

  std::vector<std::int64_t> catalog(static_cast<std::size_t>(m));
  for (auto& id : catalog)
    id = static_cast<std::int64_t>(get_u64(in, path));

  Matrix v(m, k);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      v(i, c) = std::bit_cast<double>(get_u64(in, path));

  char extra;
  if (in.read(&extra, 1)) throw IoError(path + ": trailing bytes");
  return LoadedModel{KernelFactor(std::move(v)), std::move(catalog), seed,
                     digest};
}

std::uint64_t config_digest(const TrainConfig& config) {
  std::ostringstream canon;
  canon << method_name(config.method) << '|' << config.rank << '|'
        << config.alpha << '|' << config.negative_ratio << '|'
        << config.step_size_initial << '|'
        << (config.step_schedule == StepSchedule::kConstant ? "constant"
                                                            : "inverse_t")
        << '|' << config.step_t0 << '|' << config.epsilon << '|'
        << config.max_iters << '|' << config.seed << '|'
        << config.validation_fraction << '|' << config.minibatch_size << '|'
        << config.refresh_every << '|' << config.row_norm_clip;
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (char c : canon.str()) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace dppce
