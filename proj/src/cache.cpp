#include "hlent/cache.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "hlent/errors.hpp"
#include "hlent/numeric.hpp"

namespace hlent {

namespace {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

constexpr char kMagic[8] = {'H', 'L', 'N', 'T', '1', 0, 0, 0};

}  // namespace

void write_container(const std::filesystem::path& path, const std::string& key,
                     const std::vector<ArrayBlob>& blobs) {
  nlohmann::json header;
  header["key"] = key;
  header["dtype"] = "f64le";
  auto& arr = header["arrays"] = nlohmann::json::array();
  for (const ArrayBlob& b : blobs) {
    std::int64_t n = 1;
    for (auto d : b.shape) n *= d;
    if (n != static_cast<std::int64_t>(b.data.size())) {
      throw IoError("blob shape does not match its data size");
    }
    arr.push_back({{"name", b.name}, {"shape", b.shape}});
  }
  const std::string hs = header.dump();

  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(kMagic, sizeof kMagic);
    const std::uint32_t len = static_cast<std::uint32_t>(hs.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(hs.data(), hs.size());
    for (const ArrayBlob& b : blobs) {
      out.write(reinterpret_cast<const char*>(b.data.data()), b.data.size() * sizeof(double));
    }
    if (!out) throw IoError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::optional<std::vector<ArrayBlob>> read_container(const std::filesystem::path& path,
                                                     const std::string& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) return std::nullopt;
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1u << 20)) return std::nullopt;
  std::string hs(len, '\0');
  in.read(hs.data(), len);
  if (!in) return std::nullopt;
  nlohmann::json header = nlohmann::json::parse(hs, nullptr, false);
  if (header.is_discarded() || header.value("key", "") != key) return std::nullopt;
  std::vector<ArrayBlob> blobs;
  for (const auto& a : header["arrays"]) {
    ArrayBlob b;
    b.name = a.value("name", "");
    std::int64_t n = 1;
    for (const auto& d : a["shape"]) {
      b.shape.push_back(d.get<std::int64_t>());
      n *= b.shape.back();
    }
    b.data.resize(n);
    in.read(reinterpret_cast<char*>(b.data.data()), n * sizeof(double));
    if (!in) return std::nullopt;
    blobs.push_back(std::move(b));
  }
  return blobs;
}

CorrelatorCache::CorrelatorCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path CorrelatorCache::path_for(const std::string& key) const {
  return dir_ / (hex64(fnv1a64(key)) + ".hlnt");
}

std::optional<CorrelatorProvider> CorrelatorCache::load(const LatticeSpec& spec, const Box& box,
                                                        bool fbc_fast) const {
  const std::string key = provider_cache_key(spec, box, fbc_fast);
  auto blobs = read_container(path_for(key), key);
  if (!blobs) return std::nullopt;
  if (spec.bc == Bc::Periodic) {
    if (blobs->size() != 2) return std::nullopt;
    PbcDifferenceTable t;
    t.spec = spec;
    t.extent = box.extent;
    t.x = std::move((*blobs)[0].data);
    t.p = std::move((*blobs)[1].data);
    if (static_cast<long>(t.x.size()) != box.volume(spec.dims)) return std::nullopt;
    return CorrelatorProvider::from_table(std::move(t), box);
  }
  if (blobs->size() != 2) return std::nullopt;
  const long n = box.volume(spec.dims);
  if (static_cast<long>((*blobs)[0].data.size()) != n * n) return std::nullopt;
  FbcBoxMatrices m;
  m.spec = spec;
  m.box = box;
  m.X = Eigen::Map<Eigen::MatrixXd>((*blobs)[0].data.data(), n, n);
  m.P = Eigen::Map<Eigen::MatrixXd>((*blobs)[1].data.data(), n, n);
  return CorrelatorProvider::from_box(std::move(m));
}

void CorrelatorCache::store(const CorrelatorProvider& provider, bool fbc_fast) const {
  const LatticeSpec& spec = provider.spec();
  const std::string key = provider_cache_key(spec, provider.box(), fbc_fast);
  std::vector<ArrayBlob> blobs;
  if (provider.is_table()) {
    const auto& t = provider.table();
    std::vector<std::int64_t> shape;
    for (int a = 0; a < spec.dims; ++a) shape.push_back(t.extent[a]);
    blobs.push_back({"x", shape, t.x});
    blobs.push_back({"p", shape, t.p});
  } else {
    const auto& m = provider.box_matrices();
    const std::int64_t n = m.X.rows();
    blobs.push_back({"x", {n, n}, std::vector<double>(m.X.data(), m.X.data() + n * n)});
    blobs.push_back({"p", {n, n}, std::vector<double>(m.P.data(), m.P.data() + n * n)});
  }
  write_container(path_for(key), key, blobs);
}

CorrelatorProvider CorrelatorCache::load_or_compute(const LatticeSpec& spec, const Box& box,
                                                    const CorrelatorOptions& opt, bool* hit) const {
  if (auto p = load(spec, box, opt.fbc_fast)) {
    if (hit) *hit = true;
    return *std::move(p);
  }
  if (hit) *hit = false;
  CorrelatorProvider p = CorrelatorProvider::compute(spec, box, opt);
  store(p, opt.fbc_fast);
  return p;
}

}  // namespace hlent
