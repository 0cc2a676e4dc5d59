#include "data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

#ifdef FCKAN_WITH_FETCH
#include <curl/curl.h>
#endif

namespace fckan {

namespace {

[[noreturn]] void parse_fail(std::size_t offset, const std::string& what) {
  fail(ErrorKind::kParse, "IDX parse error at byte " + std::to_string(offset) + ": " + what);
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (bytes.size() < offset + 4) {
    parse_fail(offset, "truncated header (file has " + std::to_string(bytes.size()) + " bytes)");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes, std::optional<std::uint32_t> expected_magic) {
  const std::uint32_t magic = read_be32(bytes, 0);
  if ((magic & 0xFFFF0000u) != 0 || ((magic >> 8) & 0xFFu) != 0x08u) {
    parse_fail(0, "bad magic " + hex32(magic) + " (expected unsigned-byte IDX data)");
  }
  if (expected_magic && magic != *expected_magic) {
    parse_fail(0, "magic " + hex32(magic) + " where " + hex32(*expected_magic) + " was expected");
  }
  const std::size_t rank = magic & 0xFFu;
  if (rank == 0) parse_fail(3, "rank 0");
  IdxArray out;
  std::size_t payload = 1;
  for (std::size_t d = 0; d < rank; ++d) {
    const std::uint32_t n = read_be32(bytes, 4 + 4 * d);
    out.dims.push_back(n);
    payload *= n;
  }
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header + payload) {
    parse_fail(bytes.size(), "truncated payload: dimensions need " + std::to_string(payload) +
                                 " bytes after offset " + std::to_string(header) + ", file has " +
                                 std::to_string(bytes.size() - header));
  }
  if (bytes.size() > header + payload) {
    parse_fail(header + payload, std::to_string(bytes.size() - header - payload) +
                                     " trailing bytes after payload");
  }
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx(const IdxArray& array) {
  std::size_t payload = 1;
  for (auto d : array.dims) payload *= d;
  if (array.dims.empty() || array.dims.size() > 255 || payload != array.data.size()) {
    fail(ErrorKind::kDimension, "serialize_idx: dimensions do not match payload of " +
                                    std::to_string(array.data.size()) + " bytes");
  }
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * array.dims.size() + array.data.size());
  write_be32(out, array.magic());
  for (auto d : array.dims) write_be32(out, d);
  out.insert(out.end(), array.data.begin(), array.data.end());
  return out;
}

bool is_gzip(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) fail(ErrorKind::kIo, "gunzip: zlib init failed");
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof(chunk);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      const std::size_t at = zs.total_in;
      inflateEnd(&zs);
      parse_fail(at, "corrupt gzip stream");
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      parse_fail(bytes.size(), "truncated gzip stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> gzip(std::span<const std::uint8_t> bytes) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    fail(ErrorKind::kIo, "gzip: zlib init failed");
  }
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())));
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) fail(ErrorKind::kIo, "gzip: compression failed");
  out.resize(zs.total_out);
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (is_gzip(bytes)) return gunzip(bytes);
  return bytes;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
}

// --- datasets ----------------------------------------------------------------

std::string_view name_of(DatasetKind kind) {
  return kind == DatasetKind::kMnist ? "mnist" : "fashion-mnist";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view name) {
  if (name == "mnist") return DatasetKind::kMnist;
  if (name == "fashion-mnist" || name == "fashion_mnist" || name == "fashion") {
    return DatasetKind::kFashionMnist;
  }
  return std::nullopt;
}

std::vector<std::string> class_names(DatasetKind kind) {
  if (kind == DatasetKind::kFashionMnist) {
    return {"T-shirt/top", "Trouser", "Pullover", "Dress", "Coat",
            "Sandal",      "Shirt",   "Sneaker",  "Bag",   "Ankle boot"};
  }
  std::vector<std::string> out;
  for (int d = 0; d < 10; ++d) out.push_back(std::to_string(d));
  return out;
}

template <typename T>
Tensor<T> Dataset::batch(std::span<const std::size_t> index) const {
  Tensor<T> out(index.size(), features);
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= size()) fail(ErrorKind::kIndex, "dataset index " + std::to_string(index[r]));
    const std::uint8_t* src = pixels.data() + index[r] * features;
    auto dst = out.row(r);
    for (std::size_t c = 0; c < features; ++c) dst[c] = normalize_pixel<T>(src[c]);
  }
  return out;
}

template <typename T>
Tensor<T> Dataset::all() const {
  std::vector<std::size_t> idx(size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return batch<T>(idx);
}

template Tensor<float> Dataset::batch(std::span<const std::size_t>) const;
template Tensor<double> Dataset::batch(std::span<const std::size_t>) const;
template Tensor<float> Dataset::all() const;
template Tensor<double> Dataset::all() const;

std::vector<int> Dataset::labels_at(std::span<const std::size_t> index) const {
  std::vector<int> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) out[i] = labels.at(index[i]);
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(classes, 0);
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> index) const {
  Dataset out;
  out.name = name;
  out.split = split;
  out.features = features;
  out.classes = classes;
  out.pixels.reserve(index.size() * features);
  for (std::size_t i : index) {
    if (i >= size()) fail(ErrorKind::kIndex, "dataset index " + std::to_string(i));
    const auto* src = pixels.data() + i * features;
    out.pixels.insert(out.pixels.end(), src, src + features);
    out.labels.push_back(labels[i]);
  }
  return out;
}

void Dataset::validate() const {
  if (pixels.size() != labels.size() * features) {
    fail(ErrorKind::kDimension, "dataset '" + name + "': pixel buffer does not match " +
                                    std::to_string(labels.size()) + " samples");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      fail(ErrorKind::kIndex, "dataset '" + name + "': label " + std::to_string(labels[i]) +
                                  " at sample " + std::to_string(i) + " outside [0, " +
                                  std::to_string(classes) + ")");
    }
  }
}

Dataset make_dataset(const IdxArray& images, const IdxArray& labels, std::string name,
                     std::string split, std::size_t classes) {
  if (images.dims.size() != 3 || labels.dims.size() != 1) {
    fail(ErrorKind::kParse, "dataset '" + name + "': expected rank-3 images and rank-1 labels");
  }
  if (images.dims[0] != labels.dims[0]) {
    fail(ErrorKind::kParse, "dataset '" + name + "': " + std::to_string(images.dims[0]) +
                                " images but " + std::to_string(labels.dims[0]) + " labels");
  }
  Dataset ds;
  ds.name = std::move(name);
  ds.split = std::move(split);
  ds.classes = classes;
  ds.features = std::size_t{images.dims[1]} * images.dims[2];
  ds.pixels = images.data;
  ds.labels.assign(labels.data.begin(), labels.data.end());
  ds.validate();
  return ds;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("FCKAN_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data";
}

std::filesystem::path dataset_dir(const std::filesystem::path& root, DatasetKind kind) {
  return root / std::string(name_of(kind));
}

std::vector<std::string> canonical_files() {
  return {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
          "t10k-labels-idx1-ubyte"};
}

namespace {

std::filesystem::path locate(const std::filesystem::path& dir, const std::string& base) {
  for (const auto& candidate : {dir / base, dir / (base + ".gz")}) {
    if (std::filesystem::exists(candidate)) return candidate;
  }
  const auto files = canonical_files();
  std::string expected;
  for (const auto& f : files) expected += "\n  " + (dir / f).string() + "[.gz]";
  fail(ErrorKind::kIo, "missing " + (dir / base).string() + "[.gz]; expected files:" + expected +
                           "\nset FCKAN_DATA_DIR or run the fetch command");
}

}  // namespace

Dataset load_split(const std::filesystem::path& root, DatasetKind kind, std::string_view split) {
  const bool train = split == "train";
  if (!train && split != "validation") {
    fail(ErrorKind::kConfig, "split must be train or validation, got '" + std::string(split) + "'");
  }
  const auto files = canonical_files();
  const auto dir = dataset_dir(root, kind);
  const auto image_path = locate(dir, files[train ? 0 : 2]);
  const auto label_path = locate(dir, files[train ? 1 : 3]);
  auto load = [](const std::filesystem::path& path, std::uint32_t magic) {
    try {
      return parse_idx(read_bytes(path), magic);
    } catch (const Error& e) {
      fail(e.kind(), std::string(e.what()) + " in " + path.string());
    }
  };
  const IdxArray images = load(image_path, kIdxImagesMagic);
  const IdxArray labels = load(label_path, kIdxLabelsMagic);
  return make_dataset(images, labels, std::string(name_of(kind)), std::string(split));
}

std::vector<std::size_t> stratified_indices(std::span<const int> labels, std::size_t classes,
                                            double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorKind::kConfig, "subset fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class.at(static_cast<std::size_t>(labels[i])).push_back(i);
  }
  const auto total = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(labels.size())));
  std::vector<std::size_t> quota(classes);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double exact = fraction * static_cast<double>(by_class[c].size());
    quota[c] = std::min(by_class[c].size(), static_cast<std::size_t>(std::floor(exact)));
    assigned += quota[c];
    remainders.emplace_back(exact - static_cast<double>(quota[c]), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i) {
    const std::size_t c = remainders[i].second;
    if (quota[c] < by_class[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(total);
  for (std::size_t c = 0; c < classes; ++c) {
    if (by_class[c].empty()) continue;
    if (quota[c] == 0) {
      fail(ErrorKind::kConfig, "subset fraction " + std::to_string(fraction) +
                                   " leaves class " + std::to_string(c) + " with no samples");
    }
    auto& pool = by_class[c];
    for (std::size_t i = pool.size() - 1; i > 0; --i) std::swap(pool[i], pool[rng.below(i + 1)]);
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dataset stratified_subset(const Dataset& ds, double fraction, std::uint64_t seed) {
  const auto index = stratified_indices(ds.labels, ds.classes, fraction, seed);
  return ds.subset(index);
}

// --- download ----------------------------------------------------------------

std::vector<FetchFile> fetch_manifest(DatasetKind kind) {
  if (kind == DatasetKind::kMnist) {
    return {{"train-images-idx3-ubyte.gz", 9912422},
            {"train-labels-idx1-ubyte.gz", 28881},
            {"t10k-images-idx3-ubyte.gz", 1648877},
            {"t10k-labels-idx1-ubyte.gz", 4542}};
  }
  return {{"train-images-idx3-ubyte.gz", 26421880},
          {"train-labels-idx1-ubyte.gz", 29515},
          {"t10k-images-idx3-ubyte.gz", 4422102},
          {"t10k-labels-idx1-ubyte.gz", 5148}};
}

std::string default_base_url(DatasetKind kind) {
  if (kind == DatasetKind::kMnist) return "https://ossci-datasets.s3.amazonaws.com/mnist/";
  return "http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/";
}

#ifdef FCKAN_WITH_FETCH
namespace {

std::size_t append_body(char* data, std::size_t size, std::size_t count, void* user) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(user);
  out->insert(out->end(), data, data + size * count);
  return size * count;
}

std::vector<std::uint8_t> download(const std::string& url) {
  CURL* curl = curl_easy_init();
  if (curl == nullptr) fail(ErrorKind::kIo, "libcurl initialization failed");
  std::vector<std::uint8_t> body;
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 30L);
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, append_body);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, &body);
  const CURLcode rc = curl_easy_perform(curl);
  curl_easy_cleanup(curl);
  if (rc != CURLE_OK) fail(ErrorKind::kIo, "download " + url + ": " + curl_easy_strerror(rc));
  return body;
}

}  // namespace
#endif

void fetch_dataset(const std::filesystem::path& root, DatasetKind kind, const std::string& base_url,
                   const std::function<void(const std::string&)>& log) {
#ifdef FCKAN_WITH_FETCH
  const auto dir = dataset_dir(root, kind);
  std::filesystem::create_directories(dir);
  std::string base = base_url;
  if (!base.empty() && base.back() != '/') base += '/';
  for (const auto& file : fetch_manifest(kind)) {
    const auto target = dir / file.name;
    if (std::filesystem::exists(target) && std::filesystem::file_size(target) == file.expected_bytes) {
      if (log) log("present " + target.string());
      continue;
    }
    if (log) log("fetching " + base + file.name);
    const auto body = download(base + file.name);
    if (body.size() != file.expected_bytes) {
      fail(ErrorKind::kIo, "download " + file.name + ": got " + std::to_string(body.size()) +
                               " bytes, expected " + std::to_string(file.expected_bytes));
    }
    write_bytes(target, body);
  }
#else
  (void)root;
  (void)kind;
  (void)base_url;
  (void)log;
  fail(ErrorKind::kIo, "built without download support");
#endif
}

}  // namespace fckan
