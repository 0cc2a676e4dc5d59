#include "checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "error.hpp"

namespace fckan {

namespace {

constexpr char kMagic[8] = {'F', 'C', 'K', 'A', 'N', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}
  void bytes(void* p, std::size_t n) {
    if (pos_ + n > b_.size()) {
      fail(ErrorKind::kParse, "checkpoint truncated at byte " + std::to_string(pos_) + " (needs " +
                                  std::to_string(n) + " more)");
    }
    std::memcpy(p, b_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const Model<T>& model) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  w.str(model.spec().to_text());
  w.u8(static_cast<std::uint8_t>(sizeof(T)));
  const auto params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.var.rows()));
    w.u32(static_cast<std::uint32_t>(p.var.cols()));
    const auto data = p.var.value().data();
    w.bytes(data.data(), data.size() * sizeof(T));
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorKind::kParse, "not a checkpoint: bad magic at byte 0");
  }
  if (const auto v = r.u32(); v != kVersion) {
    fail(ErrorKind::kParse, "unsupported checkpoint version " + std::to_string(v));
  }
  Checkpoint ckpt;
  ckpt.spec = NetworkSpec::parse(r.str());
  ckpt.scalar_bytes = r.u8();
  if (ckpt.scalar_bytes != 4 && ckpt.scalar_bytes != 8) {
    fail(ErrorKind::kParse, "checkpoint scalar width " + std::to_string(ckpt.scalar_bytes) +
                                " at byte " + std::to_string(r.pos() - 1));
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.path = r.str();
    e.rows = r.u32();
    e.cols = r.u32();
    const std::size_t n = std::size_t{e.rows} * e.cols;
    e.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (ckpt.scalar_bytes == 4) {
        float f;
        r.bytes(&f, 4);
        e.values[k] = f;
      } else {
        r.bytes(&e.values[k], 8);
      }
    }
    ckpt.entries.push_back(std::move(e));
  }
  if (!r.done()) fail(ErrorKind::kParse, "trailing bytes after checkpoint at " + std::to_string(r.pos()));
  return ckpt;
}

template <typename T>
void load_parameters(Model<T>& model, const Checkpoint& ckpt) {
  const auto params = model.parameters();
  if (params.size() != ckpt.entries.size()) {
    fail(ErrorKind::kDimension, "checkpoint has " + std::to_string(ckpt.entries.size()) +
                                 " parameters, model expects " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = ckpt.entries[i];
    Variable<T> var = params[i].var;
    const Shape expected = var.shape();
    if (e.path != params[i].name || e.rows != expected.rows || e.cols != expected.cols) {
      fail(ErrorKind::kDimension, "checkpoint entry '" + e.path + "' " + std::to_string(e.rows) + "x" +
                                   std::to_string(e.cols) + " does not match expected '" +
                                   params[i].name + "' " + to_string(expected));
    }
    auto dst = var.mutable_value().data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<T>(e.values[k]);
  }
}

template <typename T>
void save_checkpoint(const Model<T>& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "cannot write checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

#define FCKAN_INSTANTIATE(T)                                                           \
  template std::vector<std::uint8_t> encode_checkpoint(const Model<T>&);               \
  template void load_parameters(Model<T>&, const Checkpoint&);                         \
  template void save_checkpoint(const Model<T>&, const std::filesystem::path&);

FCKAN_INSTANTIATE(float)
FCKAN_INSTANTIATE(double)

#undef FCKAN_INSTANTIATE

}  // namespace fckan
