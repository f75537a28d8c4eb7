#include "drd/training/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

#include "drd/core/error.hpp"

namespace drd::training {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'D', 'C'};
constexpr std::uint8_t kFloat32 = 1;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class Writer {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_arithmetic_v<T>);
    v = to_little(v);
    const auto* p = reinterpret_cast<const char*>(&v);
    out_.append(p, sizeof v);
  }
  void text(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void floats(const std::vector<float>& v) {
    for (float f : v) put(f);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return to_little(v);
  }
  std::string text(const char* what) {
    const auto n = get<std::uint32_t>(what);
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<float> floats(std::uint64_t n, const char* what) {
    if (n > (bytes_.size() - pos_) / sizeof(float)) fail(std::string("truncated in ") + what);
    std::vector<float> v(static_cast<std::size_t>(n));
    for (float& f : v) f = get<float>(what);
    return v;
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) fail(std::to_string(bytes_.size() - pos_) + " trailing bytes");
  }
  [[noreturn]] void fail(const std::string& msg) const { throw CheckpointFormatError(source_ + ": " + msg); }

 private:
  void need(std::size_t n, const char* what) const {
    if (n > bytes_.size() - pos_) fail(std::string("truncated in ") + what);
  }

  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize(const Checkpoint& ck) {
  Writer w;
  w.raw(kMagic, 4);
  w.put(Checkpoint::kVersion);
  w.text(to_key_values(ck.config).str());
  w.put(static_cast<std::uint64_t>(ck.iteration));
  w.put(static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& t : ck.tensors) {
    w.text(t.name);
    w.put(kFloat32);
    w.put(std::uint32_t{4});
    for (int a = 0; a < 4; ++a) w.put(static_cast<std::int64_t>(t.shape[a]));
    w.floats(t.data);
  }
  const auto& o = ck.optimizer;
  w.put(o.beta1);
  w.put(o.beta2);
  w.put(o.eps);
  w.put(static_cast<std::int64_t>(o.t));
  w.put(static_cast<std::uint32_t>(o.m.size()));
  for (std::size_t i = 0; i < o.m.size(); ++i) {
    w.put(static_cast<std::uint64_t>(o.m[i].size()));
    w.floats(o.m[i]);
    w.floats(o.v[i]);
  }
  w.text(ck.rng_state);
  return w.take();
}

Checkpoint deserialize(const std::string& bytes, const std::string& source) {
  Reader r(bytes, source);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) r.fail("bad magic (not a DRDC checkpoint)");
  for (int i = 0; i < 4; ++i) r.get<char>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != Checkpoint::kVersion) {
    r.fail("unsupported version " + std::to_string(version) + " (expected " + std::to_string(Checkpoint::kVersion) + ")");
  }
  Checkpoint ck;
  const std::string cfg_text = r.text("config block");
  try {
    ck.config = from_key_values(KeyValues::parse(cfg_text, source + " config block"));
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  ck.iteration = static_cast<std::int64_t>(r.get<std::uint64_t>("iteration"));
  const auto count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = r.text("tensor name");
    if (r.get<std::uint8_t>("dtype") != kFloat32) r.fail("tensor '" + t.name + "' has an unknown dtype tag");
    if (r.get<std::uint32_t>("rank") != 4) r.fail("tensor '" + t.name + "' is not rank 4");
    std::int64_t dims[4];
    for (auto& d : dims) {
      d = r.get<std::int64_t>("dims");
      if (d < 0 || d > (std::int64_t{1} << 32)) r.fail("tensor '" + t.name + "' has a bad extent");
    }
    t.shape = {dims[0], dims[1], dims[2], dims[3]};
    t.data = r.floats(static_cast<std::uint64_t>(t.shape.numel()), "tensor data");
    ck.tensors.push_back(std::move(t));
  }
  auto& o = ck.optimizer;
  o.beta1 = r.get<double>("optimizer");
  o.beta2 = r.get<double>("optimizer");
  o.eps = r.get<double>("optimizer");
  o.t = r.get<std::int64_t>("optimizer");
  const auto moments = r.get<std::uint32_t>("optimizer");
  for (std::uint32_t i = 0; i < moments; ++i) {
    const auto n = r.get<std::uint64_t>("moment size");
    o.m.push_back(r.floats(n, "first moment"));
    o.v.push_back(r.floats(n, "second moment"));
  }
  ck.rng_state = r.text("rng block");
  r.expect_end();
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  const std::string bytes = serialize(ck);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize(bytes, path.string());
}

std::vector<StoredTensor> capture_state(nn::Module& model) {
  std::vector<StoredTensor> out;
  for (const auto& s : nn::named_state(model)) {
    out.push_back({s.name, s.value.shape(), std::vector<float>(s.value.data().begin(), s.value.data().end())});
  }
  return out;
}

void restore_state(nn::Module& model, const std::vector<StoredTensor>& tensors) {
  auto state = nn::named_state(model);
  const std::size_t n = std::min(state.size(), tensors.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i].name != tensors[i].name) {
      throw CompatibilityError("checkpoint tensor " + std::to_string(i) + " is '" + tensors[i].name +
                               "' but the network expects '" + state[i].name + "'");
    }
    if (state[i].value.shape() != tensors[i].shape) {
      throw CompatibilityError("parameter '" + state[i].name + "': checkpoint shape " + tensors[i].shape.str() +
                               ", network shape " + state[i].value.shape().str());
    }
  }
  if (state.size() != tensors.size()) {
    const std::string first = state.size() > tensors.size() ? state[n].name : tensors[n].name;
    throw CompatibilityError("checkpoint has " + std::to_string(tensors.size()) + " tensors, network has " +
                             std::to_string(state.size()) + " (first unmatched: '" + first + "')");
  }
  for (std::size_t i = 0; i < n; ++i) std::copy(tensors[i].data.begin(), tensors[i].data.end(), state[i].value.data().begin());
}

}  // namespace drd::training
