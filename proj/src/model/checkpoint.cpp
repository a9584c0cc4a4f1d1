#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "slicefix/model.hpp"

namespace slicefix {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
  std::string out;
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
  }
  void u32(std::uint32_t x) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
  }
  void i32(int x) { u32(static_cast<std::uint32_t>(x)); }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
  void bytes(const std::string &s) {
    u64(s.size());
    out += s;
  }
};

struct Reader {
  const std::string &in;
  std::size_t at = 0;
  void need(std::size_t n) {
    if (in.size() - at < n) throw CheckpointError("checkpoint truncated at byte " + std::to_string(at));
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at++])) << (8 * i);
    return x;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at++])) << (8 * i);
    return x;
  }
  int i32() { return static_cast<int>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes() {
    std::uint64_t n = u64();
    need(n);
    std::string s = in.substr(at, n);
    at += n;
    return s;
  }
};

} // namespace

void save_checkpoint(const std::string &path, const ModelParams &params, const Vocabulary &vocab) {
  Writer w;
  w.out.append(kMagic, 4);
  w.u32(kVersion);
  const ModelConfig &c = params.config;
  w.i32(c.d);
  w.i32(c.layers);
  w.i32(c.edit_steps);
  w.i32(c.batch_size);
  w.i32(c.epochs);
  w.f64(c.learning_rate);
  w.f64(c.dropout);
  w.u64(c.seed);
  w.u64(vocab.hash());
  w.bytes(vocab.to_json());
  w.i32(params.layout.kinds);
  w.i32(params.layout.values);
  w.u64(params.theta.size());
  for (double x : params.theta) w.f64(x);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot write " + path);
  f.write(w.out.data(), static_cast<std::streamsize>(w.out.size()));
  if (!f) throw CheckpointError("cannot write " + path);
}

std::pair<ModelParams, Vocabulary> load_checkpoint(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot read " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r{data};
  r.need(4);
  if (std::memcmp(data.data(), kMagic, 4) != 0) throw CheckpointError(path + " is not a checkpoint");
  r.at = 4;
  std::uint32_t version = r.u32();
  if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig c;
  c.d = r.i32();
  c.layers = r.i32();
  c.edit_steps = r.i32();
  c.batch_size = r.i32();
  c.epochs = r.i32();
  c.learning_rate = r.f64();
  c.dropout = r.f64();
  c.seed = r.u64();
  std::uint64_t hash = r.u64();
  Vocabulary vocab;
  try {
    vocab = Vocabulary::from_json(r.bytes());
  } catch (const CheckpointError &) {
    throw;
  } catch (const std::exception &e) {
    throw CheckpointError(std::string("bad vocabulary in checkpoint: ") + e.what());
  }
  if (vocab.hash() != hash) throw CheckpointError("vocabulary hash mismatch in " + path);
  int kinds = r.i32(), values = r.i32();
  if (kinds != vocab.kind_count() || values != vocab.value_count())
    throw CheckpointError("vocabulary sizes disagree with parameter shapes");
  if (c.d < 1 || c.layers < 0) throw CheckpointError("invalid model shape in checkpoint");
  ModelParams m;
  m.config = c;
  m.layout = ParamLayout::make(c.d, c.layers, kinds, values);
  m.vocab_hash = hash;
  std::uint64_t n = r.u64();
  if (n != m.layout.total) throw CheckpointError("parameter count does not match the layout");
  m.theta.resize(n);
  for (auto &x : m.theta) x = r.f64();
  if (r.at != data.size()) throw CheckpointError("trailing bytes in checkpoint");
  return {std::move(m), std::move(vocab)};
}

} // namespace slicefix
