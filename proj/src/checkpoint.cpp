#include "hrlme/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hrlme {
namespace {

constexpr char kMagic[8] = {'H', 'R', 'L', 'M', 'C', 'K', 'P', 'T'};

template <typename UInt>
void put_le(std::string& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename UInt>
  UInt get() {
    need(sizeof(UInt));
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      v |= static_cast<UInt>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(UInt);
    return v;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw std::runtime_error("checkpoint: truncated file");
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const nn::Matrix& Checkpoint::at(const std::string& name) const {
  for (const auto& [n, m] : entries) {
    if (n == name) {
      return m;
    }
  }
  throw std::out_of_range("checkpoint: no entry '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.first == name) {
      return true;
    }
  }
  return false;
}

void Checkpoint::put(const std::string& name, const nn::Matrix& value) {
  for (auto& [n, m] : entries) {
    if (n == name) {
      m = value;
      return;
    }
  }
  entries.emplace_back(name, value);
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.entries.size()));
  std::uint64_t offset = 0;
  for (const auto& [name, m] : ckpt.entries) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    put_le<std::uint64_t>(out, offset);
    offset += static_cast<std::uint64_t>(m.size()) * 8;
  }
  for (const auto& entry : ckpt.entries) {
    const nn::Matrix& m = entry.second;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m.data()[i]));
    }
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = in.get<std::uint32_t>();
  struct Header {
    std::string name;
    std::uint32_t rows, cols;
    std::uint64_t offset;
  };
  std::vector<Header> headers;
  for (std::uint32_t i = 0; i < count; ++i) {
    Header h;
    h.name = in.take(in.get<std::uint32_t>());
    h.rows = in.get<std::uint32_t>();
    h.cols = in.get<std::uint32_t>();
    h.offset = in.get<std::uint64_t>();
    headers.push_back(std::move(h));
  }
  const std::size_t data_start = in.pos();
  Checkpoint ckpt;
  Reader values(bytes);
  for (const auto& h : headers) {
    const std::size_t n = static_cast<std::size_t>(h.rows) * h.cols;
    if (data_start + h.offset + n * 8 > bytes.size()) {
      throw std::runtime_error("checkpoint: entry '" + h.name + "' exceeds file size");
    }
    values.seek(data_start + h.offset);
    nn::Matrix m(h.rows, h.cols);
    for (std::size_t i = 0; i < n; ++i) {
      m.data()[i] = std::bit_cast<double>(values.get<std::uint64_t>());
    }
    ckpt.entries.emplace_back(h.name, std::move(m));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint " + path.string());
  }
  const std::string bytes = encode_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read checkpoint " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

void export_params(const nn::ParamSet& params, Checkpoint& ckpt) {
  for (const auto& e : params) {
    ckpt.put(e.name, e.value);
  }
}

void import_params(const Checkpoint& ckpt, nn::ParamSet& params) {
  for (auto& e : params) {
    const nn::Matrix& m = ckpt.at(e.name);
    if (m.rows() != e.value.rows() || m.cols() != e.value.cols()) {
      throw std::runtime_error("checkpoint: shape mismatch for '" + e.name + "'");
    }
    e.value = m;
    e.grad.setZero();
  }
}

}  // namespace hrlme
