#include "shdoa/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "shdoa/error.hpp"

namespace shdoa {

namespace {

uint32_t rd_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8)
         | (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ofstream& out, uint32_t v) {
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  out.write(reinterpret_cast<char*>(b), 4);
}

void wr_u16(std::ofstream& out, uint16_t v) {
  uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
  out.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open wav file: " + path);
  std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0
      || std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    fail(ErrorKind::format, path + ": not a RIFF/WAVE file");

  uint16_t fmt_tag = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* pcm = nullptr;
  size_t pcm_len = 0;
  size_t at = 12;
  while (at + 8 <= data.size()) {
    uint32_t chunk_len = rd_u32(data.data() + at + 4);
    const uint8_t* body = data.data() + at + 8;
    if (at + 8 + chunk_len > data.size())
      fail(ErrorKind::format, path + ": truncated chunk");
    if (std::memcmp(data.data() + at, "fmt ", 4) == 0) {
      if (chunk_len < 16) fail(ErrorKind::format, path + ": short fmt chunk");
      fmt_tag = rd_u16(body);
      channels = rd_u16(body + 2);
      rate = rd_u32(body + 4);
      bits = rd_u16(body + 14);
      if (fmt_tag == 0xFFFE && chunk_len >= 40) fmt_tag = rd_u16(body + 24);  // extensible
    } else if (std::memcmp(data.data() + at, "data", 4) == 0) {
      pcm = body;
      pcm_len = chunk_len;
    }
    at += 8 + chunk_len + (chunk_len & 1);
  }
  if (!pcm || channels == 0 || rate == 0)
    fail(ErrorKind::format, path + ": missing fmt or data chunk");

  const bool is_float = (fmt_tag == 3);
  const bool is_pcm = (fmt_tag == 1);
  if (!is_float && !is_pcm) fail(ErrorKind::format, path + ": unsupported format tag");
  if (is_float && bits != 32) fail(ErrorKind::format, path + ": only 32-bit float supported");
  if (is_pcm && bits != 16 && bits != 24) fail(ErrorKind::format, path + ": only 16/24-bit PCM supported");

  const size_t bytes = bits / 8;
  const size_t n = pcm_len / (bytes * channels);
  WavData wav;
  wav.fs = rate;
  wav.samples.resize(channels, static_cast<long>(n));
  for (size_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      const uint8_t* p = pcm + (i * channels + c) * bytes;
      double v;
      if (is_float) {
        float f;
        std::memcpy(&f, p, 4);
        v = f;
      } else if (bits == 16) {
        int16_t s = static_cast<int16_t>(p[0] | (p[1] << 8));
        v = s / 32768.0;
      } else {
        int32_t s = (p[0] << 8) | (p[1] << 16) | (p[2] << 24);
        v = (s >> 8) / 8388608.0;
      }
      wav.samples(c, static_cast<long>(i)) = v;
    }
  }
  return wav;
}

void write_wav_float32(const std::string& path, const Eigen::MatrixXd& samples, double fs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write wav file: " + path);
  const uint16_t channels = static_cast<uint16_t>(samples.rows());
  const uint32_t n = static_cast<uint32_t>(samples.cols());
  const uint32_t data_len = n * channels * 4;
  out.write("RIFF", 4);
  wr_u32(out, 36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  wr_u32(out, 16);
  wr_u16(out, 3);  // IEEE float
  wr_u16(out, channels);
  wr_u32(out, static_cast<uint32_t>(fs));
  wr_u32(out, static_cast<uint32_t>(fs) * channels * 4);
  wr_u16(out, channels * 4);
  wr_u16(out, 32);
  out.write("data", 4);
  wr_u32(out, data_len);
  for (uint32_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      float f = static_cast<float>(samples(c, i));
      out.write(reinterpret_cast<char*>(&f), 4);
    }
  }
  if (!out) fail(ErrorKind::io, "short write: " + path);
}

}  // namespace shdoa
