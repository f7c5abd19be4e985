#include "gzio.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "autonet/common.hpp"

namespace autonet::detail {

bool looks_gzipped(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  in.seekg(0, std::ios::end);
  const auto n = in.tellg();
  if (n < 0) throw IoError("cannot determine size of file: " + path);
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
  if (n > 0) in.read(reinterpret_cast<char*>(bytes.data()), n);
  if (!in) throw IoError("short read on file: " + path);
  return bytes;
}

static std::vector<std::uint8_t> inflate_bytes(const std::vector<std::uint8_t>& in,
                                               const std::string& path) {
  z_stream zs{};
  // 15+32: accept both zlib and gzip wrappers.
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw IoError("inflateInit failed");
  std::vector<std::uint8_t> out;
  out.reserve(in.size() * 4);
  std::uint8_t buf[1 << 16];
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw IoError("corrupt gzip stream in " + path);
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
  } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw IoError("truncated gzip stream in " + path);
  return out;
}

std::vector<std::uint8_t> read_file_maybe_gz(const std::string& path) {
  auto bytes = read_file(path);
  if (looks_gzipped(bytes)) return inflate_bytes(bytes, path);
  return bytes;
}

void write_file(const std::string& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed: " + path);
}

void write_file_gz(const std::string& path, const void* data, std::size_t n) {
  z_stream zs{};
  // 15+16: gzip wrapper.
  if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw IoError("deflateInit failed");
  gz_header hdr{};
  hdr.time = 0;
  hdr.os = 3;  // unix, fixed for reproducible bytes
  deflateSetHeader(&zs, &hdr);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    deflateEnd(&zs);
    throw IoError("cannot open file for writing: " + path);
  }
  zs.next_in = const_cast<Bytef*>(static_cast<const Bytef*>(data));
  zs.avail_in = static_cast<uInt>(n);
  std::uint8_t buf[1 << 16];
  int rc = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = deflate(&zs, Z_FINISH);
    out.write(reinterpret_cast<const char*>(buf),
              static_cast<std::streamsize>(sizeof(buf) - zs.avail_out));
  } while (rc != Z_STREAM_END);
  deflateEnd(&zs);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace autonet::detail
