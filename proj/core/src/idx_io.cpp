#include "fyvi/idx_io.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "fyvi/errors.hpp"

namespace fyvi {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  if (bytes.size() < offset + 4) throw FormatError("truncated IDX header", bytes.size());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

void check_magic(std::uint32_t found, std::uint32_t expected) {
  if (found != expected) {
    throw FormatError("bad IDX magic " + std::to_string(found) + ", expected " + std::to_string(expected), 0);
  }
}

void check_payload(const std::vector<std::uint8_t>& bytes, std::size_t header, std::size_t payload) {
  if (bytes.size() < header + payload) throw FormatError("truncated IDX payload", bytes.size());
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  check_magic(read_be32(bytes, 0), kIdxImageMagic);
  IdxImages out;
  out.count = read_be32(bytes, 4);
  out.rows = read_be32(bytes, 8);
  out.cols = read_be32(bytes, 12);
  const std::size_t payload = out.count * out.rows * out.cols;
  check_payload(bytes, 16, payload);
  out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
  return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  check_magic(read_be32(bytes, 0), kIdxLabelMagic);
  const std::size_t count = read_be32(bytes, 4);
  check_payload(bytes, 8, count);
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

IdxDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                    std::size_t limit) {
  const IdxImages images = read_idx_images(images_path);
  const std::vector<std::uint8_t> labels = read_idx_labels(labels_path);
  if (labels.size() != images.count) {
    throw std::runtime_error("IDX image count " + std::to_string(images.count) + " does not match label count " +
                             std::to_string(labels.size()));
  }
  const std::size_t n = std::min(limit, images.count);
  const std::size_t d = images.rows * images.cols;
  IdxDataset out;
  out.images.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out.images(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = images.pixels[i * d + j] / 255.0;
    }
    out.labels[i] = labels[i];
  }
  return out;
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols) {
    throw std::invalid_argument("pixel buffer does not match the declared shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(images.count));
  put_be32(out, static_cast<std::uint32_t>(images.rows));
  put_be32(out, static_cast<std::uint32_t>(images.cols));
  out.write(reinterpret_cast<const char*>(images.pixels.data()), static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

}  // namespace fyvi
