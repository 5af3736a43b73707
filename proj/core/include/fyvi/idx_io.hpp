#ifndef FYVI_IDX_IO_HPP
#define FYVI_IDX_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace fyvi {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Raw unsigned-byte image tensor as stored in an IDX file.
struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  ///< count * rows * cols, row-major
};

/// Images and labels with pixels scaled to [0, 1]; one image per row.
struct IdxDataset {
  Eigen::MatrixXd images;
  std::vector<int> labels;
};

/// Parsers throw FormatError (with the byte offset) on a bad magic number or
/// a truncated payload.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

/// Reads both files, checks the counts agree, scales pixels by 1/255 and
/// keeps the first `limit` items.
IdxDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                    std::size_t limit = std::numeric_limits<std::size_t>::max());

void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

}  // namespace fyvi

#endif  // FYVI_IDX_IO_HPP
