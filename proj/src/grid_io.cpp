#include "ocm3d/grid_io.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>

#include "ocm3d/errors.hpp"

namespace ocm3d {
namespace {

static_assert(std::endian::native == std::endian::little,
              "grid container writer assumes a little-endian host");

constexpr char kVoxelMagic[4] = {'O', 'C', 'M', 'V'};
constexpr char kHeatmapMagic[4] = {'O', 'C', 'M', 'H'};

class Writer {
 public:
  template <typename T>
  void Put(T value) {
    const auto* raw = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
  }
  void PutMagic(const char (&magic)[4]) {
    bytes_.insert(bytes_.end(), magic, magic + 4);
  }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    if (offset_ + sizeof(T) > bytes_.size()) {
      throw FormatError(fmt::format("grid container truncated at byte {}", offset_));
    }
    T value;
    std::memcpy(&value, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }
  void ExpectMagic(const char (&magic)[4]) {
    if (bytes_.size() < 4 || std::memcmp(bytes_.data(), magic, 4) != 0) {
      throw FormatError(fmt::format("bad magic, expected {}", std::string_view(magic, 4)));
    }
    offset_ = 4;
  }
  void ExpectEnd() const {
    if (offset_ != bytes_.size()) {
      throw FormatError(fmt::format("{} trailing bytes after grid payload",
                                    bytes_.size() - offset_));
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

void PutHeader(Writer& w, const char (&magic)[4], const GridSpec& spec) {
  w.PutMagic(magic);
  w.Put<std::uint8_t>(kGridFormatVersion);
  w.Put<std::uint8_t>(static_cast<std::uint8_t>(spec.mode));
  w.Put<std::uint16_t>(0);
  const GridShape s = spec.shape();
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(s.nx));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(s.ny));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(s.nz));
  for (const auto& axis : spec.boundaries) {
    for (double b : axis) w.Put<double>(b);
  }
}

GridSpec GetHeader(Reader& r, const char (&magic)[4]) {
  r.ExpectMagic(magic);
  const auto version = r.Get<std::uint8_t>();
  if (version != kGridFormatVersion) {
    throw FormatError(fmt::format("unsupported grid container version {}", version));
  }
  const auto mode = r.Get<std::uint8_t>();
  if (mode > 1) throw FormatError(fmt::format("unknown grid mode {}", mode));
  r.Get<std::uint16_t>();
  GridSpec spec;
  spec.mode = static_cast<GridMode>(mode);
  std::array<std::uint32_t, 3> n{};
  for (auto& v : n) {
    v = r.Get<std::uint32_t>();
    if (v == 0 || v > (1u << 16)) throw FormatError(fmt::format("bad grid size {}", v));
  }
  for (std::size_t axis = 0; axis < 3; ++axis) {
    spec.boundaries[axis].resize(n[axis] + 1);
    for (double& b : spec.boundaries[axis]) b = r.Get<double>();
  }
  return spec;
}

}  // namespace

std::vector<std::uint8_t> EncodeVoxelGrid(const VoxelGrid& grid) {
  Writer w;
  PutHeader(w, kVoxelMagic, grid.spec);
  for (double f : grid.features) w.Put<float>(static_cast<float>(f));
  for (std::uint32_t c : grid.counts) w.Put<std::uint32_t>(c);
  w.Put<std::uint64_t>(grid.out_of_range);
  return w.Take();
}

VoxelGrid DecodeVoxelGrid(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  VoxelGrid grid;
  grid.spec = GetHeader(r, kVoxelMagic);
  const std::size_t cells = grid.spec.shape().cells();
  grid.features.resize(cells * 3);
  for (double& f : grid.features) f = r.Get<float>();
  grid.counts.resize(cells);
  for (std::uint32_t& c : grid.counts) c = r.Get<std::uint32_t>();
  grid.out_of_range = r.Get<std::uint64_t>();
  r.ExpectEnd();
  return grid;
}

std::vector<std::uint8_t> EncodeHeatmap(const Heatmap3D& heatmap) {
  Writer w;
  PutHeader(w, kHeatmapMagic, heatmap.spec);
  for (double s : heatmap.scores) w.Put<float>(static_cast<float>(s));
  return w.Take();
}

Heatmap3D DecodeHeatmap(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Heatmap3D heatmap;
  heatmap.spec = GetHeader(r, kHeatmapMagic);
  heatmap.scores.resize(heatmap.spec.shape().cells());
  for (double& s : heatmap.scores) s = r.Get<float>();
  r.ExpectEnd();
  return heatmap;
}

std::string SummarizeVoxelGrid(const VoxelGrid& grid) {
  const GridShape s = grid.spec.shape();
  std::string out = fmt::format(
      "shape {}x{}x{}  mode {}  points {}  out-of-range {}  occupancy {:.2f}%\n", s.nx,
      s.ny, s.nz, grid.spec.mode == GridMode::kObjectAware ? "object-aware" : "point-aware",
      grid.total_count(), grid.out_of_range, 100.0 * grid.occupancy());
  constexpr const char* kAxis[] = {"x", "y", "z"};
  for (std::size_t axis = 0; axis < 3; ++axis) {
    fmt::format_to(std::back_inserter(out), "  {}:", kAxis[axis]);
    for (double b : grid.spec.boundaries[axis]) fmt::format_to(std::back_inserter(out), " {:.4f}", b);
    out += '\n';
  }
  return out;
}

}  // namespace ocm3d
