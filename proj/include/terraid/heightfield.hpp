#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace terraid {

enum class Area { kFlat, kRough, kNeither };

const char* to_string(Area area);
Area area_from_string(const std::string& name);

/// Axis-aligned rectangle on the horizontal X-Z plane.
struct AreaRect {
  double x_min = 0.0;
  double x_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;

  bool contains(double x, double z) const {
    return x >= x_min && x <= x_max && z >= z_min && z <= z_max;
  }
  /// Euclidean distance to the rectangle; zero inside.
  double distance_to(double x, double z) const;
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_z() const { return 0.5 * (z_min + z_max); }
  void validate(const char* name) const;
};

bool rects_disjoint(const AreaRect& a, const AreaRect& b);

/// Ground-truth area label for a point. Evaluation only; the classifier
/// never sees it.
Area area_of(const AreaRect& flat_rect, const AreaRect& rough_rect, double x,
             double z);

struct HeightfieldParams {
  // Area coordinates in meters; defaults are the 3.0 x 1.5 m flat patch and
  // the 1.5 x 3.5 m rough patch used throughout.
  AreaRect flat_rect{-2.5, 0.5, -1.0, 0.5};
  AreaRect rough_rect{-9.0, -7.5, 1.5, 5.0};
  double cell_size = 0.02;
  double roughness_scale = 0.8;
  double amplitude = 0.08;
  double base_height = 0.0;
  /// Padding around the flat rect that is still exactly flat, so four-point
  /// settling stays level for any robot center inside the rect.
  double flat_margin = 0.15;
  /// Extra field extent beyond the hull of both rects.
  double extent_pad = 1.0;
  double base_wavelength = 0.4;
  int octaves = 4;
  double persistence = 0.5;

  void validate() const;
};

/// Sampled terrain surface on a uniform X-Z lattice. Immutable after
/// generation; safe for concurrent readers.
class Heightfield {
 public:
  /// Generates the field from seeded multi-octave value noise. The flat rect
  /// (plus margin) is exactly base_height; the rough rect carries noise with
  /// peak-to-peak height <= 2 * amplitude * roughness_scale; the corridor
  /// between them blends smoothly.
  static Heightfield generate(const HeightfieldParams& params,
                              std::uint64_t seed);

  /// Wraps an existing grid (tests, file load).
  Heightfield(HeightfieldParams params, std::uint64_t seed, int nx, int nz,
              double x0, double z0, std::vector<double> heights);

  /// Bilinear interpolation of the four surrounding lattice samples.
  /// Throws std::domain_error outside the lattice extent.
  double height_at(double x, double z) const;

  bool in_extent(double x, double z) const {
    return x >= x0_ && x <= x1() && z >= z0_ && z <= z1();
  }

  Area area_at(double x, double z) const {
    return area_of(params_.flat_rect, params_.rough_rect, x, z);
  }

  double node(int ix, int iz) const { return heights_[index(ix, iz)]; }
  int nx() const { return nx_; }
  int nz() const { return nz_; }
  double x0() const { return x0_; }
  double z0() const { return z0_; }
  double x1() const { return x0_ + (nx_ - 1) * params_.cell_size; }
  double z1() const { return z0_ + (nz_ - 1) * params_.cell_size; }
  double cell_size() const { return params_.cell_size; }
  std::uint64_t seed() const { return seed_; }
  const HeightfieldParams& params() const { return params_; }
  const std::vector<double>& heights() const { return heights_; }

  /// Self-describing file: one JSON header line, then row-major
  /// little-endian float64 heights.
  void save(const std::string& path) const;
  static Heightfield load(const std::string& path);

 private:
  size_t index(int ix, int iz) const {
    return static_cast<size_t>(iz) * nx_ + ix;
  }

  HeightfieldParams params_;
  std::uint64_t seed_ = 0;
  int nx_ = 0;
  int nz_ = 0;
  double x0_ = 0.0;
  double z0_ = 0.0;
  std::vector<double> heights_;
};

}  // namespace terraid
