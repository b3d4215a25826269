#include "terraid/heightfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "terraid/rng.hpp"

namespace terraid {

namespace {

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

std::uint64_t avalanche(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic lattice value in [-1, 1) from integer coordinates.
double lattice_value(std::uint64_t seed, int octave, std::int64_t ix,
                     std::int64_t iz) {
  std::uint64_t h = seed + 0x9e3779b97f4a7c15ull * (octave + 1ull);
  h = avalanche(h ^ (static_cast<std::uint64_t>(ix) * 0xd1b54a32d192ed03ull));
  h = avalanche(h ^ (static_cast<std::uint64_t>(iz) * 0x8cb92ba72f3d8dd7ull));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

double value_noise(std::uint64_t seed, int octave, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const auto iu = static_cast<std::int64_t>(fu);
  const auto iv = static_cast<std::int64_t>(fv);
  const double tu = smoothstep(u - fu);
  const double tv = smoothstep(v - fv);
  const double v00 = lattice_value(seed, octave, iu, iv);
  const double v10 = lattice_value(seed, octave, iu + 1, iv);
  const double v01 = lattice_value(seed, octave, iu, iv + 1);
  const double v11 = lattice_value(seed, octave, iu + 1, iv + 1);
  const double a = v00 + (v10 - v00) * tu;
  const double b = v01 + (v11 - v01) * tu;
  return a + (b - a) * tv;
}

/// Multi-octave value noise normalized to [-1, 1].
double fbm(std::uint64_t seed, double x, double z, double base_wavelength,
           int octaves, double persistence) {
  double sum = 0.0;
  double norm = 0.0;
  double amp = 1.0;
  double freq = 1.0 / base_wavelength;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(seed, o, x * freq, z * freq);
    norm += amp;
    amp *= persistence;
    freq *= 2.0;
  }
  return sum / norm;
}

/// 0 exactly inside the padded flat rect, 1 exactly inside the rough rect,
/// smooth in between.
double blend_weight(const HeightfieldParams& p, double x, double z) {
  const double df =
      std::max(0.0, p.flat_rect.distance_to(x, z) - p.flat_margin);
  if (df == 0.0) return 0.0;
  const double dr = p.rough_rect.distance_to(x, z);
  if (dr == 0.0) return 1.0;
  return smoothstep(df / (df + dr));
}

}  // namespace

const char* to_string(Area area) {
  switch (area) {
    case Area::kFlat:
      return "flat";
    case Area::kRough:
      return "rough";
    default:
      return "neither";
  }
}

Area area_from_string(const std::string& name) {
  if (name == "flat") return Area::kFlat;
  if (name == "rough") return Area::kRough;
  if (name == "neither") return Area::kNeither;
  throw std::invalid_argument("unknown area label: " + name);
}

double AreaRect::distance_to(double x, double z) const {
  const double dx = std::max({x_min - x, 0.0, x - x_max});
  const double dz = std::max({z_min - z, 0.0, z - z_max});
  return std::sqrt(dx * dx + dz * dz);
}

void AreaRect::validate(const char* name) const {
  if (!(x_min < x_max) || !(z_min < z_max)) {
    throw std::invalid_argument(std::string(name) +
                                ": rectangle bounds must be ordered");
  }
}

bool rects_disjoint(const AreaRect& a, const AreaRect& b) {
  return a.x_max < b.x_min || b.x_max < a.x_min || a.z_max < b.z_min ||
         b.z_max < a.z_min;
}

Area area_of(const AreaRect& flat_rect, const AreaRect& rough_rect, double x,
             double z) {
  if (flat_rect.contains(x, z)) return Area::kFlat;
  if (rough_rect.contains(x, z)) return Area::kRough;
  return Area::kNeither;
}

void HeightfieldParams::validate() const {
  flat_rect.validate("flat_rect");
  rough_rect.validate("rough_rect");
  if (!rects_disjoint(flat_rect, rough_rect)) {
    throw std::invalid_argument("flat and rough rects overlap");
  }
  AreaRect padded{flat_rect.x_min - flat_margin, flat_rect.x_max + flat_margin,
                  flat_rect.z_min - flat_margin,
                  flat_rect.z_max + flat_margin};
  if (!rects_disjoint(padded, rough_rect)) {
    throw std::invalid_argument("flat margin reaches into the rough rect");
  }
  if (roughness_scale < 0.0 || roughness_scale > 1.0) {
    throw std::invalid_argument("roughness_scale must be in [0, 1]");
  }
  if (!(amplitude > 0.0)) throw std::invalid_argument("amplitude must be > 0");
  if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be > 0");
  if (!(base_wavelength > 0.0) || octaves < 1 || !(persistence > 0.0)) {
    throw std::invalid_argument("invalid noise parameters");
  }
}

Heightfield Heightfield::generate(const HeightfieldParams& params,
                                  std::uint64_t seed) {
  params.validate();
  const AreaRect& f = params.flat_rect;
  const AreaRect& r = params.rough_rect;
  const double x0 = std::min(f.x_min, r.x_min) - params.extent_pad;
  const double x1 = std::max(f.x_max, r.x_max) + params.extent_pad;
  const double z0 = std::min(f.z_min, r.z_min) - params.extent_pad;
  const double z1 = std::max(f.z_max, r.z_max) + params.extent_pad;
  const int nx =
      static_cast<int>(std::ceil((x1 - x0) / params.cell_size)) + 1;
  const int nz =
      static_cast<int>(std::ceil((z1 - z0) / params.cell_size)) + 1;

  std::vector<double> heights(static_cast<size_t>(nx) * nz,
                              params.base_height);
  const double peak = params.amplitude * params.roughness_scale;
  if (peak > 0.0) {
    for (int iz = 0; iz < nz; ++iz) {
      const double z = z0 + iz * params.cell_size;
      for (int ix = 0; ix < nx; ++ix) {
        const double x = x0 + ix * params.cell_size;
        const double w = blend_weight(params, x, z);
        if (w == 0.0) continue;
        heights[static_cast<size_t>(iz) * nx + ix] =
            params.base_height + peak * w *
                                     fbm(seed, x, z, params.base_wavelength,
                                         params.octaves, params.persistence);
      }
    }
  }
  return Heightfield(params, seed, nx, nz, x0, z0, std::move(heights));
}

Heightfield::Heightfield(HeightfieldParams params, std::uint64_t seed, int nx,
                         int nz, double x0, double z0,
                         std::vector<double> heights)
    : params_(params), seed_(seed), nx_(nx), nz_(nz), x0_(x0), z0_(z0),
      heights_(std::move(heights)) {
  if (nx_ < 2 || nz_ < 2) throw std::invalid_argument("grid too small");
  if (heights_.size() != static_cast<size_t>(nx_) * nz_) {
    throw std::invalid_argument("grid size mismatch");
  }
}

double Heightfield::height_at(double x, double z) const {
  if (!in_extent(x, z)) {
    throw std::domain_error("height query outside field extent");
  }
  const double gx = (x - x0_) / params_.cell_size;
  const double gz = (z - z0_) / params_.cell_size;
  int ix = std::min(static_cast<int>(gx), nx_ - 2);
  int iz = std::min(static_cast<int>(gz), nz_ - 2);
  ix = std::max(ix, 0);
  iz = std::max(iz, 0);
  const double fx = gx - ix;
  const double fz = gz - iz;
  const double h00 = heights_[index(ix, iz)];
  const double h10 = heights_[index(ix + 1, iz)];
  const double h01 = heights_[index(ix, iz + 1)];
  const double h11 = heights_[index(ix + 1, iz + 1)];
  const double a = h00 + (h10 - h00) * fx;
  const double b = h01 + (h11 - h01) * fx;
  return a + (b - a) * fz;
}

namespace {

nlohmann::json rect_to_json(const AreaRect& r) {
  return nlohmann::json{{"x_min", r.x_min},
                        {"x_max", r.x_max},
                        {"z_min", r.z_min},
                        {"z_max", r.z_max}};
}

AreaRect rect_from_json(const nlohmann::json& j) {
  return AreaRect{j.at("x_min").get<double>(), j.at("x_max").get<double>(),
                  j.at("z_min").get<double>(), j.at("z_max").get<double>()};
}

}  // namespace

void Heightfield::save(const std::string& path) const {
  nlohmann::json header{
      {"format", "terraid-heightfield"},
      {"version", 1},
      {"nx", nx_},
      {"nz", nz_},
      {"x0", x0_},
      {"z0", z0_},
      {"cell_size", params_.cell_size},
      {"seed", seed_},
      {"roughness_scale", params_.roughness_scale},
      {"amplitude", params_.amplitude},
      {"base_height", params_.base_height},
      {"flat_margin", params_.flat_margin},
      {"extent_pad", params_.extent_pad},
      {"base_wavelength", params_.base_wavelength},
      {"octaves", params_.octaves},
      {"persistence", params_.persistence},
      {"flat_rect", rect_to_json(params_.flat_rect)},
      {"rough_rect", rect_to_json(params_.rough_rect)},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(heights_.data()),
            static_cast<std::streamsize>(heights_.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Heightfield Heightfield::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("missing heightfield header: " + path);
  }
  const nlohmann::json header = nlohmann::json::parse(line);
  if (header.at("format").get<std::string>() != "terraid-heightfield") {
    throw std::runtime_error("not a heightfield file: " + path);
  }
  HeightfieldParams params;
  params.cell_size = header.at("cell_size").get<double>();
  params.roughness_scale = header.at("roughness_scale").get<double>();
  params.amplitude = header.at("amplitude").get<double>();
  params.base_height = header.at("base_height").get<double>();
  params.flat_margin = header.at("flat_margin").get<double>();
  params.extent_pad = header.at("extent_pad").get<double>();
  params.base_wavelength = header.at("base_wavelength").get<double>();
  params.octaves = header.at("octaves").get<int>();
  params.persistence = header.at("persistence").get<double>();
  params.flat_rect = rect_from_json(header.at("flat_rect"));
  params.rough_rect = rect_from_json(header.at("rough_rect"));
  const int nx = header.at("nx").get<int>();
  const int nz = header.at("nz").get<int>();
  std::vector<double> heights(static_cast<size_t>(nx) * nz);
  in.read(reinterpret_cast<char*>(heights.data()),
          static_cast<std::streamsize>(heights.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(heights.size() * sizeof(double))) {
    throw std::runtime_error("truncated heightfield body: " + path);
  }
  return Heightfield(params, header.at("seed").get<std::uint64_t>(), nx, nz,
                     header.at("x0").get<double>(),
                     header.at("z0").get<double>(), std::move(heights));
}

}  // namespace terraid
