#include "autonet/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "gzio.hpp"

namespace autonet {

const char* plane_name(Plane p) {
  switch (p) {
    case Plane::axial: return "axial";
    case Plane::coronal: return "coronal";
    case Plane::sagittal: return "sagittal";
  }
  return "?";
}

Plane plane_from_name(const std::string& name) {
  if (name == "axial") return Plane::axial;
  if (name == "coronal") return Plane::coronal;
  if (name == "sagittal") return Plane::sagittal;
  throw ValidationError("unknown plane: " + name + " (expected axial|coronal|sagittal)");
}

void validate(const Volume& v) {
  const std::size_t n = static_cast<std::size_t>(v.dims[0]) * v.dims[1] * v.dims[2];
  if (v.dims[0] <= 0 || v.dims[1] <= 0 || v.dims[2] <= 0)
    throw ValidationError("volume dims must be positive");
  if (v.data.size() != n) throw ValidationError("volume data extent does not match dims");
  for (double s : v.spacing)
    if (!(s > 0.0)) throw ValidationError("volume spacing must be strictly positive");
  for (float x : v.data)
    if (!std::isfinite(x)) throw ValidationError("volume contains non-finite voxels");
}

void validate(const BinaryMask& m) {
  const std::size_t n = static_cast<std::size_t>(m.dims[0]) * m.dims[1] * m.dims[2];
  if (m.dims[0] <= 0 || m.dims[1] <= 0 || m.dims[2] <= 0)
    throw ValidationError("mask dims must be positive");
  if (m.data.size() != n) throw ValidationError("mask data extent does not match dims");
  for (double s : m.spacing)
    if (!(s > 0.0)) throw ValidationError("mask spacing must be strictly positive");
  for (std::uint8_t x : m.data)
    if (x > 1) throw ValidationError("mask voxels must be 0 or 1");
}

Volume normalize_intensity(const Volume& v) {
  Volume out = v;
  if (v.data.empty()) return out;
  const auto [mn_it, mx_it] = std::minmax_element(v.data.begin(), v.data.end());
  const float mn = *mn_it, mx = *mx_it;
  if (mx <= mn) {
    std::fill(out.data.begin(), out.data.end(), 0.0f);
    return out;
  }
  const float scale = 255.0f / (mx - mn);
  for (std::size_t i = 0; i < v.data.size(); ++i) out.data[i] = (v.data[i] - mn) * scale;
  return out;
}

double mean_intensity(const Volume& v) {
  if (v.data.empty()) throw ValidationError("mean_intensity of an empty volume");
  double s = 0.0;
  for (float x : v.data) s += x;
  return s / static_cast<double>(v.data.size());
}

// ---------------------------------------------------------------------------
// NIfTI-1

namespace {

#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1, intent_p2, intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope, scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max, cal_min;
  float slice_duration, toffset;
  std::int32_t glmax, glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code, sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4], srow_y[4], srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

constexpr std::int16_t DT_UINT8 = 2;
constexpr std::int16_t DT_INT16 = 4;
constexpr std::int16_t DT_INT32 = 8;
constexpr std::int16_t DT_FLOAT32 = 16;
constexpr std::int16_t DT_FLOAT64 = 64;

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

template <typename T>
void copy_voxels(const std::uint8_t* src, std::size_t n, std::vector<float>& dst) {
  dst.resize(n);
  const T* p = reinterpret_cast<const T*>(src);
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(p[i]);
}

LoadResult load_nifti(std::vector<std::uint8_t> bytes, const std::string& path) {
  if (bytes.size() < sizeof(Nifti1Header))
    throw IoError("file too small for a NIfTI-1 header: " + path);
  Nifti1Header hdr{};
  std::memcpy(&hdr, bytes.data(), sizeof(hdr));
  if (hdr.sizeof_hdr != 348) {
    // 0x5c010000 byte-swapped: other-endian files are not handled.
    throw IoError("unsupported datatype: not a little-endian NIfTI-1 file (" + path + ")");
  }
  if (std::strncmp(hdr.magic, "n+1", 3) != 0)
    throw IoError("unsupported datatype: NIfTI magic is not 'n+1' in " + path);

  const int ndim = hdr.dim[0];
  if (ndim < 1 || ndim > 7) throw IoError("corrupt NIfTI dim[0] in " + path);
  for (int d = 4; d <= ndim; ++d)
    if (hdr.dim[d] > 1)
      throw IoError("unsupported datatype: " + std::to_string(ndim) + "D data in " + path);
  const int nx = hdr.dim[1];
  const int ny = ndim >= 2 ? std::max<int>(hdr.dim[2], 1) : 1;
  const int nz = ndim >= 3 ? std::max<int>(hdr.dim[3], 1) : 1;
  if (nx <= 0 || ny <= 0 || nz <= 0) throw IoError("non-positive NIfTI dims in " + path);

  const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
  const std::size_t offset = static_cast<std::size_t>(hdr.vox_offset);
  if (offset < sizeof(Nifti1Header)) throw IoError("bad vox_offset in " + path);

  std::size_t elem = 0;
  switch (hdr.datatype) {
    case DT_UINT8: elem = 1; break;
    case DT_INT16: elem = 2; break;
    case DT_INT32: elem = 4; break;
    case DT_FLOAT32: elem = 4; break;
    case DT_FLOAT64: elem = 8; break;
    default:
      throw IoError("unsupported datatype: NIfTI code " + std::to_string(hdr.datatype) +
                    " in " + path);
  }
  if (bytes.size() < offset + n * elem) throw IoError("truncated NIfTI voxel data in " + path);

  LoadResult out;
  out.volume.dims = {nx, ny, nz};
  for (int d = 0; d < 3; ++d) {
    const float pd = hdr.pixdim[d + 1];
    out.volume.spacing[d] = (std::isfinite(pd) && pd > 0.0f) ? pd : 1.0;
  }

  const std::uint8_t* vox = bytes.data() + offset;
  bool integral = false;
  switch (hdr.datatype) {
    case DT_UINT8: copy_voxels<std::uint8_t>(vox, n, out.volume.data); integral = true; break;
    case DT_INT16: copy_voxels<std::int16_t>(vox, n, out.volume.data); integral = true; break;
    case DT_INT32: copy_voxels<std::int32_t>(vox, n, out.volume.data); integral = true; break;
    case DT_FLOAT32: copy_voxels<float>(vox, n, out.volume.data); break;
    case DT_FLOAT64: copy_voxels<double>(vox, n, out.volume.data); break;
  }

  const bool scaled = hdr.scl_slope != 0.0f && !(hdr.scl_slope == 1.0f && hdr.scl_inter == 0.0f);
  if (scaled) {
    for (float& x : out.volume.data) x = x * hdr.scl_slope + hdr.scl_inter;
    integral = false;
  }
  for (float x : out.volume.data)
    if (!std::isfinite(x)) throw IoError("non-finite voxels in " + path);

  if (integral) {
    bool binary = true;
    for (float x : out.volume.data)
      if (x != 0.0f && x != 1.0f) { binary = false; break; }
    if (binary) {
      BinaryMask m(nx, ny, nz, 0, out.volume.spacing);
      for (std::size_t i = 0; i < n; ++i) m.data[i] = out.volume.data[i] != 0.0f ? 1 : 0;
      out.mask = std::move(m);
    }
  }
  return out;
}

void save_nifti(const std::string& path, const std::array<int, 3>& dims,
                const std::array<double, 3>& spacing, std::int16_t datatype,
                const void* voxels, std::size_t nbytes) {
  Nifti1Header hdr{};
  hdr.sizeof_hdr = 348;
  hdr.regular = 'r';
  hdr.dim[0] = 3;
  hdr.dim[1] = static_cast<std::int16_t>(dims[0]);
  hdr.dim[2] = static_cast<std::int16_t>(dims[1]);
  hdr.dim[3] = static_cast<std::int16_t>(dims[2]);
  for (int d = 4; d < 8; ++d) hdr.dim[d] = 1;
  hdr.datatype = datatype;
  hdr.bitpix = datatype == DT_UINT8 ? 8 : 32;
  hdr.pixdim[0] = 1.0f;
  for (int d = 0; d < 3; ++d) hdr.pixdim[d + 1] = static_cast<float>(spacing[d]);
  for (int d = 4; d < 8; ++d) hdr.pixdim[d] = 1.0f;
  hdr.vox_offset = 352.0f;
  hdr.scl_slope = 1.0f;
  hdr.scl_inter = 0.0f;
  hdr.xyzt_units = 2;  // millimeters
  hdr.sform_code = 1;
  hdr.srow_x[0] = static_cast<float>(spacing[0]);
  hdr.srow_y[1] = static_cast<float>(spacing[1]);
  hdr.srow_z[2] = static_cast<float>(spacing[2]);
  std::memcpy(hdr.magic, "n+1", 4);

  std::vector<std::uint8_t> bytes(352 + nbytes, 0);
  std::memcpy(bytes.data(), &hdr, sizeof(hdr));
  std::memcpy(bytes.data() + 352, voxels, nbytes);

  if (has_suffix(path, ".gz"))
    detail::write_file_gz(path, bytes.data(), bytes.size());
  else
    detail::write_file(path, bytes.data(), bytes.size());
}

// ---------------------------------------------------------------------------
// AUTONET-RAW v1: one ASCII header line, then little-endian voxels x-fastest.

constexpr const char* kRawTag = "AUTONET-RAW";

std::string raw_header(const std::array<int, 3>& dims, const std::array<double, 3>& spacing,
                       const char* dtype) {
  std::ostringstream os;
  os.precision(17);
  os << kRawTag << " v1 " << dims[0] << ' ' << dims[1] << ' ' << dims[2] << ' ' << spacing[0]
     << ' ' << spacing[1] << ' ' << spacing[2] << ' ' << dtype << '\n';
  return os.str();
}

LoadResult load_raw(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  const auto nl = std::find(bytes.begin(), bytes.end(), std::uint8_t('\n'));
  if (nl == bytes.end()) throw IoError("missing AUTONET-RAW header line in " + path);
  const std::string header(bytes.begin(), nl);
  std::istringstream is(header);
  std::string tag, version, dtype;
  std::array<int, 3> dims{};
  std::array<double, 3> spacing{};
  is >> tag >> version >> dims[0] >> dims[1] >> dims[2] >> spacing[0] >> spacing[1] >>
      spacing[2] >> dtype;
  if (!is || tag != kRawTag) throw IoError("malformed AUTONET-RAW header in " + path);
  if (version != "v1") throw IoError("unsupported AUTONET-RAW version in " + path);
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
    throw IoError("non-positive dims in " + path);

  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  const std::uint8_t* payload = bytes.data() + (nl - bytes.begin()) + 1;
  const std::size_t avail = bytes.size() - (nl - bytes.begin()) - 1;

  LoadResult out;
  out.volume.dims = dims;
  out.volume.spacing = spacing;
  if (dtype == "f32") {
    if (avail < n * 4) throw IoError("truncated voxel data in " + path);
    copy_voxels<float>(payload, n, out.volume.data);
  } else if (dtype == "u8") {
    if (avail < n) throw IoError("truncated voxel data in " + path);
    copy_voxels<std::uint8_t>(payload, n, out.volume.data);
    bool binary = true;
    for (float x : out.volume.data)
      if (x != 0.0f && x != 1.0f) { binary = false; break; }
    if (binary) {
      BinaryMask m(dims[0], dims[1], dims[2], 0, spacing);
      for (std::size_t i = 0; i < n; ++i) m.data[i] = out.volume.data[i] != 0.0f ? 1 : 0;
      out.mask = std::move(m);
    }
  } else {
    throw IoError("unsupported datatype: '" + dtype + "' in " + path);
  }
  for (float x : out.volume.data)
    if (!std::isfinite(x)) throw IoError("non-finite voxels in " + path);
  return out;
}

}  // namespace

LoadResult load_volume(const std::string& path) {
  auto bytes = detail::read_file_maybe_gz(path);
  if (bytes.size() >= std::strlen(kRawTag) &&
      std::memcmp(bytes.data(), kRawTag, std::strlen(kRawTag)) == 0)
    return load_raw(bytes, path);
  return load_nifti(std::move(bytes), path);
}

void save_volume(const Volume& v, const std::string& path) {
  validate(v);
  if (has_suffix(path, ".raw")) {
    const std::string hdr = raw_header(v.dims, v.spacing, "f32");
    std::vector<std::uint8_t> bytes(hdr.size() + v.data.size() * 4);
    std::memcpy(bytes.data(), hdr.data(), hdr.size());
    std::memcpy(bytes.data() + hdr.size(), v.data.data(), v.data.size() * 4);
    detail::write_file(path, bytes.data(), bytes.size());
  } else if (has_suffix(path, ".nii") || has_suffix(path, ".nii.gz")) {
    save_nifti(path, v.dims, v.spacing, DT_FLOAT32, v.data.data(), v.data.size() * 4);
  } else {
    throw ValidationError("unsupported output format (want .raw, .nii or .nii.gz): " + path);
  }
}

void save_volume(const BinaryMask& m, const std::string& path) {
  validate(m);
  if (has_suffix(path, ".raw")) {
    const std::string hdr = raw_header(m.dims, m.spacing, "u8");
    std::vector<std::uint8_t> bytes(hdr.size() + m.data.size());
    std::memcpy(bytes.data(), hdr.data(), hdr.size());
    std::memcpy(bytes.data() + hdr.size(), m.data.data(), m.data.size());
    detail::write_file(path, bytes.data(), bytes.size());
  } else if (has_suffix(path, ".nii") || has_suffix(path, ".nii.gz")) {
    save_nifti(path, m.dims, m.spacing, DT_UINT8, m.data.data(), m.data.size());
  } else {
    throw ValidationError("unsupported output format (want .raw, .nii or .nii.gz): " + path);
  }
}

}  // namespace autonet
