#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swiss/core_math.hpp"
#include "swiss/losses.hpp"

namespace swiss {

struct Domain {
  std::string name;
  Matrix samples;                 // n x input_dim
  std::optional<Labels> labels;   // absent for unlabeled exports

  std::size_t size() const { return samples.rows(); }
  std::size_t input_dim() const { return samples.cols(); }
  /// max label + 1, or 0 when unlabeled.
  std::size_t num_classes() const;
  void validate() const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

/// Affine shift of a domain relative to the base blobs.
///
/// A base sample of class c is b = center_c + blob_std * z. The shifted sample
/// is s = R(rotation) (skew_c * center_c + noise_scale * blob_std * z) + translation,
/// and the emitted sample is (1 - blend) * b + blend * s. With blend = 1 the
/// transform applies fully; blend = 0.5 lands every sample halfway.
struct DomainTransform {
  std::string name;
  double rotation_deg = 0.0;
  std::size_t rotation_plane_a = 0;
  std::size_t rotation_plane_b = 1;
  Vector translation;  // empty means zero
  double noise_scale = 1.0;
  Vector class_skew;   // per-class radial scale, empty means all 1
  double blend = 1.0;

  /// The transform scaled by alpha in every parameter (alpha = 0 is the
  /// identity), realised through `blend`.
  DomainTransform interpolated(double alpha, std::string new_name) const;
};

struct SyntheticSpec {
  std::size_t num_classes = 6;
  std::size_t input_dim = 8;
  std::size_t samples_per_class = 120;
  double center_radius = 6.0;
  double blob_std = 1.0;
  std::uint64_t seed = 0;
  std::vector<DomainTransform> domains;

  void validate() const;
};

/// Rotation of `v` by `angle_deg` in the plane of axes (a, b).
Vector rotate(std::span<const double> v, double angle_deg, std::size_t a, std::size_t b);

/// Class centers on a circle in the rotation-free plane (axes 0, 1).
Matrix class_centers(const SyntheticSpec& spec);

/// One labeled domain per transform, samples ordered by class. The base noise
/// draws are shared by all domains so that transforms are directly comparable.
std::vector<Domain> generate(const SyntheticSpec& spec);

struct BetweenGeometry {
  Domain source;
  Domain mid;
  Domain far;
};

/// Source (identity), far (the given transform), and mid (the far transform
/// at 50%), so mid sits between source and far in input space.
BetweenGeometry make_between_geometry(SyntheticSpec spec, const DomainTransform& far);

void save_csv(const Domain& domain, const std::filesystem::path& path);
/// Name defaults to the file stem. Throws ParseError naming the line on bad rows.
Domain load_csv(const std::filesystem::path& path);

/// The spec shared by tests, examples and the CLI defaults: k = 6, 8 inputs,
/// 120 samples per class, a source and one shifted target.
SyntheticSpec standard_shift_spec(std::uint64_t seed);
DomainTransform standard_target_transform(std::size_t input_dim, std::size_t num_classes);

}  // namespace swiss
