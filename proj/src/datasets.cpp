#include "swiss/datasets.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "swiss/error.hpp"
#include "swiss/rng.hpp"

namespace swiss {

std::size_t Domain::num_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

void Domain::validate() const {
  if (labels && labels->size() != samples.rows()) {
    throw InvalidInputError("domain '" + name + "': label count != sample count");
  }
  if (!samples.all_finite()) throw InvalidInputError("domain '" + name + "': non-finite sample");
}

DomainTransform DomainTransform::interpolated(double alpha, std::string new_name) const {
  DomainTransform t = *this;
  t.name = std::move(new_name);
  t.blend = blend * alpha;
  return t;
}

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw InvalidInputError("synthetic spec: num_classes must be >= 2");
  if (input_dim < 2) throw InvalidInputError("synthetic spec: input_dim must be >= 2");
  if (samples_per_class < 1) throw InvalidInputError("synthetic spec: samples_per_class must be >= 1");
  if (!(blob_std >= 0.0)) throw InvalidInputError("synthetic spec: blob_std must be >= 0");
  if (domains.empty()) throw InvalidInputError("synthetic spec: no domains");
  for (const auto& d : domains) {
    if (!(d.noise_scale >= 0.0)) throw InvalidInputError("domain '" + d.name + "': noise_scale < 0");
    if (!d.translation.empty() && d.translation.size() != input_dim) {
      throw InvalidInputError("domain '" + d.name + "': translation length != input_dim");
    }
    if (!d.class_skew.empty() && d.class_skew.size() != num_classes) {
      throw InvalidInputError("domain '" + d.name + "': class_skew length != num_classes");
    }
    if (d.rotation_plane_a >= input_dim || d.rotation_plane_b >= input_dim ||
        d.rotation_plane_a == d.rotation_plane_b) {
      throw InvalidInputError("domain '" + d.name + "': invalid rotation plane");
    }
  }
}

Vector rotate(std::span<const double> v, double angle_deg, std::size_t a, std::size_t b) {
  if (a >= v.size() || b >= v.size() || a == b) throw InvalidInputError("rotate: invalid plane");
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Vector out(v.begin(), v.end());
  out[a] = c * v[a] - s * v[b];
  out[b] = s * v[a] + c * v[b];
  return out;
}

Matrix class_centers(const SyntheticSpec& spec) {
  Matrix centers(spec.num_classes, spec.input_dim);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(spec.num_classes);
    centers(c, 0) = spec.center_radius * std::cos(angle);
    centers(c, 1) = spec.center_radius * std::sin(angle);
  }
  return centers;
}

std::vector<Domain> generate(const SyntheticSpec& spec) {
  spec.validate();
  const Matrix centers = class_centers(spec);
  const std::size_t n = spec.num_classes * spec.samples_per_class;

  Rng rng(spec.seed);
  Matrix noise(n, spec.input_dim);
  for (double& z : noise.data()) z = rng.normal();

  std::vector<Domain> domains;
  for (const auto& t : spec.domains) {
    Domain d{t.name, Matrix(n, spec.input_dim), Labels(n)};
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t cls = i / spec.samples_per_class;
      const double skew = t.class_skew.empty() ? 1.0 : t.class_skew[cls];
      Vector base(spec.input_dim);
      Vector shifted(spec.input_dim);
      for (std::size_t c = 0; c < spec.input_dim; ++c) {
        base[c] = centers(cls, c) + spec.blob_std * noise(i, c);
        shifted[c] = skew * centers(cls, c) + t.noise_scale * spec.blob_std * noise(i, c);
      }
      if (t.rotation_deg != 0.0) {
        shifted = rotate(shifted, t.rotation_deg, t.rotation_plane_a, t.rotation_plane_b);
      }
      if (!t.translation.empty()) {
        for (std::size_t c = 0; c < spec.input_dim; ++c) shifted[c] += t.translation[c];
      }
      auto row = d.samples.row(i);
      if (t.blend == 1.0) {
        std::copy(shifted.begin(), shifted.end(), row.begin());
      } else {
        for (std::size_t c = 0; c < spec.input_dim; ++c) {
          row[c] = (1.0 - t.blend) * base[c] + t.blend * shifted[c];
        }
      }
      (*d.labels)[i] = cls;
    }
    domains.push_back(std::move(d));
  }
  return domains;
}

BetweenGeometry make_between_geometry(SyntheticSpec spec, const DomainTransform& far) {
  DomainTransform source;
  source.name = "source";
  spec.domains = {source, far.interpolated(0.5, far.name + "_mid"), far};
  auto domains = generate(spec);
  return {std::move(domains[0]), std::move(domains[1]), std::move(domains[2])};
}

void save_csv(const Domain& domain, const std::filesystem::path& path) {
  domain.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open '" + path.string() + "' for writing");
  out << "label";
  for (std::size_t c = 0; c < domain.input_dim(); ++c) out << ",f" << c;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain.labels) {
      out << (*domain.labels)[i];
    } else {
      out << '?';
    }
    for (double x : domain.samples.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw InvalidInputError("write failed for '" + path.string() + "'");
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& why) {
  throw ParseError(path.string() + " line " + std::to_string(line) + ": " + why);
}

}  // namespace

Domain load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  const bool has_label_column = !header.empty() && header.front() == "label";
  const std::size_t first_feature = has_label_column ? 1 : 0;
  const std::size_t dim = header.size() - first_feature;
  if (dim == 0) fail(path, 1, "no feature columns");
  for (std::size_t c = 0; c < dim; ++c) {
    if (header[first_feature + c] != "f" + std::to_string(c)) {
      fail(path, 1, "expected column 'f" + std::to_string(c) + "'");
    }
  }

  Domain domain;
  domain.name = path.stem().string();
  domain.samples = Matrix(0, dim);
  Labels labels;
  std::size_t labeled = 0;
  std::size_t unlabeled = 0;
  std::size_t line_no = 1;
  Vector row(dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      fail(path, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
    }
    if (has_label_column) {
      const auto f = fields[0];
      if (f == "?") {
        ++unlabeled;
        labels.push_back(0);
      } else {
        std::size_t y = 0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), y);
        if (ec != std::errc() || ptr != f.data() + f.size()) fail(path, line_no, "bad label");
        ++labeled;
        labels.push_back(y);
      }
    }
    for (std::size_t c = 0; c < dim; ++c) {
      const auto f = fields[first_feature + c];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(row[c])) {
        fail(path, line_no, "bad number in column f" + std::to_string(c));
      }
    }
    domain.samples.append_row(row);
  }
  if (labeled > 0 && unlabeled > 0) fail(path, line_no, "mix of labeled and '?' rows");
  if (labeled > 0) domain.labels = std::move(labels);
  return domain;
}

DomainTransform standard_target_transform(std::size_t input_dim, std::size_t num_classes) {
  DomainTransform t;
  t.name = "target";
  t.rotation_deg = 35.0;
  // Rotating out of the class plane tilts the circle instead of permuting
  // the classes around it.
  t.rotation_plane_a = 0;
  t.rotation_plane_b = 2;
  t.translation.assign(input_dim, 0.0);
  t.translation[0] = 2.0;
  t.translation[1] = -0.5;
  t.noise_scale = 1.3;
  t.class_skew.assign(num_classes, 1.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    t.class_skew[c] = 0.85 + 0.3 * static_cast<double>(c) / static_cast<double>(num_classes - 1);
  }
  return t;
}

SyntheticSpec standard_shift_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  DomainTransform source;
  source.name = "source";
  spec.domains = {source, standard_target_transform(spec.input_dim, spec.num_classes)};
  return spec;
}

}  // namespace swiss
