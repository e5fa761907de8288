#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "swiss/datasets.hpp"
#include "swiss/error.hpp"

using namespace swiss;
namespace fs = std::filesystem;

namespace {

Vector class_mean(const Domain& d, std::size_t cls) {
  Vector m(d.input_dim(), 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if ((*d.labels)[i] != cls) continue;
    for (std::size_t c = 0; c < m.size(); ++c) m[c] += d.samples(i, c);
    ++n;
  }
  for (double& x : m) x /= static_cast<double>(n);
  return m;
}

double euclid(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "swiss_dataset_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Generate, IdentityTransformCopiesSource) {
  SyntheticSpec spec;
  spec.domains = {DomainTransform{"a"}, DomainTransform{"b"}};
  const auto d = generate(spec);
  EXPECT_EQ(d[0].samples, d[1].samples);
  EXPECT_EQ(d[0].labels, d[1].labels);
}

TEST(Generate, TranslationShiftsClassMeans) {
  SyntheticSpec spec;
  DomainTransform moved{"moved"};
  moved.translation = Vector(spec.input_dim, 0.0);
  moved.translation[3] = 1.5;
  moved.translation[0] = -2.0;
  spec.domains = {DomainTransform{"base"}, moved};
  const auto d = generate(spec);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const Vector a = class_mean(d[0], c), b = class_mean(d[1], c);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(b[k] - a[k], moved.translation[k], 1e-12);
  }
}

TEST(Generate, RotationInverts) {
  SyntheticSpec spec;
  spec.domains = {DomainTransform{"base"}};
  const Domain d = generate(spec)[0];
  for (std::size_t i = 0; i < d.size(); i += 37) {
    const Vector back = rotate(rotate(d.samples.row(i), 35.0, 0, 2), -35.0, 0, 2);
    for (std::size_t k = 0; k < back.size(); ++k) EXPECT_NEAR(back[k], d.samples(i, k), 1e-12);
  }
}

TEST(Generate, BalancedAndDeterministic) {
  const SyntheticSpec spec = standard_shift_spec(3);
  const auto a = generate(spec);
  const auto b = generate(spec);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a, b);
  for (const auto& d : a) {
    std::vector<std::size_t> counts(spec.num_classes, 0);
    for (auto y : *d.labels) ++counts[y];
    for (auto n : counts) EXPECT_EQ(n, spec.samples_per_class);
  }
  EXPECT_NE(generate(standard_shift_spec(4))[0], a[0]);
}

TEST(Generate, RejectsBadSpec) {
  SyntheticSpec spec;
  spec.num_classes = 1;
  spec.domains = {DomainTransform{"a"}};
  EXPECT_ANY_THROW(generate(spec));
  spec.num_classes = 3;
  spec.domains[0].noise_scale = -1.0;
  EXPECT_ANY_THROW(generate(spec));
}

TEST(BetweenGeometry, MidIsMidpointAndCloser) {
  const SyntheticSpec spec = standard_shift_spec(1);
  const auto g = make_between_geometry(spec, standard_target_transform(spec.input_dim, spec.num_classes));
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const Vector s = class_mean(g.source, c), m = class_mean(g.mid, c), f = class_mean(g.far, c);
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_NEAR(m[k], 0.5 * (s[k] + f[k]), 1e-12);
    EXPECT_LT(euclid(s, m), euclid(s, f));
  }
}

TEST(Csv, RoundTripExact) {
  Domain d = generate(standard_shift_spec(2))[1];
  d.name = "round";
  const fs::path p = scratch("round.csv");
  save_csv(d, p);
  EXPECT_EQ(load_csv(p), d);
}

TEST(Csv, UnlabeledExportAndMissingColumn) {
  Domain d;
  d.name = "u";
  d.samples = Matrix{{0.1, 1e-300}, {-3.0, 2.5}};
  const fs::path p = scratch("u.csv");
  save_csv(d, p);
  EXPECT_EQ(load_csv(p).samples, d.samples);
  EXPECT_FALSE(load_csv(p).labels);

  const fs::path q = scratch("nolabel.csv");
  std::ofstream(q) << "f0,f1\n1.5,2\n3,4\n";
  const Domain nl = load_csv(q);
  EXPECT_FALSE(nl.labels);
  EXPECT_EQ(nl.samples, (Matrix{{1.5, 2.0}, {3.0, 4.0}}));
}

TEST(Csv, MalformedRowNamesLine) {
  const fs::path p = scratch("bad.csv");
  std::ofstream(p) << "label,f0,f1\n0,1,2\n1,3\n";
  try {
    load_csv(p);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}
