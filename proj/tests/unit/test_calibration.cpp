#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "froq/calibration.hpp"
#include "froq/error.hpp"
#include "froq/hash.hpp"
#include "froq/stats.hpp"
#include "oracles.hpp"
#include "synth_faces.hpp"
#include "test_support.hpp"

namespace froq {
namespace {

using testing::expect_kind;

LayerScoreMatrix make_matrix(const std::vector<std::vector<double>>& columns) {
  std::vector<std::string> taps, images;
  for (std::size_t l = 0; l < columns.size(); ++l) taps.push_back("t" + std::to_string(l));
  for (std::size_t i = 0; i < columns.front().size(); ++i) images.push_back("img" + std::to_string(i));
  std::vector<double> values;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (const auto& c : columns) values.push_back(c[i]);
  }
  return LayerScoreMatrix(taps, images, values);
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

TEST(Matrix, LayoutAndSelection) {
  const auto m = make_matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 2u);
  EXPECT_EQ(m.at(2, 1), 6.0);
  EXPECT_EQ(m.column(0), (std::vector<double>{1, 2, 3}));
  const std::vector<std::size_t> pick{1};
  EXPECT_EQ(m.select_columns(pick).column(0), (std::vector<double>{4, 5, 6}));
  expect_kind(ErrorKind::kShape, [] { LayerScoreMatrix({"a"}, {"x", "y"}, {1.0}); });
}

TEST(LayerCorrelations, PerfectAndReversed) {
  std::mt19937_64 rng(1);
  const auto labels = random_vector(rng, 30);
  std::vector<double> negated(labels);
  for (auto& v : negated) v = -v;
  const auto m = make_matrix({labels, negated});
  const auto c = layer_correlations(m, labels);
  ASSERT_EQ(c.taps.size(), 2u);
  EXPECT_DOUBLE_EQ(c.taps[0].correlation, 1.0);
  EXPECT_DOUBLE_EQ(c.taps[1].correlation, -1.0);
}

TEST(LayerCorrelations, ColumnwiseOracle) {
  std::mt19937_64 rng(2);
  std::vector<std::vector<double>> columns;
  for (int l = 0; l < 10; ++l) columns.push_back(random_vector(rng, 200));
  const auto labels = random_vector(rng, 200);
  const auto c = layer_correlations(make_matrix(columns), labels);
  ASSERT_EQ(c.taps.size(), 10u);
  for (std::size_t l = 0; l < 10; ++l) {
    EXPECT_NEAR(c.taps[l].correlation, *oracle::spearman(labels, columns[l]), 1e-12);
    EXPECT_EQ(c.taps[l].column, l);
  }
}

TEST(LayerCorrelations, ConstantColumnExcludedWithWarning) {
  std::mt19937_64 rng(3);
  const auto labels = random_vector(rng, 20);
  const auto c = layer_correlations(make_matrix({random_vector(rng, 20), std::vector<double>(20, 4.0)}),
                                    labels);
  ASSERT_EQ(c.taps.size(), 1u);
  EXPECT_EQ(c.taps[0].tap, "t0");
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("t1"), std::string::npos);
}

TEST(LayerCorrelations, AlignmentByImageId) {
  const auto m = make_matrix({{1, 2, 3}});
  PseudoLabelSet labels;
  labels.entries = {{"img2", 0.1}, {"img0", 0.3}, {"img1", 0.2}, {"extra", 0.9}};
  const auto c = layer_correlations(m, labels);
  EXPECT_DOUBLE_EQ(c.taps[0].correlation, -1.0);
  labels.entries.erase(labels.entries.begin());
  expect_kind(ErrorKind::kAlignment, [&] { layer_correlations(m, labels); });
  expect_kind(ErrorKind::kAlignment,
              [&] { layer_correlations(m, std::vector<double>{1.0, 2.0}); });
}

TEST(TopB, OrderAndTies) {
  const std::vector<TapCorrelation> c{{"a", 0, 0.5}, {"b", 1, 0.9}, {"c", 2, 0.5}, {"d", 3, 0.1}};
  const auto top = top_b(c, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].tap, "b");
  EXPECT_EQ(top[1].tap, "a");
  EXPECT_EQ(top[2].tap, "c");
  EXPECT_EQ(top_b(c, 10).size(), 4u);
}

TEST(Greedy, PerfectSingleLayerDominates) {
  std::mt19937_64 rng(4);
  const auto labels = random_vector(rng, 50);
  std::vector<std::vector<double>> columns{random_vector(rng, 50), labels, random_vector(rng, 50)};
  const auto report = greedy_select(make_matrix(columns), labels, 3);
  EXPECT_EQ(report.selected, (std::vector<std::string>{"t1"}));
  EXPECT_EQ(report.selected_correlation, 1.0);
}

TEST(Greedy, PairBeatsEitherColumn) {
  // labels = a + b; each column carries one half plus a residual that the
  // other column cancels.
  std::mt19937_64 rng(5);
  const std::size_t n = 200;
  const auto a = random_vector(rng, n);
  const auto b = random_vector(rng, n);
  const auto r = random_vector(rng, n);
  std::vector<double> labels(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = a[i] + b[i];
    x[i] = a[i] + r[i];
    y[i] = b[i] - r[i];
  }
  const auto report = greedy_select(make_matrix({x, y, random_vector(rng, n)}), labels, 3);
  EXPECT_EQ(report.selected.size(), 2u);
  double best_single = -1;
  for (const auto& t : report.per_tap) best_single = std::max(best_single, t.correlation);
  EXPECT_GT(report.selected_correlation, best_single);
  EXPECT_DOUBLE_EQ(report.selected_correlation, 1.0);
}

TEST(Greedy, BudgetForTenCandidates) {
  std::mt19937_64 rng(6);
  std::vector<std::vector<double>> columns;
  for (int l = 0; l < 14; ++l) columns.push_back(random_vector(rng, 60));
  const auto labels = random_vector(rng, 60);
  const auto report = greedy_select(make_matrix(columns), labels, 10);
  EXPECT_EQ(report.top_b.size(), 10u);
  EXPECT_EQ(report.greedy_trace.size(), 55u);
  EXPECT_EQ(report.prefix_correlations.size(), 10u);
  EXPECT_GE(report.selected.size(), 1u);
  EXPECT_LE(report.selected.size(), 10u);
  EXPECT_GE(report.selected_correlation, report.prefix_correlations.front());
}

TEST(Greedy, MatchesStepByStepOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> columns;
    for (int l = 0; l < 8; ++l) columns.push_back(random_vector(rng, 40));
    const auto labels = random_vector(rng, 40);
    const std::size_t b = 1 + trial % 6;
    const auto m = make_matrix(columns);
    const auto report = greedy_select(m, labels, b);
    const auto expected = oracle::greedy(columns, labels, b);
    ASSERT_EQ(report.greedy_trace.size(), expected.trace.size());
    for (std::size_t k = 0; k < expected.trace.size(); ++k) {
      std::vector<std::string> names;
      for (auto c : expected.trace[k].set) names.push_back(m.taps()[c]);
      EXPECT_EQ(report.greedy_trace[k].step, expected.trace[k].step);
      EXPECT_EQ(report.greedy_trace[k].candidate, names);
      EXPECT_EQ(report.greedy_trace[k].correlation, expected.trace[k].correlation);
    }
    std::vector<std::string> selected;
    for (auto c : expected.selected) selected.push_back(m.taps()[c]);
    EXPECT_EQ(report.selected, selected);
  }
}

TEST(Greedy, InvariantToMonotoneLabelTransform) {
  std::mt19937_64 rng(8);
  std::vector<std::vector<double>> columns;
  for (int l = 0; l < 6; ++l) columns.push_back(random_vector(rng, 50));
  const auto labels = random_vector(rng, 50);
  std::vector<double> transformed(labels);
  for (auto& v : transformed) v = std::exp(2.0 * v) + 3.0;
  const auto m = make_matrix(columns);
  const auto a = greedy_select(m, labels, 4);
  const auto b = greedy_select(m, transformed, 4);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.selected_correlation, b.selected_correlation);
}

TEST(Greedy, TiesPreferEarlierColumns) {
  // Identical columns tie everywhere; the earliest must win each time.
  std::mt19937_64 rng(9);
  const auto labels = random_vector(rng, 30);
  const auto col = random_vector(rng, 30);
  const auto report = greedy_select(make_matrix({col, col, col}), labels, 3);
  EXPECT_EQ(report.top_b, (std::vector<std::string>{"t0", "t1", "t2"}));
  EXPECT_EQ(report.selected, (std::vector<std::string>{"t0"}));
}

TEST(Greedy, MinMaxScalingEqualizesScales) {
  // One layer has a huge scale and weak signal; raw averaging lets it
  // dominate, min-max scaling does not.
  std::mt19937_64 rng(10);
  const std::size_t n = 300;
  const auto a = random_vector(rng, n);
  const auto b = random_vector(rng, n);
  const auto noise = random_vector(rng, n);
  std::vector<double> labels(n), strong(n), loud(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = a[i] + b[i];
    strong[i] = 10.0 + a[i];
    loud[i] = 1e6 + 1e5 * (b[i] + 2.0 * noise[i]);
  }
  const auto m = make_matrix({strong, loud});
  const auto raw = greedy_select(m, labels, 2, JointScaling::kRaw);
  const auto scaled = greedy_select(m, labels, 2, JointScaling::kMinMax);
  EXPECT_GT(scaled.prefix_correlations[1], raw.prefix_correlations[1]);
}

TEST(Greedy, Errors) {
  const auto m = make_matrix({{1, 2, 3}, {5, 5, 5}});
  expect_kind(ErrorKind::kInvalidParameter,
              [&] { greedy_select(m, std::vector<double>{1, 2, 3}, 0); });
  const auto flat = make_matrix({{5, 5, 5}});
  expect_kind(ErrorKind::kDegenerateInput,
              [&] { greedy_select(flat, std::vector<double>{1, 2, 3}, 2); });
}

TEST(LayerScan, StubNonFiniteTapExcluded) {
  const std::vector<TapPoint> taps{{"good", "Relu", {}}, {"bad", "Div", {}}};
  testing::StubSession session(testing::stub_manifest(4), taps, [](const Tensor& x) {
    ForwardResult r;
    r.embedding = {1.0f};
    r.tapped.emplace("good", Tensor({1, 2}, {x.data()[0], 2.0f}));
    r.tapped.emplace("bad", Tensor({1}, {x.data()[0] > 0.5f ? INFINITY : 1.0f}));
    return r;
  });
  const auto dir = testing::scratch_dir("scan_nonfinite");
  std::vector<std::string> paths;
  for (int i = 0; i < 4; ++i) {
    paths.push_back((dir / ("p" + std::to_string(i) + ".png")).string());
    save_png(Image(4, 4, 0.25f * i), paths.back());
  }
  const auto scan = layer_scan(session, paths);
  EXPECT_EQ(scan.matrix.taps(), (std::vector<std::string>{"good"}));
  EXPECT_EQ(scan.matrix.rows(), 4u);
  ASSERT_EQ(scan.warnings.size(), 1u);
  EXPECT_NE(scan.warnings[0].find("bad"), std::string::npos);
  EXPECT_EQ(session.pass_count(), 4u);
}

class TinyCalibration : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::filesystem::path(testing::scratch_dir("tiny_calibration"));
    faces_ = new synth::SynthOutput(synth::generate_faces(*dir_ / "faces"));
  }
  static void TearDownTestSuite() {
    delete faces_;
    delete dir_;
  }
  static std::filesystem::path* dir_;
  static synth::SynthOutput* faces_;
};
std::filesystem::path* TinyCalibration::dir_ = nullptr;
synth::SynthOutput* TinyCalibration::faces_ = nullptr;

TEST_F(TinyCalibration, ScanMatchesPerImageRuns) {
  const auto all = tap_ids(list_taps(testing::tiny_model(), "embedding"));
  const auto session = load_model(testing::tiny_model(), all);
  const std::vector<std::string> three(faces_->images.begin(), faces_->images.begin() + 3);
  const auto scan = layer_scan(*session, three, 2);
  EXPECT_EQ(session->pass_count(), 3u);
  ASSERT_EQ(scan.matrix.cols(), all.size());
  for (std::size_t i = 0; i < 3; ++i) {
    const auto result = session->run(load_and_preprocess(three[i], session->manifest()));
    for (std::size_t l = 0; l < all.size(); ++l) {
      EXPECT_EQ(scan.matrix.at(i, l), aggregate(result.tapped.at(all[l])));
    }
  }
}

TEST_F(TinyCalibration, ScanValuesMatchReferenceNorms) {
  const auto reference = testing::load_reference_dump();
  const auto all = tap_ids(list_taps(testing::tiny_model(), "embedding"));
  const auto session = load_model(testing::tiny_model(), all);
  const auto result = session->run(testing::probe_input());
  for (const auto& id : all) {
    const auto& ref = reference.at(id);
    const double expected = oracle::l2_norm({ref.data().begin(), ref.data().end()});
    EXPECT_NEAR(aggregate(result.tapped.at(id)), expected, 1e-4 * expected) << id;
  }
}

TEST_F(TinyCalibration, EndToEndConfigShapeAndDeterminism) {
  const auto all = tap_ids(list_taps(testing::tiny_model(), "embedding"));
  const auto session = load_model(testing::tiny_model(), all);
  const auto labels = pseudo_label_set(*session, faces_->images, AuxParams{}, 4).labels;
  CalibrationOptions options;
  options.created = "2024-01-01T00:00:00Z";
  options.label_file_hash = sha256_hex(serialize_labels(labels));
  options.threads = 4;
  const auto first = calibrate(*session, faces_->images, labels, options);
  EXPECT_GE(first.config.taps.size(), 1u);
  EXPECT_LE(first.config.taps.size(), options.b);
  EXPECT_EQ(first.config.meta.n, 30u);
  EXPECT_EQ(first.config.meta.b, 10u);
  EXPECT_EQ(first.config.model_identity, session->model_identity());
  ASSERT_TRUE(first.config.normalization);
  EXPECT_EQ(first.config.normalization->size(), first.config.taps.size());
  EXPECT_TRUE(first.report.warnings.empty());
  EXPECT_LE(first.report.greedy_trace.size(), 55u);

  options.threads = 1;
  const auto second = calibrate(*session, faces_->images, labels, options);
  EXPECT_EQ(serialize_config(first.config), serialize_config(second.config));
  EXPECT_EQ(format_report(first.report), format_report(second.report));

  options.b = 1;
  EXPECT_EQ(calibrate(*session, faces_->images, labels, options).config.taps.size(), 1u);
}

TEST_F(TinyCalibration, RejectsLabelsFromAnotherModel) {
  const auto all = tap_ids(list_taps(testing::tiny_model(), "embedding"));
  const auto session = load_model(testing::tiny_model(), all);
  PseudoLabelSet labels;
  labels.model_identity = "0000";
  for (std::size_t i = 0; i < faces_->images.size(); ++i) {
    labels.entries.push_back({faces_->images[i], static_cast<double>(i % 7) / 7.0});
  }
  CalibrationOptions options;
  expect_kind(ErrorKind::kCompatibility,
              [&] { calibrate(*session, faces_->images, labels, options); });
  options.force = true;
  EXPECT_NO_THROW(calibrate(*session, faces_->images, labels, options));
}

TEST(Report, ContainsAllSections) {
  std::mt19937_64 rng(11);
  std::vector<std::vector<double>> columns;
  for (int l = 0; l < 4; ++l) columns.push_back(random_vector(rng, 20));
  const auto report = greedy_select(make_matrix(columns), random_vector(rng, 20), 3);
  const auto text = format_report(report);
  for (const char* section : {"per-tap", "top-b", "greedy trace", "prefix", "selected"}) {
    EXPECT_NE(text.find(section), std::string::npos) << section;
  }
}

}  // namespace
}  // namespace froq
