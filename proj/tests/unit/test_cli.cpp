#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "froq/auxiliary.hpp"
#include "froq/error.hpp"
#include "froq/eval.hpp"
#include "froq/formats.hpp"
#include "froq/hash.hpp"
#include "froq/observer.hpp"
#include "json.hpp"
#include "synth_faces.hpp"
#include "test_support.hpp"

namespace froq {
namespace {

namespace fs = std::filesystem;

std::string quote(const std::string& s) { return "'" + s + "'"; }

/// Runs the CLI with `args`, returning its exit status. stdout goes to
/// `stdout_file` when given, stderr is discarded.
int froq_cli(const std::string& args, const fs::path& stdout_file = {}) {
  std::string command = quote(FROQ_CLI_PATH) + " " + args;
  command += stdout_file.empty() ? " >/dev/null" : " >" + quote(stdout_file.string());
  command += " 2>/dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string model_arg() { return "--model " + quote(testing::tiny_model().string()); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::scratch_dir("cli"));
    synth::SynthOptions options;
    options.identities = 4;
    faces_ = new synth::SynthOutput(synth::generate_faces(*dir_ / "faces", options));
  }
  static void TearDownTestSuite() {
    delete faces_;
    delete dir_;
  }
  static fs::path* dir_;
  static synth::SynthOutput* faces_;
};
fs::path* Cli::dir_ = nullptr;
synth::SynthOutput* Cli::faces_ = nullptr;

TEST_F(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(froq_cli("--help"), 0);
  EXPECT_EQ(froq_cli(""), 2);
  EXPECT_EQ(froq_cli("frobnicate"), 2);
  EXPECT_EQ(froq_cli("inspect --model " + quote((*dir_ / "missing.onnx").string())), 2);
  EXPECT_EQ(froq_cli("pseudo-label " + model_arg() + " --images " +
                     quote(faces_->list_file.string()) + " --alpha 3"),
            2);
  EXPECT_EQ(froq_cli("pseudo-label " + model_arg() + " --images " +
                     quote(faces_->list_file.string()) + " --occlusion-size 15"),
            2);
}

TEST_F(Cli, InspectTsvFeedsCalibrateTapsFile) {
  const auto taps = *dir_ / "taps.tsv";
  ASSERT_EQ(froq_cli("inspect " + model_arg() + " --format tsv", taps), 0);
  const std::string listing = read_file(taps);
  const auto rows = text::lines(listing);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0].substr(0, 15), "# froq-taps v1 ");
  EXPECT_EQ(rows[1], "conv1\tConv\t1x8x56x56");
  EXPECT_EQ(rows.size(), 1u + 13u);
  EXPECT_EQ(froq_cli("inspect " + model_arg()), 0);

  const auto labels = *dir_ / "labels.tsv";
  ASSERT_EQ(froq_cli("pseudo-label " + model_arg() + " --images " +
                     quote(faces_->list_file.string()) + " --out " + quote(labels.string())),
            0);
  EXPECT_TRUE(fs::exists(labels.string() + ".run.json"));

  const auto config = *dir_ / "observer.json";
  ASSERT_EQ(froq_cli("calibrate " + model_arg() + " --images " + quote(faces_->list_file.string()) +
                     " --labels " + quote(labels.string()) + " --taps-file " +
                     quote(taps.string()) + " --created 2024-01-01T00:00:00Z --out " +
                     quote(config.string())),
            0);
  const auto parsed = load_config(config);
  EXPECT_GE(parsed.taps.size(), 1u);
  EXPECT_EQ(parsed.meta.created, "2024-01-01T00:00:00Z");
  EXPECT_EQ(parsed.meta.label_file_hash, sha256_file(labels));
  EXPECT_TRUE(fs::exists(config.string() + ".report.txt"));

  const auto scores = *dir_ / "scores.tsv";
  ASSERT_EQ(froq_cli("score " + model_arg() + " --config " + quote(config.string()) +
                     " --images " + quote(faces_->list_file.string()) + " --out " +
                     quote(scores.string())),
            0);
  EXPECT_EQ(load_scores(scores).entries.size(), faces_->images.size());
  EXPECT_EQ(load_scores(scores).observer_hash, config_hash(parsed));

  const auto manifest = nlohmann::json::parse(read_file(scores.string() + ".run.json"));
  EXPECT_EQ(manifest["forward_passes"].get<std::size_t>(), faces_->images.size());

  const auto summary = *dir_ / "pauc.json";
  const auto edc = *dir_ / "edc.csv";
  ASSERT_EQ(froq_cli("evaluate " + model_arg() + " --scores " + quote(scores.string()) +
                     " --pairs " + quote(faces_->pairs_file.string()) + " --fmr 0.01 --edc-out " +
                     quote(edc.string()) + " --out " + quote(summary.string())),
            0);
  EXPECT_EQ(load_edc_csv(edc).size(), 101u);
  const auto doc = nlohmann::json::parse(read_file(summary));
  EXPECT_TRUE(doc.contains("pauc"));

  // A config that names a tap the model does not have.
  auto broken = parsed;
  broken.taps = {"relu_4"};
  broken.normalization.reset();
  broken.meta.joint_scaling = JointScaling::kRaw;
  save_config(broken, *dir_ / "broken.json");
  EXPECT_EQ(froq_cli("score " + model_arg() + " --config " + quote((*dir_ / "broken.json").string()) +
                     " --images " + quote(faces_->list_file.string())),
            2);

  // Config from an unknown future version.
  std::string future = read_file(config);
  future.replace(future.find("\"v1\""), 4, "\"v999\"");
  write_file(*dir_ / "future.json", future);
  EXPECT_EQ(froq_cli("score " + model_arg() + " --config " + quote((*dir_ / "future.json").string()) +
                     " --images " + quote(faces_->list_file.string())),
            2);
}

TEST_F(Cli, DegenerateEvaluationExitsWithThree) {
  // Mated pairs are identical and non-mated pairs orthogonal, so FNMR is 0
  // before any discarding and there is nothing for pAUC to normalize by.
  EmbeddingStore store;
  store.model_identity = "m";
  store.entries = {{"a1", {1, 0}}, {"a2", {1, 0}}, {"b1", {0, 1}}, {"b2", {0, 1}}};
  save_embeddings(store, *dir_ / "emb.txt");
  PairProtocol protocol;
  protocol.pairs = {{"a1", "a2", true}, {"b1", "b2", true}, {"a1", "b1", false}, {"a2", "b2", false}};
  save_pairs(protocol, *dir_ / "pairs.tsv");
  ScoreSet scores;
  scores.observer_hash = "x";
  scores.entries = {{"a1", 1}, {"a2", 2}, {"b1", 3}, {"b2", 4}};
  save_scores(scores, *dir_ / "q.tsv");
  EXPECT_EQ(froq_cli("evaluate --embeddings " + quote((*dir_ / "emb.txt").string()) + " --pairs " +
                     quote((*dir_ / "pairs.tsv").string()) + " --scores " +
                     quote((*dir_ / "q.tsv").string()) + " --fmr 0.5"),
            3);

  // A quality file that misses protocol images is an input error.
  scores.entries.pop_back();
  save_scores(scores, *dir_ / "q_short.tsv");
  EXPECT_EQ(froq_cli("evaluate --embeddings " + quote((*dir_ / "emb.txt").string()) + " --pairs " +
                     quote((*dir_ / "pairs.tsv").string()) + " --scores " +
                     quote((*dir_ / "q_short.tsv").string()) + " --fmr 0.5"),
            2);
}

TEST_F(Cli, LabelsFromAnotherModelNeedForce) {
  PseudoLabelSet labels;
  labels.model_identity = std::string(64, '0');
  labels.params = AuxParams{};
  for (std::size_t i = 0; i < faces_->images.size(); ++i) {
    labels.entries.push_back({faces_->images[i], static_cast<double>(i % 5) / 5.0});
  }
  save_labels(labels, *dir_ / "foreign.tsv");
  const std::string base = "calibrate " + model_arg() + " --images " +
                           quote(faces_->list_file.string()) + " --labels " +
                           quote((*dir_ / "foreign.tsv").string()) + " --top-b 3 --out " +
                           quote((*dir_ / "foreign.json").string());
  EXPECT_EQ(froq_cli(base), 2);
  EXPECT_EQ(froq_cli(base + " --force"), 0);
}

}  // namespace
}  // namespace froq
