#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Deterministic cartoon-face generator used to produce calibration and
// evaluation data for the bundled test model. Each identity has a fixed set
// of facial proportions and colors; every identity is rendered clean, blurred
// and noise-degraded.
namespace froq::synth {

struct SynthOptions {
  int identities = 10;
  int size = 112;
  std::uint64_t seed = 7;
};

struct SynthOutput {
  std::vector<std::string> images;  // every written image, identity-major
  std::filesystem::path list_file;  // one image path per line
  std::filesystem::path pairs_file; // verification protocol over `images`
};

/// Writes `<dir>/idNN_{clean,blurred,noisy}.png`, `<dir>/images.txt` and
/// `<dir>/pairs.tsv`. Image ids in the list and pairs files are the path
/// strings `<dir>/<name>` exactly as formed from `dir`. Identical options
/// produce identical bytes.
SynthOutput generate_faces(const std::filesystem::path& dir, const SynthOptions& options = {});

}  // namespace froq::synth
