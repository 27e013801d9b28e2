// Writes the synthetic face set used for calibration and end-to-end runs:
// clean, blurred and noise-degraded renders of each identity, an image list
// and a verification pair protocol.

#include <iostream>

#include "CLI11.hpp"
#include "froq/error.hpp"
#include "synth_faces.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate deterministic synthetic face images"};
  std::string out;
  froq::synth::SynthOptions options;
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--identities", options.identities, "number of identities")->capture_default_str();
  app.add_option("--size", options.size, "image side in pixels")->capture_default_str();
  app.add_option("--seed", options.seed, "generator seed")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    const auto result = froq::synth::generate_faces(out, options);
    std::cout << result.images.size() << " images, list " << result.list_file.string()
              << ", pairs " << result.pairs_file.string() << "\n";
  } catch (const froq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return froq::exit_code_for(e.kind());
  }
  return 0;
}
