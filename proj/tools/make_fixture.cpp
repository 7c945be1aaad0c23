// Writes the committed fixture bundles used by the test suite and the
// quick-start documentation.
#include <filesystem>
#include <iostream>

#include "hetsign/data.hpp"
#include "hetsign/fixtures.hpp"

int main(int argc, char** argv) {
  std::filesystem::path out = argc > 1 ? argv[1] : "data/fixtures";
  try {
    hetsign::DatasetBundle tiny = hetsign::make_citation_bundle(hetsign::tiny_fixture_config());
    hetsign::save_bundle(tiny, out / "tiny");
    std::cout << "wrote " << (out / "tiny").string() << ": n=" << tiny.manifest.n
              << " pairs=" << tiny.manifest.m_pairs << " F=" << tiny.manifest.features
              << " C=" << tiny.manifest.classes << "\n";
  } catch (const std::exception& err) {
    std::cerr << "make_fixture: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
