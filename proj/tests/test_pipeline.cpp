#include "support.hpp"

#include <glyphforge/error.hpp>
#include <glyphforge/fixtures.hpp>
#include <glyphforge/pipeline.hpp>

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace glyphforge;
namespace fs = std::filesystem;

namespace {

// Fixtures are rendered once per process; each test copies what it needs.
const fs::path& fixture_root() {
  static testing::TempDir dir("pipeline_fixtures");
  static const bool made = [] {
    make_fixtures(testing::dataset_dir(), dir.path());
    return true;
  }();
  (void)made;
  return dir.path();
}

PipelineConfig font_config(const fs::path& work, const std::string& font = "slant") {
  fs::copy(fixture_root() / font, work, fs::copy_options::recursive);
  PipelineConfig cfg = load_config(work / "pipeline.conf");
  cfg.jobs = 4;
  return cfg;
}

void write_list(const fs::path& p, const std::vector<std::string>& labels) {
  std::ofstream out(p);
  for (const auto& l : labels) out << l << "\n";
}

PipelineConfig small_config(const fs::path& work) {
  PipelineConfig cfg = font_config(work);
  write_list(cfg.sample_list, {"U+5341", "U+4EBA", "U+53E3", "U+5927", "U+6728"});
  cfg.targets = parse_codepoint_list("U+5341 U+4E09 U+4E0A U+5DE5 U+738B");
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("end-to-end run on a small sample list") {
  testing::TempDir dir("pipe_small");
  const PipelineConfig cfg = small_config(dir / "slant");
  std::ostringstream log;
  const StageResult r = cmd_pipeline(cfg, log);
  const std::string report = slurp(cfg.report);
  for (const char* s : {"== selection ==", "== extraction ==", "== generation ==", "== evaluation =="})
    CHECK(report.find(s) != std::string::npos);

  const AssetStore store = read_asset_store(cfg.store_dir);
  std::size_t strokes = 0;
  for (const StoredSample& s : store.samples) strokes += s.glyph.size();
  CHECK(store.samples.size() == 5);
  CHECK(store.stroke_count() == strokes);
  for (const StoredSample& s : store.samples)
    for (std::size_t k = 0; k < s.glyph.size(); ++k)
      CHECK(fs::exists(cfg.store_dir / "assets" / (asset_id(s.glyph.codepoint, int(k)) + ".png")));

  const fs::path out = font_output_dir(cfg);
  for (char32_t cp : cfg.targets) CHECK(fs::exists(out / (codepoint_label(cp) + ".png")));
  CHECK(fs::exists(out / "eval.csv"));
  CHECK(fs::exists(out / "recognition.csv"));
  CHECK(report.find(dir.path().string()) == std::string::npos);

  SUBCASE("rerun reuses every stage and leaves outputs untouched") {
    const std::string before = slurp(out / "U+4E09.png") + slurp(cfg.store_dir / "manifest.txt");
    std::ostringstream log2;
    CHECK(cmd_extract(cfg, read_codepoint_file(cfg.sample_list), log2).reused);
    CHECK(cmd_generate(cfg, log2).reused);
    cmd_pipeline(cfg, log2);
    CHECK(slurp(out / "U+4E09.png") + slurp(cfg.store_dir / "manifest.txt") == before);
    CHECK(slurp(cfg.report) == report);
  }
  SUBCASE("a fresh run is byte identical, whatever the thread count") {
    testing::TempDir other("pipe_small2");
    PipelineConfig cfg2 = small_config(other / "slant");
    cfg2.jobs = 1;
    std::ostringstream log2;
    cmd_pipeline(cfg2, log2);
    const fs::path out2 = font_output_dir(cfg2);
    for (char32_t cp : cfg.targets) {
      const std::string name = codepoint_label(cp) + ".png";
      CHECK(slurp(out / name) == slurp(out2 / name));
    }
    CHECK(slurp(cfg.store_dir / "manifest.txt") == slurp(cfg2.store_dir / "manifest.txt"));
    CHECK(slurp(cfg.report) == slurp(cfg2.report));
  }
  SUBCASE("changing a parameter invalidates the store") {
    PipelineConfig changed = cfg;
    changed.gamma = 0.3;
    std::ostringstream log2;
    CHECK_FALSE(cmd_extract(changed, read_codepoint_file(cfg.sample_list), log2).reused);
  }
}

TEST_CASE("extraction input errors") {
  testing::TempDir dir("pipe_errors");
  PipelineConfig cfg = small_config(dir / "slant");
  const std::vector<char32_t> subset = read_codepoint_file(cfg.sample_list);
  std::ostringstream log;
  SUBCASE("corrupt image") {
    std::ofstream(cfg.samples_dir / "U+4EBA.png", std::ios::trunc) << "not a png";
    const std::string msg = error_text([&] { cmd_extract(cfg, subset, log); });
    CHECK(msg.find("U+4EBA.png") != std::string::npos);
  }
  SUBCASE("missing adjusted glyph") {
    fs::remove(cfg.adjusted_dir / "U+53E3.gd");
    const std::string msg = error_text([&] { cmd_extract(cfg, subset, log); });
    CHECK(msg.find("no adjusted glyph for U+53E3") != std::string::npos);
  }
  SUBCASE("wrong canvas") {
    cfg.canvas = 300;
    const std::string msg = error_text([&] { cmd_extract(cfg, subset, log); });
    CHECK(msg.find("expected 300x300") != std::string::npos);
  }
  SUBCASE("empty sample directory") {
    fs::remove_all(cfg.samples_dir);
    fs::remove_all(cfg.adjusted_dir);
    fs::create_directories(cfg.samples_dir);
    fs::create_directories(cfg.adjusted_dir);
    CHECK_THROWS_AS(cmd_extract(cfg, {}, log), DataError);
  }
}

TEST_CASE("generation needs a populated store") {
  const Dataset dataset = load_dataset(testing::dataset_dir());
  PipelineConfig cfg;
  const std::string msg = error_text([&] { build_generator(AssetStore{}, dataset, cfg); });
  CHECK(msg.find("asset store is empty") != std::string::npos);
  testing::TempDir dir("pipe_nostore");
  cfg.store_dir = dir / "store";
  cfg.dataset_dir = testing::dataset_dir();
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_generate(cfg, log), DataError);
}

TEST_CASE("invalid configuration is rejected before any work") {
  testing::TempDir dir("pipe_badcfg");
  PipelineConfig cfg = small_config(dir / "slant");
  cfg.k = 0;
  std::ostringstream log;
  const std::string msg = error_text([&] { cmd_pipeline(cfg, log); });
  CHECK(msg.find("'k'") != std::string::npos);
  CHECK_FALSE(fs::exists(cfg.store_dir));
}

TEST_CASE("selection feeds extraction") {
  testing::TempDir dir("pipe_select");
  PipelineConfig cfg = small_config(dir / "slant");
  cfg.skip_selection = false;
  cfg.k = 3;
  cfg.ga_generations = 30;
  cfg.truth_dir.clear();
  std::ostringstream log;
  cmd_pipeline(cfg, log);
  const std::vector<char32_t> chosen = read_codepoint_file(cfg.output_dir / "selection.txt");
  CHECK(chosen.size() == 3);
  const AssetStore store = read_asset_store(cfg.store_dir);
  REQUIRE(store.samples.size() == 3);
  std::vector<char32_t> stored;
  for (const StoredSample& s : store.samples) stored.push_back(s.glyph.codepoint);
  std::sort(stored.begin(), stored.end());
  std::vector<char32_t> sorted = chosen;
  std::sort(sorted.begin(), sorted.end());
  CHECK(stored == sorted);
  CHECK(slurp(cfg.report).find("skipped: no truth_dir") != std::string::npos);
  const std::string trace = slurp(cfg.output_dir / "selection_trace.csv");
  CHECK(trace.rfind("gen,best_energy,mean_energy\n", 0) == 0);
  std::ostringstream log2;
  CHECK(cmd_select(cfg, log2).stage.reused);
}

TEST_CASE("self reconstruction picks each sample's own strokes") {
  testing::TempDir dir("pipe_self");
  PipelineConfig cfg = font_config(dir / "slant");
  std::ostringstream log;
  cmd_extract(cfg, read_codepoint_file(cfg.sample_list), log);
  const AssetStore store = read_asset_store(cfg.store_dir);
  const Dataset dataset = load_dataset(cfg.dataset_dir);
  const Generator gen = build_generator(store, dataset, cfg);
  std::size_t total = 0, own = 0;
  for (const StoredSample& s : store.samples) {
    const GeneratedGlyph g = generate_glyph(gen, dataset.at(s.glyph.codepoint), cfg);
    for (std::size_t k = 0; k < g.asset_ids.size(); ++k) {
      ++total;
      own += g.asset_ids[k] == asset_id(s.glyph.codepoint, static_cast<int>(k));
    }
  }
  const double rate = double(own) / double(total);
  INFO("own strokes chosen " << own << " of " << total);
  CHECK(rate >= 0.9);
}
