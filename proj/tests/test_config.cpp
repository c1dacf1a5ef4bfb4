#include "support.hpp"

#include <glyphforge/config.hpp>
#include <glyphforge/error.hpp>

#include <doctest.h>

#include <fstream>

using namespace glyphforge;

namespace {

std::string usage_message(const std::string& text) {
  try {
    PipelineConfig c;
    apply_config_text(c, text);
    validate_config(c);
  } catch (const UsageError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults validate") {
  const PipelineConfig c;
  CHECK_NOTHROW(validate_config(c));
  CHECK(c.k == 15);
  CHECK(c.alpha_selection == 0.6);
  CHECK(c.ga_population == 170);
  CHECK_FALSE(c.variance().has_value());
}

TEST_CASE("key = value text") {
  PipelineConfig c;
  apply_config_text(c,
                    "# comment\n"
                    "[selection]\n"
                    "k = 5\n"
                    "alpha_selection = 0.8   # trailing\n"
                    "font = \"my font # not a comment\"\n"
                    "v_policy = 9\n"
                    "per_stroke_affine = yes\n"
                    "targets = U+5341, U+4EBA 大\n"
                    "output_dir = out\n",
                    "/base");
  CHECK(c.k == 5);
  CHECK(c.alpha_selection == 0.8);
  CHECK(c.font == "my font # not a comment");
  CHECK(c.variance() == 9.0);
  CHECK(c.per_stroke_affine);
  CHECK(c.targets == std::vector<char32_t>{0x5341, 0x4EBA, 0x5927});
  CHECK(c.output_dir == std::filesystem::path("/base/out"));
}

TEST_CASE("errors name the field") {
  CHECK(usage_message("k = 0").find("'k'") != std::string::npos);
  CHECK(usage_message("alpha_selection = 1.5").find("alpha_selection") != std::string::npos);
  CHECK(usage_message("gamma = abc").find("gamma") != std::string::npos);
  CHECK(usage_message("v_policy = -2").find("v_policy") != std::string::npos);
  CHECK(usage_message("bogus = 1").find("bogus") != std::string::npos);
  CHECK(usage_message("just a line").find("line 1") != std::string::npos);
  CHECK(usage_message("per_stroke_affine = maybe").find("per_stroke_affine") != std::string::npos);
  CHECK(usage_message("eval_size = 600").find("eval_size") != std::string::npos);
}

TEST_CASE("load_config resolves paths against the file") {
  testing::TempDir dir("config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "dataset_dir = data\nstore_dir = /abs/store\nseed = 7\n";
  }
  const PipelineConfig c = load_config(dir / "run.cfg");
  CHECK(c.dataset_dir == dir.path() / "data");
  CHECK(c.store_dir == std::filesystem::path("/abs/store"));
  CHECK(c.seed == 7u);
  CHECK_THROWS_AS(load_config(dir / "missing.cfg"), UsageError);
}

TEST_CASE("codepoint lists") {
  CHECK(parse_codepoint_list("U+53E3,U+65E5") == std::vector<char32_t>{0x53E3, 0x65E5});
  CHECK(parse_codepoint_list("十人") == std::vector<char32_t>{0x5341, 0x4EBA});
  CHECK(parse_codepoint_list("  ").empty());
  CHECK_THROWS_AS(utf8_decode("\xff"), DataError);
  CHECK_THROWS_AS(utf8_decode("\xe5\x8d"), DataError);
}
