#include <glyphforge/adjust_server.hpp>
#include <glyphforge/config.hpp>
#include <glyphforge/error.hpp>
#include <glyphforge/fixtures.hpp>
#include <glyphforge/pipeline.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

namespace fs = std::filesystem;
using namespace glyphforge;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

AdjustServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

PipelineConfig build_config(const Common& c) {
  PipelineConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  if (cfg.dataset_dir.empty()) cfg.dataset_dir = fs::path(GLYPHFORGE_DATA_DIR) / "dataset";
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1), fs::current_path());
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.jobs) cfg.jobs = *c.jobs;
  validate_config(cfg);
  return cfg;
}

void print_report(const StageResult& r) {
  for (const auto& line : r.report) std::cout << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glyphforge: extrapolate a font from a few handwritten sample glyphs"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "key = value configuration file");
    sub->add_option("--set", common.overrides, "override a configuration field (key=value)");
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--jobs", common.jobs, "worker threads");
  };

  auto* extract = app.add_subcommand("extract", "extract and restore stroke images into an asset store");
  add_common(extract);
  auto* generate = app.add_subcommand("generate", "generate target glyphs from an asset store");
  add_common(generate);
  auto* select = app.add_subcommand("select-samples", "choose sample characters with the genetic search");
  add_common(select);
  std::optional<double> alpha;
  std::optional<int> k;
  select->add_option("--alpha", alpha, "weight of the coverage term");
  select->add_option("--k", k, "number of sample characters");
  auto* eval = app.add_subcommand("eval", "chamfer and recognition scores of generated glyphs");
  add_common(eval);
  auto* pipeline = app.add_subcommand("pipeline", "selection, extraction, generation and evaluation");
  add_common(pipeline);
  bool skip_selection = false;
  pipeline->add_flag("--skip-selection", skip_selection, "use the configured sample list");

  auto* serve = app.add_subcommand("serve", "run the skeleton adjustment HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string dataset_dir = (fs::path(GLYPHFORGE_DATA_DIR) / "dataset").string();
  std::string adjusted_dir = "adjusted";
  std::string snapshot_dir;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--dataset", dataset_dir, "dataset glyph directory");
  serve->add_option("--adjusted", adjusted_dir, "where committed glyphs are written");
  serve->add_option("--snapshots", snapshot_dir, "session snapshot directory");

  auto* fixtures = app.add_subcommand("make-fixtures", "render the synthetic fixture fonts");
  std::string fixture_out = "fixtures";
  int canvas = 500;
  fixtures->add_option("--dataset", dataset_dir, "dataset glyph directory");
  fixtures->add_option("--out", fixture_out, "output directory");
  fixtures->add_option("--canvas", canvas, "image size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*fixtures) {
      make_fixtures(dataset_dir, fixture_out, canvas);
      std::cout << "fixtures written to " << fixture_out << "\n";
    } else if (*serve) {
      AdjustService service(load_dataset(dataset_dir), adjusted_dir, snapshot_dir);
      const std::size_t restored = service.load_snapshots();
      AdjustServer server(service);
      const int bound = server.bind(host, port);
      if (bound < 0) throw UsageError("cannot bind " + host + ":" + std::to_string(port));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving on http://" << host << ":" << bound << " (" << restored << " sessions restored)\n";
      server.serve();
    } else {
      PipelineConfig cfg = build_config(common);
      if (*extract) {
        std::vector<char32_t> subset;
        if (!cfg.sample_list.empty()) subset = read_codepoint_file(cfg.sample_list);
        print_report(cmd_extract(cfg, subset, std::cerr));
      } else if (*generate) {
        print_report(cmd_generate(cfg, std::cerr));
      } else if (*select) {
        if (alpha) cfg.alpha_selection = *alpha;
        if (k) cfg.k = *k;
        validate_config(cfg);
        const SelectionOutcome out = cmd_select(cfg, std::cerr);
        for (char32_t cp : out.chosen) std::cout << codepoint_label(cp) << "\n";
      } else if (*eval) {
        print_report(cmd_eval(cfg, std::cerr));
      } else if (*pipeline) {
        if (skip_selection) cfg.skip_selection = true;
        cmd_pipeline(cfg, std::cerr);
        std::cout << "report written to " << cfg.report.string() << "\n";
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
