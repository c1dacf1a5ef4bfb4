#include <glyphforge/pipeline.hpp>

#include <glyphforge/error.hpp>
#include <glyphforge/relations.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace glyphforge {

namespace fs = std::filesystem;

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ExtractionParams extraction_params(const PipelineConfig& cfg) {
  ExtractionParams p;
  p.beta1 = cfg.beta1;
  p.beta2 = cfg.beta2;
  p.alpha = cfg.alpha_snake;
  p.beta = cfg.beta_snake;
  p.max_iter = cfg.snake_iterations;
  p.variance = cfg.variance();
  return p;
}

RestorationParams restoration_params(const PipelineConfig& cfg) {
  RestorationParams p;
  p.gamma = cfg.gamma;
  return p;
}

std::vector<ContactPoint> restoration_contacts(const Glyph& glyph, int k, double tau, double beta2, int width,
                                               int height) {
  const CanvasMapping map = CanvasMapping::for_canvas(width, height);
  std::vector<ContactPoint> contacts;
  const auto& rel = glyph.relations.at(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < glyph.strokes.size(); ++j) {
    if (static_cast<int>(j) == k) continue;
    const Relation& r = rel[j];
    if (r.kind == RelationKind::Crossing || r.kind == RelationKind::Connected) {
      for (const Vec2& p : map.to_canvas(glyph.strokes[j]).path(1.0)) contacts.push_back({p, beta2 * tau});
    } else if (r.kind != RelationKind::Isolated && r.q) {
      contacts.push_back({*r.q, tau});
    }
  }
  return contacts;
}

namespace {

std::vector<Eigen::Matrix3Xd> canvas_samples(const Glyph& g, const CanvasMapping& map, int n) {
  std::vector<Eigen::Matrix3Xd> out;
  out.reserve(g.strokes.size());
  for (const Skeleton& sk : g.strokes) out.push_back(map.to_canvas(sk.samples(n)));
  return out;
}

}  // namespace

SampleExtraction extract_sample(const GrayImage& sample, const Glyph& adjusted, const PipelineConfig& cfg,
                                const fs::path& debug_dir) {
  const int w = sample.width(), h = sample.height();
  const std::string label = codepoint_label(adjusted.codepoint);
  SampleExtraction out;
  const TauEstimate est = estimate_tau(sample, adjusted, cfg.tau_max);
  const double tau = est.tau;
  Glyph g = adjusted;
  const CanvasMapping map = CanvasMapping::for_canvas(w, h);
  g.relations = assign_relations(canvas_samples(g, map, cfg.samples_per_skeleton), tau);
  const SegmentationMap seg = segment_pixels(sample, g);
  for (const RelationFix& fix : verify_relations(g, seg)) out.relfix.push_back(format_relfix(g, fix));
  if (est.at_upper_bound) out.notes.push_back(label + " thickness estimate at upper bound " + std::to_string(est.tau));

  const ExtractionParams params = extraction_params(cfg);
  const RestorationParams rparams = restoration_params(cfg);
  out.stored.glyph = g;
  out.stored.tau = est.tau;
  for (int k = 0; k < static_cast<int>(g.size()); ++k) {
    GrayImage mask;
    bool fallback = false;
    try {
      StrokeExtraction ex = extract_glyph_stroke(sample, g, seg, k, tau, params);
      if (!debug_dir.empty()) {
        fs::create_directories(debug_dir);
        const std::string stem = label + "_" + std::to_string(k);
        write_pgm(debug_dir / (stem + "_energy.pgm"), ex.energy.to_gray());
        write_contour_text(debug_dir / (stem + "_contour.txt"), ex.contour);
      }
      if (!ex.converged) out.notes.push_back(label + " stroke " + std::to_string(k) + " contour hit the iteration cap");
      mask = std::move(ex.mask);
    } catch (const Error& e) {
      out.notes.push_back(label + " stroke " + std::to_string(k) + " extraction failed: " + e.what());
      mask = seg.mask(k);
      fallback = true;
    }
    GrayImage restored;
    try {
      restored = restore_stroke(mask, restoration_contacts(g, k, tau, cfg.beta2, w, h), rparams);
    } catch (const Error& e) {
      out.notes.push_back(label + " stroke " + std::to_string(k) + " kept unrestored: " + e.what());
      restored = mask;
      fallback = true;
    }
    out.stored.strokes.push_back(std::move(restored));
    out.stored.fallback.push_back(fallback);
  }
  return out;
}

Dataset load_dataset(const fs::path& dir) {
  if (dir.empty()) throw UsageError("dataset_dir is not set");
  Dataset d;
  for (Glyph& g : load_glyph_dir(dir)) d.emplace(g.codepoint, std::move(g));
  if (d.empty()) throw DataError("dataset " + dir.string() + " has no glyph files");
  return d;
}

Glyph with_dataset_relations(const Glyph& g, const PipelineConfig& cfg) {
  const CanvasMapping map = CanvasMapping::for_canvas(cfg.canvas, cfg.canvas);
  Glyph out = g;
  out.relations = assign_relations(canvas_samples(g, map, cfg.samples_per_skeleton), cfg.dataset_tau * map.scale);
  return out;
}

Generator build_generator(const AssetStore& store, const Dataset& dataset, const PipelineConfig& cfg) {
  if (store.samples.empty() || store.stroke_count() == 0) throw DataError("asset store is empty");
  if (store.canvas != cfg.canvas) {
    throw DataError("asset store canvas " + std::to_string(store.canvas) + " differs from configured canvas " +
                    std::to_string(cfg.canvas));
  }
  const CanvasMapping map = CanvasMapping::for_canvas(cfg.canvas, cfg.canvas);
  const int n = cfg.samples_per_skeleton;
  Generator gen;
  std::vector<SizePair> sizes;
  std::vector<AffineSample> affine;
  for (const StoredSample& s : store.samples) {
    const std::string label = codepoint_label(s.glyph.codepoint);
    const auto it = dataset.find(s.glyph.codepoint);
    if (it == dataset.end()) throw DataError("sample " + label + " is missing from the dataset");
    if (it->second.size() != s.glyph.size()) throw DataError("sample " + label + " stroke count differs from the dataset");
    const Glyph dg = with_dataset_relations(it->second, cfg);
    const auto dsamples = canvas_samples(dg, map, n);
    const auto asamples = canvas_samples(s.glyph, map, n);
    for (std::size_t k = 0; k < s.glyph.size(); ++k) {
      StrokeAsset a;
      a.id = asset_id(s.glyph.codepoint, static_cast<int>(k));
      a.codepoint = s.glyph.codepoint;
      a.stroke = static_cast<int>(k);
      a.image = s.strokes[k];
      a.adjusted = asamples[k];
      a.dataset = dsamples[k];
      a.attributes = StrokeAttributes::of(s.glyph.strokes[k]);
      a.context = stroke_context(dg, dsamples, static_cast<int>(k));
      gen.assets.push_back(std::move(a));
    }
    const SizePair sp{samples_extent(dsamples), samples_extent(asamples)};
    if (sp.dataset.width > 0 && sp.dataset.height > 0 && sp.adjusted.width > 0 && sp.adjusted.height > 0) {
      sizes.push_back(sp);
    } else {
      gen.notes.push_back(label + " left out of size estimation (zero extent)");
    }
    AffineSample as;
    for (std::size_t k = 0; k < s.glyph.size(); ++k) {
      as.dataset.push_back(centered_dataset_samples(it->second.strokes[k], cfg.canvas, cfg.canvas, n));
    }
    as.adjusted = asamples;
    as.groups = group_skeletons(s.glyph);
    affine.push_back(std::move(as));
  }
  if (sizes.empty()) throw DataError("no sample has a usable extent for size estimation");
  gen.size_samples_used = sizes.size();
  gen.transforms.t_sz = estimate_t_sz(sizes, cfg.canvas, cfg.canvas);
  const AffineEstimate ae = estimate_t_aff(affine, gen.transforms.t_sz, cfg.per_stroke_affine);
  gen.transforms.t_aff = ae.t_aff;
  if (ae.groups_skipped) gen.notes.push_back(std::to_string(ae.groups_skipped) + " collinear groups left out of the affine average");
  return gen;
}

std::vector<TargetStroke> target_strokes(const Glyph& dataset_glyph, const TransformPair& t, const PipelineConfig& cfg) {
  const CanvasMapping map = CanvasMapping::for_canvas(cfg.canvas, cfg.canvas);
  const Glyph dg = with_dataset_relations(dataset_glyph, cfg);
  const auto dsamples = canvas_samples(dg, map, cfg.samples_per_skeleton);
  std::vector<TargetStroke> out;
  for (std::size_t k = 0; k < dg.size(); ++k) {
    TargetStroke ts;
    ts.transformed = transform_skeleton(
        centered_dataset_samples(dg.strokes[k], cfg.canvas, cfg.canvas, cfg.samples_per_skeleton), t);
    ts.dataset = dsamples[k];
    ts.attributes = StrokeAttributes::of(dg.strokes[k]);
    ts.context = stroke_context(dg, dsamples, static_cast<int>(k));
    out.push_back(std::move(ts));
  }
  return out;
}

GeneratedGlyph generate_glyph(const Generator& gen, const Glyph& dataset_glyph, const PipelineConfig& cfg) {
  GeneratedGlyph out;
  out.codepoint = dataset_glyph.codepoint;
  out.targets = target_strokes(dataset_glyph, gen.transforms, cfg);
  std::vector<const StrokeAsset*> chosen;
  for (const TargetStroke& t : out.targets) {
    const Selection s = select_stroke(t, gen.assets, cfg.lambda_attr);
    chosen.push_back(&gen.assets[s.index]);
    out.asset_ids.push_back(gen.assets[s.index].id);
    out.energies.push_back(s.energy);
  }
  ComposeResult c = compose_glyph(out.targets, chosen, cfg.canvas, cfg.canvas);
  out.image = std::move(c.image);
  out.errors = std::move(c.errors);
  return out;
}

std::vector<char32_t> read_codepoint_file(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line, text;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    text += line + "\n";
  }
  return parse_codepoint_list(text);
}

fs::path font_output_dir(const PipelineConfig& cfg) { return cfg.output_dir / cfg.font; }

namespace {

std::string hash_params(const PipelineConfig& c) {
  std::ostringstream ss;
  ss << c.samples_per_skeleton << ' ' << c.tau_max << ' ' << format_number(c.dataset_tau) << ' '
     << format_number(c.beta1) << ' ' << format_number(c.beta2) << ' ' << format_number(c.gamma) << ' '
     << format_number(c.alpha_snake) << ' ' << format_number(c.beta_snake) << ' ' << c.v_policy << ' '
     << c.snake_iterations << ' ' << format_number(c.lambda_attr) << ' ' << c.per_stroke_affine << ' '
     << c.canvas << ' ' << c.eval_size;
  return ss.str();
}

std::map<char32_t, fs::path> files_by_codepoint(const fs::path& dir, const std::set<std::string>& exts) {
  std::map<char32_t, fs::path> out;
  if (dir.empty() || !fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || !exts.count(e.path().extension().string())) continue;
    if (auto cp = parse_codepoint_label(e.path().stem().string())) out.emplace(*cp, e.path());
  }
  return out;
}

std::string join_labels(const std::vector<char32_t>& cps) {
  std::string s;
  for (char32_t cp : cps) s += (s.empty() ? "" : ", ") + codepoint_label(cp);
  return s;
}

std::string fmt(double v, int prec = 4) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "nan";
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(prec);
  ss << v;
  return ss.str();
}

std::string first_line(const fs::path& p) {
  if (!fs::exists(p)) return {};
  std::istringstream in(read_text_file(p));
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

SelectionOutcome cmd_select(const PipelineConfig& cfg, std::ostream& log) {
  SelectionOutcome out;
  const Dataset dataset = load_dataset(cfg.dataset_dir);
  ContentHash hash;
  hash.add(hash_params(cfg));
  hash.add(std::to_string(cfg.k) + " " + format_number(cfg.alpha_selection) + " " + std::to_string(cfg.seed) + " " +
           std::to_string(cfg.ga_population) + " " + std::to_string(cfg.ga_survivors) + " " +
           std::to_string(cfg.ga_offspring) + " " + format_number(cfg.ga_mutation) + " " +
           std::to_string(cfg.ga_generations) + " " + std::to_string(cfg.ga_plateau));
  for (const auto& [cp, g] : dataset) hash.add(serialize_glyph(g));
  const std::string digest = hash.hex();
  const fs::path ids_path = cfg.output_dir / "selection.txt";
  const fs::path trace_path = cfg.output_dir / "selection_trace.csv";

  std::vector<Glyph> glyphs;
  for (const auto& [cp, g] : dataset) glyphs.push_back(g);
  if (first_line(ids_path) == "# input_hash " + digest && fs::exists(trace_path)) {
    out.chosen = read_codepoint_file(ids_path);
    out.stage.reused = true;
    log << "select-samples: inputs unchanged, reusing " << ids_path.string() << "\n";
  } else {
    SelectionParams sp;
    sp.k = cfg.k;
    sp.dataset_tau = cfg.dataset_tau;
    sp.samples = cfg.samples_per_skeleton;
    sp.lambda_attr = cfg.lambda_attr;
    const SelectionProblem problem(glyphs, sp);
    GaConfig ga;
    ga.population = cfg.ga_population;
    ga.survivors = cfg.ga_survivors;
    ga.offspring = cfg.ga_offspring;
    ga.mutation_rate = cfg.ga_mutation;
    ga.max_generations = cfg.ga_generations;
    ga.plateau = cfg.ga_plateau;
    ga.seed = cfg.seed;
    const GaResult res = run_ga(problem, cfg.alpha_selection, ga);
    std::string ids = "# input_hash " + digest + "\n";
    for (int id : res.best.ids) {
      out.chosen.push_back(problem.glyph(static_cast<std::size_t>(id)).codepoint);
      ids += codepoint_label(out.chosen.back()) + "\n";
    }
    std::string trace = "gen,best_energy,mean_energy\n";
    for (const GenerationStats& g : res.trace) {
      trace += std::to_string(g.generation) + "," + format_number(g.best) + "," + format_number(g.mean) + "\n";
    }
    write_file_atomic(trace_path, trace);
    write_file_atomic(ids_path, ids);
    log << "select-samples: " << res.trace.size() << " generations, best energy " << fmt(res.best.energy, 6) << "\n";
  }
  SelectionParams sp;
  sp.k = cfg.k;
  sp.dataset_tau = cfg.dataset_tau;
  sp.samples = cfg.samples_per_skeleton;
  sp.lambda_attr = cfg.lambda_attr;
  const SelectionProblem problem(glyphs, sp);
  std::vector<int> ids;
  for (char32_t cp : out.chosen) {
    for (std::size_t i = 0; i < problem.size(); ++i)
      if (problem.glyph(i).codepoint == cp) ids.push_back(static_cast<int>(i));
  }
  std::string chars;
  for (char32_t cp : out.chosen) chars += utf8_encode(cp);
  out.stage.report = {"validation glyphs " + std::to_string(glyphs.size()),
                      "k " + std::to_string(cfg.k) + ", alpha " + fmt(cfg.alpha_selection, 2) + ", seed " +
                          std::to_string(cfg.seed),
                      "chosen " + chars,
                      "f_e " + fmt(problem.fe(ids), 6) + ", f_r " + fmt(problem.fr(ids), 6) + ", f_selection " +
                          fmt(problem.energy(ids, cfg.alpha_selection), 6)};
  return out;
}

StageResult cmd_extract(const PipelineConfig& cfg, const std::vector<char32_t>& subset, std::ostream& log) {
  StageResult out;
  const auto images = files_by_codepoint(cfg.samples_dir, {".png", ".pgm"});
  const auto glyphs = files_by_codepoint(cfg.adjusted_dir, {".gd"});
  std::vector<char32_t> wanted = subset;
  if (wanted.empty()) {
    std::set<char32_t> all;
    for (const auto& [cp, p] : images) all.insert(cp);
    for (const auto& [cp, p] : glyphs) all.insert(cp);
    wanted.assign(all.begin(), all.end());
  } else {
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  }
  if (wanted.empty()) throw DataError("no sample images found in " + cfg.samples_dir.string());
  std::vector<char32_t> no_image, no_glyph;
  for (char32_t cp : wanted) {
    if (!images.count(cp)) no_image.push_back(cp);
    if (!glyphs.count(cp)) no_glyph.push_back(cp);
  }
  if (!no_image.empty() || !no_glyph.empty()) {
    std::string msg = "unpaired samples:";
    if (!no_image.empty()) msg += " no sample image for " + join_labels(no_image) + ";";
    if (!no_glyph.empty()) msg += " no adjusted glyph for " + join_labels(no_glyph) + ";";
    msg.pop_back();
    throw DataError(msg);
  }

  ContentHash hash;
  hash.add(hash_params(cfg));
  for (char32_t cp : wanted) {
    hash.add_file(images.at(cp));
    hash.add_file(glyphs.at(cp));
  }
  const std::string digest = hash.hex();

  AssetStore store;
  bool reused = false;
  if (stored_input_hash(cfg.store_dir) == digest) {
    try {
      store = read_asset_store(cfg.store_dir);
      reused = true;
      log << "extract: inputs unchanged, reusing " << cfg.store_dir.string() << "\n";
    } catch (const Error&) {
      reused = false;
    }
  }
  std::vector<SampleExtraction> results;
  if (!reused) {
    results.resize(wanted.size());
    parallel_for(wanted.size(), cfg.jobs, [&](std::size_t i) {
      const fs::path& ip = images.at(wanted[i]);
      GrayImage sample;
      try {
        sample = read_sample_image(ip);
      } catch (const Error& e) {
        throw DataError(ip.string() + ": " + e.what());
      }
      if (sample.width() != cfg.canvas || sample.height() != cfg.canvas) {
        throw DataError(ip.string() + ": image is " + std::to_string(sample.width()) + "x" +
                        std::to_string(sample.height()) + ", expected " + std::to_string(cfg.canvas) + "x" +
                        std::to_string(cfg.canvas));
      }
      const Glyph adjusted = parse_glyph_file(glyphs.at(wanted[i]));
      results[i] = extract_sample(sample, adjusted, cfg, cfg.debug_dir);
    });
    store.input_hash = digest;
    store.canvas = cfg.canvas;
    for (auto& r : results) {
      store.samples.push_back(r.stored);
      store.log.insert(store.log.end(), r.relfix.begin(), r.relfix.end());
      for (const auto& n : r.notes) store.log.push_back("note " + n);
    }
    write_asset_store(cfg.store_dir, store);
  }
  out.reused = reused;

  std::size_t fallbacks = 0;
  for (const StoredSample& s : store.samples)
    fallbacks += static_cast<std::size_t>(std::count(s.fallback.begin(), s.fallback.end(), true));
  out.report.push_back("samples " + std::to_string(store.samples.size()));
  out.report.push_back("stroke assets " + std::to_string(store.stroke_count()));
  out.report.push_back("unrestored strokes " + std::to_string(fallbacks));
  for (const StoredSample& s : store.samples) {
    out.report.push_back(codepoint_label(s.glyph.codepoint) + " tau " + std::to_string(s.tau) + " strokes " +
                         std::to_string(s.glyph.size()));
  }
  for (const auto& line : store.log) {
    if (!reused) log << line << "\n";
    out.report.push_back(line);
  }
  log << "extract: " << store.stroke_count() << " stroke assets from " << store.samples.size() << " samples\n";
  return out;
}

namespace {

std::vector<char32_t> resolve_targets(const PipelineConfig& cfg, const Dataset& dataset) {
  if (!cfg.targets.empty()) return cfg.targets;
  std::vector<char32_t> out;
  if (!cfg.truth_dir.empty()) {
    for (const auto& [cp, p] : files_by_codepoint(cfg.truth_dir, {".png", ".pgm"})) out.push_back(cp);
    if (!out.empty()) return out;
  }
  for (const auto& [cp, g] : dataset) out.push_back(cp);
  return out;
}

}  // namespace

StageResult cmd_generate(const PipelineConfig& cfg, std::ostream& log) {
  StageResult out;
  const AssetStore store = read_asset_store(cfg.store_dir);
  const Dataset dataset = load_dataset(cfg.dataset_dir);
  const std::vector<char32_t> targets = resolve_targets(cfg, dataset);
  const fs::path dir = font_output_dir(cfg);

  ContentHash hash;
  hash.add(hash_params(cfg));
  hash.add_file(cfg.store_dir / "manifest.txt");
  for (const auto& [cp, g] : dataset) hash.add(serialize_glyph(g));
  hash.add(join_labels(targets));
  const std::string digest = hash.hex();
  const fs::path manifest_path = dir / "manifest.txt";
  if (first_line(manifest_path) == "input_hash " + digest) {
    bool complete = true;
    for (char32_t cp : targets)
      if (dataset.count(cp) && !fs::exists(dir / (codepoint_label(cp) + ".png"))) complete = false;
    if (complete) {
      log << "generate: inputs unchanged, reusing " << dir.string() << "\n";
      out.reused = true;
      std::istringstream in(read_text_file(manifest_path));
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line))
        if (line.rfind("summary ", 0) == 0 || line.rfind("transform ", 0) == 0 || line.rfind("error ", 0) == 0)
          out.report.push_back(line);
      return out;
    }
  }

  const Generator gen = build_generator(store, dataset, cfg);
  std::vector<GeneratedGlyph> results(targets.size());
  std::vector<std::string> missing(targets.size());
  parallel_for(targets.size(), cfg.jobs, [&](std::size_t i) {
    const auto it = dataset.find(targets[i]);
    if (it == dataset.end()) {
      missing[i] = codepoint_label(targets[i]) + " not in dataset";
      return;
    }
    results[i] = generate_glyph(gen, it->second, cfg);
  });

  fs::create_directories(dir);
  std::vector<std::string> lines;
  auto matrix_line = [](const char* name, const Eigen::Matrix3d& m) {
    std::string s = std::string("transform ") + name;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) s += " " + fmt(m(r, c), 6);
    return s;
  };
  lines.push_back(matrix_line("t_sz", gen.transforms.t_sz));
  lines.push_back(matrix_line("t_aff", gen.transforms.t_aff));
  std::size_t written = 0, errors = 0;
  std::string body;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::string label = codepoint_label(targets[i]);
    if (!missing[i].empty()) {
      lines.push_back("error " + missing[i]);
      log << "generate: " << missing[i] << "\n";
      ++errors;
      continue;
    }
    const GeneratedGlyph& g = results[i];
    write_file_atomic(dir / (label + ".png"), encode_png(invert(g.image)));
    ++written;
    for (std::size_t k = 0; k < g.asset_ids.size(); ++k) {
      body += "stroke " + label + " " + std::to_string(k) + " " + g.asset_ids[k] + " " + fmt(g.energies[k], 6) + "\n";
    }
    for (const auto& e : g.errors) {
      lines.push_back("error " + label + " " + e);
      log << "generate: " << label << " " << e << "\n";
      ++errors;
    }
  }
  lines.push_back("summary glyphs " + std::to_string(written) + " errors " + std::to_string(errors) + " assets " +
                  std::to_string(gen.assets.size()));
  std::string manifest = "input_hash " + digest + "\n";
  for (const auto& l : lines) manifest += l + "\n";
  manifest += body;
  write_file_atomic(manifest_path, manifest);
  for (const auto& n : gen.notes) lines.push_back("note " + n);
  out.report = lines;
  log << "generate: wrote " << written << " glyphs to " << dir.string() << "\n";
  return out;
}

StageResult cmd_eval(const PipelineConfig& cfg, std::ostream& log) {
  StageResult out;
  if (cfg.truth_dir.empty()) throw UsageError("truth_dir is not set");
  const fs::path dir = font_output_dir(cfg);
  const auto generated = files_by_codepoint(dir, {".png"});
  const auto truth = files_by_codepoint(cfg.truth_dir, {".png", ".pgm"});
  std::vector<char32_t> cps;
  for (const auto& [cp, p] : generated)
    if (truth.count(cp)) cps.push_back(cp);
  if (cps.empty()) throw DataError("no generated glyph in " + dir.string() + " has a ground-truth image");

  const CannyParams canny;
  std::vector<LabeledEdges> test(cps.size()), train(cps.size());
  parallel_for(cps.size(), cfg.jobs, [&](std::size_t i) {
    auto edges = [&](const fs::path& p) {
      try {
        return canny_edges(resize_area(read_sample_image(p), cfg.eval_size, cfg.eval_size), canny);
      } catch (const Error& e) {
        throw DataError(p.string() + ": " + e.what());
      }
    };
    test[i] = {codepoint_label(cps[i]), edges(generated.at(cps[i]))};
    train[i] = {codepoint_label(cps[i]), edges(truth.at(cps[i]))};
  });
  const Recognition rec = recognize(test, train);
  std::string csv = "glyph,chamfer\n";
  double sum = 0.0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const double d = rec.distances[i][i];
    sum += d;
    csv += test[i].label + "," + fmt(d) + "\n";
  }
  const double mean = sum / static_cast<double>(cps.size());
  csv += "mean," + fmt(mean) + "\n";
  write_file_atomic(dir / "eval.csv", csv);
  write_file_atomic(dir / "recognition.csv", "font,accuracy\n" + cfg.font + "," + fmt(rec.accuracy) + "\n");
  out.report.push_back("edge detector sigma " + fmt(canny.sigma, 1) + " thresholds " + fmt(canny.low, 0) + "/" +
                       fmt(canny.high, 0) + " at " + std::to_string(cfg.eval_size) + "x" +
                       std::to_string(cfg.eval_size));
  out.report.push_back("glyphs " + std::to_string(cps.size()));
  out.report.push_back("mean chamfer " + fmt(mean));
  out.report.push_back("recognition accuracy " + fmt(rec.accuracy));
  for (std::size_t i = 0; i < cps.size(); ++i) {
    out.report.push_back(test[i].label + " chamfer " + fmt(rec.distances[i][i]) + " recognized as " + rec.predicted[i]);
  }
  log << "eval: mean chamfer " << fmt(mean) << ", accuracy " << fmt(rec.accuracy) << "\n";
  return out;
}

StageResult cmd_pipeline(const PipelineConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  std::vector<std::string> report = {"glyphforge pipeline report", "font " + cfg.font, ""};
  auto section = [&](const std::string& name, const std::vector<std::string>& lines) {
    report.push_back("== " + name + " ==");
    report.insert(report.end(), lines.begin(), lines.end());
    report.push_back("");
  };
  std::vector<char32_t> subset;
  if (cfg.skip_selection) {
    std::vector<std::string> lines = {"skipped"};
    if (!cfg.sample_list.empty()) {
      subset = read_codepoint_file(cfg.sample_list);
      lines.push_back("sample list " + cfg.sample_list.filename().string() + " (" + std::to_string(subset.size()) +
                      " glyphs)");
    } else {
      lines.push_back("using every sample pair found");
    }
    section("selection", lines);
  } else {
    SelectionOutcome sel = cmd_select(cfg, log);
    subset = sel.chosen;
    section("selection", sel.stage.report);
  }
  section("extraction", cmd_extract(cfg, subset, log).report);
  section("generation", cmd_generate(cfg, log).report);
  if (!cfg.truth_dir.empty()) {
    section("evaluation", cmd_eval(cfg, log).report);
  } else {
    section("evaluation", {"skipped: no truth_dir"});
  }
  std::string text;
  for (const auto& l : report) text += l + "\n";
  write_file_atomic(cfg.report, text);
  StageResult out;
  out.report = std::move(report);
  return out;
}

}  // namespace glyphforge
