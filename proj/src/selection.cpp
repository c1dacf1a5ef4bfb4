#include <glyphforge/selection.hpp>

#include <glyphforge/error.hpp>
#include <glyphforge/relations.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace glyphforge {

std::vector<SkeletonRecord> skeleton_records(const Glyph& g, double dataset_tau, int n) {
  std::vector<Eigen::Matrix3Xd> samples;
  samples.reserve(g.strokes.size());
  for (const Skeleton& sk : g.strokes) samples.push_back(sk.samples(n));
  Glyph with_rel = g;
  if (with_rel.relations.size() != g.strokes.size()) {
    with_rel.relations = assign_relations(samples, dataset_tau);
  }
  std::vector<SkeletonRecord> out;
  out.reserve(g.strokes.size());
  for (std::size_t i = 0; i < g.strokes.size(); ++i) {
    out.push_back({samples[i], StrokeAttributes::of(g.strokes[i]),
                   stroke_context(with_rel, samples, static_cast<int>(i))});
  }
  return out;
}

double grid_diagonal() { return kGridSize * std::sqrt(2.0); }

namespace {

double pair_energy(const SkeletonRecord& s, const SkeletonRecord& v, double lambda_attr) {
  return energy_es(s.samples, v.samples, s.attributes, v.attributes, lambda_attr) +
         energy_ea(s.context, v.context);
}

}  // namespace

double f_e(const std::vector<SkeletonRecord>& candidate, const std::vector<SkeletonRecord>& validation,
           double scale, double lambda_attr) {
  if (candidate.empty()) return std::numeric_limits<double>::infinity();
  if (validation.empty()) return 0.0;
  double sum = 0.0;
  for (const SkeletonRecord& v : validation) {
    double best = std::numeric_limits<double>::infinity();
    for (const SkeletonRecord& s : candidate) best = std::min(best, pair_energy(s, v, lambda_attr));
    sum += best;
  }
  return sum / (static_cast<double>(validation.size()) * scale);
}

ComplexityCounts complexity(const Glyph& g) {
  ComplexityCounts c;
  c.strokes = static_cast<int>(g.strokes.size());
  for (std::size_t i = 0; i < g.relations.size(); ++i) {
    for (std::size_t j = 0; j < g.relations[i].size(); ++j) {
      if (i == j) continue;
      switch (g.relations[i][j].kind) {
        case RelationKind::Crossing: ++c.crossing; break;
        case RelationKind::Continuous:
        case RelationKind::Connecting:
        case RelationKind::Connected: ++c.connecting; break;
        case RelationKind::Isolated: break;
      }
    }
  }
  return c;
}

double f_r(const std::vector<const Glyph*>& candidate, double normalizer) {
  double sum = 0.0;
  for (const Glyph* g : candidate) {
    const ComplexityCounts c = complexity(*g);
    sum += c.strokes + c.crossing + c.connecting;
  }
  return sum / normalizer;
}

double f_selection(double fe, double fr, double alpha) { return alpha * fe + (1.0 - alpha) * fr; }

SelectionProblem::SelectionProblem(std::vector<Glyph> validation, const SelectionParams& params)
    : glyphs_(std::move(validation)), params_(params) {
  if (params_.k < 1) throw UsageError("k must be positive");
  std::vector<std::vector<SkeletonRecord>> records;
  records.reserve(glyphs_.size());
  for (Glyph& g : glyphs_) {
    if (g.relations.size() != g.strokes.size()) {
      std::vector<Eigen::Matrix3Xd> samples;
      for (const Skeleton& sk : g.strokes) samples.push_back(sk.samples(params_.samples));
      g.relations = assign_relations(samples, params_.dataset_tau);
    }
    records.push_back(skeleton_records(g, params_.dataset_tau, params_.samples));
    strokes_ += g.strokes.size();
    max_strokes_ = std::max(max_strokes_, static_cast<int>(g.strokes.size()));
    const ComplexityCounts c = complexity(g);
    complexity_.push_back(c.strokes + c.crossing + c.connecting);
  }
  best_.assign(glyphs_.size(), std::vector<double>(strokes_, std::numeric_limits<double>::infinity()));
  for (std::size_t c = 0; c < glyphs_.size(); ++c) {
    std::size_t b = 0;
    for (const auto& vr : records) {
      for (const SkeletonRecord& v : vr) {
        double best = std::numeric_limits<double>::infinity();
        for (const SkeletonRecord& s : records[c]) {
          best = std::min(best, pair_energy(s, v, params_.lambda_attr));
        }
        best_[c][b++] = best;
      }
    }
  }
}

double SelectionProblem::fe(const std::vector<int>& ids) const {
  if (ids.empty()) return std::numeric_limits<double>::infinity();
  if (strokes_ == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t b = 0; b < strokes_; ++b) {
    double best = std::numeric_limits<double>::infinity();
    for (int c : ids) best = std::min(best, best_[static_cast<std::size_t>(c)][b]);
    sum += best;
  }
  return sum / (static_cast<double>(strokes_) * grid_diagonal());
}

double SelectionProblem::fr(const std::vector<int>& ids) const {
  double sum = 0.0;
  for (int c : ids) sum += complexity_[static_cast<std::size_t>(c)];
  return sum / (static_cast<double>(params_.k) * max_strokes_);
}

double SelectionProblem::energy(const std::vector<int>& ids, double alpha) const {
  return f_selection(fe(ids), fr(ids), alpha);
}

namespace {

class Breeder {
 public:
  Breeder(int n, int k, std::uint64_t seed) : n_(n), k_(k), rng_(seed) {}

  std::vector<int> random_candidate() {
    std::vector<int> pool(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k_; ++i) {
      const int j = pick(i, n_ - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + k_);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<int> crossover(const std::vector<int>& a, const std::vector<int>& b) {
    std::set<int> child;
    for (int i = 0; i < k_; ++i) child.insert(coin() ? a[static_cast<std::size_t>(i)] : b[static_cast<std::size_t>(i)]);
    while (static_cast<int>(child.size()) < k_) child.insert(pick(0, n_ - 1));
    return {child.begin(), child.end()};
  }

  void mutate(std::vector<int>& ids, double rate) {
    std::set<int> present(ids.begin(), ids.end());
    for (int& id : ids) {
      if (unit() >= rate) continue;
      int repl;
      do {
        repl = pick(0, n_ - 1);
      } while (present.count(repl));
      present.erase(id);
      present.insert(repl);
      id = repl;
    }
    std::sort(ids.begin(), ids.end());
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return (rng_() >> 63) != 0; }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  int n_;
  int k_;
  std::mt19937_64 rng_;
};

bool candidate_less(const CandidateSet& a, const CandidateSet& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.ids < b.ids;
}

}  // namespace

GaResult run_ga(const SelectionProblem& problem, double alpha, const GaConfig& config) {
  const int n = static_cast<int>(problem.size());
  const int k = problem.k();
  if (n <= k) throw UsageError("validation set must be larger than k");
  if (config.survivors < 2 || config.offspring < 1) throw UsageError("invalid GA population sizes");
  Breeder breeder(n, k, config.seed);
  std::vector<CandidateSet> population;
  for (int i = 0; i < config.population; ++i) {
    CandidateSet c{breeder.random_candidate(), 0.0};
    c.energy = problem.energy(c.ids, alpha);
    population.push_back(std::move(c));
  }
  GaResult res;
  int last_improvement = 0;
  for (int gen = 0; gen < config.max_generations; ++gen) {
    if (config.observer) config.observer(gen, population);
    double mean = 0.0;
    for (const auto& c : population) mean += c.energy;
    mean /= static_cast<double>(population.size());
    std::sort(population.begin(), population.end(), candidate_less);
    population.erase(std::unique(population.begin(), population.end(),
                                 [](const CandidateSet& a, const CandidateSet& b) { return a.ids == b.ids; }),
                     population.end());
    if (static_cast<int>(population.size()) > config.survivors) population.resize(static_cast<std::size_t>(config.survivors));
    res.trace.push_back({gen, population.front().energy, mean});
    if (population.front().energy < res.best.energy) {
      res.best = population.front();
      last_improvement = gen;
    } else if (gen - last_improvement >= config.plateau) {
      break;
    }
    if (gen + 1 == config.max_generations) break;
    const int parents = static_cast<int>(population.size());
    for (int o = 0; o < config.offspring; ++o) {
      const auto& a = population[static_cast<std::size_t>(breeder.pick(0, parents - 1))];
      const auto& b = population[static_cast<std::size_t>(breeder.pick(0, parents - 1))];
      CandidateSet child{breeder.crossover(a.ids, b.ids), 0.0};
      breeder.mutate(child.ids, config.mutation_rate);
      child.energy = problem.energy(child.ids, alpha);
      population.push_back(std::move(child));
    }
  }
  return res;
}

CandidateSet exhaustive_best(const SelectionProblem& problem, double alpha) {
  const int n = static_cast<int>(problem.size());
  const int k = problem.k();
  if (k > n) throw UsageError("k exceeds validation set size");
  std::vector<int> ids(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) ids[static_cast<std::size_t>(i)] = i;
  CandidateSet best;
  while (true) {
    const double e = problem.energy(ids, alpha);
    if (e < best.energy) best = {ids, e};
    int i = k - 1;
    while (i >= 0 && ids[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++ids[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) ids[static_cast<std::size_t>(j)] = ids[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

}  // namespace glyphforge
