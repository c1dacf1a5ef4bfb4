#include <glyphforge/config.hpp>

#include <glyphforge/error.hpp>
#include <glyphforge/glyphdata.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace glyphforge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw UsageError("config field '" + key + "': " + why);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) bad(key, "invalid number '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::filesystem::path&)>;

template <typename T>
Setter number(T PipelineConfig::*field, const std::string& key) {
  return [field, key](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
    c.*field = parse_number<T>(key, v);
  };
}

Setter path(std::filesystem::path PipelineConfig::*field) {
  return [field](PipelineConfig& c, const std::string& v, const std::filesystem::path& base) {
    std::filesystem::path p = v;
    c.*field = (p.is_relative() && !base.empty() && !v.empty()) ? base / p : p;
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["n_samples_per_skeleton"] = number(&PipelineConfig::samples_per_skeleton, "n_samples_per_skeleton");
    t["tau_max"] = number(&PipelineConfig::tau_max, "tau_max");
    t["dataset_tau"] = number(&PipelineConfig::dataset_tau, "dataset_tau");
    t["beta1"] = number(&PipelineConfig::beta1, "beta1");
    t["beta2"] = number(&PipelineConfig::beta2, "beta2");
    t["gamma"] = number(&PipelineConfig::gamma, "gamma");
    t["alpha_snake"] = number(&PipelineConfig::alpha_snake, "alpha_snake");
    t["beta_snake"] = number(&PipelineConfig::beta_snake, "beta_snake");
    t["snake_iterations"] = number(&PipelineConfig::snake_iterations, "snake_iterations");
    t["v_policy"] = [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) { c.v_policy = v; };
    t["lambda_attr"] = number(&PipelineConfig::lambda_attr, "lambda_attr");
    t["per_stroke_affine"] = [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
      c.per_stroke_affine = parse_bool("per_stroke_affine", v);
    };
    t["alpha_selection"] = number(&PipelineConfig::alpha_selection, "alpha_selection");
    t["k"] = number(&PipelineConfig::k, "k");
    t["ga_population"] = number(&PipelineConfig::ga_population, "ga_population");
    t["ga_survivors"] = number(&PipelineConfig::ga_survivors, "ga_survivors");
    t["ga_offspring"] = number(&PipelineConfig::ga_offspring, "ga_offspring");
    t["ga_mutation"] = number(&PipelineConfig::ga_mutation, "ga_mutation");
    t["ga_generations"] = number(&PipelineConfig::ga_generations, "ga_generations");
    t["ga_plateau"] = number(&PipelineConfig::ga_plateau, "ga_plateau");
    t["canvas"] = number(&PipelineConfig::canvas, "canvas");
    t["eval_size"] = number(&PipelineConfig::eval_size, "eval_size");
    t["seed"] = number(&PipelineConfig::seed, "seed");
    t["jobs"] = number(&PipelineConfig::jobs, "jobs");
    t["skip_selection"] = [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
      c.skip_selection = parse_bool("skip_selection", v);
    };
    t["font"] = [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) { c.font = v; };
    t["dataset_dir"] = path(&PipelineConfig::dataset_dir);
    t["samples_dir"] = path(&PipelineConfig::samples_dir);
    t["adjusted_dir"] = path(&PipelineConfig::adjusted_dir);
    t["truth_dir"] = path(&PipelineConfig::truth_dir);
    t["store_dir"] = path(&PipelineConfig::store_dir);
    t["output_dir"] = path(&PipelineConfig::output_dir);
    t["report"] = path(&PipelineConfig::report);
    t["debug_dir"] = path(&PipelineConfig::debug_dir);
    t["sample_list"] = path(&PipelineConfig::sample_list);
    t["targets"] = [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
      try {
        c.targets = parse_codepoint_list(v);
      } catch (const Error& e) {
        bad("targets", e.what());
      }
    };
    return t;
  }();
  return table;
}

}  // namespace

std::optional<double> PipelineConfig::variance() const {
  if (v_policy == "half-tau") return std::nullopt;
  return parse_number<double>("v_policy", v_policy);
}

void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value,
                        const std::filesystem::path& base_dir) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw UsageError("unknown config field '" + key + "'");
  it->second(cfg, value, base_dir);
}

void apply_config_text(PipelineConfig& cfg, const std::string& text, const std::filesystem::path& base_dir) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = line;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) {
        s.resize(i);
        break;
      }
    }
    s = trim(s);
    if (s.empty() || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_config_value(cfg, trim(s.substr(0, eq)), unquote(trim(s.substr(eq + 1))), base_dir);
  }
}

PipelineConfig load_config(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read config " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  PipelineConfig cfg;
  apply_config_text(cfg, ss.str(), p.parent_path());
  validate_config(cfg);
  return cfg;
}

void validate_config(const PipelineConfig& c) {
  auto require = [](bool ok, const char* key, const char* range) {
    if (!ok) bad(key, std::string("must be ") + range);
  };
  require(c.samples_per_skeleton >= 4 && c.samples_per_skeleton <= 1024, "n_samples_per_skeleton", "in [4, 1024]");
  require(c.tau_max >= 0, "tau_max", ">= 0");
  require(c.dataset_tau > 0, "dataset_tau", "> 0");
  require(c.beta1 >= 1.0, "beta1", ">= 1");
  require(c.beta2 > 0, "beta2", "> 0");
  require(c.gamma > 0 && c.gamma < 1, "gamma", "in (0, 1)");
  require(c.alpha_snake >= 0, "alpha_snake", ">= 0");
  require(c.beta_snake >= 0, "beta_snake", ">= 0");
  require(c.snake_iterations >= 1, "snake_iterations", ">= 1");
  if (c.v_policy != "half-tau") {
    const double v = c.variance().value();
    require(v > 0, "v_policy", "'half-tau' or a positive variance");
  }
  require(c.lambda_attr >= 0, "lambda_attr", ">= 0");
  require(c.alpha_selection >= 0 && c.alpha_selection <= 1, "alpha_selection", "in [0, 1]");
  require(c.k >= 1, "k", ">= 1");
  require(c.ga_population >= 2, "ga_population", ">= 2");
  require(c.ga_survivors >= 2, "ga_survivors", ">= 2");
  require(c.ga_offspring >= 1, "ga_offspring", ">= 1");
  require(c.ga_mutation >= 0 && c.ga_mutation <= 1, "ga_mutation", "in [0, 1]");
  require(c.ga_generations >= 1, "ga_generations", ">= 1");
  require(c.ga_plateau >= 1, "ga_plateau", ">= 1");
  require(c.canvas >= 16 && c.canvas <= 4096, "canvas", "in [16, 4096]");
  require(c.eval_size >= 8 && c.eval_size <= c.canvas, "eval_size", "in [8, canvas]");
  require(c.jobs >= 1 && c.jobs <= 256, "jobs", "in [1, 256]");
}

std::vector<char32_t> utf8_decode(const std::string& s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = 1;
    char32_t cp = c;
    if (c >= 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if (c >= 0x80) {
      throw DataError("invalid UTF-8");
    }
    if (i + static_cast<std::size_t>(len) > s.size()) throw DataError("truncated UTF-8");
    for (int k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((cc & 0xC0) != 0x80) throw DataError("invalid UTF-8");
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::vector<char32_t> parse_codepoint_list(const std::string& text) {
  std::vector<char32_t> out;
  std::string tok;
  auto flush = [&] {
    if (tok.empty()) return;
    if (auto cp = parse_codepoint_label(tok)) {
      out.push_back(*cp);
    } else {
      for (char32_t c : utf8_decode(tok)) out.push_back(c);
    }
    tok.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') flush();
    else tok.push_back(ch);
  }
  flush();
  return out;
}

}  // namespace glyphforge
