#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "attack_json.hpp"
#include "channel.hpp"
#include "detection.hpp"

namespace sfw {

// One experiment arm: a key recipe plus the detection mode it is scored
// with. Presets cover the four standard arms; configs may override the
// noise-key and component switches to form ablation cases.
struct MethodConfig {
  std::string name;
  KeySpec spec;
  bool noise_key = false;
  int det_components = 2;
};

inline MethodConfig method_preset(const std::string& preset) {
  MethodConfig m;
  m.name = preset;
  if (preset == "tree_ring") {
    m.spec.kind = WatermarkKind::tree_ring;
    m.spec.region = EmbedRegion::full_frame;
  } else if (preset == "tree_ring_real_only") {
    m.spec.kind = WatermarkKind::tree_ring;
    m.spec.region = EmbedRegion::full_frame;
    m.det_components = 1;
  } else if (preset == "hstr") {
    m.spec.kind = WatermarkKind::hstr;
    m.spec.region = EmbedRegion::center_aware;
    m.noise_key = true;
  } else if (preset == "hsqr") {
    m.spec.kind = WatermarkKind::hsqr;
    m.spec.region = EmbedRegion::center_aware;
    m.noise_key = true;
  } else {
    throw std::invalid_argument("method_preset: unknown preset '" + preset + "'");
  }
  return m;
}

struct ExperimentConfig {
  std::vector<MethodConfig> methods;
  std::vector<AttackSpec> attacks;
  int n_samples = 200;
  size_t pool_size = 2048;
  double inversion_noise_sigma = 0.1;
  uint64_t seed = 1;
  int threads = 1;
};

inline void validate_experiment(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw std::invalid_argument("experiment: no methods configured");
  if (cfg.attacks.empty()) throw std::invalid_argument("experiment: no attacks configured");
  if (cfg.n_samples < 1) throw std::invalid_argument("experiment: n_samples must be >= 1");
  if (cfg.pool_size < 1) throw std::invalid_argument("experiment: pool_size must be >= 1");
  if (cfg.threads < 1) throw std::invalid_argument("experiment: threads must be >= 1");
  if (!(cfg.inversion_noise_sigma >= 0.0))
    throw std::invalid_argument("experiment: inversion_noise_sigma must be >= 0");
  for (const MethodConfig& m : cfg.methods) {
    if (m.name.empty()) throw std::invalid_argument("experiment: method with empty name");
    if (m.det_components != 1 && m.det_components != 2)
      throw std::invalid_argument("experiment: det_components must be 1 or 2");
    make_key(m.spec, 0);  // throws on an invalid kind/region/geometry combination
  }
  for (const AttackSpec& a : cfg.attacks) validate_attack(a);
}

// JSON shape:
//   methods: ["hsqr", {"preset": "tree_ring", "det_components": 1,
//                      "noise_key": false, "name": "case_b"}, ...]
//   attacks: [attack objects as in attack_json.hpp]
// plus scalar fields named below. Threads are a runtime knob, not part of
// the experiment identity, so manifests still compare equal across machines.
inline nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["n_samples"] = cfg.n_samples;
  j["pool_size"] = cfg.pool_size;
  j["inversion_noise_sigma"] = cfg.inversion_noise_sigma;
  j["methods"] = nlohmann::ordered_json::array();
  for (const MethodConfig& m : cfg.methods) {
    nlohmann::ordered_json mj;
    mj["name"] = m.name;
    mj["kind"] = kind_name(m.spec.kind);
    mj["center_aware"] = m.spec.region == EmbedRegion::center_aware;
    mj["noise_key"] = m.noise_key;
    mj["det_components"] = m.det_components;
    j["methods"].push_back(mj);
  }
  j["attacks"] = nlohmann::ordered_json::array();
  for (const AttackSpec& a : cfg.attacks) j["attacks"].push_back(attack_to_json(a));
  return j;
}

inline MethodConfig method_from_json(const nlohmann::json& entry) {
  if (entry.is_string()) return method_preset(entry.get<std::string>());
  if (!entry.is_object()) throw std::invalid_argument("experiment: method entry must be a string or object");
  MethodConfig m = method_preset(entry.at("preset").get<std::string>());
  if (entry.contains("noise_key")) m.noise_key = entry.at("noise_key").get<bool>();
  if (entry.contains("det_components")) m.det_components = entry.at("det_components").get<int>();
  if (entry.contains("name")) m.name = entry.at("name").get<std::string>();
  return m;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig cfg;
    cfg.seed = j.value("seed", static_cast<uint64_t>(1));
    cfg.n_samples = j.value("n_samples", 200);
    cfg.pool_size = j.value("pool_size", static_cast<size_t>(2048));
    cfg.inversion_noise_sigma = j.value("inversion_noise_sigma", 0.1);
    cfg.threads = j.value("threads", 1);
    for (const auto& entry : j.at("methods")) {
      // Round-tripping a manifest presents methods as objects keyed by
      // kind/center_aware rather than preset; accept both spellings.
      if (entry.is_object() && !entry.contains("preset")) {
        MethodConfig m;
        m.name = entry.at("name").get<std::string>();
        m.spec.kind = kind_from_name(entry.at("kind").get<std::string>());
        m.spec.region = entry.at("center_aware").get<bool>() ? EmbedRegion::center_aware
                                                             : EmbedRegion::full_frame;
        m.noise_key = entry.at("noise_key").get<bool>();
        m.det_components = entry.at("det_components").get<int>();
        cfg.methods.push_back(m);
      } else {
        cfg.methods.push_back(method_from_json(entry));
      }
    }
    for (const auto& entry : j.at("attacks")) cfg.attacks.push_back(attack_from_json(entry));
    validate_experiment(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
}

// Canonical study setups shared by the bench subcommand and the acceptance
// checks. All of them stay pure config: the caller picks seed, sample count,
// and thread budget.

// Component-count ablation: both tree-ring detection modes against both
// symmetric-scheme modes, all without the channel-0 noise key so the
// pattern channel alone drives the ranking.
inline ExperimentConfig ablation_experiment(uint64_t seed, int n_samples = 200,
                                            size_t pool_size = 2048, int threads = 1) {
  auto arm = [](const char* preset, const char* name, int det) {
    MethodConfig m = method_preset(preset);
    m.name = name;
    m.noise_key = false;
    m.det_components = det;
    return m;
  };
  ExperimentConfig cfg;
  cfg.methods = {arm("tree_ring", "tree_ring_both", 2), arm("tree_ring", "tree_ring_real", 1),
                 arm("hstr", "hstr_real", 1), arm("hstr", "hstr_both", 2)};

  auto attack = [](AttackKind kind) {
    AttackSpec a;
    a.kind = kind;
    return a;
  };
  AttackSpec brightness = attack(AttackKind::brightness);
  brightness.factor = 1.5;
  AttackSpec contrast = attack(AttackKind::contrast);
  contrast.factor = 1.5;
  AttackSpec jpeg = attack(AttackKind::jpeg);
  jpeg.quality = 25;
  AttackSpec blur = attack(AttackKind::blur);
  blur.radius = 1;
  AttackSpec noise = attack(AttackKind::noise);
  noise.sigma = 0.1;
  AttackSpec crop_c = attack(AttackKind::crop_center);
  crop_c.scale = 0.6;
  AttackSpec crop_r = attack(AttackKind::crop_random);
  crop_r.scale = 0.6;
  AttackSpec regen = attack(AttackKind::regen);
  regen.t_star = 300;
  cfg.attacks = {attack(AttackKind::identity), brightness, contrast, jpeg, blur,
                 noise, crop_c, crop_r, regen};

  cfg.n_samples = n_samples;
  cfg.pool_size = pool_size;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

inline const std::vector<double>& crop_scales() {
  static const std::vector<double> scales{0.8, 0.6, 0.5, 0.4, 0.3};
  return scales;
}

// Center-crop robustness sweep for the two center-aware schemes.
inline ExperimentConfig crop_experiment(uint64_t seed, int n_samples = 200,
                                        size_t pool_size = 2048, int threads = 1) {
  ExperimentConfig cfg;
  cfg.methods = {method_preset("hstr"), method_preset("hsqr")};
  for (double scale : crop_scales()) {
    AttackSpec a;
    a.kind = AttackKind::crop_center;
    a.scale = scale;
    cfg.attacks.push_back(a);
  }
  cfg.n_samples = n_samples;
  cfg.pool_size = pool_size;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

inline const std::vector<size_t>& capacity_pool_sizes() {
  static const std::vector<size_t> pools{64, 512, 2048, 8192};
  return pools;
}

// Key-capacity scaling: one pool size per call (pool size is config-level),
// symmetric QR scheme against the tree-ring baseline under mild noise.
inline ExperimentConfig capacity_experiment(size_t pool_size, uint64_t seed,
                                            int n_samples = 200, int threads = 1) {
  ExperimentConfig cfg;
  cfg.methods = {method_preset("hsqr"), method_preset("tree_ring")};
  AttackSpec noise;
  noise.kind = AttackKind::noise;
  noise.sigma = 0.05;
  cfg.attacks = {noise};
  cfg.n_samples = n_samples;
  cfg.pool_size = pool_size;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

// One (method, attack) cell of the result table.
struct CellResult {
  std::string method;
  std::string attack;
  RocSummary roc;
  double ident_acc = 0.0;
  std::optional<double> bit_acc;  // HSQR only
  int n = 0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
};

// Mean identification accuracy per method over every attack column;
// the ablation's summary statistic.
inline std::vector<std::pair<std::string, double>> mean_ident_by_method(const ExperimentResult& r) {
  std::vector<std::pair<std::string, double>> means;
  std::vector<int> counts;
  for (const CellResult& c : r.cells) {
    size_t i = 0;
    while (i < means.size() && means[i].first != c.method) ++i;
    if (i == means.size()) {
      means.emplace_back(c.method, 0.0);
      counts.push_back(0);
    }
    means[i].second += c.ident_acc;
    counts[i] += 1;
  }
  for (size_t i = 0; i < means.size(); ++i) means[i].second /= counts[i];
  return means;
}

// Index-sharded parallel loop. Each slot's work derives its randomness from
// its own index, so the outcome is identical for any thread count.
template <typename Fn>
inline void parallel_for(size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  size_t workers = std::min(static_cast<size_t>(threads), n);
  std::vector<std::thread> ts;
  ts.reserve(workers);
  for (size_t w = 0; w < workers; ++w) ts.emplace_back(worker);
  for (std::thread& t : ts) t.join();
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  ExperimentResult out;
  const size_t n = static_cast<size_t>(cfg.n_samples);

  for (size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const MethodConfig& m = cfg.methods[mi];
    const uint64_t mbase = derive_seed(cfg.seed, seed_stream::key, mi);

    std::vector<KeyBundle> pool;
    pool.reserve(cfg.pool_size);
    for (uint64_t i = 0; i < cfg.pool_size; ++i)
      pool.push_back(make_bundle(m.spec, m.noise_key, derive_seed(mbase, seed_stream::key, i)));
    const PoolIndex idx = build_pool_index(pool, m.det_components);
    const EmbedRegion region = m.spec.region;

    // Base latents are drawn once per sample and shared by every attack, so
    // attack columns are paired comparisons on the same content.
    std::vector<size_t> truth(n);
    std::vector<LatentTensor> pos(n), neg(n);
    parallel_for(n, cfg.threads, [&](size_t s) {
      truth[s] = Rng(derive_seed(mbase, seed_stream::key_choice, s)).uniform_index(cfg.pool_size);
      pos[s] = embed_bundle(gaussian_latent(4, 64, 64, derive_seed(mbase, seed_stream::latent, s)),
                            pool[truth[s]]);
      neg[s] = gaussian_latent(4, 64, 64, derive_seed(mbase, seed_stream::null_latent, s));
    });

    for (size_t ai = 0; ai < cfg.attacks.size(); ++ai) {
      const AttackSpec& attack = cfg.attacks[ai];
      std::vector<double> pos_score(n), neg_score(n), bits(n, 0.0);
      std::vector<uint8_t> hit(n, 0);

      parallel_for(n, cfg.threads, [&](size_t s) {
        ChannelConfig cc;
        cc.inversion_noise_sigma = cfg.inversion_noise_sigma;
        cc.seed = derive_seed(mbase, seed_stream::channel, (ai * n + s) * 2);
        LatentTensor pa = channel_roundtrip(pos[s], attack, cc);
        cc.seed = derive_seed(mbase, seed_stream::channel, (ai * n + s) * 2 + 1);
        LatentTensor na = channel_roundtrip(neg[s], attack, cc);

        FlatQuery fp = flatten_query(pa, idx, region);
        FlatQuery fn = flatten_query(na, idx, region);
        pos_score[s] = pool_distance(fp, idx, truth[s]);
        neg_score[s] = pool_distance(fn, idx, truth[s]);
        hit[s] = identify(fp, idx).first == truth[s];

        if (m.spec.kind == WatermarkKind::hsqr) {
          auto dec = decode_hsqr(extract_spectrum(pa, pool[truth[s]].method.channel, region),
                                 pool[truth[s]].method);
          bits[s] = dec ? bit_accuracy(dec->payload, pool[truth[s]].method.payload) : 0.0;
        }
      });

      CellResult cell;
      cell.method = m.name;
      cell.attack = attack_label(attack);
      cell.roc = verify_batch(pos_score, neg_score);
      cell.n = cfg.n_samples;
      double hits = 0.0;
      for (uint8_t h : hit) hits += h;
      cell.ident_acc = hits / static_cast<double>(n);
      if (m.spec.kind == WatermarkKind::hsqr) {
        double acc = 0.0;
        for (double b : bits) acc += b;
        cell.bit_acc = acc / static_cast<double>(n);
      }
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

namespace csvdetail {

inline std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string compact9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace csvdetail

inline std::string results_csv(const ExperimentResult& result) {
  std::string out = "method,attack,tpr_at_1pct_fpr,auc,max_acc,ident_acc,bit_acc,n\n";
  for (const CellResult& c : result.cells) {
    out += c.method + ',' + c.attack + ',';
    out += csvdetail::fixed6(c.roc.tpr_at_1pct_fpr) + ',';
    out += csvdetail::fixed6(c.roc.auc) + ',';
    out += csvdetail::fixed6(c.roc.max_accuracy) + ',';
    out += csvdetail::fixed6(c.ident_acc) + ',';
    if (c.bit_acc) out += csvdetail::fixed6(*c.bit_acc);
    out += ',' + std::to_string(c.n) + '\n';
  }
  return out;
}

inline std::string roc_points_csv(const ExperimentResult& result) {
  std::string out = "method,attack,threshold,fpr,tpr\n";
  for (const CellResult& c : result.cells)
    for (size_t i = 0; i < c.roc.thresholds.size(); ++i) {
      out += c.method + ',' + c.attack + ',';
      out += csvdetail::compact9(c.roc.thresholds[i]) + ',';
      out += csvdetail::fixed6(c.roc.fpr[i]) + ',';
      out += csvdetail::fixed6(c.roc.tpr[i]) + '\n';
    }
  return out;
}

// Minimal standalone ROC plot: one polyline per (method, attack) cell on a
// unit square with a side legend.
inline std::string roc_svg(const ExperimentResult& result) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const int plot = 420, margin = 50, legend_w = 260;
  const int width = margin * 2 + plot + legend_w, height = margin * 2 + plot;
  auto px = [&](double fpr) { return margin + fpr * plot; };
  auto py = [&](double tpr) { return margin + (1.0 - tpr) * plot; };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                  "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"" + std::to_string(margin) + "\" y=\"" + std::to_string(margin) + "\" width=\"" +
       std::to_string(plot) + "\" height=\"" + std::to_string(plot) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  s += "<line x1=\"" + std::to_string(px(0)) + "\" y1=\"" + std::to_string(py(0)) + "\" x2=\"" +
       std::to_string(px(1)) + "\" y2=\"" + std::to_string(py(1)) +
       "\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n";
  s += "<text x=\"" + std::to_string(margin + plot / 2) + "\" y=\"" + std::to_string(height - 12) +
       "\" text-anchor=\"middle\">false positive rate</text>\n";
  s += "<text x=\"16\" y=\"" + std::to_string(margin + plot / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + std::to_string(margin + plot / 2) +
       ")\">true positive rate</text>\n";

  for (size_t ci = 0; ci < result.cells.size(); ++ci) {
    const CellResult& c = result.cells[ci];
    const char* color = kColors[ci % (sizeof kColors / sizeof *kColors)];
    std::string pts = csvdetail::compact9(px(0.0)) + "," + csvdetail::compact9(py(0.0));
    for (size_t i = 0; i < c.roc.fpr.size(); ++i)
      pts += " " + csvdetail::compact9(px(c.roc.fpr[i])) + "," + csvdetail::compact9(py(c.roc.tpr[i]));
    s += "<polyline fill=\"none\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";

    double ly = margin + 14.0 * (static_cast<double>(ci) + 1.0);
    s += "<line x1=\"" + std::to_string(margin + plot + 12) + "\" y1=\"" + csvdetail::compact9(ly - 4) +
         "\" x2=\"" + std::to_string(margin + plot + 34) + "\" y2=\"" + csvdetail::compact9(ly - 4) +
         "\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"3\"/>\n";
    s += "<text x=\"" + std::to_string(margin + plot + 40) + "\" y=\"" + csvdetail::compact9(ly) + "\">" +
         c.method + " / " + c.attack + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

// Writes results.csv, roc_points.csv, manifest.json, and optionally
// roc.svg under out_dir.
inline void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                                     const std::filesystem::path& out_dir, bool with_svg = false) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "results.csv", results_csv(result));
  write_text_file(out_dir / "roc_points.csv", roc_points_csv(result));
  nlohmann::ordered_json manifest;
  manifest["config"] = experiment_config_to_json(cfg);
  manifest["rows"] = result.cells.size();
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  if (with_svg) write_text_file(out_dir / "roc.svg", roc_svg(result));
}

}  // namespace sfw
