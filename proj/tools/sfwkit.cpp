// Command-line front end: key management, single-file embed/extract/attack
// plumbing, detection queries, and the seeded benchmark studies that emit
// the CSV tables.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sfw/attack_json.hpp"
#include "sfw/channel.hpp"
#include "sfw/detection.hpp"
#include "sfw/experiment.hpp"
#include "sfw/key_json.hpp"
#include "sfw/latent.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

sfw::WatermarkKey load_key(const fs::path& path) { return sfw::key_from_json(read_text(path)); }

std::vector<double> read_scores(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> scores;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    size_t used = 0;
    double v = std::stod(line, &used);
    if (used == 0) throw std::runtime_error("bad score line in " + path.string());
    scores.push_back(v);
  }
  if (scores.empty()) throw std::runtime_error("no scores in " + path.string());
  return scores;
}

void print_json(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

// keygen flag bundle.
struct KeygenArgs {
  std::string kind = "hstr";
  uint64_t seed = 0;
  bool center_aware = false;
  std::string out;
  std::string payload_hex;
  int channel = -1;
  int radius = 14;
  double lambda = 45.0;
  int cell_px = 2;
  int qr_mask = 0;
  int frame_rows = 64;
  int frame_cols = 64;
};

int cmd_keygen(const KeygenArgs& a) {
  sfw::KeySpec spec;
  spec.kind = sfw::kind_from_name(a.kind);
  spec.channel = a.channel;
  spec.region = a.center_aware ? sfw::EmbedRegion::center_aware : sfw::EmbedRegion::full_frame;
  spec.frame_rows = a.frame_rows;
  spec.frame_cols = a.frame_cols;
  spec.radius = a.radius;
  spec.lambda = a.lambda;
  spec.cell_px = a.cell_px;
  spec.qr_mask_id = a.qr_mask;
  if (!a.payload_hex.empty()) spec.payload = sfw::Payload72::from_hex(a.payload_hex);

  std::string text = sfw::key_to_json(sfw::make_key(spec, a.seed));
  if (a.out.empty()) {
    std::cout << text;
  } else {
    sfw::write_text_file(a.out, text);
  }
  return 0;
}

struct EmbedArgs {
  std::string key_path;
  std::string noise_key_path;
  std::string in_path;
  uint64_t gen_seed = 0;
  bool has_gen_seed = false;
  std::string out_path;
};

int cmd_embed(const EmbedArgs& a) {
  if (a.in_path.empty() == !a.has_gen_seed)
    throw std::runtime_error("embed: pass exactly one of --in or --gen-seed");
  sfw::LatentTensor latent = a.in_path.empty()
                                 ? sfw::gaussian_latent(4, 64, 64, a.gen_seed)
                                 : sfw::read_latent(a.in_path);
  latent = sfw::embed(latent, load_key(a.key_path));
  if (!a.noise_key_path.empty()) latent = sfw::embed(latent, load_key(a.noise_key_path));
  sfw::write_latent(a.out_path, latent);
  return 0;
}

struct ExtractArgs {
  std::string key_path;
  std::string in_path;
  std::string out_path;
};

int cmd_extract(const ExtractArgs& a) {
  sfw::WatermarkKey key = load_key(a.key_path);
  sfw::LatentTensor latent = sfw::read_latent(a.in_path);
  sfw::KeyRegionMask mask = sfw::key_region_mask(key);
  std::vector<sfw::cplx> vals =
      sfw::masked_values(sfw::extract_spectrum(latent, key.channel, key.region), mask);

  std::string csv = "row,col,re,im,re_used,im_used\n";
  char buf[96];
  for (size_t i = 0; i < vals.size(); ++i) {
    const sfw::MaskEntry& e = mask.entries[i];
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%d,%d\n", e.row, e.col, vals[i].real(),
                  vals[i].imag(), e.re ? 1 : 0, e.im ? 1 : 0);
    csv += buf;
  }
  if (a.out_path.empty()) {
    std::cout << csv;
  } else {
    sfw::write_text_file(a.out_path, csv);
  }
  return 0;
}

struct AttackArgs {
  std::string in_path;
  std::string out_path;
  std::string attack_json;
  std::string attack_file;
  double sigma_inv = 0.1;
  uint64_t seed = 0;
};

int cmd_attack(const AttackArgs& a) {
  if (a.attack_json.empty() == a.attack_file.empty())
    throw std::runtime_error("attack: pass exactly one of --attack or --attack-file");
  std::string text = a.attack_file.empty() ? a.attack_json : read_text(a.attack_file);
  sfw::AttackSpec spec = sfw::attack_from_json_text(text);

  sfw::ChannelConfig cc;
  cc.inversion_noise_sigma = a.sigma_inv;
  cc.seed = a.seed;
  sfw::write_latent(a.out_path, sfw::channel_roundtrip(sfw::read_latent(a.in_path), spec, cc));
  return 0;
}

struct DetectArgs {
  std::string key_path;
  std::string noise_key_path;
  std::string in_path;
};

int cmd_detect(const DetectArgs& a) {
  sfw::KeyBundle bundle;
  bundle.method = load_key(a.key_path);
  if (!a.noise_key_path.empty()) bundle.noise = load_key(a.noise_key_path);
  sfw::LatentTensor latent = sfw::read_latent(a.in_path);

  sfw::KeyRegionMask mm = sfw::key_region_mask(bundle.method);
  double method_d = sfw::l1_distance(sfw::extract_spectrum(latent, mm.channel, bundle.method.region),
                                     sfw::reference_pattern(bundle.method), mm);
  ordered_json out;
  out["kind"] = sfw::kind_name(bundle.method.kind);
  out["method_distance"] = method_d;
  double total = method_d;
  if (bundle.noise) {
    sfw::KeyRegionMask nm = sfw::key_region_mask(*bundle.noise);
    double noise_d = sfw::l1_distance(sfw::extract_spectrum(latent, nm.channel, bundle.noise->region),
                                      sfw::reference_pattern(*bundle.noise), nm);
    out["noise_distance"] = noise_d;
    total += noise_d;
  }
  out["distance"] = total;

  if (bundle.method.kind == sfw::WatermarkKind::hsqr) {
    auto dec = sfw::decode_hsqr(
        sfw::extract_spectrum(latent, bundle.method.channel, bundle.method.region), bundle.method);
    out["payload_decoded"] = dec.has_value();
    if (dec) {
      out["payload"] = dec->payload.to_hex();
      out["corrected"] = dec->corrected;
      out["bit_accuracy"] = sfw::bit_accuracy(dec->payload, bundle.method.payload);
    }
  }
  print_json(out);
  return 0;
}

struct VerifyArgs {
  std::string pos_path;
  std::string neg_path;
  std::string roc_csv_path;
  std::string roc_svg_path;
};

int cmd_verify(const VerifyArgs& a) {
  std::vector<double> pos = read_scores(a.pos_path);
  std::vector<double> neg = read_scores(a.neg_path);
  sfw::RocSummary roc = sfw::verify_batch(pos, neg);

  ordered_json out;
  out["n_pos"] = pos.size();
  out["n_neg"] = neg.size();
  out["auc"] = roc.auc;
  out["tpr_at_1pct_fpr"] = roc.tpr_at_1pct_fpr;
  out["max_accuracy"] = roc.max_accuracy;
  print_json(out);

  if (!a.roc_csv_path.empty() || !a.roc_svg_path.empty()) {
    sfw::ExperimentResult shim;
    sfw::CellResult cell;
    cell.method = "scores";
    cell.attack = "scores";
    cell.roc = roc;
    cell.n = static_cast<int>(pos.size());
    shim.cells.push_back(cell);
    if (!a.roc_csv_path.empty()) sfw::write_text_file(a.roc_csv_path, sfw::roc_points_csv(shim));
    if (!a.roc_svg_path.empty()) sfw::write_text_file(a.roc_svg_path, sfw::roc_svg(shim));
  }
  return 0;
}

struct IdentifyArgs {
  std::string in_path;
  std::string method = "hstr";
  uint64_t seed = 1;
  size_t pool_size = 2048;
  int det_components = 0;  // 0 = preset default
};

int cmd_identify(const IdentifyArgs& a) {
  sfw::MethodConfig m = sfw::method_preset(a.method);
  if (a.det_components != 0) m.det_components = a.det_components;

  std::vector<sfw::KeyBundle> pool;
  pool.reserve(a.pool_size);
  for (uint64_t i = 0; i < a.pool_size; ++i)
    pool.push_back(sfw::make_bundle(m.spec, m.noise_key, sfw::derive_seed(a.seed, sfw::seed_stream::key, i)));

  sfw::LatentTensor latent = sfw::read_latent(a.in_path);
  auto [index, distance] = sfw::identify(latent, pool, m.det_components);

  ordered_json out;
  out["method"] = m.name;
  out["pool_size"] = a.pool_size;
  out["index"] = index;
  out["distance"] = distance;
  out["key_seed"] = pool[index].method.seed;
  print_json(out);
  return 0;
}

struct GaussianityArgs {
  std::string method = "hstr";
  int n = 200;
  uint64_t seed = 1;
  double alpha = 0.05;
  int threads = 1;
};

int cmd_gaussianity(const GaussianityArgs& a) {
  if (a.n < 1) throw std::runtime_error("gaussianity: --n must be >= 1");
  std::optional<sfw::MethodConfig> m;
  if (a.method != "none") m = sfw::method_preset(a.method);

  std::vector<sfw::LatentTensor> batch(static_cast<size_t>(a.n));
  sfw::parallel_for(batch.size(), a.threads, [&](size_t i) {
    sfw::LatentTensor x = sfw::gaussian_latent(4, 64, 64, sfw::derive_seed(a.seed, sfw::seed_stream::latent, i));
    if (m) {
      sfw::KeyBundle b =
          sfw::make_bundle(m->spec, m->noise_key, sfw::derive_seed(a.seed, sfw::seed_stream::key, i));
      x = sfw::embed_bundle(x, b);
    }
    batch[i] = std::move(x);
  });

  double sum = 0.0, sumsq = 0.0, count = 0.0;
  for (const sfw::LatentTensor& t : batch)
    for (double v : t.v) {
      sum += v;
      sumsq += v * v;
      count += 1.0;
    }
  double mean = sum / count;

  ordered_json out;
  out["method"] = a.method;
  out["n"] = a.n;
  out["alpha"] = a.alpha;
  out["ks_failure_rate"] = sfw::ks_failure_rate(batch, a.alpha);
  out["batch_std"] = std::sqrt(sumsq / count - mean * mean);
  print_json(out);
  return 0;
}

struct BenchArgs {
  std::string out_dir = "bench_out";
  std::string config_path;
  std::string study = "all";
  uint64_t seed = 1;
  int n = 200;
  size_t pool = 2048;
  int threads = 1;
  bool roc_svg = false;
};

void run_and_write(const sfw::ExperimentConfig& cfg, const fs::path& dir, bool svg) {
  sfw::ExperimentResult r = sfw::run_experiment(cfg);
  sfw::write_experiment_outputs(cfg, r, dir, svg);

  std::string summary = "method,mean_ident_acc\n";
  for (const auto& [name, mean] : sfw::mean_ident_by_method(r)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", mean);
    summary += name + ',' + buf + '\n';
  }
  sfw::write_text_file(dir / "summary.csv", summary);
  std::cout << dir.string() << ": " << r.cells.size() << " result rows\n";
}

int cmd_bench(const BenchArgs& a) {
  fs::path root = a.out_dir;
  if (!a.config_path.empty()) {
    sfw::ExperimentConfig cfg = sfw::experiment_config_from_json(json::parse(read_text(a.config_path)));
    cfg.threads = a.threads;
    run_and_write(cfg, root / "custom", a.roc_svg);
    return 0;
  }

  bool all = a.study == "all";
  if (!all && a.study != "ablation" && a.study != "crop" && a.study != "capacity")
    throw std::runtime_error("bench: --study must be all, ablation, crop, or capacity");

  if (all || a.study == "ablation")
    run_and_write(sfw::ablation_experiment(a.seed, a.n, a.pool, a.threads), root / "ablation", a.roc_svg);
  if (all || a.study == "crop")
    run_and_write(sfw::crop_experiment(a.seed, a.n, a.pool, a.threads), root / "crop", a.roc_svg);
  if (all || a.study == "capacity") {
    for (size_t pool_size : sfw::capacity_pool_sizes())
      run_and_write(sfw::capacity_experiment(pool_size, a.seed, a.n, a.threads),
                    root / "capacity" / ("pool_" + std::to_string(pool_size)), a.roc_svg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric Fourier watermarking toolkit"};
  app.require_subcommand(1);

  KeygenArgs kg;
  CLI::App* keygen = app.add_subcommand("keygen", "Create a watermark key as JSON");
  keygen->add_option("--kind", kg.kind, "tree_ring | hstr | hsqr | noise_key");
  keygen->add_option("--seed", kg.seed, "Key seed");
  keygen->add_flag("--center-aware", kg.center_aware, "Embed only in the crop-safe center window");
  keygen->add_option("--out", kg.out, "Output path (stdout when omitted)");
  keygen->add_option("--payload", kg.payload_hex, "18 hex chars of payload (hsqr)");
  keygen->add_option("--channel", kg.channel, "Latent channel (-1 = kind default)");
  keygen->add_option("--radius", kg.radius, "Ring radius (tree_ring / hstr)");
  keygen->add_option("--lambda", kg.lambda, "Reference magnitude (hsqr)");
  keygen->add_option("--cell-px", kg.cell_px, "Pixels per QR module side (hsqr)");
  keygen->add_option("--qr-mask", kg.qr_mask, "QR mask id 0-7 (hsqr)");
  keygen->add_option("--frame-rows", kg.frame_rows, "Latent plane rows");
  keygen->add_option("--frame-cols", kg.frame_cols, "Latent plane cols");

  EmbedArgs em;
  CLI::App* embed = app.add_subcommand("embed", "Embed a key into a latent file");
  embed->add_option("--key", em.key_path, "Key JSON path")->required();
  embed->add_option("--noise-key", em.noise_key_path, "Optional companion noise key JSON");
  embed->add_option("--in", em.in_path, "Input latent file");
  CLI::Option* gen_seed_opt =
      embed->add_option("--gen-seed", em.gen_seed, "Generate the carrier latent from this seed");
  embed->add_option("--out", em.out_path, "Output latent file")->required();

  ExtractArgs ex;
  CLI::App* extract = app.add_subcommand("extract", "Dump masked spectrum values as CSV");
  extract->add_option("--key", ex.key_path, "Key JSON path")->required();
  extract->add_option("--in", ex.in_path, "Input latent file")->required();
  extract->add_option("--out", ex.out_path, "Output CSV path (stdout when omitted)");

  AttackArgs at;
  CLI::App* attack = app.add_subcommand("attack", "Run a latent through the surrogate channel");
  attack->add_option("--in", at.in_path, "Input latent file")->required();
  attack->add_option("--out", at.out_path, "Output latent file")->required();
  attack->add_option("--attack", at.attack_json, "Attack spec as inline JSON");
  attack->add_option("--attack-file", at.attack_file, "Attack spec JSON file");
  attack->add_option("--sigma-inv", at.sigma_inv, "Inversion noise sigma");
  attack->add_option("--seed", at.seed, "Channel seed");

  DetectArgs de;
  CLI::App* detect = app.add_subcommand("detect", "Score one latent against one key");
  detect->add_option("--key", de.key_path, "Key JSON path")->required();
  detect->add_option("--noise-key", de.noise_key_path, "Optional companion noise key JSON");
  detect->add_option("--in", de.in_path, "Input latent file")->required();

  VerifyArgs ve;
  CLI::App* verify = app.add_subcommand("verify", "ROC summary from score files (one value per line)");
  verify->add_option("--pos", ve.pos_path, "Watermarked scores file")->required();
  verify->add_option("--neg", ve.neg_path, "Null scores file")->required();
  verify->add_option("--roc-csv", ve.roc_csv_path, "Write ROC points CSV here");
  verify->add_option("--roc-svg", ve.roc_svg_path, "Write ROC plot SVG here");

  IdentifyArgs id;
  CLI::App* identify = app.add_subcommand("identify", "Find the closest key in a seeded pool");
  identify->add_option("--in", id.in_path, "Input latent file")->required();
  identify->add_option("--method", id.method, "tree_ring | tree_ring_real_only | hstr | hsqr");
  identify->add_option("--seed", id.seed, "Pool master seed");
  identify->add_option("--pool-size", id.pool_size, "Number of candidate keys");
  identify->add_option("--det-components", id.det_components, "1 or 2 (0 = preset default)");

  GaussianityArgs ga;
  CLI::App* gaussianity = app.add_subcommand("gaussianity", "KS normality check over embedded latents");
  gaussianity->add_option("--method", ga.method, "Preset name or 'none' for a clean baseline");
  gaussianity->add_option("--n", ga.n, "Batch size");
  gaussianity->add_option("--seed", ga.seed, "Master seed");
  gaussianity->add_option("--alpha", ga.alpha, "KS significance level");
  gaussianity->add_option("--threads", ga.threads, "Worker threads");

  BenchArgs be;
  CLI::App* bench = app.add_subcommand("bench", "Seeded benchmark studies writing CSV tables");
  bench->add_option("--out", be.out_dir, "Output directory");
  bench->add_option("--config", be.config_path, "Run this experiment config instead of the built-ins");
  bench->add_option("--study", be.study, "all | ablation | crop | capacity");
  bench->add_option("--seed", be.seed, "Master seed");
  bench->add_option("--n", be.n, "Sample pairs per cell");
  bench->add_option("--pool", be.pool, "Key pool size (ablation and crop studies)");
  bench->add_option("--threads", be.threads, "Worker threads");
  bench->add_flag("--roc-svg", be.roc_svg, "Also write ROC plots as SVG");

  try {
    app.parse(argc, argv);
    em.has_gen_seed = gen_seed_opt->count() > 0;
    if (*keygen) return cmd_keygen(kg);
    if (*embed) return cmd_embed(em);
    if (*extract) return cmd_extract(ex);
    if (*attack) return cmd_attack(at);
    if (*detect) return cmd_detect(de);
    if (*verify) return cmd_verify(ve);
    if (*identify) return cmd_identify(id);
    if (*gaussianity) return cmd_gaussianity(ga);
    if (*bench) return cmd_bench(be);
    throw std::runtime_error("no subcommand selected");
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
}
