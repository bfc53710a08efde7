#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "latent.hpp"
#include "qr.hpp"
#include "watermark.hpp"

namespace sfw {

// A pattern key plus the channel-0 noise key that rides along with it in the
// symmetric schemes. Distances over a bundle sum both masks with equal
// weight.
struct KeyBundle {
  WatermarkKey method;
  std::optional<WatermarkKey> noise;
};

// Builds the method key and, when requested, a companion noise key on
// channel 0 with the same region/frame. Both keys derive deterministically
// from the bundle seed.
inline KeyBundle make_bundle(const KeySpec& method_spec, bool with_noise_key, uint64_t seed) {
  KeyBundle bundle;
  bundle.method = make_key(method_spec, seed);
  if (with_noise_key) {
    KeySpec ns;
    ns.kind = WatermarkKind::noise_key;
    ns.region = method_spec.region;
    ns.frame_rows = method_spec.frame_rows;
    ns.frame_cols = method_spec.frame_cols;
    bundle.noise = make_key(ns, derive_seed(seed, seed_stream::key_choice, 0));
  }
  return bundle;
}

inline LatentTensor embed_bundle(const LatentTensor& latent, const KeyBundle& bundle) {
  LatentTensor out = embed(latent, bundle.method);
  if (bundle.noise) out = embed(out, *bundle.noise);
  return out;
}

// L1 over the tagged components of the mask: the core distance of the whole
// scheme. reference must be aligned with mask.entries.
inline double l1_distance(const Spectrum& query_centered, const std::vector<cplx>& reference,
                          const KeyRegionMask& mask) {
  if (reference.size() != mask.entries.size())
    throw std::invalid_argument("l1_distance: reference/mask length mismatch");
  std::vector<cplx> got = masked_values(query_centered, mask);
  double acc = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    if (mask.entries[i].re) acc += std::abs(got[i].real() - reference[i].real());
    if (mask.entries[i].im) acc += std::abs(got[i].imag() - reference[i].imag());
  }
  return acc;
}

// Pre-flattened reference scalars for a pool of same-geometry bundles, laid
// out key-major so a pool scan is one tight sweep per query. det_components
// selects how the method mask counts: 2 = both components, 1 = real only
// (the ablation's detection-mode switch). The noise mask always keeps its
// own tagging.
struct PoolIndex {
  KeyRegionMask method_mask;                 // efter det_components restriction
  std::optional<KeyRegionMask> noise_mask;
  size_t method_scalars = 0;
  size_t noise_scalars = 0;
  std::vector<double> method_refs;           // pool_size x method_scalars
  std::vector<double> noise_refs;            // pool_size x noise_scalars
  size_t pool_size = 0;
};

inline PoolIndex build_pool_index(const std::vector<KeyBundle>& pool, int det_components = 2) {
  if (pool.empty()) throw std::invalid_argument("build_pool_index: empty pool");
  if (det_components != 1 && det_components != 2)
    throw std::invalid_argument("build_pool_index: det_components must be 1 or 2");

  PoolIndex idx;
  idx.pool_size = pool.size();
  KeyRegionMask full_method_mask = key_region_mask(pool.front().method);
  idx.method_mask = det_components == 2 ? full_method_mask
                                        : restrict_components(full_method_mask, true, false);
  idx.method_scalars = idx.method_mask.scalar_count();
  if (pool.front().noise) {
    idx.noise_mask = key_region_mask(*pool.front().noise);
    idx.noise_scalars = idx.noise_mask->scalar_count();
  }

  const bool keep_im = det_components == 2;
  idx.method_refs.reserve(idx.pool_size * idx.method_scalars);
  idx.noise_refs.reserve(idx.pool_size * idx.noise_scalars);
  for (const KeyBundle& b : pool) {
    KeyRegionMask bm = key_region_mask(b.method);
    if (bm.window != full_method_mask.window || bm.channel != full_method_mask.channel ||
        bm.entries.size() != full_method_mask.entries.size())
      throw std::invalid_argument("build_pool_index: pool keys disagree on mask geometry");
    // Reference values align with the full mask; flatten through the same
    // component filter the restricted mask applies so scalar order matches
    // flatten_query's output.
    std::vector<cplx> ref = reference_pattern(b.method);
    for (size_t i = 0; i < ref.size(); ++i) {
      if (bm.entries[i].re) idx.method_refs.push_back(ref[i].real());
      if (bm.entries[i].im && keep_im) idx.method_refs.push_back(ref[i].imag());
    }

    if (idx.noise_mask.has_value() != b.noise.has_value())
      throw std::invalid_argument("build_pool_index: pool keys disagree on noise bundling");
    if (b.noise) {
      std::vector<double> nf = flatten_components(reference_pattern(*b.noise), *idx.noise_mask);
      idx.noise_refs.insert(idx.noise_refs.end(), nf.begin(), nf.end());
    }
  }
  return idx;
}

// One query reduced to the scalar components the pool index compares
// against.
struct FlatQuery {
  std::vector<double> method;
  std::vector<double> noise;
};

inline FlatQuery flatten_query(const LatentTensor& query, const PoolIndex& idx, EmbedRegion region) {
  FlatQuery fq;
  Spectrum ms = extract_spectrum(query, idx.method_mask.channel, region);
  fq.method = flatten_components(masked_values(ms, idx.method_mask), idx.method_mask);
  if (idx.noise_mask) {
    Spectrum ns = extract_spectrum(query, idx.noise_mask->channel, region);
    fq.noise = flatten_components(masked_values(ns, *idx.noise_mask), *idx.noise_mask);
  }
  return fq;
}

inline double flat_l1(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

// Distance of a flattened query to one pool entry.
inline double pool_distance(const FlatQuery& fq, const PoolIndex& idx, size_t key) {
  double d = flat_l1(fq.method.data(), idx.method_refs.data() + key * idx.method_scalars,
                     idx.method_scalars);
  if (idx.noise_mask)
    d += flat_l1(fq.noise.data(), idx.noise_refs.data() + key * idx.noise_scalars,
                 idx.noise_scalars);
  return d;
}

// Argmin scan over the pool. Strict improvement on an ascending scan makes
// ties resolve to the lowest index.
inline std::pair<size_t, double> identify(const FlatQuery& fq, const PoolIndex& idx) {
  size_t best = 0;
  double best_d = pool_distance(fq, idx, 0);
  for (size_t k = 1; k < idx.pool_size; ++k) {
    double d = pool_distance(fq, idx, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return {best, best_d};
}

// Convenience single-shot forms for tool code; batch callers should reuse a
// PoolIndex.
inline double bundle_distance(const LatentTensor& query, const KeyBundle& bundle, int det_components = 2) {
  std::vector<KeyBundle> one{bundle};
  PoolIndex idx = build_pool_index(one, det_components);
  FlatQuery fq = flatten_query(query, idx, bundle.method.region);
  return pool_distance(fq, idx, 0);
}

inline std::pair<size_t, double> identify(const LatentTensor& query, const std::vector<KeyBundle>& pool,
                                          int det_components = 2) {
  PoolIndex idx = build_pool_index(pool, det_components);
  FlatQuery fq = flatten_query(query, idx, pool.front().method.region);
  return identify(fq, idx);
}

// ROC sweep of "watermarked iff score <= threshold" over all distinct
// scores. Lower scores mean watermarked.
struct RocSummary {
  std::vector<double> thresholds;  // ascending distinct scores
  std::vector<double> tpr;         // per threshold
  std::vector<double> fpr;
  double auc = 0.0;
  double tpr_at_1pct_fpr = 0.0;
  double max_accuracy = 0.0;
};

inline RocSummary verify_batch(std::vector<double> pos, std::vector<double> neg) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("verify_batch: empty score list");
  const double P = static_cast<double>(pos.size());
  const double N = static_cast<double>(neg.size());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> cuts;
  cuts.reserve(pos.size() + neg.size());
  std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(cuts));
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  RocSummary out;
  out.thresholds = cuts;
  out.tpr.reserve(cuts.size());
  out.fpr.reserve(cuts.size());

  double prev_tpr = 0.0, prev_fpr = 0.0;
  out.max_accuracy = N / (P + N);  // the "reject everything" threshold
  for (double t : cuts) {
    double tp = static_cast<double>(std::upper_bound(pos.begin(), pos.end(), t) - pos.begin());
    double fp = static_cast<double>(std::upper_bound(neg.begin(), neg.end(), t) - neg.begin());
    double tpr = tp / P, fpr = fp / N;
    out.tpr.push_back(tpr);
    out.fpr.push_back(fpr);
    if (fpr <= 0.01) out.tpr_at_1pct_fpr = std::max(out.tpr_at_1pct_fpr, tpr);
    out.max_accuracy = std::max(out.max_accuracy, (tp + (N - fp)) / (P + N));
    out.auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  // The largest score always yields (1,1), so the curve is complete.
  return out;
}

// Reads the QR payload back out of an HSQR query spectrum: masked components
// -> signed pixel grid -> cell means -> symbol decode. nullopt when the code
// is beyond repair.
struct HsqrDecode {
  Payload72 payload;
  int corrected = 0;
  int qr_mask_id = 0;
};

inline std::optional<HsqrDecode> decode_hsqr(const Spectrum& query_centered, const WatermarkKey& key) {
  if (key.kind != WatermarkKind::hsqr) throw std::invalid_argument("decode_hsqr: key is not hsqr");
  KeyRegionMask mask = key_region_mask(key);
  std::vector<cplx> vals = masked_values(query_centered, mask);

  const int rows = QrMatrix::size * key.cell_px;
  const int half = rows / 2;
  RealPlane pix(rows, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < half; ++j) {
      const cplx& v = vals[static_cast<size_t>(i) * half + static_cast<size_t>(j)];
      pix.at(i, j) = v.real();
      pix.at(i, j + half) = v.imag();
    }

  QrMatrix qm = modules_from_means(cell_downsample(pix, key.cell_px));
  auto got = qr_read(qm);
  if (!got) return std::nullopt;
  return HsqrDecode{got->payload, got->corrected, got->mask_id};
}

inline double bit_accuracy(const Payload72& decoded, const Payload72& truth) {
  int match = 0;
  for (int i = 0; i < 72; ++i) match += decoded.bit(i) == truth.bit(i);
  return static_cast<double>(match) / 72.0;
}

// Asymptotic Kolmogorov survival function Q(lambda) =
// 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_survival(double lambda) {
  // Below 0.2 the survival probability is 1 to within ~5e-13 and the
  // alternating series converges too slowly to be worth summing.
  if (!(lambda > 0.2)) return 1.0;
  double sum = 0.0;
  for (int k = 1;; ++k) {
    double term = std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (k >= 100 && term < 1e-12) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
};

// One-sample KS test against the standard normal.
inline KsResult ks_test(std::vector<double> samples) {
  if (samples.size() < 8) throw std::invalid_argument("ks_test: need at least 8 samples");
  for (double x : samples)
    if (!std::isfinite(x)) throw std::invalid_argument("ks_test: non-finite sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());

  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    double cdf = 0.5 * std::erfc(-samples[i] / std::sqrt(2.0));
    double hi = (static_cast<double>(i) + 1.0) / n;
    double lo = static_cast<double>(i) / n;
    d = std::max(d, std::max(hi - cdf, cdf - lo));
  }
  KsResult r;
  r.d = d;
  r.p_value = kolmogorov_survival(std::sqrt(n) * d);
  return r;
}

// Fraction of latents whose flattened samples fail the KS normality test at
// level alpha.
inline double ks_failure_rate(const std::vector<LatentTensor>& batch, double alpha = 0.05) {
  if (batch.empty()) throw std::invalid_argument("ks_failure_rate: empty batch");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("ks_failure_rate: alpha must be in (0,1]");
  int failures = 0;
  for (const LatentTensor& t : batch) failures += ks_test(t.v).p_value < alpha;
  return static_cast<double>(failures) / static_cast<double>(batch.size());
}

}  // namespace sfw
