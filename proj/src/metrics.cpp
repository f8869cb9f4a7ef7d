#include "rfdvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rfdvc {

namespace {

constexpr double kC1 = 6.5025;   // (0.01 * 255)^2
constexpr double kC2 = 58.5225;  // (0.03 * 255)^2
constexpr int kWin = 11;
constexpr double kPsnrCap = 99.0;

// Gaussian sigma=1.5 taps as exact literals; normalized once at startup so
// the window is identical in every build.
constexpr double kGaussRaw[kWin] = {
    0.0038659201394728076, 0.028565500784550377, 0.1353352832366127,
    0.41111229050718745,   0.8007374029168081,   1.0,
    0.8007374029168081,    0.41111229050718745,  0.1353352832366127,
    0.028565500784550377,  0.0038659201394728076};

struct Gauss {
  double w[kWin];
  Gauss() {
    double sum = 0;
    for (double v : kGaussRaw) sum += v;
    for (int i = 0; i < kWin; ++i) w[i] = kGaussRaw[i] / sum;
  }
};
const Gauss kGauss;

// Valid-region separable convolution: horizontal then vertical pass.
// Parallel rows write disjoint output; results are bit-identical to the
// serial path.
void conv_valid(const std::vector<double>& src, uint32_t w, uint32_t h, Exec exec,
                std::vector<double>& dst) {
  const uint32_t ow = w - kWin + 1, oh = h - kWin + 1;
  std::vector<double> tmp(size_t(ow) * h);
  parallel_for(exec, h, [&](int64_t y) {
    const double* row = src.data() + size_t(y) * w;
    double* out = tmp.data() + size_t(y) * ow;
    for (uint32_t x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kWin; ++k) s += kGauss.w[k] * row[x + k];
      out[x] = s;
    }
  });
  dst.resize(size_t(ow) * oh);
  parallel_for(exec, oh, [&](int64_t y) {
    double* out = dst.data() + size_t(y) * ow;
    for (uint32_t x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kWin; ++k) s += kGauss.w[k] * tmp[size_t(y + k) * ow + x];
      out[x] = s;
    }
  });
}

}  // namespace

double psnr(const Frame& a, const Frame& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("psnr: dimension mismatch");
  uint64_t sum_sq = 0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    int d = int(a.pixels[i]) - int(b.pixels[i]);
    sum_sq += uint64_t(int64_t(d) * d);
  }
  if (sum_sq == 0) return kPsnrCap;
  double mse = double(sum_sq) / double(a.pixels.size());
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const Frame& a, const Frame& b, Exec exec) {
  if (!a.same_dims(b)) throw std::invalid_argument("ssim: dimension mismatch");
  if (a.width < kWin || a.height < kWin) throw std::invalid_argument("ssim: frame too small");
  const uint32_t w = a.width, h = a.height;
  std::vector<double> la = luma(a), lb = luma(b);
  size_t n = la.size();
  std::vector<double> laa(n), lbb(n), lab(n);
  for (size_t i = 0; i < n; ++i) {
    laa[i] = la[i] * la[i];
    lbb[i] = lb[i] * lb[i];
    lab[i] = la[i] * lb[i];
  }
  std::vector<double> mu_a, mu_b, s_aa, s_bb, s_ab;
  conv_valid(la, w, h, exec, mu_a);
  conv_valid(lb, w, h, exec, mu_b);
  conv_valid(laa, w, h, exec, s_aa);
  conv_valid(lbb, w, h, exec, s_bb);
  conv_valid(lab, w, h, exec, s_ab);

  const uint32_t ow = w - kWin + 1, oh = h - kWin + 1;
  std::vector<double> row_sum(oh, 0.0);
  parallel_for(exec, oh, [&](int64_t y) {
    double acc = 0;
    for (uint32_t x = 0; x < ow; ++x) {
      size_t i = size_t(y) * ow + x;
      double ma = mu_a[i], mb = mu_b[i];
      double va = s_aa[i] - ma * ma;
      double vb = s_bb[i] - mb * mb;
      double cov = s_ab[i] - ma * mb;
      double num = (2 * ma * mb + kC1) * (2 * cov + kC2);
      double den = (ma * ma + mb * mb + kC1) * (va + vb + kC2);
      acc += num / den;
    }
    row_sum[size_t(y)] = acc;
  });
  double total = 0;
  for (double v : row_sum) total += v;  // fixed order, thread-count independent
  return total / (double(ow) * double(oh));
}

double data_savings(uint64_t raw_bytes, uint64_t compressed_bytes) {
  if (raw_bytes == 0) throw std::invalid_argument("data_savings: raw_bytes must be > 0");
  return 100.0 * (1.0 - double(compressed_bytes) / double(raw_bytes));
}

double compression_ratio(uint64_t raw_bytes, uint64_t compressed_bytes) {
  if (compressed_bytes == 0)
    throw std::invalid_argument("compression_ratio: compressed_bytes must be > 0");
  return double(raw_bytes) / double(compressed_bytes);
}

double rfdvc_savings_vs_baseline(const QualityReport& rfdvc, const QualityReport& vc) {
  if (vc.compressed_bytes == 0)
    throw std::invalid_argument("rfdvc_savings_vs_baseline: baseline bytes must be > 0");
  return 100.0 * (1.0 - double(rfdvc.compressed_bytes) / double(vc.compressed_bytes));
}

void ConstraintSpec::validate() const {
  if (t_net_bps <= 0 || tau_s <= 0) throw std::invalid_argument("throughput/latency must be > 0");
  if (q_min_delta < -1 || q_min_delta > 1 || q_min_rec < -1 || q_min_rec > 1)
    throw std::invalid_argument("quality thresholds must be valid SSIM values");
  if (epsilon < 0 || epsilon > 1) throw std::invalid_argument("epsilon must be in [0, 1]");
}

ConstraintVerdicts evaluate_constraints(const QualityReport& report, const ConstraintSpec& spec,
                                        const std::vector<QualityReport>& reports_all_conditions,
                                        const std::vector<Condition>& required) {
  spec.validate();
  ConstraintVerdicts v;
  v.throughput = double(report.compressed_bytes) * 8.0 <= spec.t_net_bps * spec.tau_s;
  v.delta_quality = report.ssim_delta >= spec.q_min_delta;
  v.rec_quality = report.ssim_rec >= spec.q_min_rec;
  v.loss = report.realized_loss <= spec.epsilon;
  for (Condition c : required) {
    bool found = false;
    for (const auto& r : reports_all_conditions)
      if (r.condition == to_string(c)) {
        found = true;
        break;
      }
    if (!found)
      throw std::invalid_argument(std::string("missing condition coverage: ") + to_string(c));
  }
  v.robustness = true;
  for (const auto& r : reports_all_conditions)
    if (r.ssim_delta < spec.q_min_delta) v.robustness = false;
  return v;
}

std::string quality_csv_header() {
  return "variant,condition,traffic,quant_step,bler_target,realized_loss,raw_bytes,"
         "compressed_bytes,savings_pct,psnr_rec_db,ssim_rec,ssim_delta,c_throughput,"
         "c_delta_quality,c_rec_quality,c_loss,c_robustness";
}

namespace {
const char* verdict_str(int v) { return v < 0 ? "NA" : (v == 0 ? "FAIL" : "PASS"); }
}  // namespace

std::string quality_csv_row(const QualityReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%s,%s,%d,%.6f,%.6f,%llu,%llu,%.6f,%.6f,%.6f,%.6f,%s,%s,%s,%s,%s",
                r.variant.c_str(), r.condition.c_str(), r.traffic.c_str(), r.quant_step,
                r.bler_target, r.realized_loss, (unsigned long long)r.raw_bytes,
                (unsigned long long)r.compressed_bytes, r.savings_pct, r.psnr_rec_db, r.ssim_rec,
                r.ssim_delta, verdict_str(r.c_throughput), verdict_str(r.c_delta_quality),
                verdict_str(r.c_rec_quality), verdict_str(r.c_loss), verdict_str(r.c_robustness));
  return std::string(buf);
}

}  // namespace rfdvc
