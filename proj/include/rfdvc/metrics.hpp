#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfdvc/parallel.hpp"
#include "rfdvc/types.hpp"

namespace rfdvc {

// Per-run (or per-frame) quality record. Constraint verdicts are tri-state:
// -1 not evaluated, 0 fail, 1 pass.
struct QualityReport {
  std::string variant;
  std::string condition;
  std::string traffic;
  int quant_step = 0;
  double bler_target = 0.0;
  double realized_loss = 0.0;
  uint64_t raw_bytes = 0;
  uint64_t compressed_bytes = 0;  // codec container + polygon side-channel
  double savings_pct = 0.0;
  double psnr_rec_db = 0.0;
  double ssim_rec = 0.0;
  double ssim_delta = 0.0;
  int c_throughput = -1;
  int c_delta_quality = -1;
  int c_rec_quality = -1;
  int c_loss = -1;
  int c_robustness = -1;
};

struct ConstraintSpec {
  double t_net_bps = 10e6;  // available throughput, bits/s
  double tau_s = 0.333;     // latency budget
  double q_min_delta = 0.8;
  double q_min_rec = 0.8;
  double epsilon = 0.3;  // maximum allowable packet loss

  void validate() const;  // throws std::invalid_argument
};

struct ConstraintVerdicts {
  bool throughput = false;
  bool delta_quality = false;
  bool rec_quality = false;
  bool loss = false;
  bool robustness = false;
};

// 10*log10(255^2 / MSE) over all RGB samples, capped at 99 dB.
double psnr(const Frame& a, const Frame& b);

// Mean SSIM on luma; 11x11 Gaussian window (sigma 1.5), stride 1, valid
// region only, Wang constants C1=(0.01*255)^2, C2=(0.03*255)^2.
double ssim(const Frame& a, const Frame& b, Exec exec = Exec::Parallel);

double data_savings(uint64_t raw_bytes, uint64_t compressed_bytes);       // percent
double compression_ratio(uint64_t raw_bytes, uint64_t compressed_bytes);  // raw/comp

// Savings of an RFDVC run relative to the plain maskless baseline run on
// the same scene and codec settings.
double rfdvc_savings_vs_baseline(const QualityReport& rfdvc, const QualityReport& vc);

// Evaluates Eq.-style constraints. The robustness verdict quantifies over
// reports_all_conditions, which must cover every condition in `required`
// (throws when coverage is missing).
ConstraintVerdicts evaluate_constraints(const QualityReport& report, const ConstraintSpec& spec,
                                        const std::vector<QualityReport>& reports_all_conditions,
                                        const std::vector<Condition>& required);

// QualityReport CSV (exact column order, PASS/FAIL/NA verdict cells).
std::string quality_csv_header();
std::string quality_csv_row(const QualityReport& r);

}  // namespace rfdvc
