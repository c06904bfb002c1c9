#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "lens/shooting.hpp"

namespace lens {

/// Outcome of one end-to-end acceptance check.
struct CriterionResult {
  int number = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string summary;     ///< one line with the decisive numbers
  nlohmann::json detail;   ///< everything measured; deterministic (no timings)
};

struct VerifyOptions {
  PipelineConfig cfg{};
  double a_lo = 0.05;
  double a_hi = kSqrt2;
  double tol_a = 1e-10;
  int shoot_samples = 8;
  unsigned jobs = 1;
};

/// Shared state between criteria so the lens root is computed once.
class VerifySession {
 public:
  explicit VerifySession(VerifyOptions opt = {}) : opt_(std::move(opt)) {}
  [[nodiscard]] const VerifyOptions& options() const { return opt_; }
  /// Shoot report at the configured bracket; computed on first use.
  const ShootReport& shoot_report();
  /// Wall time of the shoot, measured when it ran.
  [[nodiscard]] double shoot_seconds() const { return shoot_seconds_; }

 private:
  VerifyOptions opt_;
  std::optional<ShootReport> shoot_;
  double shoot_seconds_ = 0.0;
};

CriterionResult verify_circle(VerifySession& s);
CriterionResult verify_lens(VerifySession& s);
CriterionResult verify_small_a(VerifySession& s);
CriterionResult verify_curvature(VerifySession& s);
CriterionResult verify_monitors(VerifySession& s);
CriterionResult verify_operators(VerifySession& s);
CriterionResult verify_cross_oracle(VerifySession& s);
CriterionResult verify_mesh(VerifySession& s);

std::vector<CriterionResult> verify_all(VerifySession& s);

/// "[PASS] 3 small-a asymptotics (0.41 s): ..." style line.
std::string criterion_line(const CriterionResult& r);
nlohmann::json criteria_to_json(const std::vector<CriterionResult>& results);

}  // namespace lens
