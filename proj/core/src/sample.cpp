#include "edsym/sample.hpp"

#include <cstdlib>
#include <random>

namespace edsym {

SamplePlan default_plan() {
  SamplePlan p;
  if (const char* s = std::getenv("EDSYM_SEED")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(s, &end, 10);
    if (end == s || *end != '\0')
      fail(Errc::UsageError, std::string("EDSYM_SEED is not an integer: ") + s);
    p.seed = v;
  }
  return p;
}

std::vector<SamplePoint> sample_points(const SampleDomain& dom,
                                       const SamplePlan& plan,
                                       const std::vector<Expr>& must_eval) {
  std::mt19937_64 rng(plan.seed);
  std::vector<SamplePoint> out;
  out.reserve(plan.samples);
  for (int p = 0; p < plan.samples; ++p) {
    int tries = 0;
    for (;;) {
      if (++tries > plan.max_retries)
        fail(Errc::AllSamplesSingular,
             "no sample satisfying the chart constraints after " +
                 std::to_string(plan.max_retries) + " attempts");
      SamplePoint pt;
      for (const auto& c : dom.coords) {
        SampleBox box;
        auto it = dom.boxes.find(c);
        if (it != dom.boxes.end()) box = it->second;
        pt[c] = std::uniform_real_distribution<double>(box.lo, box.hi)(rng);
      }
      bool ok = true;
      for (const auto& g : dom.positive) {
        try {
          if (eval_numeric(g, pt).value <= 0) {
            ok = false;
            break;
          }
        } catch (const Error& e) {
          if (e.code() != Errc::DomainViolation) throw;
          ok = false;
          break;
        }
      }
      for (size_t k = 0; ok && k < must_eval.size(); ++k) {
        try {
          eval_numeric(must_eval[k], pt);
        } catch (const Error& e) {
          if (e.code() != Errc::DomainViolation) throw;
          ok = false;
        }
      }
      if (ok) {
        out.push_back(std::move(pt));
        break;
      }
    }
  }
  return out;
}

ZeroCertificate certify_zero(const Expr& e, const SampleDomain& dom,
                             const SamplePlan& plan) {
  ZeroCertificate cert;
  cert.tol = plan.tol;
  if (e.is_zero()) {
    cert.zero = true;
    return cert;
  }
  cert.points = sample_points(dom, plan, {e});
  cert.zero = true;
  for (size_t i = 0; i < cert.points.size(); ++i) {
    EvalResult r = eval_numeric(e, cert.points[i]);
    cert.residuals.push_back(std::fabs(r.value));
    cert.scales.push_back(r.scale);
    if (std::fabs(r.value) > plan.tol * (1 + r.scale) && cert.zero) {
      cert.zero = false;
      cert.witness = static_cast<int>(i);
    }
  }
  return cert;
}

bool is_zero(const Expr& e, const SampleDomain& dom, const SamplePlan& plan) {
  return certify_zero(e, dom, plan).zero;
}

}  // namespace edsym
