#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "paac/agents.hpp"
#include "paac/bench.hpp"
#include "paac/common.hpp"
#include "paac/textio.hpp"

namespace paac {

// CSV emission with a fixed column order and shortest round-trip float
// formatting, so identical configs produce byte-identical files.

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

// curves.csv: one row per (variant, trial, evaluation).
inline void write_curves_csv(std::ostream& out, const ExperimentResult& result,
                             std::uint64_t eval_seed_base) {
  const std::size_t n_seeds =
      result.variants.empty() ? 0
                              : result.variants.front().matrix.n_env_seeds;
  out << "step,variant,trial_seed,mean_eval_cost";
  for (std::size_t s = 0; s < n_seeds; ++s) out << ",cost_seed" << (eval_seed_base + s);
  out << '\n';
  for (const VariantResult& vr : result.variants) {
    for (std::size_t t = 0; t < vr.logs.size(); ++t) {
      for (const EvalRecord& rec : vr.logs[t].evals) {
        out << rec.step << ',' << variant_name(vr.variant) << ',' << t << ','
            << format_double(rec.mean_cost);
        for (double c : rec.per_seed_costs) out << ',' << format_double(c);
        out << '\n';
      }
    }
  }
}

// evalmatrix.csv: fully unrolled (variant, trial, eval, env_seed) cells.
inline void write_evalmatrix_csv(std::ostream& out, const ExperimentResult& result,
                                 std::uint64_t eval_seed_base) {
  out << "variant,trial_seed,eval_index,env_seed,total_cost\n";
  for (const VariantResult& vr : result.variants) {
    for (std::size_t t = 0; t < vr.matrix.n_trials; ++t) {
      for (std::size_t e = 0; e < vr.matrix.n_evals; ++e) {
        for (std::size_t s = 0; s < vr.matrix.n_env_seeds; ++s) {
          out << variant_name(vr.variant) << ',' << t << ',' << e << ','
              << (eval_seed_base + s) << ',' << format_double(vr.matrix.at(t, e, s))
              << '\n';
        }
      }
    }
  }
}

// metrics.csv: one row per variant. Standard deviations use the population
// form; success_rate counts strict threshold hits.
inline void write_metrics_csv(std::ostream& out, const ExperimentResult& result) {
  out << "variant,total_cost,learning_variance,robustness,auc,success_rate\n";
  for (const VariantResult& vr : result.variants) {
    out << variant_name(vr.variant);
    if (vr.metrics_defined) {
      out << ',' << format_double(vr.metrics.total_cost) << ','
          << format_double(vr.metrics.learning_variance) << ','
          << format_double(vr.metrics.robustness) << ','
          << format_double(vr.metrics.auc) << ','
          << format_double(vr.metrics.success_rate);
    } else {
      out << ",nan,nan,nan,nan," << format_double(0.0);
    }
    out << '\n';
  }
}

inline void write_variance_csv(std::ostream& out, const VarianceProbeResult& r) {
  out << "branch,variance,n_batches,batch_size\n";
  out << "q," << format_double(r.var_q) << ',' << r.n_batches << ',' << r.batch_size
      << '\n';
  out << "td_linear," << format_double(r.var_td_linear) << ',' << r.n_batches << ','
      << r.batch_size << '\n';
  out << "td_squared," << format_double(r.var_td_squared) << ',' << r.n_batches << ','
      << r.batch_size << '\n';
}

}  // namespace paac
