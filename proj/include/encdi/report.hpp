#ifndef ENCDI_REPORT_HPP
#define ENCDI_REPORT_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "encdi/entropy.hpp"
#include "encdi/inference.hpp"
#include "encdi/similarity.hpp"

namespace encdi::report {

using nlohmann::ordered_json;

inline constexpr const char* kToolkitVersion = "1.0.0";

// FNV-1a digest of the resolved parameter string, hex-encoded.
inline std::string digest(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunManifest {
  std::string subcommand;
  std::string config_digest;
  std::vector<std::string> input_paths;
  std::uint64_t seed = 0;
};

inline ordered_json to_json(const RunManifest& m) {
  return ordered_json{{"subcommand", m.subcommand},
                      {"config_digest", m.config_digest},
                      {"input_paths", m.input_paths},
                      {"seed", m.seed},
                      {"toolkit_version", kToolkitVersion}};
}

inline ordered_json to_json(const inference::OwnershipVerdict& v) {
  return ordered_json{{"label", v.label},
                      {"u_p", v.u_p},
                      {"u_n", v.u_n},
                      {"t", v.t_result.t_statistic},
                      {"dof", v.t_result.dof},
                      {"p_value", v.t_result.p_value},
                      {"alpha", v.alpha},
                      {"decision", inference::to_string(v.decision)},
                      {"k", v.k},
                      {"covariance_kind", gmm::to_string(v.covariance_kind)},
                      {"n_p1", v.n_p1},
                      {"n_n", v.n_n},
                      {"seed", v.seed}};
}

inline ordered_json to_json(const similarity::SimilarityReport& r) {
  return ordered_json{{"cosine_score", r.cosine_score},
                      {"l2_score", r.l2_score},
                      {"l1_mean", r.l1_mean},
                      {"l1_stderr", r.l1_stderr},
                      {"l2_mean", r.l2_mean},
                      {"l2_stderr", r.l2_stderr},
                      {"linf_mean", r.linf_mean},
                      {"linf_stderr", r.linf_stderr},
                      {"n_pairs", r.n_pairs}};
}

inline ordered_json to_json(const entropy::EntropyEstimate& e) {
  return ordered_json{{"value", e.value},
                      {"n_points", e.n_points},
                      {"dim", e.dim},
                      {"n_clamped", e.n_clamped}};
}

inline ordered_json to_json(const entropy::MutualInfoScore& s) {
  return ordered_json{
      {"i_raw", s.i_raw}, {"i_min", s.i_min}, {"i_max", s.i_max}, {"s", s.s}};
}

}  // namespace encdi::report

#endif  // ENCDI_REPORT_HPP
