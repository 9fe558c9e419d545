// encdi: dataset-inference and encoder-forensics command line tool.
//
// Subcommands: synth-gen, infer, similarity, entropy, obfuscate.
// Exit codes: 0 success (the verdict itself is data, not a failure),
// 2 invalid flags or malformed inputs, 3 I/O failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "encdi/entropy.hpp"
#include "encdi/gmm.hpp"
#include "encdi/inference.hpp"
#include "encdi/obfuscate.hpp"
#include "encdi/preprocess.hpp"
#include "encdi/repio.hpp"
#include "encdi/report.hpp"
#include "encdi/similarity.hpp"
#include "encdi/stats.hpp"
#include "encdi/synth.hpp"
#include "encdi/types.hpp"

namespace fs = std::filesystem;
using encdi::report::ordered_json;

namespace {

int exit_code_for(const encdi::Error& e) {
  switch (e.code()) {
    case encdi::ErrorCode::IoFailure:
      return 3;
    default:
      return 2;
  }
}

void emit(const ordered_json& doc, const std::string& out_path) {
  std::string text = doc.dump(2);
  text.push_back('\n');
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out_path, std::ios::trunc);
    if (!os || !(os << text))
      throw encdi::Error(encdi::ErrorCode::IoFailure,
                         out_path + ": cannot write report");
  }
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("ENCODER_DI_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

struct Timing {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  ordered_json finish() const {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();
    return ordered_json{{"wall_ms", ms}};
  }
};

encdi::RepresentationSet load(const std::string& path) {
  if (!fs::exists(path))
    throw encdi::Error(encdi::ErrorCode::IoFailure, path + ": no such file");
  return encdi::repio::read_representations(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataset inference and similarity forensics for encoder "
               "representations"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  int threads_flag = 0;
  bool with_timing = false;
  app.add_option("--threads", threads_flag,
                 "Worker thread cap (default: ENCODER_DI_THREADS or 1)");
  app.add_flag("--timing", with_timing,
               "Include wall-clock timing in reports (breaks byte "
               "reproducibility)");

  // --- synth-gen --------------------------------------------------------
  auto* synth_cmd = app.add_subcommand(
      "synth-gen", "Generate a synthetic victim/stolen/independent world");
  encdi::synth::SyntheticWorldConfig world_cfg;
  std::string steal_map_name = "orthogonal";
  std::string out_dir;
  synth_cmd->add_option("--dim", world_cfg.dim, "Representation dimension");
  synth_cmd->add_option("--clusters", world_cfg.n_clusters, "Latent clusters");
  synth_cmd->add_option("--rho", world_cfg.gap_rho,
                        "Membership-gap factor in (0, 1]");
  synth_cmd->add_option("--steal-noise", world_cfg.steal_noise,
                        "Stolen-map noise sigma");
  synth_cmd->add_option("--steal-map", steal_map_name,
                        "Stealing map: orthogonal or random_linear");
  synth_cmd->add_option("--n-p1", world_cfg.n_p1, "Rows in split P1");
  synth_cmd->add_option("--n-p2", world_cfg.n_p2, "Rows in split P2");
  synth_cmd->add_option("--n-n", world_cfg.n_n, "Rows in split N");
  synth_cmd->add_option("--seed", world_cfg.seed, "Master seed");
  synth_cmd->add_option("--out", out_dir, "Output directory")->required();

  // --- infer ------------------------------------------------------------
  auto* infer_cmd =
      app.add_subcommand("infer", "Run dataset inference on three REPR files");
  std::string p1_path, p2_path, n_path, infer_out, infer_label = "suspect";
  encdi::gmm::GmmFitConfig gmm_cfg;
  encdi::inference::InferenceOptions infer_opts;
  std::string cov_name = "full";
  bool k_set = false, cov_set = false;
  infer_cmd->add_option("--p1", p1_path, "Evaluation split (D_P1)")->required();
  infer_cmd->add_option("--p2", p2_path, "Estimator training split (D_P2)")
      ->required();
  infer_cmd->add_option("--n", n_path, "Held-out test split (D_N)")->required();
  infer_cmd->add_option("--k", gmm_cfg.k, "Mixture components")
      ->each([&](const std::string&) { k_set = true; });
  infer_cmd->add_option("--cov", cov_name, "Covariance kind: diag or full")
      ->each([&](const std::string&) { cov_set = true; });
  infer_cmd->add_option("--alpha", infer_opts.alpha, "Significance level");
  infer_cmd->add_flag("--standardize", infer_opts.standardize,
                      "Standardize per dimension (fit on P2) before "
                      "normalization");
  infer_cmd->add_option("--max-iters", gmm_cfg.max_iters, "EM iteration cap");
  infer_cmd->add_option("--rel-tol", gmm_cfg.rel_tol,
                        "EM relative log-likelihood tolerance");
  infer_cmd->add_option("--n-init", gmm_cfg.n_init, "EM restarts");
  infer_cmd->add_option("--reg-floor", gmm_cfg.reg_floor,
                        "Covariance diagonal regularization");
  infer_cmd->add_option("--seed", gmm_cfg.seed, "Master seed");
  infer_cmd->add_option("--label", infer_label, "Suspect label in the report");
  infer_cmd->add_option("--out", infer_out, "Report path (default stdout)");

  // --- similarity -------------------------------------------------------
  auto* sim_cmd = app.add_subcommand(
      "similarity", "Cosine / l2 / lp similarity between two aligned files");
  std::string sim_a, sim_b, sim_out, hist_out;
  bool sim_raw = false;
  std::size_t hist_bins = 20;
  sim_cmd->add_option("--a", sim_a, "First REPR file")->required();
  sim_cmd->add_option("--b", sim_b, "Second REPR file")->required();
  sim_cmd->add_flag("--raw", sim_raw, "Skip centering and normalization");
  sim_cmd->add_option("--hist-bins", hist_bins, "Histogram bin count");
  sim_cmd->add_option("--hist-out", hist_out,
                      "Write per-pair cosine histogram CSV here");
  sim_cmd->add_option("--out", sim_out, "Report path (default stdout)");

  // --- entropy ----------------------------------------------------------
  auto* ent_cmd = app.add_subcommand(
      "entropy",
      "Kozachenko-Leonenko entropy, mutual information, and MI score");
  std::string ent_a, ent_b, ent_baseline, ent_out;
  bool ent_raw = false;
  ent_cmd->add_option("--a", ent_a, "First REPR file")->required();
  ent_cmd->add_option("--b", ent_b, "Second REPR file (joint entropy + MI)");
  ent_cmd->add_option("--baseline", ent_baseline,
                      "Random-baseline REPR file (enables mi-score)");
  ent_cmd->add_flag("--raw", ent_raw, "Skip centering and normalization");
  ent_cmd->add_option("--out", ent_out, "Report path (default stdout)");

  // --- obfuscate --------------------------------------------------------
  auto* obf_cmd =
      app.add_subcommand("obfuscate", "Apply shuffle / pad / transform");
  std::string obf_in, obf_out_path, obf_kind = "shuffle", pad_mode = "append";
  encdi::obfuscate::ObfuscationSpec obf_spec;
  obf_cmd->add_option("--in", obf_in, "Input REPR file")->required();
  obf_cmd->add_option("--out", obf_out_path, "Output REPR file")->required();
  obf_cmd->add_option("--kind", obf_kind, "shuffle, pad, or transform");
  obf_cmd->add_option("--seed", obf_spec.seed, "Seed for shuffle/pad");
  obf_cmd->add_option("--pad-dim", obf_spec.pad_target_dim,
                      "Target dimension (pad)");
  obf_cmd->add_option("--pad-mode", pad_mode, "append or random_positions");
  obf_cmd->add_option("--scale", obf_spec.scale, "Scale (transform)");
  obf_cmd->add_option("--offset", obf_spec.offset, "Offset (transform)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  encdi::entropy::max_threads() = resolve_threads(threads_flag);

  try {
    Timing timing;

    if (*synth_cmd) {
      if (steal_map_name == "orthogonal")
        world_cfg.steal_map = encdi::synth::StealMap::Orthogonal;
      else if (steal_map_name == "random_linear")
        world_cfg.steal_map = encdi::synth::StealMap::RandomLinear;
      else
        throw encdi::Error(encdi::ErrorCode::BadConfig,
                           "--steal-map must be orthogonal or random_linear");
      if (!(world_cfg.gap_rho > 0.0) || world_cfg.gap_rho > 1.0)
        throw encdi::Error(encdi::ErrorCode::BadConfig,
                           "--rho must lie in (0, 1]");
      world_cfg.validate();

      auto world = encdi::synth::generate_world(world_cfg);
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec)
        throw encdi::Error(encdi::ErrorCode::IoFailure,
                           out_dir + ": cannot create directory");

      ordered_json files = ordered_json::object();
      using encdi::synth::Role;
      using encdi::synth::Split;
      for (Role role : {Role::Victim, Role::Stolen, Role::Independent}) {
        for (Split split : {Split::P1, Split::P2, Split::N}) {
          std::string name = std::string(encdi::synth::to_string(role)) + "_" +
                             encdi::synth::to_string(split) + ".repr";
          encdi::repio::write_representations(world.get(role, split),
                                              (fs::path(out_dir) / name).string());
          files[name] = ordered_json{
              {"role", encdi::synth::to_string(role)},
              {"split", encdi::synth::to_string(split)}};
        }
      }

      std::ostringstream cfg_str;
      cfg_str << world_cfg.dim << ',' << world_cfg.n_clusters << ','
              << world_cfg.gap_rho << ',' << world_cfg.steal_noise << ','
              << steal_map_name << ',' << world_cfg.n_p1 << ','
              << world_cfg.n_p2 << ',' << world_cfg.n_n << ','
              << world_cfg.seed;
      encdi::report::RunManifest manifest{
          "synth-gen", encdi::report::digest(cfg_str.str()), {}, world_cfg.seed};
      ordered_json doc{
          {"manifest", encdi::report::to_json(manifest)},
          {"config",
           ordered_json{{"dim", world_cfg.dim},
                        {"clusters", world_cfg.n_clusters},
                        {"rho", world_cfg.gap_rho},
                        {"steal_noise", world_cfg.steal_noise},
                        {"steal_map", steal_map_name},
                        {"n_p1", world_cfg.n_p1},
                        {"n_p2", world_cfg.n_p2},
                        {"n_n", world_cfg.n_n},
                        {"seed", world_cfg.seed}}},
          {"files", files}};
      if (with_timing) doc["timing"] = timing.finish();
      emit(doc, (fs::path(out_dir) / "manifest.json").string());
      return 0;
    }

    if (*infer_cmd) {
      if (cov_name == "diag")
        gmm_cfg.covariance_kind = encdi::gmm::CovarianceKind::Diagonal;
      else if (cov_name == "full")
        gmm_cfg.covariance_kind = encdi::gmm::CovarianceKind::Full;
      else
        throw encdi::Error(encdi::ErrorCode::BadConfig,
                           "--cov must be diag or full");

      auto p1 = load(p1_path);
      auto p2 = load(p2_path);
      auto n = load(n_path);
      // Dimension-based defaults apply unless the caller pinned them.
      if (!k_set || !cov_set) {
        auto dflt = encdi::gmm::default_config_for_dim(p2.dim, gmm_cfg.seed);
        if (!k_set) gmm_cfg.k = dflt.k;
        if (!cov_set) gmm_cfg.covariance_kind = dflt.covariance_kind;
      }

      auto verdict =
          encdi::inference::run_dataset_inference(p1, p2, n, gmm_cfg, infer_opts);
      verdict.label = infer_label;

      std::ostringstream cfg_str;
      cfg_str << gmm_cfg.k << ',' << encdi::gmm::to_string(gmm_cfg.covariance_kind)
              << ',' << infer_opts.alpha << ',' << infer_opts.standardize << ','
              << gmm_cfg.max_iters << ',' << gmm_cfg.rel_tol << ','
              << gmm_cfg.n_init << ',' << gmm_cfg.seed;
      encdi::report::RunManifest manifest{"infer",
                                          encdi::report::digest(cfg_str.str()),
                                          {p1_path, p2_path, n_path},
                                          gmm_cfg.seed};
      ordered_json doc{{"verdict", encdi::report::to_json(verdict)},
                       {"manifest", encdi::report::to_json(manifest)}};
      if (with_timing) doc["timing"] = timing.finish();
      emit(doc, infer_out);
      return 0;
    }

    if (*sim_cmd) {
      auto a = load(sim_a);
      auto b = load(sim_b);
      auto rep = encdi::similarity::similarity_report(a, b, sim_raw);
      if (!hist_out.empty()) {
        auto hist =
            encdi::similarity::pair_histogram(rep.per_pair_cosine, hist_bins,
                                              0.0, 1.0);
        std::ofstream os(hist_out, std::ios::trunc);
        if (!os)
          throw encdi::Error(encdi::ErrorCode::IoFailure,
                             hist_out + ": cannot write histogram");
        for (std::size_t i = 0; i < hist.counts.size(); ++i)
          os << hist.edges[i] << ',' << hist.edges[i + 1] << ','
             << hist.counts[i] << '\n';
      }
      std::ostringstream cfg_str;
      cfg_str << sim_raw << ',' << hist_bins;
      encdi::report::RunManifest manifest{
          "similarity", encdi::report::digest(cfg_str.str()), {sim_a, sim_b}, 0};
      ordered_json doc{{"similarity", encdi::report::to_json(rep)},
                       {"manifest", encdi::report::to_json(manifest)}};
      if (with_timing) doc["timing"] = timing.finish();
      emit(doc, sim_out);
      return 0;
    }

    if (*ent_cmd) {
      auto a = load(ent_a);
      if (!ent_raw) a = encdi::preprocess::center_and_normalize(a);
      ordered_json doc;
      if (!ent_baseline.empty()) {
        if (ent_b.empty())
          throw encdi::Error(encdi::ErrorCode::BadConfig,
                             "--baseline requires --b (the suspect file)");
        auto b = load(ent_b);
        auto base = load(ent_baseline);
        if (!ent_raw) {
          b = encdi::preprocess::center_and_normalize(b);
          base = encdi::preprocess::center_and_normalize(base);
        }
        auto score = encdi::entropy::mi_score(a, b, base);
        doc["mi_score"] = encdi::report::to_json(score);
      } else if (!ent_b.empty()) {
        auto b = load(ent_b);
        if (!ent_raw) b = encdi::preprocess::center_and_normalize(b);
        doc["entropy_a"] = encdi::report::to_json(encdi::entropy::kl_entropy(a));
        doc["entropy_b"] = encdi::report::to_json(encdi::entropy::kl_entropy(b));
        doc["joint_entropy"] =
            encdi::report::to_json(encdi::entropy::kl_joint_entropy(a, b));
        doc["mutual_information"] = encdi::entropy::mutual_information(a, b);
      } else {
        doc["entropy"] = encdi::report::to_json(encdi::entropy::kl_entropy(a));
      }
      std::ostringstream cfg_str;
      cfg_str << ent_raw;
      encdi::report::RunManifest manifest{"entropy",
                                          encdi::report::digest(cfg_str.str()),
                                          {ent_a},
                                          0};
      if (!ent_b.empty()) manifest.input_paths.push_back(ent_b);
      if (!ent_baseline.empty()) manifest.input_paths.push_back(ent_baseline);
      doc["manifest"] = encdi::report::to_json(manifest);
      if (with_timing) doc["timing"] = timing.finish();
      emit(doc, ent_out);
      return 0;
    }

    if (*obf_cmd) {
      if (obf_kind == "shuffle")
        obf_spec.kind = encdi::obfuscate::Kind::Shuffle;
      else if (obf_kind == "pad")
        obf_spec.kind = encdi::obfuscate::Kind::Pad;
      else if (obf_kind == "transform")
        obf_spec.kind = encdi::obfuscate::Kind::Transform;
      else
        throw encdi::Error(encdi::ErrorCode::BadSpec,
                           "--kind must be shuffle, pad, or transform");
      if (pad_mode == "append")
        obf_spec.pad_mode = encdi::obfuscate::PadMode::Append;
      else if (pad_mode == "random_positions")
        obf_spec.pad_mode = encdi::obfuscate::PadMode::RandomPositions;
      else
        throw encdi::Error(encdi::ErrorCode::BadSpec,
                           "--pad-mode must be append or random_positions");

      auto reps = load(obf_in);
      auto out = encdi::obfuscate::apply_obfuscation(reps, obf_spec);
      encdi::repio::write_representations(out, obf_out_path);
      return 0;
    }
  } catch (const encdi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
