// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "encdi/entropy.hpp"
#include "encdi/gmm.hpp"
#include "encdi/inference.hpp"
#include "encdi/obfuscate.hpp"
#include "encdi/preprocess.hpp"
#include "encdi/repio.hpp"
#include "encdi/similarity.hpp"
#include "encdi/stats.hpp"
#include "encdi/synth.hpp"

#include "../helpers.hpp"

namespace fs = std::filesystem;
using namespace encdi;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name,
               const std::function<bool(std::string&)>& body) {
  auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  auto secs = std::chrono::duration<double>(
                  std::chrono::steady_clock::now() - start)
                  .count();
  std::printf("%s  criterion %2d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL",
              number, name.c_str(), secs, detail.empty() ? "" : " -- ",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

RepresentationSet correlated_pair_second(const RepresentationSet& a, double rho,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  RepresentationSet b(a.n_rows, 1);
  for (std::size_t i = 0; i < a.n_rows; ++i)
    b.at(i, 0) = rho * a.at(i, 0) + std::sqrt(1 - rho * rho) * g(rng);
  return b;
}

struct SuspectSets {
  RepresentationSet p1, p2, n;
};

SuspectSets role_sets(const synth::SyntheticWorld& w, synth::Role role) {
  return {w.get(role, synth::Split::P1), w.get(role, synth::Split::P2),
          w.get(role, synth::Split::N)};
}

gmm::GmmFitConfig detection_config(std::uint64_t seed) {
  gmm::GmmFitConfig cfg;
  cfg.k = 10;
  cfg.covariance_kind = gmm::CovarianceKind::Full;
  cfg.max_iters = 60;
  cfg.rel_tol = 1e-4;
  cfg.seed = seed;
  return cfg;
}

synth::SyntheticWorldConfig detection_world(std::uint64_t seed, double rho) {
  synth::SyntheticWorldConfig cfg;
  cfg.dim = 64;
  cfg.n_clusters = 8;
  cfg.n_p1 = 2000;
  cfg.n_p2 = 1000;
  cfg.n_n = 2000;
  cfg.gap_rho = rho;
  cfg.steal_noise = 0.1;
  cfg.steal_map = synth::StealMap::Orthogonal;
  cfg.seed = seed;
  return cfg;
}

// Shared between criteria 8 and 9.
double g_stolen_detection_rate = -1.0;

bool run_detection(const SuspectSets& s, std::uint64_t seed) {
  auto verdict = inference::run_dataset_inference(s.p1, s.p2, s.n,
                                                  detection_config(seed));
  return verdict.decision == inference::Decision::Stolen;
}

SuspectSets obfuscate_suspect(const SuspectSets& s,
                              const obfuscate::ObfuscationSpec& spec) {
  return {obfuscate::apply_obfuscation(s.p1, spec),
          obfuscate::apply_obfuscation(s.p2, spec),
          obfuscate::apply_obfuscation(s.n, spec)};
}

std::string run_cli(const std::string& args) {
  std::string cmd = std::string(ENCDI_CLI_PATH) + " " + args + " 2>/dev/null";
  std::string out;
  std::array<char, 4096> buf{};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return out;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe))
    out.append(buf.data(), n);
  pclose(pipe);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  // 1. Unit-sphere identity ||a-b|| = sqrt(2(1-sim)).
  criterion(1, "unit-sphere distance identity over 1e5 pairs, d in {2,64,512}",
            [](std::string& detail) {
              std::mt19937_64 rng(1);
              std::normal_distribution<double> g(0, 1);
              double worst = 0.0;
              for (std::size_t d : {2u, 64u, 512u}) {
                std::size_t trials = 100000 / 3 + 1;
                std::vector<double> a(d), b(d);
                for (std::size_t t = 0; t < trials; ++t) {
                  double na = 0, nb = 0;
                  for (std::size_t c = 0; c < d; ++c) {
                    a[c] = g(rng);
                    b[c] = g(rng);
                    na += a[c] * a[c];
                    nb += b[c] * b[c];
                  }
                  na = std::sqrt(na);
                  nb = std::sqrt(nb);
                  double dot = 0, dist2 = 0;
                  for (std::size_t c = 0; c < d; ++c) {
                    double diff = a[c] / na - b[c] / nb;
                    dist2 += diff * diff;
                    dot += (a[c] / na) * (b[c] / nb);
                  }
                  worst = std::max(worst,
                                   std::fabs(std::sqrt(dist2) -
                                             std::sqrt(2.0 * (1.0 - dot))));
                }
              }
              detail = "max |gap| = " + std::to_string(worst);
              return worst < 1e-10;
            });

  // 2. Per-pair relation C = |1 - 2(1 - Score_l2)^2|.
  criterion(2, "per-pair C = |1 - 2(1 - Score_l2)^2| on 1e4 pairs",
            [](std::string& detail) {
              auto a = testutil::gaussian_set(10000, 32, 21);
              auto b = testutil::gaussian_set(10000, 32, 22);
              auto rep = similarity::similarity_report(a, b);
              double worst = 0.0;
              for (std::size_t i = 0; i < rep.n_pairs; ++i) {
                double s = rep.per_pair_l2score[i];
                worst = std::max(
                    worst, std::fabs(rep.per_pair_cosine[i] -
                                     std::fabs(1.0 - 2.0 * (1.0 - s) * (1.0 - s))));
              }
              detail = "max |gap| = " + std::to_string(worst);
              return worst < 1e-9;
            });

  // 3. Gaussian entropy oracle.
  criterion(3, "KL entropy vs Gaussian closed form, d in {1,2,4}",
            [](std::string& detail) {
              bool ok = true;
              std::ostringstream ss;
              for (std::size_t d : {1u, 2u, 4u}) {
                double truth =
                    0.5 * static_cast<double>(d) * std::log(2 * M_PI * std::exp(1.0));
                std::vector<double> rel;
                for (std::uint64_t seed = 0; seed < 5; ++seed) {
                  auto set = testutil::gaussian_set(20000, d, 300 + seed);
                  rel.push_back(
                      std::fabs(entropy::kl_entropy(set).value - truth) / truth);
                }
                double med = testutil::median(rel);
                ss << "d=" << d << " relerr=" << med << " ";
                ok = ok && med < 0.03;
              }
              detail = ss.str();
              return ok;
            });

  // 4. Gaussian mutual-information oracle.
  criterion(4, "KL mutual information vs closed form at rho = 0.9",
            [](std::string& detail) {
              const double truth = -0.5 * std::log(1 - 0.81);
              std::vector<double> errs;
              for (std::uint64_t seed = 0; seed < 5; ++seed) {
                auto a = testutil::gaussian_set(20000, 1, 400 + seed);
                auto b = correlated_pair_second(a, 0.9, 500 + seed);
                errs.push_back(
                    std::fabs(entropy::mutual_information(a, b) - truth));
              }
              double med = testutil::median(errs);
              detail = "median |err| = " + std::to_string(med) + " nats";
              return med < 0.1;
            });

  // 5. EM monotonicity over 100 random fits.
  criterion(5, "EM mean log-likelihood monotone over 100 random fits",
            [](std::string& detail) {
              const std::size_t ks[3] = {2, 5, 10};
              double worst = 0.0;
              for (std::uint64_t trial = 0; trial < 100; ++trial) {
                std::mt19937_64 meta(7000 + trial);
                std::uniform_int_distribution<std::size_t> dims(2, 8);
                std::uniform_int_distribution<std::size_t> rows(150, 400);
                auto data =
                    testutil::gaussian_set(rows(meta), dims(meta), 9000 + trial);
                gmm::GmmFitConfig cfg;
                cfg.k = ks[trial % 3];
                cfg.covariance_kind = trial % 2
                                          ? gmm::CovarianceKind::Diagonal
                                          : gmm::CovarianceKind::Full;
                cfg.seed = trial;
                auto model = gmm::fit_gmm(data, cfg);
                for (std::size_t i = 1; i < model.fit_log.size(); ++i)
                  worst = std::max(worst,
                                   model.fit_log[i - 1] - model.fit_log[i]);
              }
              detail = "worst decrease = " + std::to_string(worst);
              return worst <= 1e-8;
            });

  // 6. Student-t survival function vs adaptive quadrature.
  criterion(6, "student_t_sf within 1e-9 of quadrature on the grid",
            [](std::string& detail) {
              double worst = 0.0;
              for (double dof : {1.0, 2.0, 10.0, 100.0, 10000.0})
                for (double t = -10.0; t <= 10.0 + 1e-9; t += 0.5)
                  worst = std::max(worst,
                                   std::fabs(stats::student_t_sf(t, dof) -
                                             testutil::t_sf_oracle(t, dof)));
              detail = "max |err| = " + std::to_string(worst);
              return worst < 1e-9;
            });

  // 7. Null calibration with an independent suspect, gap closed.
  criterion(7, "null calibration: false-positive rate and KS uniformity",
            [](std::string& detail) {
              std::vector<double> pvals;
              int false_stolen = 0;
              for (std::uint64_t seed = 0; seed < 100; ++seed) {
                synth::SyntheticWorldConfig wc;
                wc.dim = 32;
                wc.n_clusters = 8;
                wc.n_p1 = wc.n_n = 600;
                wc.n_p2 = 600;
                wc.gap_rho = 1.0;
                wc.seed = 10000 + seed;
                auto w = synth::generate_world(wc);
                auto s = role_sets(w, synth::Role::Independent);
                gmm::GmmFitConfig cfg = detection_config(10000 + seed);
                cfg.k = 8;
                auto verdict =
                    inference::run_dataset_inference(s.p1, s.p2, s.n, cfg);
                pvals.push_back(verdict.t_result.p_value);
                if (verdict.decision == inference::Decision::Stolen)
                  ++false_stolen;
              }
              double ks = testutil::ks_statistic_uniform(pvals);
              double crit = testutil::ks_critical(pvals.size(), 0.01);
              detail = "false rate = " + std::to_string(false_stolen) +
                       "%, KS = " + std::to_string(ks) + " (crit " +
                       std::to_string(crit) + ")";
              return false_stolen <= 10 && ks < crit;
            });

  // 8. Detection power for victim and stolen suspects.
  criterion(8, "detection power at rho = 0.9 (victim and stolen suspects)",
            [](std::string& detail) {
              int victim_hits = 0, stolen_hits = 0;
              std::vector<double> victim_p, stolen_p;
              for (std::uint64_t seed = 0; seed < 100; ++seed) {
                auto w = synth::generate_world(detection_world(20000 + seed, 0.9));
                auto sv = role_sets(w, synth::Role::Victim);
                auto ss = role_sets(w, synth::Role::Stolen);
                auto vv = inference::run_dataset_inference(
                    sv.p1, sv.p2, sv.n, detection_config(20000 + seed));
                auto vs = inference::run_dataset_inference(
                    ss.p1, ss.p2, ss.n, detection_config(20000 + seed));
                victim_p.push_back(vv.t_result.p_value);
                stolen_p.push_back(vs.t_result.p_value);
                if (vv.decision == inference::Decision::Stolen) ++victim_hits;
                if (vs.decision == inference::Decision::Stolen) ++stolen_hits;
              }
              g_stolen_detection_rate = stolen_hits;
              double mv = testutil::median(victim_p);
              double ms = testutil::median(stolen_p);
              detail = "victim " + std::to_string(victim_hits) + "/100 (med p " +
                       std::to_string(mv) + "), stolen " +
                       std::to_string(stolen_hits) + "/100 (med p " +
                       std::to_string(ms) + ")";
              return victim_hits >= 95 && stolen_hits >= 95 && mv < 1e-3 &&
                     ms < 1e-3;
            });

  // 9. Obfuscation robustness: detection persists, cosine breaks, MI holds.
  criterion(9, "obfuscation robustness (shuffle / pad / transform)",
            [](std::string& detail) {
              if (g_stolen_detection_rate < 0.0) {
                detail = "criterion 8 did not run";
                return false;
              }
              std::ostringstream ss;
              bool ok = true;

              // Detection under each obfuscation of the stolen suspect.
              auto make_specs = [](std::size_t dim) {
                obfuscate::ObfuscationSpec shuffle;
                shuffle.kind = obfuscate::Kind::Shuffle;
                shuffle.seed = 77;
                obfuscate::ObfuscationSpec pad;
                pad.kind = obfuscate::Kind::Pad;
                pad.pad_target_dim = dim + dim / 2;
                pad.pad_mode = obfuscate::PadMode::RandomPositions;
                pad.seed = 78;
                obfuscate::ObfuscationSpec transform;
                transform.kind = obfuscate::Kind::Transform;
                transform.scale = 2.0;
                transform.offset = 1.0;
                return std::array<obfuscate::ObfuscationSpec, 3>{shuffle, pad,
                                                                 transform};
              };
              const char* names[3] = {"shuffle", "pad", "transform"};
              auto specs64 = make_specs(64);
              for (int oi = 0; oi < 3; ++oi) {
                int hits = 0;
                for (std::uint64_t seed = 0; seed < 100; ++seed) {
                  auto w = synth::generate_world(
                      detection_world(20000 + seed, 0.9));
                  auto s = obfuscate_suspect(role_sets(w, synth::Role::Stolen),
                                             specs64[oi]);
                  if (run_detection(s, 20000 + seed)) ++hits;
                }
                ss << names[oi] << " " << hits << "/100 ";
                ok = ok && hits >= g_stolen_detection_rate - 5;
              }

              // Cosine collapses under shuffle/pad; MI score barely moves.
              synth::SyntheticWorldConfig wc;
              wc.dim = 512;
              wc.n_clusters = 64;
              wc.n_p1 = 2000;
              wc.n_p2 = 64;
              wc.n_n = 64;
              wc.gap_rho = 0.9;
              wc.steal_noise = 0.1;
              wc.seed = 314;
              auto w = synth::generate_world(wc);
              const auto& victim = w.get(synth::Role::Victim, synth::Split::P1);
              const auto& stolen = w.get(synth::Role::Stolen, synth::Split::P1);
              auto baseline = synth::random_baseline(victim.n_rows, victim.dim,
                                                     315);

              // l2 normalization commutes exactly with shuffle and pad
              // (both preserve row norms), so it is the right pipeline for
              // the MI comparison; centering would smear the pad zeros.
              auto specs512 = make_specs(512);
              specs512[1].pad_target_dim = 512 + 512 / 4;
              auto pipeline = [](const RepresentationSet& set) {
                return preprocess::l2_normalize_rows(set);
              };
              auto v_pp = pipeline(victim);
              auto base_pp = pipeline(baseline);
              double s_base =
                  entropy::mi_score(v_pp, pipeline(stolen), base_pp).s;

              for (int oi = 0; oi < 2; ++oi) {  // shuffle, pad
                auto obf = obfuscate::apply_obfuscation(stolen, specs512[oi]);
                // Align dimensions explicitly for the padded suspect:
                // the victim is zero-padded (append) to the same width.
                RepresentationSet v_aligned = victim;
                if (obf.dim != victim.dim) {
                  obfuscate::ObfuscationSpec append;
                  append.kind = obfuscate::Kind::Pad;
                  append.pad_target_dim = obf.dim;
                  v_aligned = obfuscate::apply_obfuscation(victim, append);
                }
                double c = similarity::cosine_score(v_aligned, obf);
                ss << names[oi] << " C=" << c << " ";
                ok = ok && c < 0.05;
                double s_obf = entropy::mi_score(v_pp, pipeline(obf), base_pp).s;
                ss << names[oi] << " |ds|=" << std::fabs(s_obf - s_base) << " ";
                ok = ok && std::fabs(s_obf - s_base) < 0.1;
              }
              detail = ss.str();
              return ok;
            });

  // 10. Strength monotonicity in the gap and in the stealing noise.
  criterion(10, "median p non-increasing in gap; MI score monotone in noise",
            [](std::string& detail) {
              std::ostringstream ss;
              bool ok = true;

              std::vector<double> median_p;
              for (double rho : {1.0, 0.95, 0.9, 0.8}) {
                std::vector<double> pvals;
                for (std::uint64_t seed = 0; seed < 20; ++seed) {
                  synth::SyntheticWorldConfig wc;
                  wc.dim = 32;
                  wc.n_clusters = 8;
                  wc.n_p1 = wc.n_n = 600;
                  wc.n_p2 = 600;
                  wc.gap_rho = rho;
                  wc.seed = 40000 + seed;
                  auto w = synth::generate_world(wc);
                  auto s = role_sets(w, synth::Role::Victim);
                  gmm::GmmFitConfig cfg = detection_config(40000 + seed);
                  cfg.k = 8;
                  pvals.push_back(inference::run_dataset_inference(
                                      s.p1, s.p2, s.n, cfg)
                                      .t_result.p_value);
                }
                median_p.push_back(testutil::median(pvals));
                ss << "p(rho=" << rho << ")=" << median_p.back() << " ";
              }
              for (std::size_t i = 1; i < median_p.size(); ++i)
                ok = ok && median_p[i] <= median_p[i - 1] + 1e-15;

              // Noise ordering: 2 sigma, sigma/2, 0 with sigma the signal
              // stdev per coordinate (about sqrt(2) by construction).
              const double sigma = std::sqrt(2.0);
              std::vector<double> median_s;
              for (double noise : {2.0 * sigma, 0.5 * sigma, 0.0}) {
                std::vector<double> scores;
                for (std::uint64_t seed = 0; seed < 20; ++seed) {
                  synth::SyntheticWorldConfig wc;
                  wc.dim = 64;
                  wc.n_clusters = 8;
                  wc.n_p1 = 2000;
                  wc.n_p2 = 64;
                  wc.n_n = 64;
                  wc.gap_rho = 0.9;
                  wc.steal_noise = noise;
                  wc.seed = 50000 + seed;
                  auto w = synth::generate_world(wc);
                  auto v = preprocess::center_and_normalize(
                      w.get(synth::Role::Victim, synth::Split::P1));
                  auto s = preprocess::center_and_normalize(
                      w.get(synth::Role::Stolen, synth::Split::P1));
                  auto base = preprocess::center_and_normalize(
                      synth::random_baseline(2000, 64, 50500 + seed));
                  scores.push_back(entropy::mi_score(v, s, base).s);
                }
                median_s.push_back(testutil::median(scores));
                ss << "s(noise=" << noise << ")=" << median_s.back() << " ";
              }
              for (std::size_t i = 1; i < median_s.size(); ++i)
                ok = ok && median_s[i] >= median_s[i - 1] - 1e-15;

              detail = ss.str();
              return ok;
            });

  // 11. Format round-trip and CLI byte-reproducibility.
  criterion(11, "REPR round-trip exact; CLI byte-reproducible at 1/8 threads",
            [](std::string& detail) {
              // Binary round-trip on random float32 grids.
              std::mt19937_64 rng(61);
              std::uniform_real_distribution<float> u(-50.0f, 50.0f);
              for (int trial = 0; trial < 10; ++trial) {
                RepresentationSet set(37, 11);
                for (double& v : set.data) v = static_cast<double>(u(rng));
                auto path =
                    (fs::temp_directory_path() / "acc_roundtrip.repr").string();
                repio::write_representations(set, path);
                auto back = repio::read_representations(path);
                if (back.data != set.data) {
                  detail = "binary round-trip mismatch";
                  return false;
                }
              }

              // Every subcommand, run twice at 1 and 8 threads.
              auto dir1 = fs::temp_directory_path() / "acc_world1";
              auto dir2 = fs::temp_directory_path() / "acc_world2";
              fs::remove_all(dir1);
              fs::remove_all(dir2);
              std::string gen = "synth-gen --dim 16 --clusters 4 --rho 0.9 "
                                "--n-p1 300 --n-p2 300 --n-n 300 --seed 42 "
                                "--out ";
              run_cli("--threads 1 " + gen + dir1.string());
              run_cli("--threads 8 " + gen + dir2.string());
              for (const auto& entry : fs::directory_iterator(dir1)) {
                if (slurp(entry.path()) !=
                    slurp(dir2 / entry.path().filename())) {
                  detail = "synth-gen not reproducible: " +
                           entry.path().filename().string();
                  return false;
                }
              }

              auto p1 = (dir1 / "victim_p1.repr").string();
              auto p2 = (dir1 / "victim_p2.repr").string();
              auto n = (dir1 / "victim_n.repr").string();
              std::string infer =
                  "infer --p1 " + p1 + " --p2 " + p2 + " --n " + n +
                  " --k 4 --cov full --seed 42";
              if (run_cli("--threads 1 " + infer) !=
                  run_cli("--threads 8 " + infer)) {
                detail = "infer not reproducible";
                return false;
              }
              std::string sim = "similarity --a " + p1 + " --b " +
                                (dir1 / "stolen_p1.repr").string();
              if (run_cli("--threads 1 " + sim) != run_cli("--threads 8 " + sim)) {
                detail = "similarity not reproducible";
                return false;
              }
              std::string ent = "entropy --a " + p1 + " --b " +
                                (dir1 / "stolen_p1.repr").string();
              if (run_cli("--threads 1 " + ent) != run_cli("--threads 8 " + ent)) {
                detail = "entropy not reproducible";
                return false;
              }
              auto obf1 = (dir1 / "obf1.repr").string();
              auto obf2 = (dir1 / "obf2.repr").string();
              run_cli("--threads 1 obfuscate --in " + p1 + " --out " + obf1 +
                      " --kind shuffle --seed 5");
              run_cli("--threads 8 obfuscate --in " + p1 + " --out " + obf2 +
                      " --kind shuffle --seed 5");
              if (slurp(obf1) != slurp(obf2)) {
                detail = "obfuscate not reproducible";
                return false;
              }
              return true;
            });

  std::printf("%s: %d criterion(s) failed\n",
              g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
