#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsvit/synthvol/volume.hpp"

namespace dsvit::synth {

enum class Diagnosis : std::uint8_t { kNC = 0, kMCI = 1, kAD = 2 };
enum class RiskLabel : std::uint8_t { kSafe = 0, kAtRisk = 1 };
enum class GenMode : std::uint8_t { kRealistic, kDisentangled };
enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string to_string(Diagnosis d);
std::string to_string(RiskLabel r);
std::string to_string(GenMode m);
std::string to_string(Split s);
GenMode parse_gen_mode(const std::string& s);
Split parse_split(const std::string& s);

// Diagnosis thresholds on disease severity: NC < 0.35 <= MCI < 0.5 <= AD.
inline constexpr double kMciThreshold = 0.35;
inline constexpr double kAdThreshold = 0.5;
// Severity 1 scales the ventricle radius by 1.5 and the cortical thickness by 0.7.
inline constexpr double kVentricleDilation = 0.5;
inline constexpr double kCorticalThinning = 0.3;
// White-matter intensity offset carried by the texture cue in disentangled mode.
inline constexpr double kTextureOffset = 0.15;

Diagnosis diagnose(double delta);

struct SplitSizes {
  std::size_t train = 400;
  std::size_t val = 100;
  std::size_t test = 100;

  std::size_t total() const noexcept { return train + val + test; }
  std::size_t of(Split s) const;
};

// Per-subject disease trajectories for longitudinal cohorts. A subject is a
// "stable" draw with probability stable_fraction, otherwise a progressor.
struct RateDistribution {
  double stable_fraction = 0.5;
  double stable_min = -0.03;
  double stable_max = 0.03;
  double progressor_min = 0.06;
  double progressor_max = 0.18;
  double delta0_min = 0.1;
  double delta0_max = 0.45;
};

struct GeneratorSpec {
  Dims dims{32, 32, 32};
  int num_regions = 8;
  SplitSizes splits;
  // Target fraction of positive labels (AD, or at-risk). Disentangled mode
  // stratifies the four cue combinations equally, which fixes it at 0.25.
  double class_balance = 0.5;
  double noise_std = 0.05;
  GenMode mode = GenMode::kRealistic;
  RateDistribution trajectory;
  std::uint64_t seed = 0;
  int timepoints = 2;
  double horizon_months = 6.0;

  // Throws InvalidInput.
  void validate() const;
};

void to_json(nlohmann::json& j, const GeneratorSpec& s);
// Missing fields keep their defaults; unknown fields are rejected.
void from_json(const nlohmann::json& j, GeneratorSpec& s);

// Per-subject anatomical variation, shared by every scan of one subject.
struct Anatomy {
  std::array<double, 3> center_offset{0, 0, 0};  // voxels
  std::array<double, 3> radius_scale{1, 1, 1};
  double intensity_offset = 0.0;
};

struct SubjectLatent {
  double delta = 0.0;
  bool cue_geom = false;
  bool cue_tex = false;
  Anatomy anatomy;
  std::uint64_t noise_seed = 0;
};

struct Subject {
  Volume volume;
  SegVolume seg;
  Diagnosis diagnosis = Diagnosis::kNC;
  double delta = 0.0;
  bool cue_geom = false;
  bool cue_tex = false;
  // 1 for AD, 0 for NC.
  int label() const { return diagnosis == Diagnosis::kAD ? 1 : 0; }
};

// Binary single-timepoint label: AD iff delta > 0.5 (realistic) or iff both
// cues are present (disentangled).
int single_timepoint_label(GenMode mode, const SubjectLatent& latent);

SubjectLatent draw_subject_latent(const GeneratorSpec& spec, std::uint64_t subject_seed);
// Intensity rendering in disentangled mode never reads cue_geom.
Subject render_subject(const GeneratorSpec& spec, const SubjectLatent& latent);
Subject generate_subject(const GeneratorSpec& spec, std::uint64_t subject_seed);

// Voxel label maps for one scan; exposed for tests and tooling.
SegVolume render_labels(const GeneratorSpec& spec, const Anatomy& anatomy, double ventricle_delta,
                        double cortex_delta);
std::size_t count_label(const SegVolume& seg, std::uint16_t label);
inline constexpr std::uint16_t kBackground = 0, kSkull = 1, kCortex = 2, kWhiteMatter = 3,
                               kVentricle = 4;

struct TrajectoryLatent {
  double delta0 = 0.0;
  double rate = 0.0;  // severity change per scan
  Anatomy anatomy;
  std::uint64_t noise_seed = 0;
  // Scan times for t = 1..T+1; the last one is the hidden future visit.
  std::vector<double> months;
};

struct Scan {
  Volume volume;
  SegVolume seg;
  double months = 0.0;
  double delta = 0.0;
  Diagnosis diagnosis = Diagnosis::kNC;
};

struct LongitudinalRecord {
  std::vector<Scan> scans;
  RiskLabel risk_label = RiskLabel::kSafe;
  Diagnosis future_diagnosis = Diagnosis::kNC;
  double delta0 = 0.0;
  double rate = 0.0;
  int label() const { return risk_label == RiskLabel::kAtRisk ? 1 : 0; }
};

// Severity at scan t (1-based): clamp(delta0 + rate * (t - 1), 0, 1).
double trajectory_delta(double delta0, double rate, int t);
// At-risk iff the diagnosis worsens between the last scan and the next visit.
// Empty when the last observed scan is already AD (not part of the cohort).
std::optional<RiskLabel> risk_label(Diagnosis last, Diagnosis next);

TrajectoryLatent draw_trajectory(const GeneratorSpec& spec, std::uint64_t subject_seed, int T);
std::optional<RiskLabel> trajectory_risk(const TrajectoryLatent& latent, int T);
LongitudinalRecord render_longitudinal(const GeneratorSpec& spec, const TrajectoryLatent& latent,
                                       int T);
// Throws InvalidInput when the last scan is AD or T < 2.
LongitudinalRecord generate_longitudinal(const GeneratorSpec& spec, std::uint64_t subject_seed,
                                         int T);

// One accepted subject of a balanced cohort.
struct CohortEntry {
  std::size_t index = 0;  // candidate index; also the subject id
  std::uint64_t seed = 0;
  Split split = Split::kTrain;
  int label = 0;
};

std::string subject_id(std::size_t index);
std::uint64_t subject_seed(std::uint64_t master_seed, std::size_t index);

// Walks candidates 0, 1, 2, ... and accepts each into the current split while
// its class quota is open. Only latents are drawn, so planning is cheap; the
// result is a pure function of the spec.
std::vector<CohortEntry> plan_cohort(const GeneratorSpec& spec, bool longitudinal);

}  // namespace dsvit::synth
