#include "dsvit/synthvol/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "dsvit/json_util.hpp"
#include "dsvit/numcore/rng.hpp"

namespace dsvit::synth {

using num::Rng;

std::string to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::kNC: return "NC";
    case Diagnosis::kMCI: return "MCI";
    case Diagnosis::kAD: return "AD";
  }
  return "?";
}

std::string to_string(RiskLabel r) { return r == RiskLabel::kAtRisk ? "at_risk" : "safe"; }
std::string to_string(GenMode m) { return m == GenMode::kRealistic ? "realistic" : "disentangled"; }

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

GenMode parse_gen_mode(const std::string& s) {
  if (s == "realistic") return GenMode::kRealistic;
  if (s == "disentangled") return GenMode::kDisentangled;
  throw InvalidInput("unknown generator mode '" + s + "'");
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw InvalidInput("unknown split '" + s + "'");
}

Diagnosis diagnose(double delta) {
  if (delta < kMciThreshold) return Diagnosis::kNC;
  if (delta < kAdThreshold) return Diagnosis::kMCI;
  return Diagnosis::kAD;
}

std::size_t SplitSizes::of(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return 0;
}

void GeneratorSpec::validate() const {
  if (dims.h < 16 || dims.w < 16 || dims.l < 16) {
    throw InvalidInput("volume dims " + to_string(dims) + " too small for region nesting (min 16)");
  }
  if (num_regions < 3 || num_regions > 65535) throw InvalidInput("num_regions must be in [3, 65535]");
  if (splits.total() == 0) throw InvalidInput("cohort has no subjects");
  if (!(class_balance > 0.0 && class_balance < 1.0)) {
    throw InvalidInput("class_balance must be in (0, 1)");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw InvalidInput("noise_std must be >= 0");
  if (timepoints < 2) throw InvalidInput("timepoints must be >= 2");
  if (!(horizon_months > 1.0)) throw InvalidInput("horizon_months must exceed 1");
  const auto& t = trajectory;
  if (!(t.stable_fraction >= 0.0 && t.stable_fraction <= 1.0) || t.stable_min > t.stable_max ||
      t.progressor_min > t.progressor_max || t.delta0_min > t.delta0_max || t.delta0_min < 0.0 ||
      t.delta0_max > 1.0) {
    throw InvalidInput("invalid trajectory rate distribution");
  }
}

void to_json(nlohmann::json& j, const GeneratorSpec& s) {
  j = nlohmann::json{
      {"dims", {s.dims.h, s.dims.w, s.dims.l}},
      {"num_regions", s.num_regions},
      {"splits", {{"train", s.splits.train}, {"val", s.splits.val}, {"test", s.splits.test}}},
      {"class_balance", s.class_balance},
      {"noise_std", s.noise_std},
      {"mode", to_string(s.mode)},
      {"trajectory",
       {{"stable_fraction", s.trajectory.stable_fraction},
        {"stable_min", s.trajectory.stable_min},
        {"stable_max", s.trajectory.stable_max},
        {"progressor_min", s.trajectory.progressor_min},
        {"progressor_max", s.trajectory.progressor_max},
        {"delta0_min", s.trajectory.delta0_min},
        {"delta0_max", s.trajectory.delta0_max}}},
      {"seed", s.seed},
      {"timepoints", s.timepoints},
      {"horizon_months", s.horizon_months},
  };
}

void from_json(const nlohmann::json& j, GeneratorSpec& s) {
  reject_unknown(j,
                 {"dims", "num_regions", "splits", "class_balance", "noise_std", "mode",
                  "trajectory", "seed", "timepoints", "horizon_months"},
                 "generator spec");
  try {
    if (j.contains("dims")) {
      const auto& d = j.at("dims");
      if (!d.is_array() || d.size() != 3) throw InvalidInput("dims must be [h, w, l]");
      s.dims = Dims{d[0].get<std::uint32_t>(), d[1].get<std::uint32_t>(), d[2].get<std::uint32_t>()};
    }
    read_opt(j, "num_regions", s.num_regions);
    if (j.contains("splits")) {
      const auto& sp = j.at("splits");
      reject_unknown(sp, {"train", "val", "test"}, "splits");
      read_opt(sp, "train", s.splits.train);
      read_opt(sp, "val", s.splits.val);
      read_opt(sp, "test", s.splits.test);
    }
    read_opt(j, "class_balance", s.class_balance);
    read_opt(j, "noise_std", s.noise_std);
    if (j.contains("mode")) s.mode = parse_gen_mode(j.at("mode").get<std::string>());
    if (j.contains("trajectory")) {
      const auto& t = j.at("trajectory");
      reject_unknown(t,
                     {"stable_fraction", "stable_min", "stable_max", "progressor_min",
                      "progressor_max", "delta0_min", "delta0_max"},
                     "trajectory");
      read_opt(t, "stable_fraction", s.trajectory.stable_fraction);
      read_opt(t, "stable_min", s.trajectory.stable_min);
      read_opt(t, "stable_max", s.trajectory.stable_max);
      read_opt(t, "progressor_min", s.trajectory.progressor_min);
      read_opt(t, "progressor_max", s.trajectory.progressor_max);
      read_opt(t, "delta0_min", s.trajectory.delta0_min);
      read_opt(t, "delta0_max", s.trajectory.delta0_max);
    }
    read_opt(j, "seed", s.seed);
    read_opt(j, "timepoints", s.timepoints);
    read_opt(j, "horizon_months", s.horizon_months);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("generator spec: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Anatomy. Regions are nested ellipsoids in coordinates normalized by the head
// radii: skull shell 0.86 < rho <= 1, cortex down to the white-matter radius,
// ventricle sphere at the center, filler spheres on a shell inside the white
// matter.

namespace {

constexpr double kHeadRadiusFraction = 0.42;
constexpr double kSkullInner = 0.86;
constexpr double kCortexThickness = 0.20;
constexpr double kVentricleRadius = 0.25;
constexpr double kFillerShell = 0.52;

struct Geometry {
  std::array<double, 3> center{};
  std::array<double, 3> radius{};
  double wm_radius = 0.0;
  double ventricle_radius = 0.0;
  double filler_radius = 0.0;
  std::vector<std::array<double, 3>> fillers;
};

Geometry make_geometry(const GeneratorSpec& spec, const Anatomy& a, double ventricle_delta,
                       double cortex_delta) {
  Geometry g;
  for (std::size_t ax = 0; ax < 3; ++ax) {
    const double len = spec.dims[ax];
    g.center[ax] = len / 2.0 + a.center_offset[ax];
    g.radius[ax] = kHeadRadiusFraction * len * a.radius_scale[ax];
  }
  g.wm_radius = kSkullInner - kCortexThickness * (1.0 - kCorticalThinning * cortex_delta);
  g.ventricle_radius = kVentricleRadius * (1.0 + kVentricleDilation * ventricle_delta);
  const int n_fillers = std::max(0, spec.num_regions - 5);
  g.filler_radius = n_fillers <= 8 ? 0.09 : 0.09 * std::cbrt(8.0 / n_fillers);
  // Fibonacci sphere directions.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int f = 0; f < n_fillers; ++f) {
    const double z = 1.0 - (2.0 * f + 1.0) / n_fillers;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * f;
    g.fillers.push_back({kFillerShell * r * std::cos(phi), kFillerShell * r * std::sin(phi),
                         kFillerShell * z});
  }
  return g;
}

// Nominal region at a continuous voxel coordinate (voxel centers sit at +0.5).
int region_at(const Geometry& g, double x, double y, double z) {
  const double u = (x - g.center[0]) / g.radius[0];
  const double v = (y - g.center[1]) / g.radius[1];
  const double w = (z - g.center[2]) / g.radius[2];
  const double rho2 = u * u + v * v + w * w;
  if (rho2 > 1.0) return kBackground;
  if (rho2 > kSkullInner * kSkullInner) return kSkull;
  if (rho2 > g.wm_radius * g.wm_radius) return kCortex;
  if (rho2 <= g.ventricle_radius * g.ventricle_radius) return kVentricle;
  const double fr2 = g.filler_radius * g.filler_radius;
  for (std::size_t f = 0; f < g.fillers.size(); ++f) {
    const double du = u - g.fillers[f][0], dv = v - g.fillers[f][1], dw = w - g.fillers[f][2];
    if (du * du + dv * dv + dw * dw <= fr2) return 5 + static_cast<int>(f);
  }
  return kWhiteMatter;
}

double base_intensity(int region) {
  switch (region) {
    case kBackground: return 0.0;
    case kSkull: return 0.85;
    case kCortex: return 0.5;
    case kWhiteMatter: return 0.7;
    case kVentricle: return 0.12;
    default: return 0.3 + 0.04 * ((region - 5) % 4);
  }
}

bool on_boundary(const Dims& d, std::size_t i, std::size_t j, std::size_t k) {
  return i == 0 || j == 0 || k == 0 || i + 1 == d.h || j + 1 == d.w || k + 1 == d.l;
}

SegVolume labels_from(const GeneratorSpec& spec, const Geometry& g) {
  SegVolume seg(spec.dims, 0);
  const int top = spec.num_regions - 1;
  for (std::size_t i = 0; i < spec.dims.h; ++i) {
    for (std::size_t j = 0; j < spec.dims.w; ++j) {
      for (std::size_t k = 0; k < spec.dims.l; ++k) {
        if (on_boundary(spec.dims, i, j, k)) continue;
        const int r = region_at(g, i + 0.5, j + 0.5, k + 0.5);
        seg.at(i, j, k) = static_cast<std::uint16_t>(std::min(r, top));
      }
    }
  }
  return seg;
}

// Partial-volume rendering: each voxel averages 2x2x2 sub-samples, then
// receives additive Gaussian noise and is clamped to [0, 1].
Volume intensities_from(const GeneratorSpec& spec, const Geometry& g, const Anatomy& a,
                        bool texture_cue, std::uint64_t noise_seed) {
  Volume vol(spec.dims, 0.0f);
  Rng noise(noise_seed);
  constexpr std::array<double, 2> kOffsets{0.25, 0.75};
  for (std::size_t i = 0; i < spec.dims.h; ++i) {
    for (std::size_t j = 0; j < spec.dims.w; ++j) {
      for (std::size_t k = 0; k < spec.dims.l; ++k) {
        double acc = 0.0;
        for (double oi : kOffsets) {
          for (double oj : kOffsets) {
            for (double ok : kOffsets) {
              const int r = region_at(g, i + oi, j + oj, k + ok);
              double v = base_intensity(r);
              if (r != kBackground) v += a.intensity_offset;
              if (texture_cue && r == kWhiteMatter) v += kTextureOffset;
              acc += v;
            }
          }
        }
        const double n = noise.normal(0.0, spec.noise_std);
        const double v = on_boundary(spec.dims, i, j, k) ? n : acc / 8.0 + n;
        vol.at(i, j, k) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return vol;
}

Anatomy draw_anatomy(Rng& rng) {
  Anatomy a;
  for (double& c : a.center_offset) c = rng.uniform(-1.0, 1.0);
  for (double& s : a.radius_scale) s = rng.uniform(0.97, 1.03);
  a.intensity_offset = rng.uniform(-0.02, 0.02);
  return a;
}

}  // namespace

std::size_t count_label(const SegVolume& seg, std::uint16_t label) {
  return static_cast<std::size_t>(std::count(seg.values.begin(), seg.values.end(), label));
}

SegVolume render_labels(const GeneratorSpec& spec, const Anatomy& anatomy, double ventricle_delta,
                        double cortex_delta) {
  spec.validate();
  return labels_from(spec, make_geometry(spec, anatomy, ventricle_delta, cortex_delta));
}

int single_timepoint_label(GenMode mode, const SubjectLatent& latent) {
  if (mode == GenMode::kDisentangled) return latent.cue_geom && latent.cue_tex ? 1 : 0;
  return latent.delta > kAdThreshold ? 1 : 0;
}

SubjectLatent draw_subject_latent(const GeneratorSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  SubjectLatent s;
  // Every draw happens in both modes so the streams stay aligned.
  s.cue_geom = rng.coin();
  s.cue_tex = rng.coin();
  const bool ad = rng.coin();
  const double u = rng.uniform();
  s.anatomy = draw_anatomy(rng);
  s.noise_seed = num::mix_seed(seed, 0xA5A5);
  if (spec.mode == GenMode::kDisentangled) {
    s.delta = s.cue_geom && s.cue_tex ? 1.0 : 0.0;
  } else {
    // Binary task: severities are drawn away from the MCI band.
    s.delta = ad ? kAdThreshold + (1.0 - kAdThreshold) * (1.0 - u) : kMciThreshold * u;
  }
  return s;
}

Subject render_subject(const GeneratorSpec& spec, const SubjectLatent& latent) {
  spec.validate();
  Subject s;
  s.delta = latent.delta;
  s.cue_geom = latent.cue_geom;
  s.cue_tex = latent.cue_tex;
  if (spec.mode == GenMode::kDisentangled) {
    const Geometry healthy = make_geometry(spec, latent.anatomy, 0.0, 0.0);
    s.volume = intensities_from(spec, healthy, latent.anatomy, latent.cue_tex, latent.noise_seed);
    const Geometry geom_cue =
        make_geometry(spec, latent.anatomy, latent.cue_geom ? 1.0 : 0.0, 0.0);
    s.seg = labels_from(spec, geom_cue);
    s.diagnosis = single_timepoint_label(spec.mode, latent) ? Diagnosis::kAD : Diagnosis::kNC;
  } else {
    const Geometry g = make_geometry(spec, latent.anatomy, latent.delta, latent.delta);
    s.volume = intensities_from(spec, g, latent.anatomy, false, latent.noise_seed);
    s.seg = labels_from(spec, g);
    s.diagnosis = diagnose(latent.delta);
  }
  return s;
}

Subject generate_subject(const GeneratorSpec& spec, std::uint64_t subject_seed) {
  return render_subject(spec, draw_subject_latent(spec, subject_seed));
}

double trajectory_delta(double delta0, double rate, int t) {
  return std::clamp(delta0 + rate * (t - 1), 0.0, 1.0);
}

std::optional<RiskLabel> risk_label(Diagnosis last, Diagnosis next) {
  if (last == Diagnosis::kAD) return std::nullopt;
  return next > last ? RiskLabel::kAtRisk : RiskLabel::kSafe;
}

TrajectoryLatent draw_trajectory(const GeneratorSpec& spec, std::uint64_t seed, int T) {
  if (T < 2) throw InvalidInput("longitudinal records need T >= 2");
  Rng rng(seed);
  const auto& d = spec.trajectory;
  TrajectoryLatent t;
  t.delta0 = rng.uniform(d.delta0_min, d.delta0_max);
  const bool stable = rng.coin(d.stable_fraction);
  const double u = rng.uniform();
  t.rate = stable ? d.stable_min + (d.stable_max - d.stable_min) * u
                  : d.progressor_min + (d.progressor_max - d.progressor_min) * u;
  t.anatomy = draw_anatomy(rng);
  t.noise_seed = num::mix_seed(seed, 0x5A5A);
  double months = 0.0;
  t.months.push_back(months);
  for (int s = 1; s <= T; ++s) {
    months += rng.uniform(spec.horizon_months - 1.0, spec.horizon_months + 1.0);
    t.months.push_back(months);
  }
  return t;
}

std::optional<RiskLabel> trajectory_risk(const TrajectoryLatent& latent, int T) {
  const Diagnosis last = diagnose(trajectory_delta(latent.delta0, latent.rate, T));
  const Diagnosis next = diagnose(trajectory_delta(latent.delta0, latent.rate, T + 1));
  return risk_label(last, next);
}

LongitudinalRecord render_longitudinal(const GeneratorSpec& spec, const TrajectoryLatent& latent,
                                       int T) {
  spec.validate();
  if (T < 2 || latent.months.size() < static_cast<std::size_t>(T) + 1) {
    throw InvalidInput("trajectory does not cover T + 1 visits");
  }
  const auto risk = trajectory_risk(latent, T);
  if (!risk) throw InvalidInput("subject is AD at the last observed scan");
  LongitudinalRecord rec;
  rec.delta0 = latent.delta0;
  rec.rate = latent.rate;
  rec.risk_label = *risk;
  rec.future_diagnosis = diagnose(trajectory_delta(latent.delta0, latent.rate, T + 1));
  for (int t = 1; t <= T; ++t) {
    Scan scan;
    scan.delta = trajectory_delta(latent.delta0, latent.rate, t);
    scan.diagnosis = diagnose(scan.delta);
    scan.months = latent.months[static_cast<std::size_t>(t - 1)];
    const Geometry g = make_geometry(spec, latent.anatomy, scan.delta, scan.delta);
    scan.volume = intensities_from(spec, g, latent.anatomy, false,
                                   num::mix_seed(latent.noise_seed, static_cast<std::uint64_t>(t)));
    scan.seg = labels_from(spec, g);
    rec.scans.push_back(std::move(scan));
  }
  return rec;
}

LongitudinalRecord generate_longitudinal(const GeneratorSpec& spec, std::uint64_t seed, int T) {
  return render_longitudinal(spec, draw_trajectory(spec, seed, T), T);
}

std::string subject_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sub%06zu", index);
  return buf;
}

std::uint64_t subject_seed(std::uint64_t master_seed, std::size_t index) {
  return num::mix_seed(master_seed, static_cast<std::uint64_t>(index));
}

std::vector<CohortEntry> plan_cohort(const GeneratorSpec& spec, bool longitudinal) {
  spec.validate();
  const bool stratify_cues = !longitudinal && spec.mode == GenMode::kDisentangled;
  std::vector<CohortEntry> out;
  std::size_t candidate = 0;
  const std::size_t max_candidates = 1000 * spec.splits.total() + 1000;
  for (Split split : {Split::kTrain, Split::kVal, Split::kTest}) {
    const std::size_t n = spec.splits.of(split);
    // Quotas per stratum: two classes, or four cue cells.
    std::vector<std::size_t> quota;
    if (stratify_cues) {
      for (std::size_t c = 0; c < 4; ++c) quota.push_back(n / 4 + (c < n % 4 ? 1 : 0));
    } else {
      const auto pos = static_cast<std::size_t>(std::llround(spec.class_balance * n));
      quota = {n - pos, pos};
    }
    std::size_t accepted = 0;
    while (accepted < n) {
      if (candidate >= max_candidates) throw InvalidInput("cannot fill cohort quotas");
      const std::uint64_t seed = subject_seed(spec.seed, candidate);
      int label = 0;
      std::size_t stratum = 0;
      if (longitudinal) {
        const auto risk = trajectory_risk(draw_trajectory(spec, seed, spec.timepoints),
                                          spec.timepoints);
        if (!risk) {
          ++candidate;
          continue;
        }
        label = *risk == RiskLabel::kAtRisk ? 1 : 0;
        stratum = static_cast<std::size_t>(label);
      } else {
        const SubjectLatent lat = draw_subject_latent(spec, seed);
        label = single_timepoint_label(spec.mode, lat);
        stratum = stratify_cues ? (lat.cue_geom ? 2u : 0u) + (lat.cue_tex ? 1u : 0u)
                                : static_cast<std::size_t>(label);
      }
      if (quota[stratum] > 0) {
        --quota[stratum];
        out.push_back(CohortEntry{candidate, seed, split, label});
        ++accepted;
      }
      ++candidate;
    }
  }
  return out;
}

}  // namespace dsvit::synth
